"""Automaton data model: parsing, simulation, minimization, intersection.

States are dense 0-based integers.  Words are tuples of symbol indices into
an Alphabet.  All types are immutable after construction and every operation
here is a pure function, so values can be shared freely across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import AutomatonParseError

Word = tuple[int, ...]

EPSILON: Word = ()


@dataclass(frozen=True)
class Alphabet:
    """Ordered list of distinct, nonempty symbol names without whitespace."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet must be nonempty")
        seen = set()
        for s in self.symbols:
            if not s or any(c.isspace() for c in s):
                raise ValueError(f"bad symbol name {s!r}")
            if s in seen:
                raise ValueError(f"duplicate symbol {s!r}")
            seen.add(s)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise KeyError(f"symbol {name!r} not in alphabet") from None

    def word(self, names: Iterable[str]) -> Word:
        """Build a word from symbol names (an iterable, or a string of 1-char symbols)."""
        return tuple(self.index(n) for n in names)

    def render(self, w: Word) -> str:
        names = [self.symbols[i] for i in w]
        if all(len(n) == 1 for n in self.symbols):
            return "".join(names)
        return " ".join(names)


@dataclass(frozen=True)
class Dfa:
    """Complete DFA: delta is a total (state, symbol) -> state table."""

    state_count: int
    alphabet: Alphabet
    delta: tuple[tuple[int, ...], ...]  # delta[q][c]
    initial: int
    finals: frozenset[int]

    def __post_init__(self):
        n, k = self.state_count, len(self.alphabet)
        if n <= 0:
            raise ValueError("DFA needs at least one state")
        if len(self.delta) != n or any(len(row) != k for row in self.delta):
            raise ValueError("delta table shape mismatch")
        if any(not (0 <= t < n) for row in self.delta for t in row):
            raise ValueError("transition target out of range")
        if not (0 <= self.initial < n):
            raise ValueError("initial state out of range")
        if any(not (0 <= f < n) for f in self.finals):
            raise ValueError("final state out of range")


@dataclass(frozen=True)
class Nfa:
    """One-way NFA; delta[q][c] is a frozenset of successor states."""

    state_count: int
    alphabet: Alphabet
    delta: tuple[tuple[frozenset[int], ...], ...]
    initials: frozenset[int]
    finals: frozenset[int]

    def __post_init__(self):
        n = self.state_count
        if not self.initials:
            raise ValueError("NFA needs at least one initial state")
        refs = set(self.initials) | set(self.finals)
        for row in self.delta:
            for cell in row:
                refs |= cell
        if any(not (0 <= q < n) for q in refs):
            raise ValueError("state reference out of range")


# Head directions for two-way automata.
LEFT, STAY, RIGHT = -1, 0, 1
DIRECTIONS = (LEFT, STAY, RIGHT)


@dataclass(frozen=True)
class TwoNfa:
    """Two-way NFA; delta[q][c] is a frozenset of (state, direction) moves."""

    state_count: int
    alphabet: Alphabet
    delta: tuple[tuple[frozenset[tuple[int, int]], ...], ...]
    initials: frozenset[int]
    finals: frozenset[int]

    def __post_init__(self):
        n = self.state_count
        if not self.initials:
            raise ValueError("2NFA needs at least one initial state")
        refs = set(self.initials) | set(self.finals)
        for row in self.delta:
            for cell in row:
                for q, d in cell:
                    refs.add(q)
                    if d not in DIRECTIONS:
                        raise ValueError(f"direction {d} not in {{-1,0,1}}")
        if any(not (0 <= q < n) for q in refs):
            raise ValueError("state reference out of range")


Automaton = Union[Dfa, Nfa, TwoNfa]


@dataclass(frozen=True)
class StatePartition:
    """Partition of the reachable states into language-equivalence blocks.

    Blocks are numbered densely from 0, ordered by smallest member state.
    """

    block_of: dict[int, int] = field(hash=False)
    blocks: tuple[tuple[int, ...], ...] = ()


# ---------------------------------------------------------------------------
# Text format


def parse_automaton(text: str, allow_partial_dfa: bool = False) -> Automaton:
    """Parse the line-oriented automaton format.

    Lines: `type:`, `states:`, `alphabet:`, `initial:`, `final:`, then one
    `trans:` line per edge.  '#' starts a comment.  DFA transition tables
    must be total unless allow_partial_dfa is set, in which case a fresh
    non-accepting trash state absorbs the missing transitions.
    """
    kind = None
    n = None
    alphabet = None
    initials: list[int] = []
    finals: list[int] = []
    edges: list[tuple[int, int, int, int, Optional[int]]] = []  # line, src, sym, dst, dir
    seen_keys: set[str] = set()

    def fail(line_no: int, msg: str):
        raise AutomatonParseError(line_no, msg)

    def parse_state(line_no: int, tok: str) -> int:
        try:
            q = int(tok)
        except ValueError:
            fail(line_no, f"expected a state number, got {tok!r}")
        if n is None:
            fail(line_no, "state reference before 'states:' line")
        if not (0 <= q < n):
            fail(line_no, f"state {q} out of range 0..{n - 1}")
        return q

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            fail(line_no, f"expected 'key: value', got {line!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        toks = rest.split()
        if key in ("type", "states", "alphabet", "initial", "final"):
            if key in seen_keys:
                fail(line_no, f"duplicate '{key}:' line")
            seen_keys.add(key)
        if key == "type":
            if toks != ["dfa"] and toks != ["nfa"] and toks != ["2nfa"]:
                fail(line_no, f"type must be dfa, nfa or 2nfa, got {rest.strip()!r}")
            kind = toks[0]
        elif key == "states":
            if len(toks) != 1 or not toks[0].isdigit() or int(toks[0]) <= 0:
                fail(line_no, "states: expects one positive integer")
            n = int(toks[0])
        elif key == "alphabet":
            if not toks:
                fail(line_no, "alphabet: expects at least one symbol")
            try:
                alphabet = Alphabet(tuple(toks))
            except ValueError as e:
                fail(line_no, str(e))
        elif key == "initial":
            if not toks:
                fail(line_no, "initial: expects at least one state")
            initials = [parse_state(line_no, t) for t in toks]
        elif key == "final":
            finals = [parse_state(line_no, t) for t in toks]
        elif key == "trans":
            if kind is None:
                fail(line_no, "trans before 'type:' line")
            if alphabet is None:
                fail(line_no, "trans before 'alphabet:' line")
            want = 4 if kind == "2nfa" else 3
            if len(toks) != want:
                fail(line_no, f"trans: expects {want} fields for a {kind}")
            src = parse_state(line_no, toks[0])
            try:
                sym = alphabet.index(toks[1])
            except KeyError:
                fail(line_no, f"unknown symbol {toks[1]!r}")
            dst = parse_state(line_no, toks[2])
            d = None
            if kind == "2nfa":
                try:
                    d = int(toks[3])
                except ValueError:
                    fail(line_no, f"direction must be -1, 0 or 1, got {toks[3]!r}")
                if d not in DIRECTIONS:
                    fail(line_no, f"direction must be -1, 0 or 1, got {toks[3]!r}")
            edges.append((line_no, src, sym, dst, d))
        else:
            fail(line_no, f"unknown key {key!r}")

    if kind is None:
        fail(1, "missing 'type:' line")
    if n is None:
        fail(1, "missing 'states:' line")
    if alphabet is None:
        fail(1, "missing 'alphabet:' line")
    if not initials:
        fail(1, "missing 'initial:' line")
    k = len(alphabet)

    if kind == "dfa":
        if len(initials) != 1:
            fail(1, "a dfa has exactly one initial state")
        table: list[list[Optional[int]]] = [[None] * k for _ in range(n)]
        for line_no, src, sym, dst, _ in edges:
            if table[src][sym] is not None:
                fail(line_no, f"duplicate transition for state {src} on "
                              f"{alphabet.symbols[sym]!r}")
            table[src][sym] = dst
        missing = [(q, c) for q in range(n) for c in range(k) if table[q][c] is None]
        if missing and not allow_partial_dfa:
            q, c = missing[0]
            raise AutomatonParseError(
                0, f"dfa is partial: no transition for state {q} on "
                   f"symbol {alphabet.symbols[c]!r}")
        if missing:
            trash = n
            n += 1
            table.append([trash] * k)
            for q, c in missing:
                table[q][c] = trash
        return Dfa(n, alphabet, tuple(tuple(row) for row in table),
                   initials[0], frozenset(finals))

    if kind == "nfa":
        ntable: list[list[set[int]]] = [[set() for _ in range(k)] for _ in range(n)]
        for _, src, sym, dst, _ in edges:
            ntable[src][sym].add(dst)
        return Nfa(n, alphabet,
                   tuple(tuple(frozenset(cell) for cell in row) for row in ntable),
                   frozenset(initials), frozenset(finals))

    ttable: list[list[set[tuple[int, int]]]] = [[set() for _ in range(k)] for _ in range(n)]
    for _, src, sym, dst, d in edges:
        ttable[src][sym].add((dst, d))
    return TwoNfa(n, alphabet,
                  tuple(tuple(frozenset(cell) for cell in row) for row in ttable),
                  frozenset(initials), frozenset(finals))


def serialize_automaton(a: Automaton) -> str:
    """Emit an automaton in the text format (round-trips through parse_automaton)."""
    lines = []
    if isinstance(a, Dfa):
        lines.append("type: dfa")
        inits = [a.initial]
    elif isinstance(a, Nfa):
        lines.append("type: nfa")
        inits = sorted(a.initials)
    else:
        lines.append("type: 2nfa")
        inits = sorted(a.initials)
    lines.append(f"states: {a.state_count}")
    lines.append("alphabet: " + " ".join(a.alphabet.symbols))
    lines.append("initial: " + " ".join(str(q) for q in inits))
    lines.append("final: " + " ".join(str(q) for q in sorted(a.finals)))
    for q in range(a.state_count):
        for c, name in enumerate(a.alphabet.symbols):
            cell = a.delta[q][c]
            if isinstance(a, Dfa):
                lines.append(f"trans: {q} {name} {cell}")
            elif isinstance(a, Nfa):
                for dst in sorted(cell):
                    lines.append(f"trans: {q} {name} {dst}")
            else:
                for dst, d in sorted(cell):
                    lines.append(f"trans: {q} {name} {dst} {d}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Simulation


def run_dfa(a: Dfa, w: Word) -> bool:
    q = a.initial
    for c in w:
        q = a.delta[q][c]
    return q in a.finals


def run_nfa(a: Nfa, w: Word) -> bool:
    cur = set(a.initials)
    for c in w:
        cur = {t for q in cur for t in a.delta[q][c]}
        if not cur:
            return False
    return bool(cur & a.finals)


def run_two_nfa(a: TwoNfa, w: Word) -> bool:
    """Accept iff some run reaches position len(w) (one past the last letter)
    in a final state.  Moves exist only while the head is on a letter; a move
    to position -1 is a dead end and is not generated."""
    m = len(w)
    accept_pos = m
    start = {(q, 0) for q in a.initials}
    if any(q in a.finals and 0 == accept_pos for q, _ in start):
        return True
    seen = set(start)
    todo = deque(start)
    while todo:
        q, i = todo.popleft()
        if i < 0 or i >= m:
            continue
        for q2, d in a.delta[q][w[i]]:
            i2 = i + d
            if i2 < 0:
                continue
            cfg = (q2, i2)
            if cfg in seen:
                continue
            if i2 == accept_pos and q2 in a.finals:
                return True
            seen.add(cfg)
            todo.append(cfg)
    return False


# ---------------------------------------------------------------------------
# Reachability, equivalence, minimization


def reachable_states(a: Dfa) -> frozenset[int]:
    seen = {a.initial}
    todo = [a.initial]
    while todo:
        q = todo.pop()
        for t in a.delta[q]:
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def state_equivalence(a: Dfa) -> StatePartition:
    """Moore refinement from the finals/non-finals split down to a fixpoint."""
    reach = sorted(reachable_states(a))
    k = len(a.alphabet)
    block = {q: (1 if q in a.finals else 0) for q in reach}
    while True:
        sig = {q: (block[q],) + tuple(block[a.delta[q][c]] for c in range(k))
               for q in reach}
        renum: dict[tuple, int] = {}
        new_block = {}
        for q in reach:
            new_block[q] = renum.setdefault(sig[q], len(renum))
        if len(renum) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    # renumber blocks by smallest member for deterministic output
    first: dict[int, int] = {}
    for q in reach:
        first.setdefault(block[q], q)
    order = sorted(first, key=first.get)
    remap = {b: i for i, b in enumerate(order)}
    block_of = {q: remap[block[q]] for q in reach}
    groups: dict[int, list[int]] = {}
    for q in reach:
        groups.setdefault(block_of[q], []).append(q)
    blocks = tuple(tuple(sorted(groups[i])) for i in range(len(groups)))
    return StatePartition(block_of=block_of, blocks=blocks)


def minimize(a: Dfa) -> Dfa:
    """Quotient of the reachable part by language equivalence."""
    part = state_equivalence(a)
    k = len(a.alphabet)
    reps = [blk[0] for blk in part.blocks]
    delta = tuple(tuple(part.block_of[a.delta[r][c]] for c in range(k)) for r in reps)
    finals = frozenset(part.block_of[q] for q in part.block_of if q in a.finals)
    return Dfa(len(reps), a.alphabet, delta, part.block_of[a.initial], finals)


def is_isomorphic(a: Dfa, b: Dfa) -> bool:
    """Isomorphism of complete DFAs on their reachable parts (same alphabet)."""
    if a.alphabet != b.alphabet:
        return False
    k = len(a.alphabet)
    mapping = {a.initial: b.initial}
    todo = [a.initial]
    while todo:
        q = todo.pop()
        for c in range(k):
            t, u = a.delta[q][c], b.delta[mapping[q]][c]
            if t in mapping:
                if mapping[t] != u:
                    return False
            else:
                mapping[t] = u
                todo.append(t)
    if len(set(mapping.values())) != len(mapping):
        return False
    return all((q in a.finals) == (r in b.finals) for q, r in mapping.items())


# ---------------------------------------------------------------------------
# Language operations


def intersect_nonempty(automata: list[Dfa]) -> Optional[Word]:
    """Shortest word accepted by every DFA, or None.

    Lazy BFS over the product state space; letters are tried in alphabet
    order, so the result is the lexicographically smallest shortest word.
    """
    if not automata:
        raise ValueError("need at least one automaton")
    alphabet = automata[0].alphabet
    if any(x.alphabet != alphabet for x in automata):
        raise ValueError("automata must share one alphabet")
    k = len(alphabet)
    start = tuple(x.initial for x in automata)

    def accepting(qs: tuple[int, ...]) -> bool:
        return all(q in x.finals for q, x in zip(qs, automata))

    if accepting(start):
        return EPSILON
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], int]] = {start: None}
    todo = deque([start])
    while todo:
        qs = todo.popleft()
        for c in range(k):
            nxt = tuple(x.delta[q][c] for q, x in zip(qs, automata))
            if nxt in parent:
                continue
            parent[nxt] = (qs, c)
            if accepting(nxt):
                out = []
                cur = nxt
                while parent[cur] is not None:
                    cur, sym = parent[cur]
                    out.append(sym)
                return tuple(reversed(out))
            todo.append(nxt)
    return None


def complete(a: Dfa) -> Dfa:
    """Already-total DFAs are returned unchanged (parser enforces totality)."""
    return a


def add_trash_state(state_count: int, alphabet: Alphabet,
                    edges: dict[tuple[int, int], int],
                    initial: int, finals: Iterable[int]) -> Dfa:
    """Build a total DFA from partial edges by adding a fresh absorbing
    non-accepting trash state for every missing transition."""
    k = len(alphabet)
    n = state_count
    trash = n
    table = [[trash] * k for _ in range(n + 1)]
    for (q, c), t in edges.items():
        table[q][c] = t
    used_trash = any(table[q][c] == trash for q in range(n) for c in range(k))
    if not used_trash:
        table = table[:n]
        return Dfa(n, alphabet, tuple(tuple(r) for r in table), initial, frozenset(finals))
    return Dfa(n + 1, alphabet, tuple(tuple(r) for r in table), initial, frozenset(finals))


def determinize_nfa(a: Nfa) -> Dfa:
    """Classical subset construction (used internally for NFA inputs)."""
    k = len(a.alphabet)
    start = frozenset(a.initials)
    index = {start: 0}
    order = [start]
    table: list[tuple[int, ...]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for c in range(k):
            nxt = frozenset(t for q in cur for t in a.delta[q][c])
            j = index.get(nxt)
            if j is None:
                j = len(order)
                index[nxt] = j
                order.append(nxt)
            row.append(j)
        table.append(tuple(row))
        i += 1
    finals = frozenset(i for i, s in enumerate(order) if s & a.finals)
    return Dfa(len(order), a.alphabet, tuple(table), 0, finals)


def words_up_to(alphabet: Alphabet, max_len: int) -> Iterable[Word]:
    """All words over the alphabet of length 0..max_len, shortest first."""
    k = len(alphabet)
    level: list[Word] = [EPSILON]
    yield EPSILON
    for _ in range(max_len):
        nxt = []
        for w in level:
            for c in range(k):
                w2 = w + (c,)
                nxt.append(w2)
                yield w2
        level = nxt
