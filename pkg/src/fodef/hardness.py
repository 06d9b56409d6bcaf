"""Hardness-instance generator: checker DFAs for a space-bounded Turing
machine, the three cycle gadgets, and the substitution construction.

A configuration of the machine on an N-cell tape is the N-long word of tape
symbols with the active cell's symbol y replaced by the pair (q,y).  An
accepting computation is encoded as  sharp c_1 sharp c_2 ... sharp c_k flat.
The transition function is treated as a partial window function: the new
value of a cell is determined by the previous values of the cell and its two
neighbors, with the separator playing the missing-neighbor role at the tape
ends.  A window is undefined when it sees a halting head or more than one
head; a checker meeting an undefined window accepts only if the word ends
with this configuration.

Checkers are built as partial automata over named states, pruned to their
useful part, and completed with a trash state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Literal, Optional

from .automata import Alphabet, Dfa, add_trash_state, minimize
from .errors import AutomatonParseError
from .monoids import (Perm, PermGroup, _greedy_generators, compose_images,
                      element_order, group_closure, invert_perm, is_solvable,
                      kaplan_levy_witness, _is_prime)

RESERVED_SYMBOLS = ("sharp", "flat", "a1", "a2", "nat")
_BAD_NAME_CHARS = set("(),")

Move = int  # -1, 0, 1


@dataclass(frozen=True)
class TuringMachine:
    """Deterministic machine normalized for the encoding: it erases the tape
    and parks the head on the left-most cell before accepting, and runs
    forever on rejected inputs.  The normalization is the user's obligation
    and is validated only syntactically."""

    states: tuple[str, ...]
    tape: tuple[str, ...]
    blank: str
    initial: str
    accepting: str
    rules: dict[tuple[str, str], tuple[str, str, Move]]

    def __post_init__(self):
        names = list(self.states) + list(self.tape)
        for name in names:
            if not name or any(c.isspace() or c in _BAD_NAME_CHARS for c in name):
                raise ValueError(f"bad name {name!r}")
        for sym in self.tape:
            if sym in RESERVED_SYMBOLS:
                raise ValueError(f"tape symbol {sym!r} is reserved")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state names")
        if len(set(self.tape)) != len(self.tape):
            raise ValueError("duplicate tape symbols")
        if self.blank not in self.tape:
            raise ValueError("blank must be a tape symbol")
        if self.initial not in self.states or self.accepting not in self.states:
            raise ValueError("initial/accepting state unknown")
        if self.initial == self.accepting:
            raise ValueError("the machine must take at least one step")
        for (q, y), (q2, y2, d) in self.rules.items():
            if q == self.accepting:
                raise ValueError("no rules may leave the accepting state")
            if (q not in self.states or q2 not in self.states
                    or y not in self.tape or y2 not in self.tape):
                raise ValueError(f"rule ({q},{y}) references unknown names")
            if d not in (-1, 0, 1):
                raise ValueError("rule move must be -1, 0 or 1")


def parse_tm(text: str) -> TuringMachine:
    """Parse the machine text format (states:, tape:, blank:, initial:,
    accept:, then rule: lines `state read state' write move`)."""
    fields: dict[str, list[str]] = {}
    rules: dict[tuple[str, str], tuple[str, str, Move]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise AutomatonParseError(line_no, f"expected 'key: value', got {line!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        toks = rest.split()
        if key == "rule":
            if len(toks) != 5:
                raise AutomatonParseError(
                    line_no, "rule: expects `state read state' write move`")
            q, y, q2, y2, mv = toks
            try:
                d = int(mv)
            except ValueError:
                raise AutomatonParseError(line_no, f"bad move {mv!r}") from None
            if (q, y) in rules:
                raise AutomatonParseError(line_no, f"duplicate rule for ({q}, {y})")
            rules[(q, y)] = (q2, y2, d)
        elif key in ("states", "tape", "blank", "initial", "accept"):
            if key in fields:
                raise AutomatonParseError(line_no, f"duplicate '{key}:' line")
            fields[key] = toks
        else:
            raise AutomatonParseError(line_no, f"unknown key {key!r}")
    for key in ("states", "tape", "blank", "initial", "accept"):
        if key not in fields:
            raise AutomatonParseError(1, f"missing '{key}:' line")
        if key in ("blank", "initial", "accept") and len(fields[key]) != 1:
            raise AutomatonParseError(1, f"'{key}:' expects exactly one name")
    try:
        return TuringMachine(tuple(fields["states"]), tuple(fields["tape"]),
                             fields["blank"][0], fields["initial"][0],
                             fields["accept"][0], rules)
    except ValueError as e:
        raise AutomatonParseError(1, str(e)) from None


@dataclass(frozen=True)
class ConfigAlphabet:
    """Encoding alphabet: tape symbols, head pairs, separators; the extended
    alphabet adds the two bridge symbols and the gadget loop symbol."""

    tm: TuringMachine
    sigma: Alphabet
    sigma_plus: Alphabet

    @staticmethod
    def pair(q: str, y: str) -> str:
        return f"({q},{y})"

    @property
    def tape_and_pairs(self) -> tuple[str, ...]:
        cut = len(self.sigma.symbols) - 2
        return self.sigma.symbols[:cut]


def config_alphabet(tm: TuringMachine) -> ConfigAlphabet:
    syms = list(tm.tape)
    for q in tm.states:
        for y in tm.tape:
            syms.append(ConfigAlphabet.pair(q, y))
    syms += ["sharp", "flat"]
    plus = syms + ["a1", "a2", "nat"]
    return ConfigAlphabet(tm, Alphabet(tuple(syms)), Alphabet(tuple(plus)))


def _window(tm: TuringMachine, u: str, v: str, w: str) -> Optional[str]:
    """New value of the middle cell given the previous (left, cell, right)
    symbols, or None when no successor configuration exists."""

    def split(sym: str) -> Optional[tuple[str, str]]:
        if sym.startswith("(") and sym.endswith(")"):
            q, _, y = sym[1:-1].partition(",")
            return q, y
        return None

    pu, pv, pw = split(u), split(v), split(w)
    if sum(x is not None for x in (pu, pv, pw)) > 1:
        return None  # more than one head cannot arise in a real configuration
    if pv is not None:
        rule = tm.rules.get(pv)
        if rule is None:
            return None
        q2, y2, d = rule
        return ConfigAlphabet.pair(q2, y2) if d == 0 else y2
    if pu is not None:
        rule = tm.rules.get(pu)
        if rule is None:
            return None
        q2, _, d = rule
        return ConfigAlphabet.pair(q2, v) if d == 1 else v
    if pw is not None:
        rule = tm.rules.get(pw)
        if rule is None:
            return None
        q2, _, d = rule
        return ConfigAlphabet.pair(q2, v) if d == -1 else v
    return v


def find_prime(n: int) -> int:
    """Smallest prime p with p >= n+2, p > 5 and p not congruent to +-1
    mod 10, by trial division."""
    p = max(n + 2, 6)
    while not (_is_prime(p) and p > 5 and p % 10 not in (1, 9)):
        p += 1
    return p


def _valid_gadget_prime(p: int) -> bool:
    return _is_prime(p) and p > 5 and p % 10 not in (1, 9)


# ---------------------------------------------------------------------------
# Checker DFAs


def _build_named(alphabet: Alphabet, edges: dict[tuple[str, str], str],
                 initial: str, finals: set[str]) -> Dfa:
    """Prune a named partial automaton to its useful part (reachable and
    co-reachable states) and complete it with a trash state."""
    fwd: dict[str, list[tuple[str, str]]] = {}
    back: dict[str, set[str]] = {}
    for (src, sym), dst in edges.items():
        fwd.setdefault(src, []).append((sym, dst))
        back.setdefault(dst, set()).add(src)
    reach = {initial}
    todo = deque([initial])
    while todo:
        q = todo.popleft()
        for _, dst in fwd.get(q, ()):
            if dst not in reach:
                reach.add(dst)
                todo.append(dst)
    cousers = set(finals) & reach
    todo = deque(cousers)
    while todo:
        q = todo.popleft()
        for src in back.get(q, ()):
            if src in reach and src not in cousers:
                cousers.add(src)
                todo.append(src)
    if initial not in cousers:
        raise ValueError("checker accepts nothing")
    index = {initial: 0}
    order = [initial]
    todo = deque([initial])
    sym_index = {s: i for i, s in enumerate(alphabet.symbols)}
    while todo:
        q = todo.popleft()
        for sym, dst in sorted(fwd.get(q, ()), key=lambda e: sym_index[e[0]]):
            if dst in cousers and dst not in index:
                index[dst] = len(order)
                order.append(dst)
                todo.append(dst)
    numbered = {}
    for (src, sym), dst in edges.items():
        if src in index and dst in index:
            numbered[(index[src], sym_index[sym])] = index[dst]
    total = add_trash_state(len(order), alphabet, numbered, 0,
                            {index[f] for f in finals if f in index})
    # The named state tables over-distinguish window pairs whose futures
    # coincide (degenerate machines make many of them interchangeable), so
    # reduce to the canonical minimal automaton.
    return minimize(total)


def _start_checker(ca: ConfigAlphabet, tm: TuringMachine, x: list[str],
                   big_n: int) -> Dfa:
    """Checks that the word starts with the initial configuration on x and
    ends with the accepting configuration."""
    init_cfg = ([ConfigAlphabet.pair(tm.initial, x[0] if x else tm.blank)]
                + list(x[1:]) + [tm.blank] * (big_n - max(len(x), 1)))
    acc_cfg = [ConfigAlphabet.pair(tm.accepting, tm.blank)] + [tm.blank] * (big_n - 1)
    tape_and_pairs = ca.tape_and_pairs
    e: dict[tuple[str, str], str] = {}
    e[("t", "sharp")] = "q0"
    for j in range(big_n):
        e[(f"q{j}", init_cfg[j])] = f"q{j + 1}"
    e[(f"q{big_n}", "sharp")] = "pp0"
    for y in tape_and_pairs:
        e[("p", y)] = "p"
    e[("p", "sharp")] = "pp0"
    for j in range(big_n):
        for y in tape_and_pairs:
            e[(f"pp{j}", y)] = f"pp{j + 1}" if y == acc_cfg[j] else "p"
        e[(f"pp{j}", "sharp")] = "pp0"
    for y in tape_and_pairs:
        e[(f"pp{big_n}", y)] = "p"
    e[(f"pp{big_n}", "sharp")] = "pp0"
    e[(f"pp{big_n}", "flat")] = "f"
    return _build_named(ca.sigma, e, "t", {"f"})


def _update_checker(ca: ConfigAlphabet, tm: TuringMachine, i: int,
                    big_n: int) -> Dfa:
    """Checks that cell i changes according to the window function between
    every pair of consecutive configurations.  Cell 1's left neighbor and
    cell N's right neighbor are the separator."""
    tape_and_pairs = ca.tape_and_pairs
    e: dict[tuple[str, str], str] = {}
    zs: set[str] = set()

    def ensure_skip_track(z: str):
        """Track that skips the rest of a configuration while remembering the
        predicted next value z of cell i, then checks it in the next one."""
        if z in zs:
            return
        zs.add(z)
        sep = big_n - i - 1
        for j in range(big_n - 1):
            if j == sep:
                e[(f"s{j}:{z}", "flat")] = "f"
                if i == 1:
                    e[(f"s{j}:{z}", "sharp")] = f"p:sharp:{z}"
                else:
                    e[(f"s{j}:{z}", "sharp")] = f"s{j + 1}:{z}"
            elif j == big_n - 2 and i >= 2:
                for y in tape_and_pairs:
                    e[(f"s{j}:{z}", y)] = f"p:{y}:{z}"
            else:
                for y in tape_and_pairs:
                    e[(f"s{j}:{z}", y)] = f"s{j + 1}:{z}"
        for u in (["sharp"] if i == 1 else tape_and_pairs):
            e[(f"p:{u}:{z}", z)] = f"r:{u}:{z}"
            ensure_window_state(u, z)

    def ensure_window_state(u: str, v: str):
        """State r:{u}:{v}: the window's first two symbols are known; the
        third decides the prediction or ends the word."""
        if i == big_n:
            e[(f"r:{u}:{v}", "flat")] = "f"
            z = _window(tm, u, v, "sharp")
            if z is not None:
                e[(f"r:{u}:{v}", "sharp")] = f"s0:{z}"
                ensure_skip_track(z)
        else:
            for w in tape_and_pairs:
                z = _window(tm, u, v, w)
                if z is None:
                    e[(f"r:{u}:{v}", w)] = f"d{i + 2}"
                else:
                    e[(f"r:{u}:{v}", w)] = f"s0:{z}"
                    ensure_skip_track(z)

    if i == 1:
        e[("t", "sharp")] = "rt:sharp"
        for v in tape_and_pairs:
            e[("rt:sharp", v)] = f"r:sharp:{v}"
            ensure_window_state("sharp", v)
    else:
        e[("t", "sharp")] = "c0"
        for j in range(i - 2):
            for y in tape_and_pairs:
                e[(f"c{j}", y)] = f"c{j + 1}"
        for u in tape_and_pairs:
            e[(f"c{i - 2}", u)] = f"ru:{u}"
            for v in tape_and_pairs:
                e[(f"ru:{u}", v)] = f"r:{u}:{v}"
                ensure_window_state(u, v)
    if i < big_n:
        # terminal skim: an undefined window is fine only if the word ends
        # with the current configuration
        for m in range(i + 2, big_n + 1):
            for y in tape_and_pairs:
                e[(f"d{m}", y)] = f"d{m + 1}"
        e[(f"d{big_n + 1}", "flat")] = "f"
    return _build_named(ca.sigma, e, "t", {"f"})


def _flat_checker(ca: ConfigAlphabet) -> Dfa:
    """Accepts the words with a single flat, which is the last character."""
    e: dict[tuple[str, str], str] = {}
    for y in ca.sigma.symbols:
        if y != "flat":
            e[("t", y)] = "t"
    e[("t", "flat")] = "f"
    return _build_named(ca.sigma, e, "t", {"f"})


def build_checker_dfas(tm: TuringMachine, x: list[str], big_n: int) -> list[Dfa]:
    """The p+1 checkers over the encoding alphabet, where p = find_prime(N):
    index 0 checks the start/end configurations, 1..N check the cell
    updates, and N+1..p check the single trailing flat."""
    if big_n < 2:
        raise ValueError("the space bound must be at least 2")
    if len(x) > big_n:
        raise ValueError(f"input of length {len(x)} exceeds the space bound {big_n}")
    for sym in x:
        if sym not in tm.tape:
            raise ValueError(f"input symbol {sym!r} is not a tape symbol")
    ca = config_alphabet(tm)
    p = find_prime(big_n)
    checkers = [_start_checker(ca, tm, x, big_n)]
    for i in range(1, big_n + 1):
        checkers.append(_update_checker(ca, tm, i, big_n))
    flat = _flat_checker(ca)
    checkers.extend([flat] * (p - big_n))
    return checkers


# ---------------------------------------------------------------------------
# Cycle gadgets

GadgetVariant = Literal["lt", "eq", "mod"]


def build_cycle_gadget(p: int, variant: GadgetVariant) -> Dfa:
    """The three cycle automata: a rotation on p states; the same with a
    neutral self-loop letter; and the p+1-state variant whose second letter
    swaps the endpoints and inverts-and-negates the rest mod p."""
    if not _valid_gadget_prime(p):
        raise ValueError(
            f"p must be a prime > 5 with p mod 10 not in {{1, 9}}, got {p}")
    if variant == "lt":
        ab = Alphabet(("a",))
        delta = tuple(((i + 1) % p,) for i in range(p))
        return Dfa(p, ab, delta, 0, frozenset({0}))
    if variant == "eq":
        ab = Alphabet(("a", "nat"))
        delta = tuple(((i + 1) % p, i) for i in range(p))
        return Dfa(p, ab, delta, 0, frozenset({0}))
    if variant == "mod":
        ab = Alphabet(("a", "nat"))

        def nat(i: int) -> int:
            if i == 0:
                return p
            if i == p:
                return 0
            return ((p - 1) * pow(i, p - 2, p)) % p  # j with i*j = -1 mod p

        delta = tuple(((i + 1) % p if i < p else p, nat(i)) for i in range(p + 1))
        return Dfa(p + 1, ab, delta, 0, frozenset({0}))
    raise ValueError(f"unknown gadget variant {variant!r}")


def substitute(gadget: Dfa, checkers: list[Dfa]) -> Dfa:
    """Replace the i-th loop-letter transition of the gadget by a bridge
    through a fresh copy of checkers[i], then complete with a trash state.

    The gadget contributes its states and its `nat` edges directly; each
    `a` edge s_i -> s_j becomes s_i --a1--> (copy of checker i) --a2--> s_j.
    """
    if len(checkers) != gadget.state_count:
        raise ValueError(
            f"need one checker per gadget state: {gadget.state_count} states, "
            f"{len(checkers)} checkers")
    sigma = checkers[0].alphabet
    if any(c.alphabet != sigma for c in checkers):
        raise ValueError("checkers must share one alphabet")
    plus = Alphabet(sigma.symbols + ("a1", "a2", "nat"))
    a_idx = gadget.alphabet.index("a")
    nat_in_gadget = "nat" in gadget.alphabet.symbols

    edges: dict[tuple[int, int], int] = {}
    next_id = gadget.state_count

    def useful_states(c: Dfa) -> set[int]:
        back: dict[int, set[int]] = {}
        for q in range(c.state_count):
            for t in c.delta[q]:
                back.setdefault(t, set()).add(q)
        co = set(c.finals)
        todo = deque(co)
        while todo:
            q = todo.popleft()
            for src in back.get(q, ()):
                if src not in co:
                    co.add(src)
                    todo.append(src)
        return co

    for i in range(gadget.state_count):
        checker = checkers[i]
        keep = useful_states(checker)
        ids = {}
        for q in sorted(keep):
            ids[q] = next_id
            next_id += 1
        for q in sorted(keep):
            for c in range(len(sigma)):
                t = checker.delta[q][c]
                if t in keep:
                    edges[(ids[q], plus.index(sigma.symbols[c]))] = ids[t]
        edges[(i, plus.index("a1"))] = ids[checker.initial]
        dst = gadget.delta[i][a_idx]
        for fq in checker.finals:
            if fq in keep:
                edges[(ids[fq], plus.index("a2"))] = dst
        if nat_in_gadget:
            edges[(i, plus.index("nat"))] = gadget.delta[i][gadget.alphabet.index("nat")]

    return add_trash_state(next_id, plus, edges, gadget.initial,
                           set(gadget.finals))


@dataclass(frozen=True)
class ChoHuynhInstance:
    tm: TuringMachine
    input_word: tuple[str, ...]
    space: int
    prime: int
    config: ConfigAlphabet
    checkers: tuple[Dfa, ...]
    composite_lt: Dfa
    composite_eq: Dfa
    composite_mod: Dfa


def cho_huynh_instance(tm: TuringMachine, x: list[str], big_n: int) -> ChoHuynhInstance:
    """Checkers plus the three composite automata for one machine/input pair."""
    checkers = build_checker_dfas(tm, x, big_n)
    p = find_prime(big_n)
    lt = substitute(build_cycle_gadget(p, "lt"), checkers[:p])
    eq = substitute(build_cycle_gadget(p, "eq"), checkers[:p])
    mod = substitute(build_cycle_gadget(p, "mod"), checkers)
    return ChoHuynhInstance(tm, tuple(x), big_n, p, config_alphabet(tm),
                            tuple(checkers), lt, eq, mod)


# ---------------------------------------------------------------------------
# Gadget lemma verification


@dataclass
class GadgetCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class GadgetReport:
    p: int
    group_order: int
    checks: list[GadgetCheck]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _conjugacy_class_reps(group: PermGroup) -> list[Perm]:
    elems = sorted(group.elements)
    reps = []
    unassigned = set(elems)
    for g in elems:
        if g not in unassigned:
            continue
        reps.append(g)
        orbit = {g}
        todo = [g]
        while todo:
            h = todo.pop()
            for x in group.generators:
                conj = compose_images(compose_images(invert_perm(x), h), x)
                if conj not in orbit:
                    orbit.add(conj)
                    todo.append(conj)
        unassigned -= orbit
    return reps


def verify_gadget_lemmas(p: int) -> GadgetReport:
    """Desk-scale verification of the mod-gadget group facts: generator and
    product orders, order of the closure, unsolvability by two unrelated
    methods, and solvability of every pair-generated proper subgroup (pairs
    are scanned up to simultaneous conjugacy)."""
    if p not in (7, 13, 17):
        raise ValueError("gadget verification is desk-scale: p in {7, 13, 17}")
    gadget = build_cycle_gadget(p, "mod")
    n = gadget.state_count
    a_perm: Perm = tuple(gadget.delta[q][0] for q in range(n))
    nat_perm: Perm = tuple(gadget.delta[q][1] for q in range(n))
    checks: list[GadgetCheck] = []

    def check(name: str, passed: bool, detail: str):
        checks.append(GadgetCheck(name, passed, detail))

    orders = (element_order(nat_perm), element_order(a_perm),
              element_order(compose_images(nat_perm, a_perm)))
    check("generator orders (swap, rotation, product)", orders == (2, p, 3),
          f"got {orders}, want (2, {p}, 3)")

    group = group_closure(n, [a_perm, nat_perm])
    expected_order = p * (p * p - 1) // 2
    check("closure order", len(group) == expected_order,
          f"got {len(group)}, want {expected_order}")

    derived_unsolvable = not is_solvable(group)
    kl = kaplan_levy_witness(group)
    check("unsolvable (derived series)", derived_unsolvable, "")
    check("unsolvable (order-triple witness)", kl is not None,
          "" if kl is None else
          f"orders {tuple(element_order(x) for x in kl)}")
    check("both unsolvability methods agree", derived_unsolvable == (kl is not None), "")

    elems = sorted(group.elements)
    bad = None
    for g in _conjugacy_class_reps(group):
        for h in elems:
            sub = group_closure(n, [g, h], cap=len(group) + 1)
            if len(sub) < len(group) and not is_solvable(sub):
                bad = (g, h, len(sub))
                break
        if bad:
            break
    check("pair-generated proper subgroups solvable", bad is None,
          "" if bad is None else f"unsolvable proper subgroup of order {bad[2]}")

    return GadgetReport(p, len(group), checks)
