"""Behavior quadruples of 2NFAs, their composition, and determinization.

Binary relations over the state set are bitmask rows: rel[q] is the set of
successors of q packed into an int.  Relation composition is diagrammatic,
(q, q'') in R.S iff (q, q') in R and (q', q'') in S for some q'.

The four behaviors of a word w:
  lr: runs on w from (q, 0) to (q', |w|)
  rr: runs on w from (q, |w|-1) to (q', |w|)
  rl: runs on a padded word xw from (q, |w|) to (q', 0), position 0 unvisited
      before the end
  ll: the same with start (q, 1)

The padding cell is never read (reaching it ends the run), so rl and ll do
not depend on the padding letter; this is asserted per letter anyway.

For the empty word the quad is (lr=id, rl=id, rr=empty, ll=empty): a
zero-width segment is crossed without changing state, and there is no cell
in it to enter from the side.  With that value the composition below has the
empty word as a two-sided identity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .automata import Dfa, TwoNfa, Word
from .errors import CapExceededError, ConsistencyError
from .monoids import DEFAULT_CAP

Rel = tuple[int, ...]


def rel_identity(n: int) -> Rel:
    return tuple(1 << q for q in range(n))


def rel_empty(n: int) -> Rel:
    return (0,) * n


def rel_compose(r: Rel, s: Rel) -> Rel:
    out = []
    for bits in r:
        acc = 0
        while bits:
            low = bits & -bits
            acc |= s[low.bit_length() - 1]
            bits ^= low
        out.append(acc)
    return tuple(out)


def rel_union(r: Rel, s: Rel) -> Rel:
    return tuple(a | b for a, b in zip(r, s))


def rel_star(r: Rel) -> Rel:
    """Reflexive-transitive closure."""
    n = len(r)
    cur = rel_union(rel_identity(n), r)
    while True:
        nxt = rel_union(cur, rel_compose(cur, cur))
        if nxt == cur:
            return cur
        cur = nxt


@dataclass(frozen=True)
class BehaviorQuad:
    lr: Rel
    rl: Rel
    rr: Rel
    ll: Rel

    @property
    def state_count(self) -> int:
        return len(self.lr)


def identity_quad(n: int) -> BehaviorQuad:
    return BehaviorQuad(rel_identity(n), rel_identity(n), rel_empty(n), rel_empty(n))


def _crossing(a: TwoNfa, w: Word, start_pos: int) -> Rel:
    """Relation {(q, q'): some run on w from (q, start_pos) reaches
    (q', len(w))}.  Moves to position -1 are dead ends."""
    n = a.state_count
    m = len(w)
    out = [0] * n
    for q0 in range(n):
        if start_pos == m:
            out[q0] |= 1 << q0
            continue
        seen = {(q0, start_pos)}
        todo = deque(seen)
        while todo:
            q, i = todo.popleft()
            if not (0 <= i < m):
                continue
            for q2, d in a.delta[q][w[i]]:
                i2 = i + d
                if i2 < 0:
                    continue
                cfg = (q2, i2)
                if cfg in seen:
                    continue
                seen.add(cfg)
                if i2 == m:
                    out[q0] |= 1 << q2
                todo.append(cfg)
    return tuple(out)


def _left_exit(a: TwoNfa, w: Word, start_pos: int) -> Rel:
    """Relation {(q, q'): some run on the padded word xw from (q, start_pos)
    first reaches position 0 in state q'}.  Positions are padded: the letters
    of w sit at 1..len(w); position 0 is the endpoint and is never read."""
    n = a.state_count
    m = len(w)
    out = [0] * n
    for q0 in range(n):
        seen = {(q0, start_pos)}
        todo = deque(seen)
        while todo:
            q, i = todo.popleft()
            if not (1 <= i <= m):
                continue
            for q2, d in a.delta[q][w[i - 1]]:
                i2 = i + d
                cfg = (q2, i2)
                if cfg in seen:
                    continue
                seen.add(cfg)
                if i2 == 0:
                    out[q0] |= 1 << q2
                    continue  # endpoint: the run stops at its first visit
                todo.append(cfg)
    return tuple(out)


def behavior_of_symbol(a: TwoNfa, c: int) -> BehaviorQuad:
    """Behavior quad of a single letter, by configuration-graph reachability.

    rl and ll are computed on a padded two-letter word once per padding
    letter; a disagreement between paddings would mean the definitions were
    misread and is reported, not silently resolved.
    """
    w: Word = (c,)
    lr = _crossing(a, w, 0)
    rr = _crossing(a, w, len(w) - 1)
    rl_by_pad = {_left_exit(a, w, len(w)) for _ in a.alphabet.symbols}
    ll_by_pad = {_left_exit(a, w, 1) for _ in a.alphabet.symbols}
    if len(rl_by_pad) != 1 or len(ll_by_pad) != 1:
        raise ConsistencyError("behavior depends on the padding letter")
    return BehaviorQuad(lr, rl_by_pad.pop(), rr, ll_by_pad.pop())


def compose(b: BehaviorQuad, b2: BehaviorQuad) -> BehaviorQuad:
    """Behavior of a concatenation from the behaviors of its two parts.

    x collects round trips based at the left cell of the second part (dip
    left into the first part, return); y collects round trips based at the
    right cell of the first part.  Both closures are reflexive: zero round
    trips must be allowed wherever x and y appear.
    """
    x = rel_star(rel_compose(b2.ll, b.rr))
    y = rel_star(rel_compose(b.rr, b2.ll))
    lr = rel_compose(b.lr, rel_compose(x, b2.lr))
    rl = rel_compose(b2.rl, rel_compose(y, b.rl))
    rr = rel_union(b2.rr,
                   rel_compose(b2.rl, rel_compose(y, rel_compose(b.rr, b2.lr))))
    ll = rel_union(b.ll,
                   rel_compose(b.lr, rel_compose(x, rel_compose(b2.ll, b.rl))))
    return BehaviorQuad(lr, rl, rr, ll)


def behavior_of_word(a: TwoNfa, w: Word) -> BehaviorQuad:
    """Left fold of compose over the letters, from the empty-word quad."""
    quad = identity_quad(a.state_count)
    cache: dict[int, BehaviorQuad] = {}
    for c in w:
        if c not in cache:
            cache[c] = behavior_of_symbol(a, c)
        quad = compose(quad, cache[c])
    return quad


# ---------------------------------------------------------------------------
# Determinization


@dataclass(frozen=True)
class DfaPrimeState:
    """State of the determinized automaton after reading a prefix w:
    lr holds the crossing relation of w restricted to initial-state rows,
    rr the right-to-right behavior of w."""

    lr: Rel
    rr: Rel


def quad_reach(a: TwoNfa, state: DfaPrimeState, b: BehaviorQuad) -> DfaPrimeState:
    """One step of the determinized transition: extend the tracked prefix by
    a word with behavior b.  This is `compose` specialized to the tracked
    components: the full lr of the prefix is not needed, only its
    initial-state rows."""
    x = rel_star(rel_compose(b.ll, state.rr))
    y = rel_star(rel_compose(state.rr, b.ll))
    lr = rel_compose(state.lr, rel_compose(x, b.lr))
    rr = rel_union(b.rr,
                   rel_compose(b.rl, rel_compose(y, rel_compose(state.rr, b.lr))))
    return DfaPrimeState(lr, rr)


def initial_prime_state(a: TwoNfa) -> DfaPrimeState:
    n = a.state_count
    lr = tuple((1 << q) if q in a.initials else 0 for q in range(n))
    return DfaPrimeState(lr, rel_empty(n))


def _prime_accepting(a: TwoNfa, state: DfaPrimeState) -> bool:
    fmask = 0
    for q in a.finals:
        fmask |= 1 << q
    return any(state.lr[q] & fmask for q in a.initials)


def determinize(a: TwoNfa, cap: int = DEFAULT_CAP) -> Dfa:
    """Explicit DFA over the reachable tracked states; accepts the same
    language as the 2NFA."""
    k = len(a.alphabet)
    letter_quads = [behavior_of_symbol(a, c) for c in range(k)]
    start = initial_prime_state(a)
    index: dict[DfaPrimeState, int] = {start: 0}
    order = [start]
    table: list[tuple[int, ...]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for c in range(k):
            nxt = quad_reach(a, cur, letter_quads[c])
            j = index.get(nxt)
            if j is None:
                j = len(order)
                if j >= cap:
                    raise CapExceededError("determinization", cap)
                index[nxt] = j
                order.append(nxt)
            row.append(j)
        table.append(tuple(row))
        i += 1
    finals = frozenset(i for i, st in enumerate(order) if _prime_accepting(a, st))
    return Dfa(len(order), a.alphabet, tuple(table), 0, finals)


def classify_two_nfa(a: TwoNfa, cap: int = DEFAULT_CAP,
                     oracle_check: bool = False):
    """Classify the language of a 2NFA: determinize, minimize, classify.

    The nondeterministic guessing of quadruple sequences is realized
    deterministically as a breadth-first closure over the reachable
    quadruple space; the report records how many determinized states were
    materialized."""
    from .automata import minimize
    from .definability import classify

    prime = determinize(a, cap)
    report = classify(minimize(prime), cap, oracle_check=oracle_check)
    report.two_nfa_state_count = prime.state_count
    return report
