"""Definability classification: witness searches and the algebraic oracle.

The three undefinability criteria are decided by exhaustive searches over
the syntactic monoid (never over raw words): every condition involved
factors through the state maps of the words, so the monoid is a finite,
complete search space.  The searches pivot on the monoid's cycle elements
(maps with a state cycle of length >= 2): criterion searches and the
algebraic oracle both reduce to questions about that usually-tiny set.
The oracle path decides the same three questions from monoid properties
alone and returns no witnesses; agreement of the two paths is a standing
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from .automata import Alphabet, Dfa, Word, minimize
from .errors import ConsistencyError
from .monoids import (DEFAULT_CAP, PermGroup, TransitionMonoid, _is_prime,
                      all_monoid_groups_solvable, compose_images,
                      element_order, generate_transition_monoid,
                      image_cycles, image_power, is_aperiodic, is_solvable,
                      level_index_arrays, maximal_subgroups, restrict_to,
                      set_contains_nontrivial_group)


class Logic(IntEnum):
    """The definability chain, in increasing expressive power."""

    FO_LT = 0
    FO_LT_EQ = 1
    FO_LT_MOD = 2

    def label(self) -> str:
        return {Logic.FO_LT: "FO(<)", Logic.FO_LT_EQ: "FO(<,=mod)",
                Logic.FO_LT_MOD: "FO(<,MOD)"}[self]


@dataclass(frozen=True)
class WitnessI:
    """A word whose state map has a nontrivial cycle through q of length k."""

    u: Word
    q: int
    k: int


@dataclass(frozen=True)
class WitnessII:
    """Equal-length words u, v where u cycles q with period k while v fixes
    every state on that cycle."""

    u: Word
    v: Word
    q: int
    k: int


@dataclass(frozen=True)
class WitnessIII:
    """Words u, v generating an unsolvable behavior at q: u acts with order 2,
    v with odd prime order k, uv with order l > 1 coprime to both, and none
    of them fixes q."""

    u: Word
    v: Word
    q: int
    k: int
    l: int


CIRCUIT_BY_LOWEST = {
    Logic.FO_LT: "in AC0",
    Logic.FO_LT_EQ: "in AC0",
    Logic.FO_LT_MOD: "in ACC0",
    None: "NC1-hard",
}


@dataclass
class ClassificationReport:
    alphabet: Alphabet
    state_count: int          # states of the minimal DFA
    monoid_size: int
    aperiodic: bool
    quasi_aperiodic: bool
    groups_solvable: bool
    definable: dict[Logic, bool]
    witnesses: dict[Logic, Optional[object]] = field(default_factory=dict)
    lowest: Optional[Logic] = None
    circuit_label: str = ""
    note: str = ""
    two_nfa_state_count: Optional[int] = None

    def __post_init__(self):
        chain = [self.definable[lg] for lg in Logic]
        for lower, higher in zip(chain, chain[1:]):
            if lower and not higher:
                raise ConsistencyError(
                    "definability verdicts are not monotone along the chain")
        self.lowest = next((lg for lg in Logic if self.definable[lg]), None)
        self.circuit_label = CIRCUIT_BY_LOWEST[self.lowest]
        if self.lowest is None:
            self.note = "NC1-hardness assumes ACC0 != NC1"


# ---------------------------------------------------------------------------
# Criterion searches


def _nontrivial_orbits(m: TransitionMonoid, s: int) -> list[tuple[int, ...]]:
    return [tuple(sorted(c)) for c in image_cycles(m.image(s)) if len(c) > 1]


def criterion_fo_lt(a: Dfa, cap: int = DEFAULT_CAP) -> Optional[WitnessI]:
    """Witness that L(a) is not FO(<)-definable, if any.

    Search: a monoid element with a state cycle of length >= 2; its stored
    witness word is u, q the smallest cycled state, k that cycle's length.
    The returned witness minimizes (|u|, q, k) and then the word itself.
    """
    return _criterion_i_on(generate_transition_monoid(minimize(a), cap))


def _criterion_i_on(m: TransitionMonoid) -> Optional[WitnessI]:
    best = None
    for s in m.cycle_elements():
        orbits = _nontrivial_orbits(m, s)
        q = min(o[0] for o in orbits)
        k = next(len(o) for o in orbits if o[0] == q)
        key = (m.witness_length(s), q, k, m.witness(s))
        if best is None or key < best[0]:
            best = (key, WitnessI(key[3], q, k))
    return best[1] if best else None


def _contains(sorted_arr: np.ndarray, x: int) -> bool:
    i = int(np.searchsorted(sorted_arr, x))
    return i < len(sorted_arr) and int(sorted_arr[i]) == x


def _word_at_level(m: TransitionMonoid, levels: list[np.ndarray],
                   t: int, target: int) -> Word:
    """A length-t word whose map is the target element, reconstructed
    backward through the level sequence (smallest predecessor first)."""
    k = len(m.generator)
    cols = [np.frombuffer(m.step_col(c), dtype=np.int32) for c in range(k)]
    out: list[int] = []
    for tt in range(t, 0, -1):
        prev = levels[tt - 1]
        best = None
        for c in range(k):
            hits = prev[cols[c][prev] == target]
            if len(hits):
                cand = (int(hits[0]), c)
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise ConsistencyError("level-set trace lost its target")
        out.append(best[1])
        target = best[0]
    return tuple(reversed(out))


def criterion_fo_lt_eq(a: Dfa, cap: int = DEFAULT_CAP) -> Optional[WitnessII]:
    """Witness that L(a) is not FO(<,=mod)-definable, if any.

    The pairs (map(u), map(v)) with |u| = |v| are exactly the pairs drawn
    from one level set, so the equal-length pair monoid is traversed level
    by level: at each distinct level, look for a cycle element together
    with an element fixing its whole cycle."""
    return _criterion_ii_on(generate_transition_monoid(minimize(a), cap), cap)


def _criterion_ii_on(m: TransitionMonoid, cap: int) -> Optional[WitnessII]:
    cyc = m.cycle_elements()
    if not cyc:
        return None
    levels, _, _ = level_index_arrays(m, cap)
    mat = m.matrix()
    orbit_lists = {f: _nontrivial_orbits(m, f) for f in cyc}
    fixer_masks: dict[tuple[int, ...], np.ndarray] = {}

    def fixer_mask(orbit: tuple[int, ...]) -> np.ndarray:
        got = fixer_masks.get(orbit)
        if got is None:
            cols = mat[:, list(orbit)]
            got = (cols == np.array(orbit, dtype=cols.dtype)).all(axis=1)
            fixer_masks[orbit] = got
        return got

    for t in range(1, len(levels)):
        lv = levels[t]
        best = None
        for f in cyc:
            if not _contains(lv, f):
                continue
            for orbit in orbit_lists[f]:
                sel = lv[fixer_mask(orbit)[lv]]
                if len(sel) == 0:
                    continue
                cand = (orbit[0], len(orbit), f, int(sel[0]))
                if best is None or cand < best:
                    best = cand
        if best is not None:
            q, klen, f, g = best
            u = _word_at_level(m, levels, t, f)
            v = _word_at_level(m, levels, t, g)
            return WitnessII(u, v, q, klen)
    return None


def criterion_fo_lt_mod(a: Dfa, cap: int = DEFAULT_CAP) -> Optional[WitnessIII]:
    """Witness that L(a) is not FO(<,MOD)-definable, if any.

    Search: an unsolvable maximal subgroup of the syntactic monoid yields a
    triple (order 2, odd prime order, coprime order with product identity);
    the witness words realize the first two elements, k is the prime, l the
    order of their product on the group's support, and q a support state
    moved by all three maps.  Every candidate is replayed against the full
    orbit closure before being accepted."""
    min_dfa = minimize(a)
    return _criterion_iii_on(min_dfa, generate_transition_monoid(min_dfa, cap))


def _criterion_iii_on(min_dfa: Dfa, m: TransitionMonoid) -> Optional[WitnessIII]:
    nq = m.state_count
    best = None
    for e, support, members, group in maximal_subgroups(m):
        if is_solvable(group):
            continue
        perms = {s: restrict_to(m.image(s), support) for s in members}
        orders = {s: element_order(perms[s]) for s in members}
        found_for_group = False
        for s_a in members:
            if orders[s_a] != 2:
                continue
            for s_b in members:
                kb = orders[s_b]
                if kb % 2 == 0 or not _is_prime(kb):
                    continue
                ab = m.mul(s_a, s_b)
                l = orders.get(ab)
                if l is None or l <= 1 or l % 2 == 0 or l % kb == 0:
                    continue
                if l > nq or kb > nq:
                    continue
                a_img = m.image(s_a)
                b_img = m.image(s_b)
                ab_img = m.image(ab)
                q = next((p for p in support
                          if a_img[p] != p and b_img[p] != p and ab_img[p] != p),
                         None)
                if q is None:
                    continue
                wit = WitnessIII(m.witness(s_a), m.witness(s_b), q, kb, l)
                if not replay_witness_iii(min_dfa, wit):
                    continue
                found_for_group = True
                key = (len(wit.u), len(wit.v), q, kb, l, wit.u, wit.v)
                if best is None or key < best[0]:
                    best = (key, wit)
        if not found_for_group:
            raise ConsistencyError(
                "unsolvable maximal subgroup without a valid witness triple")
    return best[1] if best else None


# ---------------------------------------------------------------------------
# Independent witness replays (also used by the test suite)


def _map_of(a: Dfa, w: Word):
    img = tuple(range(a.state_count))
    for c in w:
        img = tuple(a.delta[q][c] for q in img)
    return img


def replay_witness_i(min_dfa: Dfa, wit: WitnessI) -> bool:
    f = _map_of(min_dfa, wit.u)
    if not (1 <= wit.k <= min_dfa.state_count):
        return False
    return f[wit.q] != wit.q and image_power(f, wit.k)[wit.q] == wit.q


def replay_witness_ii(min_dfa: Dfa, wit: WitnessII) -> bool:
    if len(wit.u) != len(wit.v) or not (1 <= wit.k <= min_dfa.state_count):
        return False
    f = _map_of(min_dfa, wit.u)
    g = _map_of(min_dfa, wit.v)
    if f[wit.q] == wit.q or image_power(f, wit.k)[wit.q] != wit.q:
        return False
    p = wit.q
    for _ in range(wit.k):
        if g[p] != p:
            return False
        p = f[p]
    return True


def replay_witness_iii(min_dfa: Dfa, wit: WitnessIII) -> bool:
    n = min_dfa.state_count
    if not (wit.k <= n and 1 < wit.l <= n):
        return False
    if wit.k % 2 == 0 or not _is_prime(wit.k):
        return False
    if wit.l % 2 == 0 or wit.l % wit.k == 0:
        return False
    f = _map_of(min_dfa, wit.u)
    g = _map_of(min_dfa, wit.v)
    fg = compose_images(f, g)
    q = wit.q
    if f[q] == q or g[q] == q or fg[q] == q:
        return False
    f2 = image_power(f, 2)
    gk = image_power(g, wit.k)
    fgl = image_power(fg, wit.l)
    # orbit of q under {f, g} covers the maps of all x in {u,v}*
    orbit = {q}
    todo = [q]
    while todo:
        p = todo.pop()
        for nxt in (f[p], g[p]):
            if nxt not in orbit:
                orbit.add(nxt)
                todo.append(nxt)
    return all(f2[p] == p and gk[p] == p and fgl[p] == p for p in orbit)


# ---------------------------------------------------------------------------
# Classification


def _monoid_stats(m: TransitionMonoid, cap: int) -> tuple[bool, bool, bool]:
    ap = is_aperiodic(m)
    if ap:
        return True, True, True
    levels, _, _ = level_index_arrays(m, cap)
    qa = all(set_contains_nontrivial_group(m, lv) is None for lv in levels)
    solv = all_monoid_groups_solvable(m)[0]
    return ap, qa, solv


def oracle_classify(a: Dfa, cap: int = DEFAULT_CAP) -> ClassificationReport:
    """Verdicts computed purely from the algebraic characterisations of the
    syntactic monoid; no witnesses."""
    min_dfa = minimize(a)
    m = generate_transition_monoid(min_dfa, cap)
    ap, qa, solv = _monoid_stats(m, cap)
    return ClassificationReport(
        alphabet=a.alphabet,
        state_count=min_dfa.state_count,
        monoid_size=len(m),
        aperiodic=ap, quasi_aperiodic=qa, groups_solvable=solv,
        definable={Logic.FO_LT: ap, Logic.FO_LT_EQ: qa, Logic.FO_LT_MOD: solv},
        witnesses={lg: None for lg in Logic},
    )


def classify(a: Dfa, cap: int = DEFAULT_CAP,
             oracle_check: bool = False) -> ClassificationReport:
    """Verdicts from the three witness searches, with witnesses attached.

    With oracle_check, the algebraic-oracle verdicts are recomputed and a
    disagreement raises ConsistencyError.
    """
    min_dfa = minimize(a)
    m = generate_transition_monoid(min_dfa, cap)
    w1 = _criterion_i_on(m)
    w2 = _criterion_ii_on(m, cap)
    w3 = _criterion_iii_on(min_dfa, m)
    ap, qa, solv = _monoid_stats(m, cap)
    report = ClassificationReport(
        alphabet=a.alphabet,
        state_count=min_dfa.state_count,
        monoid_size=len(m),
        aperiodic=ap, quasi_aperiodic=qa, groups_solvable=solv,
        definable={Logic.FO_LT: w1 is None, Logic.FO_LT_EQ: w2 is None,
                   Logic.FO_LT_MOD: w3 is None},
        witnesses={Logic.FO_LT: w1, Logic.FO_LT_EQ: w2, Logic.FO_LT_MOD: w3},
    )
    if oracle_check:
        oracle_verdicts = {Logic.FO_LT: ap, Logic.FO_LT_EQ: qa,
                           Logic.FO_LT_MOD: solv}
        if oracle_verdicts != report.definable:
            raise ConsistencyError(
                f"witness search {report.definable} disagrees with "
                f"algebraic oracle {oracle_verdicts}")
    return report
