"""Scratch validation: corrected vs literal-paper 2NFA formulas (not shipped)."""
import itertools
import random
from collections import deque

from fodef.automata import Alphabet, TwoNfa, run_two_nfa, words_up_to
from fodef.twoway import (BehaviorQuad, DfaPrimeState, behavior_of_symbol,
                          behavior_of_word, compose, determinize, identity_quad,
                          initial_prime_state, quad_reach, rel_compose,
                          rel_empty, rel_identity, rel_star, rel_union,
                          _crossing, _left_exit)


def direct_quad(a, w):
    """Independent: all four relations straight from the definitions."""
    if not w:
        # zero-length segment: see twoway docstring
        n = a.state_count
        return BehaviorQuad(rel_identity(n), rel_identity(n), rel_empty(n), rel_empty(n))
    return BehaviorQuad(
        _crossing(a, w, 0),
        _left_exit(a, w, len(w)),
        _crossing(a, w, len(w) - 1),
        _left_exit(a, w, 1),
    )


def rel_tc(r):
    """Plain transitive closure (no reflexivity)."""
    cur = r
    while True:
        nxt = rel_union(cur, rel_compose(cur, r))
        if nxt == cur:
            return cur
        cur = nxt


def compose_literal(b, b2):
    """Paper-literal composition: plain transitive closures."""
    x = rel_tc(rel_compose(b2.ll, b.rr))
    y = rel_tc(rel_compose(b.rr, b2.ll))
    lr = rel_union(rel_compose(b.lr, b2.lr),
                   rel_compose(b.lr, rel_compose(x, b2.lr)))
    rl = rel_union(rel_compose(b2.rl, b.rl),
                   rel_compose(b2.rl, rel_compose(y, b.rl)))
    rr = rel_union(b2.rr, rel_compose(b2.rl, rel_compose(y, rel_compose(b.rr, b2.lr))))
    ll = rel_union(b.ll, rel_compose(b.lr, rel_compose(x, rel_compose(b2.ll, b.rl))))
    return BehaviorQuad(lr, rl, rr, ll)


def quad_reach_literal(state, b):
    """Paper-literal delta' step: B'_rr = B_rr | rl . Y . lr."""
    x = rel_star(rel_compose(b.ll, state.rr))
    y = rel_star(rel_compose(state.rr, b.ll))
    lr = rel_compose(state.lr, rel_compose(x, b.lr))
    rr = rel_union(state.rr, rel_compose(b.rl, rel_compose(y, b.lr)))
    return DfaPrimeState(lr, rr)


def determinize_literal(a):
    k = len(a.alphabet)
    quads = [behavior_of_symbol(a, c) for c in range(k)]
    start = initial_prime_state(a)
    index = {start: 0}
    order = [start]
    table = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for c in range(k):
            nxt = quad_reach_literal(cur, quads[c])
            j = index.get(nxt)
            if j is None:
                j = len(order)
                index[nxt] = j
                order.append(nxt)
            row.append(j)
        table.append(tuple(row))
        i += 1
    fmask = 0
    for q in a.finals:
        fmask |= 1 << q
    finals = frozenset(i for i, st in enumerate(order)
                       if any(st.lr[q] & fmask for q in a.initials))
    from fodef.automata import Dfa
    return Dfa(len(order), a.alphabet, tuple(table), 0, finals)


def random_two_nfa(rng, max_states=4, letters=2, max_moves=2):
    n = rng.randint(1, max_states)
    ab = Alphabet(tuple("ab"[:letters]))
    delta = []
    for q in range(n):
        row = []
        for c in range(letters):
            cnt = rng.randint(0, max_moves)
            moves = set()
            for _ in range(cnt):
                moves.add((rng.randrange(n), rng.choice((-1, 0, 1))))
            row.append(frozenset(moves))
        delta.append(tuple(row))
    initials = frozenset(rng.sample(range(n), rng.randint(1, n)))
    finals = frozenset(q for q in range(n) if rng.random() < 0.5)
    return TwoNfa(n, ab, tuple(delta), initials, finals)


def run_dfa(d, w):
    q = d.initial
    for c in w:
        q = d.delta[q][c]
    return q in d.finals


rng = random.Random(12345)
corpus = [random_two_nfa(rng) for _ in range(200)]

# 1. fold-compose vs direct definitions
bad_fold = 0
for a in corpus:
    for w in words_up_to(a.alphabet, 5):
        if behavior_of_word(a, w) != direct_quad(a, w):
            bad_fold += 1
            break
print("fold-compose vs direct:", "OK" if bad_fold == 0 else f"{bad_fold} FAIL")

# 2. homomorphism with corrected vs literal compose
bad_corr = bad_lit = 0
ex_lit = None
for a in corpus[:80]:
    quads = {w: direct_quad(a, w) for w in words_up_to(a.alphabet, 4)}
    for u in words_up_to(a.alphabet, 2):
        for v in words_up_to(a.alphabet, 2):
            want = direct_quad(a, u + v)
            if compose(quads[u], quads[v]) != want:
                bad_corr += 1
            if compose_literal(quads[u], quads[v]) != want:
                bad_lit += 1
                if ex_lit is None:
                    ex_lit = (a, u, v)
print(f"homomorphism corrected: {bad_corr} fail; literal-TC: {bad_lit} fail")
if ex_lit:
    a, u, v = ex_lit
    print("  literal-TC counterexample: states:", a.state_count, "u:", u, "v:", v)
    print("  delta:", [[sorted(cell) for cell in row] for row in a.delta])

# 3. determinize language equivalence, corrected vs literal
bad_det = bad_detlit = 0
ex_detlit = None
for a in corpus:
    d = determinize(a)
    dl = determinize_literal(a)
    for w in words_up_to(a.alphabet, 7):
        want = run_two_nfa(a, w)
        if run_dfa(d, w) != want:
            bad_det += 1
            break
    for w in words_up_to(a.alphabet, 7):
        want = run_two_nfa(a, w)
        if run_dfa(dl, w) != want:
            bad_detlit += 1
            if ex_detlit is None:
                ex_detlit = (a, w, want)
            break
print(f"determinize corrected: {bad_det} fail; literal delta': {bad_detlit} fail")
if ex_detlit:
    a, w, want = ex_detlit
    print("  literal counterexample: states:", a.state_count, "word:", w, "2nfa accepts:", want)
    print("  delta:", [[sorted(cell) for cell in row] for row in a.delta],
          "init:", sorted(a.initials), "fin:", sorted(a.finals))
