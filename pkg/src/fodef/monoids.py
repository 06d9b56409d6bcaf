"""Transition monoids, cyclic groups of elements, level sets, and
permutation groups.

Composition is diagrammatic throughout: (x * y) means "apply x, then y",
so (x * y)[q] = y[x[q]] and the map of a word uv is map(u) * map(v).

The monoid engine is built to survive the hardness-instance composites,
whose syntactic monoids run into millions of elements: images are stored
as byte strings (composition is bytes.translate), witness words are
reconstructed on demand from breadth-first parent links, and the whole
element table is exposed as a numpy matrix for vectorized scans.  The
load-bearing shortcut for the group-theoretic questions: every non-identity
element of a group inside the monoid maps some state along a cycle of
length >= 2, and the set of such elements (`cycle_elements`) is tiny even
when the monoid is huge.
"""

from __future__ import annotations

import math
from array import array
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .automata import Dfa, Word, minimize
from .errors import CapExceededError

DEFAULT_CAP = 10 ** 6

Image = tuple[int, ...]
Perm = tuple[int, ...]

_PAD = bytes(range(256))


def compose_images(x: Image, y: Image) -> Image:
    """Apply x, then y."""
    return tuple(map(y.__getitem__, x))


def identity_image(n: int) -> Image:
    return tuple(range(n))


def invert_perm(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def is_permutation(x: Sequence[int]) -> bool:
    return len(set(x)) == len(x)


def image_cycles(x: Sequence[int]) -> list[list[int]]:
    """Cycles of the functional graph of x (only states lying on cycles)."""
    n = len(x)
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    cycles = []
    for start in range(n):
        if color[start]:
            continue
        path = []
        q = start
        while color[q] == 0:
            color[q] = 1
            path.append(q)
            q = x[q]
        if color[q] == 1:  # found a new cycle; q is its entry point
            cycles.append(path[path.index(q):])
        for p in path:
            color[p] = 2
    return cycles


def has_nontrivial_cycle(x: Sequence[int]) -> bool:
    return any(len(c) > 1 for c in image_cycles(x))


def image_power(x: Image, n: int) -> Image:
    """x composed with itself n times (n >= 0) by repeated squaring."""
    result = identity_image(len(x))
    base = x
    while n:
        if n & 1:
            result = compose_images(result, base)
        base = compose_images(base, base)
        n >>= 1
    return result


@dataclass(frozen=True)
class Transformation:
    """The state map of a word, together with a word realizing it."""

    image: Image
    witness: Word

    def __call__(self, q: int) -> int:
        return self.image[q]


class _ElementView(Sequence):
    """Lazy sequence of Transformations over a monoid's element table."""

    def __init__(self, monoid: "TransitionMonoid"):
        self._m = monoid

    def __len__(self) -> int:
        return len(self._m)

    def __getitem__(self, i: int) -> Transformation:
        return self._m.transformation(i)


class TransitionMonoid:
    """Closure of a DFA's letter maps under composition.

    Element 0 is the identity (witness epsilon).  Witnesses are shortest
    realizing words, ties broken by smallest symbol indices (breadth-first
    generation order); they are reconstructed on demand from parent links.
    step_col(c)[i] is the index of element i composed with the map of
    letter c.
    """

    def __init__(self, state_count: int, images: list[bytes],
                 index_of: dict[bytes, int], parents: array,
                 parent_letter: array, depth: array, step_cols: list[array],
                 generator: tuple[int, ...]):
        self.state_count = state_count
        self._images = images
        self.index_of = index_of
        self._parents = parents
        self._parent_letter = parent_letter
        self._depth = depth
        self._step_cols = step_cols
        self.generator = generator
        self._matrix: Optional[np.ndarray] = None
        self._cycle_elements: Optional[list[int]] = None
        self.elements = _ElementView(self)

    def __len__(self) -> int:
        return len(self._images)

    # -- element access

    def image_bytes(self, i: int) -> bytes:
        return self._images[i]

    def image(self, i: int) -> Image:
        return tuple(self._images[i])

    def witness_length(self, i: int) -> int:
        return self._depth[i]

    def witness(self, i: int) -> Word:
        out = []
        while i != 0:
            out.append(self._parent_letter[i])
            i = self._parents[i]
        return tuple(reversed(out))

    def transformation(self, i: int) -> Transformation:
        return Transformation(self.image(i), self.witness(i))

    # -- algebra

    def mul(self, i: int, j: int) -> int:
        table = self._images[j] + _PAD[self.state_count:]
        return self.index_of[self._images[i].translate(table)]

    def step(self, i: int, c: int) -> int:
        return self._step_cols[c][i]

    def step_col(self, c: int) -> array:
        return self._step_cols[c]

    def apply_word(self, i: int, w: Word) -> int:
        for c in w:
            i = self._step_cols[c][i]
        return i

    def element_of_word(self, w: Word) -> int:
        return self.apply_word(0, w)

    def matrix(self) -> np.ndarray:
        """All images as an (elements x states) uint8/uint16 matrix."""
        if self._matrix is None:
            if self.state_count <= 255:
                flat = np.frombuffer(b"".join(self._images), dtype=np.uint8)
            else:
                flat = np.frombuffer(b"".join(self._images), dtype=np.uint16)
            self._matrix = flat.reshape(len(self._images), self.state_count)
        return self._matrix

    def cycle_elements(self) -> list[int]:
        """Elements whose functional graph has a cycle of length >= 2.

        Vectorized: s has one iff s^m != s^(m+1) for m >= the longest tail
        in its graph, and tails are shorter than the state count, so m may
        be any power of two past it.  These elements are exactly the
        non-identity members of groups inside the monoid, so the (usually
        tiny) list drives every group-theoretic question downstream.
        """
        if self._cycle_elements is None:
            mat = self.matrix()
            n = self.state_count
            squarings = max(1, math.ceil(math.log2(n))) if n > 1 else 1
            found: list[int] = []
            chunk = max(1, 8_000_000 // max(n, 1))
            for lo in range(0, len(self), chunk):
                p = mat[lo:lo + chunk].astype(np.int64, copy=True)
                for _ in range(squarings):
                    p = np.take_along_axis(p, p, axis=1)
                nxt = np.take_along_axis(mat[lo:lo + chunk].astype(np.int64), p,
                                         axis=1)
                bad = np.nonzero((p != nxt).any(axis=1))[0]
                found.extend(int(lo + i) for i in bad)
            self._cycle_elements = found
        return self._cycle_elements


def transformation_of_word(a: Dfa, w: Word) -> Transformation:
    """Pointwise composition of the letter maps of w, in order."""
    img = identity_image(a.state_count)
    for c in w:
        img = tuple(a.delta[q][c] for q in img)
    return Transformation(img, w)


def generate_transition_monoid(a: Dfa, cap: int = DEFAULT_CAP) -> TransitionMonoid:
    """Breadth-first closure from the identity under right-composition with
    the letter maps.  Raises CapExceededError beyond `cap` elements."""
    n = a.state_count
    k = len(a.alphabet)
    if n <= 255:
        def pack(img: Iterable[int]) -> bytes:
            return bytes(img)
        tables = [bytes(a.delta[q][c] for q in range(n)) + _PAD[n:]
                  for c in range(k)]

        def apply_letter(img: bytes, c: int) -> bytes:
            return img.translate(tables[c])
    else:
        def pack(img: Iterable[int]) -> bytes:
            return array("H", img).tobytes()
        letter_maps = [tuple(a.delta[q][c] for q in range(n)) for c in range(k)]

        def apply_letter(img: bytes, c: int) -> bytes:
            lm = letter_maps[c]
            src = array("H")
            src.frombytes(img)
            return array("H", (lm[q] for q in src)).tobytes()

    ident = pack(range(n))
    images = [ident]
    index_of = {ident: 0}
    parents = array("i", [0])
    parent_letter = array("b" if k <= 127 else "i", [0])
    depth = array("i", [0])
    step_cols = [array("i") for _ in range(k)]
    i = 0
    while i < len(images):
        cur = images[i]
        d = depth[i] + 1
        for c in range(k):
            img = apply_letter(cur, c)
            j = index_of.get(img)
            if j is None:
                j = len(images)
                if j >= cap:
                    raise CapExceededError("transition monoid", cap)
                index_of[img] = j
                images.append(img)
                parents.append(i)
                parent_letter.append(c)
                depth.append(d)
            step_cols[c].append(j)
        i += 1
    generator = tuple(step_cols[c][0] for c in range(k))
    return TransitionMonoid(n, images, index_of, parents, parent_letter,
                            depth, step_cols, generator)


def syntactic_monoid(a: Dfa, cap: int = DEFAULT_CAP) -> TransitionMonoid:
    """Transition monoid of the minimal DFA of L(a)."""
    return generate_transition_monoid(minimize(a), cap)


# ---------------------------------------------------------------------------
# Cyclic structure of single elements


@dataclass(frozen=True)
class CyclicGroupData:
    """Minimal i, j with s^i = s^(i+j); the powers s^i .. s^(i+j-1) form a
    cyclic group of order j whose identity is s^identity_exponent."""

    base: int                  # element index of s
    i: int
    j: int
    members: tuple[int, ...]   # element indices of s^i .. s^(i+j-1)
    identity_exponent: int

    @property
    def nontrivial(self) -> bool:
        return self.j > 1


def power_walk(m: TransitionMonoid, s: int) -> tuple[int, int, list[int]]:
    """Walk s^1, s^2, ... until the first repeat; return (i, j, powers)
    where powers[t] is the index of s^(t+1)."""
    seen: dict[int, int] = {}
    powers: list[int] = []
    cur = s
    exp = 1
    while cur not in seen:
        seen[cur] = exp
        powers.append(cur)
        cur = m.mul(cur, s)
        exp += 1
    i = seen[cur]
    j = exp - i
    return i, j, powers


def cyclic_group_of(m: TransitionMonoid, s: int) -> CyclicGroupData:
    i, j, powers = power_walk(m, s)
    members = tuple(powers[i - 1:i - 1 + j])
    ident_exp = ((i + j - 1) // j) * j
    ident = members[(ident_exp - i) % j]
    assert m.mul(ident, ident) == ident
    return CyclicGroupData(s, i, j, members, ident_exp)


def idempotent_power(m: TransitionMonoid, s: int) -> int:
    """Least n >= 1 with s^n idempotent."""
    return cyclic_group_of(m, s).identity_exponent


def is_aperiodic(m: TransitionMonoid) -> bool:
    """No element generates a nontrivial cyclic group: an element does
    exactly when its functional graph has a cycle of length >= 2."""
    return not m.cycle_elements()


# ---------------------------------------------------------------------------
# Level sets of the syntactic morphism


@dataclass(frozen=True)
class LevelSets:
    """The distinct sets T_t of maps of length-t words, with T_c = T_(c+lam).

    sets has length c + lam and holds T_0 .. T_(c+lam-1), all pairwise
    distinct; T_0 is the singleton identity."""

    sets: tuple[frozenset[int], ...]
    preperiod: int
    period: int


def level_index_arrays(m: TransitionMonoid,
                       cap: int = DEFAULT_CAP) -> tuple[list[np.ndarray], int, int]:
    """Distinct level sets as sorted index arrays, plus preperiod and period."""
    k = len(m.generator)
    cols = [np.frombuffer(m.step_col(c), dtype=np.int32) for c in range(k)]
    cur = np.array([0], dtype=np.int32)
    seen: dict[bytes, int] = {}
    levels: list[np.ndarray] = []
    while True:
        key = cur.tobytes()
        if key in seen:
            return levels, seen[key], len(levels) - seen[key]
        if len(levels) > cap:
            raise CapExceededError("level-set iteration", cap)
        seen[key] = len(levels)
        levels.append(cur)
        cur = np.unique(np.concatenate([col[cur] for col in cols]))


def level_sets_of_monoid(m: TransitionMonoid, cap: int = DEFAULT_CAP) -> LevelSets:
    levels, c, lam = level_index_arrays(m, cap)
    return LevelSets(tuple(frozenset(int(x) for x in lv) for lv in levels),
                     c, lam)


def level_sets(a: Dfa, cap: int = DEFAULT_CAP) -> LevelSets:
    """Level sets of the transition monoid of `a` (callers minimize first)."""
    return level_sets_of_monoid(generate_transition_monoid(a, cap), cap)


def set_contains_nontrivial_group(m: TransitionMonoid,
                                  subset: Iterable[int]) -> Optional[int]:
    """Some s in the subset whose whole power set {s^k : k >= 1} stays inside
    the subset with a nontrivial cyclic part, if any.

    Any nontrivial group G inside the subset yields such an s (take any
    non-identity element of G), and conversely the powers of s form one;
    only elements with nontrivial functional cycles can qualify.
    """
    sset = set(int(x) for x in subset)
    for s in sorted(set(m.cycle_elements()) & sset):
        _, _, powers = power_walk(m, s)
        if all(p in sset for p in powers):
            return s
    return None


def is_quasi_aperiodic(a: Dfa, cap: int = DEFAULT_CAP) -> bool:
    """True iff no level set of the syntactic morphism contains a nontrivial
    group."""
    m = syntactic_monoid(a, cap)
    if is_aperiodic(m):
        return True
    levels, _, _ = level_index_arrays(m, cap)
    return all(set_contains_nontrivial_group(m, lv) is None for lv in levels)


# ---------------------------------------------------------------------------
# Permutation groups


@dataclass(frozen=True)
class PermGroup:
    domain_size: int
    elements: frozenset[Perm]
    generators: tuple[Perm, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> Perm:
        return identity_image(self.domain_size)


def group_closure(domain_size: int, generators: Sequence[Perm],
                  cap: int = DEFAULT_CAP) -> PermGroup:
    """Subgroup generated by the given permutations: closure of the identity
    under right-composition (inverses come for free in a finite group)."""
    for g in generators:
        if len(g) != domain_size or not is_permutation(g):
            raise ValueError(f"not a permutation of {domain_size} points: {g}")
    ident = identity_image(domain_size)
    elements = {ident}
    todo = deque([ident])
    while todo:
        cur = todo.popleft()
        for g in generators:
            nxt = compose_images(cur, g)
            if nxt not in elements:
                if len(elements) >= cap:
                    raise CapExceededError("permutation group", cap)
                elements.add(nxt)
                todo.append(nxt)
    return PermGroup(domain_size, frozenset(elements), tuple(generators))


def element_order(g: Perm) -> int:
    """Least n >= 1 with g^n the identity: lcm of the cycle lengths."""
    if not is_permutation(g):
        raise ValueError("element_order needs a permutation")
    order = 1
    for cyc in image_cycles(g):
        order = math.lcm(order, len(cyc))
    return order


def _greedy_generators(elements: Iterable[Perm], domain_size: int) -> tuple[Perm, ...]:
    """Small generating set for a group given by its element set."""
    gens: list[Perm] = []
    have = {identity_image(domain_size)}
    for g in sorted(elements):
        if g in have:
            continue
        gens.append(g)
        have = set(group_closure(domain_size, gens).elements)
    return tuple(gens)


def _normal_closure(domain_size: int, group_gens: Sequence[Perm],
                    seed: Iterable[Perm]) -> set[Perm]:
    """Smallest subgroup containing `seed` that is closed under conjugation
    by the group generated by group_gens."""
    gens = sorted(set(seed) - {identity_image(domain_size)})
    sub = set(group_closure(domain_size, gens).elements)
    changed = True
    while changed:
        changed = False
        for h in list(gens):
            for g in group_gens:
                conj = compose_images(compose_images(invert_perm(g), h), g)
                if conj not in sub:
                    gens.append(conj)
                    sub = set(group_closure(domain_size, gens).elements)
                    changed = True
    return sub


def derived_subgroup(g: PermGroup) -> PermGroup:
    """Commutator subgroup: normal closure of the commutators of generators."""
    gens = g.generators if g.generators else _greedy_generators(g.elements, g.domain_size)
    comms = set()
    for x in gens:
        xi = invert_perm(x)
        for y in gens:
            yi = invert_perm(y)
            comms.add(compose_images(compose_images(compose_images(xi, yi), x), y))
    sub = _normal_closure(g.domain_size, gens, comms)
    return PermGroup(g.domain_size, frozenset(sub),
                     _greedy_generators(sub, g.domain_size))


def is_solvable(g: PermGroup) -> bool:
    """Derived series down to the trivial group."""
    cur = g
    while len(cur) > 1:
        nxt = derived_subgroup(cur)
        if len(nxt) == len(cur):
            return False  # perfect nontrivial group
        cur = nxt
    return True


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def kaplan_levy_witness(g: PermGroup) -> Optional[tuple[Perm, Perm, Perm]]:
    """Triple (a, b, c) with a*b*c = identity, order(a) = 2, order(b) an odd
    prime, order(c) > 1 and coprime to both; present iff g is unsolvable."""
    ident = g.identity
    elems = sorted(g.elements)
    orders = {e: element_order(e) for e in elems}
    involutions = [e for e in elems if orders[e] == 2]
    odd_primes = [e for e in elems if orders[e] % 2 == 1 and _is_prime(orders[e])]
    for a in involutions:
        for b in odd_primes:
            ab = compose_images(a, b)
            c = invert_perm(ab)
            oc = orders.get(c)
            if oc is None:
                continue  # c outside g cannot happen; defensive
            if oc > 1 and oc % 2 == 1 and math.gcd(oc, orders[b]) == 1:
                assert compose_images(ab, c) == ident
                return (a, b, c)
    return None


# ---------------------------------------------------------------------------
# Groups inside a transition monoid


def restriction_support(elements: Iterable[Sequence[int]],
                        e: Sequence[int]) -> tuple[int, ...]:
    """Fixed-point set S of the group identity e; asserts that every group
    element restricts to a permutation of S."""
    support = tuple(q for q in range(len(e)) if e[q] == q)
    sset = set(support)
    for x in elements:
        if {x[q] for q in support} != sset:
            raise ValueError("element does not permute the support")
    return support


def restrict_to(x: Sequence[int], support: Sequence[int]) -> Perm:
    pos = {q: i for i, q in enumerate(support)}
    return tuple(pos[x[q]] for q in support)


def idempotents(m: TransitionMonoid) -> list[int]:
    return [i for i in range(len(m)) if m.mul(i, i) == i]


def _idempotent_of(m: TransitionMonoid, s: int) -> int:
    data = cyclic_group_of(m, s)
    return data.members[(data.identity_exponent - data.i) % data.j]


def group_bearing_idempotents(m: TransitionMonoid) -> list[int]:
    """Idempotents whose maximal subgroup can be nontrivial: the identity
    of such a group is the idempotent power of any of its non-identity
    elements, all of which carry nontrivial cycles."""
    return sorted({_idempotent_of(m, s) for s in m.cycle_elements()})


def unit_group_at(m: TransitionMonoid, e: int) -> tuple[tuple[int, ...], list[int]]:
    """Support of the idempotent e and the monoid elements of the maximal
    subgroup at e.

    An element x of the local monoid eMe is invertible there exactly when
    it permutes the support: its powers then return to e on the support,
    giving the inverse.  Non-identity members carry nontrivial cycles, so
    only cycle elements need inspection.
    """
    eimg = m.image(e)
    support = tuple(q for q in range(m.state_count) if eimg[q] == q)
    sset = set(support)
    members = [e]
    for s in m.cycle_elements():
        if m.mul(m.mul(e, s), e) != s:
            continue  # not in the local monoid
        ximg = m.image(s)
        if {ximg[q] for q in support} == sset:
            members.append(s)
    return support, sorted(set(members))


def maximal_subgroups(m: TransitionMonoid) -> list[tuple[int, tuple[int, ...], list[int], PermGroup]]:
    """All potentially-nontrivial maximal subgroups, as
    (idempotent, support, member element indices, restricted group)."""
    out = []
    for e in group_bearing_idempotents(m):
        support, members = unit_group_at(m, e)
        perms = frozenset(restrict_to(m.image(s), support) for s in members)
        group = PermGroup(len(support), perms,
                          _greedy_generators(perms, len(support)))
        out.append((e, support, members, group))
    return out


def all_monoid_groups_solvable(
        m: TransitionMonoid) -> tuple[bool, Optional[PermGroup]]:
    """True iff every maximal subgroup (unit group of a local monoid at an
    idempotent) is solvable.  Any group inside the monoid embeds into the
    one at its own identity idempotent, and subgroups of solvable groups
    are solvable."""
    for _, _, _, group in maximal_subgroups(m):
        if not is_solvable(group):
            return False, group
    return True, None
