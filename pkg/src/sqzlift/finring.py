"""Finite commutative local rings, surjection towers and fiber products.

A ring is presented by an additive basis b_0 = 1, ..., b_{m-1} where b_i
generates a cyclic group of order p^{e_i}, together with the multiplication
table of the basis.  Elements are canonical coefficient vectors
(c_0, ..., c_{m-1}) with 0 <= c_i < p^{e_i}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import gf
from .errors import (
    CharMismatch,
    IJNonzero,
    NonPrime,
    NotLocal,
    NotSurjective,
    TargetMismatch,
    ValidationError,
)

MAX_RING_SIZE = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def vec_key(v: np.ndarray) -> bytes:
    return np.ascontiguousarray(v, dtype=np.int64).tobytes()


def all_vectors(orders: np.ndarray) -> np.ndarray:
    """All coefficient vectors, rows in lexicographic order (leftmost major)."""
    grids = np.meshgrid(*[np.arange(int(o)) for o in orders], indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, len(orders)).astype(np.int64)


@dataclass(eq=False)
class FiniteRing:
    """Finite commutative ring of prime-power order with unit b_0."""

    p: int
    orders: np.ndarray           # (m,) additive order p^{e_i} of b_i
    mult: np.ndarray             # (m,m,m) b_i * b_j = sum_k mult[i,j,k] b_k
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not is_prime(self.p):
            raise NonPrime(f"{self.p} is not prime")
        self.orders = np.asarray(self.orders, dtype=np.int64)
        self.mult = np.asarray(self.mult, dtype=np.int64)
        m = len(self.orders)
        if not self.names:
            self.names = tuple(f"b{i}" for i in range(m))
        for o in self.orders:
            e = int(o)
            while e % self.p == 0:
                e //= self.p
            if e != 1:
                raise ValidationError(f"additive order {int(o)} is not a power of {self.p}")
        if self.cardinality > MAX_RING_SIZE:
            raise ValidationError(f"ring of order {self.cardinality} exceeds cap {MAX_RING_SIZE}")
        if self.mult.shape != (m, m, m):
            raise ValidationError("multiplication table has wrong shape")
        if np.any(self.mult < 0) or np.any(self.mult >= self.orders[None, None, :]):
            raise ValidationError("multiplication table not canonically reduced")
        # bilinear extension must respect additive orders
        for side in (self.orders[:, None, None], self.orders[None, :, None]):
            if np.any((side * self.mult) % self.orders[None, None, :] != 0):
                raise ValidationError("multiplication table incompatible with additive orders")
        # b_0 is a two-sided unit
        eye = np.zeros((m, m), dtype=np.int64)
        np.fill_diagonal(eye, 1)
        if not np.array_equal(self.mult[0] % self.orders[None, :], eye % self.orders[None, :]):
            raise ValidationError("b_0 is not a left unit")
        if not np.array_equal(self.mult[:, 0] % self.orders[None, :], eye % self.orders[None, :]):
            raise ValidationError("b_0 is not a right unit")
        if not np.array_equal(self.mult, np.swapaxes(self.mult, 0, 1)):
            raise ValidationError("multiplication table is not commutative")
        lhs = np.einsum("ijx,xkw->ijkw", self.mult, self.mult) % self.orders
        rhs = np.einsum("jky,iyw->ijkw", self.mult, self.mult) % self.orders
        if not np.array_equal(lhs, rhs):
            raise ValidationError("multiplication table is not associative")

    # -- structural equality ------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteRing)
                and self.p == other.p
                and np.array_equal(self.orders, other.orders)
                and np.array_equal(self.mult, other.mult))

    __hash__ = object.__hash__

    # -- basic data ----------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.orders)

    @cached_property
    def cardinality(self) -> int:
        return int(np.prod([int(o) for o in self.orders]))

    @property
    def is_prime_field(self) -> bool:
        return self.m == 1 and int(self.orders[0]) == self.p

    def zero_vec(self) -> np.ndarray:
        return np.zeros(self.m, dtype=np.int64)

    def one_vec(self) -> np.ndarray:
        v = self.zero_vec()
        v[0] = 1 % int(self.orders[0])
        return v

    def from_int(self, c: int) -> np.ndarray:
        v = self.zero_vec()
        v[0] = c % int(self.orders[0])
        return v

    def reduce_vec(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=np.int64) % self.orders

    def add_vec(self, a, b) -> np.ndarray:
        return (np.asarray(a) + np.asarray(b)) % self.orders

    def neg_vec(self, a) -> np.ndarray:
        return (-np.asarray(a)) % self.orders

    def mul_vec(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(a, dtype=np.int64),
                         np.asarray(b, dtype=np.int64), self.mult) % self.orders

    def mul_many(self, elems: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Multiply every row of elems (n, m) by the single vector b."""
        return np.einsum("ni,j,ijk->nk", elems, np.asarray(b, dtype=np.int64),
                         self.mult) % self.orders

    def pow_vec(self, a, n: int) -> np.ndarray:
        r = self.one_vec()
        b = self.reduce_vec(a)
        while n > 0:
            if n & 1:
                r = self.mul_vec(r, b)
            b = self.mul_vec(b, b)
            n >>= 1
        return r

    def elements(self) -> np.ndarray:
        """(cardinality, m) array of all elements, lexicographic order."""
        return all_vectors(self.orders)

    def el(self, coeffs) -> "RingElement":
        return RingElement(self, tuple(int(c) for c in self.reduce_vec(np.asarray(coeffs))))

    def zero(self) -> "RingElement":
        return self.el(self.zero_vec())

    def one(self) -> "RingElement":
        return self.el(self.one_vec())

    # -- locality ------------------------------------------------------------

    @cached_property
    def nilpotent_vectors(self) -> np.ndarray:
        """All nilpotent elements, rows in lexicographic order."""
        elems = self.elements()
        powers = elems.copy()
        # x nilpotent iff x^(2^t) = 0 for 2^t >= cardinality
        steps = max(1, int(np.ceil(np.log2(max(2, self.cardinality)))))
        for _ in range(steps):
            powers = np.einsum("ni,nj,ijk->nk", powers, powers, self.mult) % self.orders
        mask = ~powers.any(axis=1)
        return elems[mask]

    def is_local(self) -> bool:
        """True iff the ring is local with residue field F_p."""
        nil = self.nilpotent_vectors
        nil_keys = {vec_key(v) for v in nil}
        # subgroup generated by the nilpotents, built by coset expansion
        span = {vec_key(self.zero_vec()): self.zero_vec()}
        for v in nil:
            if vec_key(v) in span:
                continue
            current = list(span.values())
            acc = v.copy()
            shells = []
            while vec_key(acc) not in span:
                shells.append(acc.copy())
                acc = self.add_vec(acc, v)
            for s in shells:
                for base in current:
                    w = self.add_vec(base, s)
                    span[vec_key(w)] = w
        if len(span) != len(nil_keys) or not nil_keys.issubset(span):
            return False
        return self.cardinality == self.p * len(nil_keys)

    def max_ideal_vectors(self) -> np.ndarray:
        if not self.is_local():
            raise NotLocal("ring is not local with residue field F_p")
        return self.nilpotent_vectors

    def is_unit_vec(self, v) -> bool:
        # in a finite commutative ring, x is a unit iff x^|R|... cheaper:
        # unit iff multiplication by x is injective; test via brute power
        v = self.reduce_vec(v)
        acc = v.copy()
        one = self.one_vec()
        for _ in range(self.cardinality):
            if np.array_equal(acc, one):
                return True
            acc = self.mul_vec(acc, v)
            if not acc.any():
                return False
        return False


@dataclass(frozen=True)
class RingElement:
    """Canonically reduced element of a FiniteRing."""

    ring: FiniteRing
    coeffs: tuple[int, ...]

    def _vec(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=np.int64)

    def _wrap(self, v) -> "RingElement":
        return RingElement(self.ring, tuple(int(c) for c in v))

    def __add__(self, other: "RingElement") -> "RingElement":
        return self._wrap(self.ring.add_vec(self._vec(), other._vec()))

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def __neg__(self) -> "RingElement":
        return self._wrap(self.ring.neg_vec(self._vec()))

    def __mul__(self, other: "RingElement") -> "RingElement":
        return self._wrap(self.ring.mul_vec(self._vec(), other._vec()))

    def __pow__(self, n: int) -> "RingElement":
        return self._wrap(self.ring.pow_vec(self._vec(), n))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self) -> str:
        terms = [f"{c}*{n}" for c, n in zip(self.coeffs, self.ring.names) if c]
        return " + ".join(terms) if terms else "0"


@dataclass(eq=False)
class RingSurjection:
    """Unital, additive, multiplicative surjection between finite rings."""

    source: FiniteRing
    target: FiniteRing
    images: np.ndarray           # (m_src, m_tgt): image of b_i in target coords

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.int64) % self.target.orders[None, :]
        if self.source.p != self.target.p:
            raise CharMismatch("source and target have different characteristic prime")
        if self.images.shape != (self.source.m, self.target.m):
            raise ValidationError("surjection image table has wrong shape")
        # additive well-definedness: o_i * image(b_i) = 0 in target
        bad = (self.source.orders[:, None] * self.images) % self.target.orders[None, :]
        if bad.any():
            raise ValidationError("map does not respect additive orders")
        if not np.array_equal(self.apply_vec(self.source.one_vec()), self.target.one_vec()):
            raise ValidationError("map is not unital")
        for i in range(self.source.m):
            for j in range(self.source.m):
                lhs = self.apply_vec(self.source.mult[i, j])
                rhs = self.target.mul_vec(self.images[i], self.images[j])
                if not np.array_equal(lhs, rhs):
                    raise ValidationError(f"map not multiplicative on (b{i}, b{j})")
        if self._image_size() != self.target.cardinality:
            raise NotSurjective("image does not cover the target")

    def _image_size(self) -> int:
        span = {vec_key(self.target.zero_vec()): self.target.zero_vec()}
        for i in range(self.source.m):
            v = self.images[i]
            if vec_key(v) in span:
                continue
            current = list(span.values())
            acc = v.copy()
            shells = []
            while vec_key(acc) not in span:
                shells.append(acc.copy())
                acc = self.target.add_vec(acc, v)
            for s in shells:
                for base in current:
                    w = self.target.add_vec(base, s)
                    span[vec_key(w)] = w
        return len(span)

    def apply_vec(self, v) -> np.ndarray:
        return (np.asarray(v, dtype=np.int64) @ self.images) % self.target.orders

    def apply_many(self, rows: np.ndarray) -> np.ndarray:
        return (rows @ self.images) % self.target.orders[None, :]

    def apply(self, x: RingElement) -> RingElement:
        return self.target.el(self.apply_vec(x._vec()))

    def compose(self, inner: "RingSurjection") -> "RingSurjection":
        """self o inner (inner first)."""
        if inner.target is not self.source and inner.target != self.source:
            raise TargetMismatch("composition endpoints do not match")
        return RingSurjection(inner.source, self.target, self.apply_many(inner.images))

    def kernel_vectors(self) -> np.ndarray:
        elems = self.source.elements()
        imgs = self.apply_many(elems)
        return elems[~imgs.any(axis=1)]


def minimal_section(surj: RingSurjection) -> dict[bytes, np.ndarray]:
    """target element -> lexicographically minimal preimage."""
    elems = surj.source.elements()  # lexicographic order
    imgs = surj.apply_many(elems)
    sec: dict[bytes, np.ndarray] = {}
    for row, img in zip(elems, imgs):
        k = vec_key(img)
        if k not in sec:
            sec[k] = row
    if len(sec) != surj.target.cardinality:
        raise NotSurjective("section construction found a missed target element")
    return sec


@dataclass(eq=False)
class Tower:
    """Chain Rbar -> R -> R0 = F_p with I = Ker(Rbar->R0), J = Ker(Rbar->R),
    I*J = 0, and a fixed minimal set-theoretic section sigma of Rbar -> R."""

    Rbar: FiniteRing
    R: FiniteRing
    R0: FiniteRing
    pibar: RingSurjection        # Rbar -> R
    pi: RingSurjection           # R -> R0
    pibar0: RingSurjection = field(init=False)
    jbasis: np.ndarray = field(init=False)       # (dimJ, m_bar)
    sigma: dict = field(init=False)              # R elem key -> Rbar vector
    sigma0: dict = field(init=False)             # R0 elem key -> Rbar vector
    sigma_mid: dict = field(init=False)          # R0 elem key -> R vector

    def __post_init__(self):
        if not (self.Rbar.p == self.R.p == self.R0.p):
            raise CharMismatch("tower rings disagree on p")
        if self.pibar.source != self.Rbar or self.pibar.target != self.R:
            raise TargetMismatch("pibar endpoints do not match the tower rings")
        if self.pi.source != self.R or self.pi.target != self.R0:
            raise TargetMismatch("pi endpoints do not match the tower rings")
        if not self.R0.is_prime_field:
            raise ValidationError("bottom ring must be the prime field F_p")
        for ring, name in ((self.Rbar, "Rbar"), (self.R, "R")):
            if not ring.is_local():
                raise NotLocal(f"{name} is not local with residue field F_p")
        self.pibar0 = self.pi.compose(self.pibar)

        jvecs = self.pibar.kernel_vectors()
        # J is an F_p-vector space (killed by I, in particular by p)
        if ((self.p * jvecs) % self.Rbar.orders[None, :]).any():
            raise ValidationError("Ker(Rbar -> R) is not killed by p")
        self._phi_scale = (self.Rbar.orders // self.p).astype(np.int64)
        # x -> x / p^(e-1) embeds J into F_p^m
        if (jvecs % self._phi_scale[None, :]).any():
            raise ValidationError("kernel element with unexpected coordinates")
        self.jbasis = self._greedy_fp_basis(jvecs)
        if self.p ** len(self.jbasis) != len(jvecs):
            raise ValidationError("J basis size inconsistent with |J|")

        ivecs = self.pibar0.kernel_vectors()
        for j in self.jbasis:
            prods = self.Rbar.mul_many(ivecs, j)
            if prods.any():
                i_bad = ivecs[prods.any(axis=1)][0]
                raise IJNonzero(
                    f"I*J != 0: {list(map(int, i_bad))} * {list(map(int, j))} != 0")

        self._jcoords = self._index_j()
        self.sigma = minimal_section(self.pibar)
        self.sigma0 = minimal_section(self.pibar0)
        self.sigma_mid = minimal_section(self.pi)
        # precompute j_s * sigma0(c) for c in F_p (used to rebuild kernel elements)
        self._jmul = np.zeros((len(self.jbasis), self.p, self.Rbar.m), dtype=np.int64)
        for s, j in enumerate(self.jbasis):
            for c in range(self.p):
                lift = self.sigma0[vec_key(self.R0.from_int(c))]
                self._jmul[s, c] = self.Rbar.mul_vec(j, lift)

    @property
    def p(self) -> int:
        return self.R0.p

    @property
    def dimJ(self) -> int:
        return len(self.jbasis)

    def _phi(self, v: np.ndarray) -> np.ndarray:
        return (v // self._phi_scale) % self.p

    def _greedy_fp_basis(self, vecs: np.ndarray) -> np.ndarray:
        basis: list[np.ndarray] = []
        if len(vecs) == 0:
            return np.zeros((0, self.Rbar.m), dtype=np.int64)
        current = np.zeros((0, self.Rbar.m), dtype=np.int64)
        r = 0
        for v in vecs:
            if not v.any():
                continue
            cand = np.vstack([current, self._phi(v)[None, :]])
            if gf.rank(cand, self.p) > r:
                basis.append(v.copy())
                current = cand
                r += 1
        return (np.stack(basis) if basis
                else np.zeros((0, self.Rbar.m), dtype=np.int64))

    def _index_j(self) -> dict[bytes, np.ndarray]:
        coords: dict[bytes, np.ndarray] = {}
        for lam in itertools.product(range(self.p), repeat=self.dimJ):
            v = self.Rbar.zero_vec()
            for c, j in zip(lam, self.jbasis):
                v = self.Rbar.add_vec(v, (c * j) % self.Rbar.orders)
            coords[vec_key(v)] = np.asarray(lam, dtype=np.int64)
        return coords

    # -- kernel coordinates at the ring level --------------------------------

    def j_coords(self, v: np.ndarray) -> np.ndarray | None:
        """F_p coordinates of v in the J basis, or None if v is not in J."""
        return self._jcoords.get(vec_key(np.asarray(v, dtype=np.int64)))

    def j_reconstruct(self, lam: np.ndarray) -> np.ndarray:
        v = self.Rbar.zero_vec()
        for s, c in enumerate(lam):
            v = self.Rbar.add_vec(v, self._jmul[s, int(c) % self.p])
        return v

    def sigma_vec(self, v) -> np.ndarray:
        """Minimal lift R -> Rbar."""
        return self.sigma[vec_key(np.asarray(v, dtype=np.int64))]

    def sigma0_vec(self, v) -> np.ndarray:
        """Minimal lift R0 -> Rbar."""
        return self.sigma0[vec_key(np.asarray(v, dtype=np.int64))]

    def sigma_mid_vec(self, v) -> np.ndarray:
        """Minimal lift R0 -> R."""
        return self.sigma_mid[vec_key(np.asarray(v, dtype=np.int64))]


# ---------------------------------------------------------------------------
# built-in tower constructors
# ---------------------------------------------------------------------------

def zmod_ring(p: int, a: int) -> FiniteRing:
    return FiniteRing(p, np.array([p ** a]), np.array([[[1 % p ** a]]]), ("1",))


def trunc_poly_ring(p: int, a: int) -> FiniteRing:
    mult = np.zeros((a, a, a), dtype=np.int64)
    for i in range(a):
        for j in range(a):
            if i + j < a:
                mult[i, j, i + j] = 1
    names = tuple("1" if i == 0 else f"t^{i}" if i > 1 else "t" for i in range(a))
    return FiniteRing(p, np.full(a, p), mult, names)


def square_zero_ring(p: int, r: int) -> FiniteRing:
    m = r + 1
    mult = np.zeros((m, m, m), dtype=np.int64)
    for j in range(m):
        mult[0, j, j] = 1
        mult[j, 0, j] = 1
    names = ("1",) + tuple(f"x{i}" for i in range(1, m))
    return FiniteRing(p, np.full(m, p), mult, names)


def _zmod_proj(p: int, a: int, b: int) -> RingSurjection:
    return RingSurjection(zmod_ring(p, a), zmod_ring(p, b), np.array([[1]]))


def _trunc_proj(p: int, a: int, b: int) -> RingSurjection:
    images = np.zeros((a, b), dtype=np.int64)
    for i in range(min(a, b)):
        images[i, i] = 1
    return RingSurjection(trunc_poly_ring(p, a), trunc_poly_ring(p, b), images)


def mk_tower(kind: str, p: int, max_p: int = 7, **params) -> Tower:
    """Build one of the built-in towers, or wrap custom data.

    kinds: zmod(a, b): Z/p^a -> Z/p^b -> F_p;
           trunc_poly(a, b): F_p[t]/(t^a) -> F_p[t]/(t^b) -> F_p;
           square_zero(r): F_p[x_1..x_r]/(x)^2 -> F_p -> F_p;
           custom(Rbar, R, R0, pibar, pi).
    """
    if not is_prime(p):
        raise NonPrime(f"{p} is not prime")
    if p > max_p:
        raise ValidationError(f"p={p} exceeds the performance cap {max_p}")
    if kind == "zmod":
        a, b = int(params["a"]), int(params["b"])
        if not (a >= b >= 1):
            raise ValidationError("zmod requires a >= b >= 1")
        return Tower(zmod_ring(p, a), zmod_ring(p, b), zmod_ring(p, 1),
                     _zmod_proj(p, a, b), _zmod_proj(p, b, 1))
    if kind == "trunc_poly":
        a, b = int(params["a"]), int(params["b"])
        if not (a >= b >= 1):
            raise ValidationError("trunc_poly requires a >= b >= 1")
        return Tower(trunc_poly_ring(p, a), trunc_poly_ring(p, b), trunc_poly_ring(p, 1),
                     _trunc_proj(p, a, b), _trunc_proj(p, b, 1))
    if kind == "square_zero":
        r = int(params["r"])
        ring = square_zero_ring(p, r)
        fp = zmod_ring(p, 1)
        images = np.zeros((r + 1, 1), dtype=np.int64)
        images[0, 0] = 1
        proj = RingSurjection(ring, fp, images)
        ident = RingSurjection(fp, fp, np.array([[1]]))
        return Tower(ring, fp, fp, proj, ident)
    if kind == "custom":
        return Tower(params["Rbar"], params["R"], params["R0"],
                     params["pibar"], params["pi"])
    raise ValidationError(f"unknown tower kind {kind!r}")


# ---------------------------------------------------------------------------
# fiber products
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FiberProduct:
    ring: FiniteRing
    proj1: RingSurjection
    proj2: RingSurjection
    # coordinates of an arbitrary compatible pair in the new basis
    _coords: dict = field(repr=False, default=None)

    def coords_of_pair(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        key = vec_key(np.concatenate([np.asarray(a, dtype=np.int64),
                                      np.asarray(b, dtype=np.int64)]))
        if key not in self._coords:
            raise ValidationError("pair is not compatible over the common target")
        return self._coords[key]


def _group_basis(elems: list[np.ndarray], add, orders_fn) -> list[np.ndarray]:
    """Basis of a finite abelian p-group given by exhaustive enumeration.

    elems must contain the zero vector; add is componentwise; orders_fn gives
    the additive order of an element.  The first returned element is the one
    passed first among maximal-order elements (callers put the ring unit
    first, which always has maximal additive order).
    """
    if len(elems) == 1:
        return []
    orders = [orders_fn(v) for v in elems]
    omax = max(orders)
    g = elems[next(i for i, o in enumerate(orders) if o == omax)]
    # cyclic subgroup <g>
    sub = [np.zeros_like(g)]
    acc = g.copy()
    while acc.any():
        sub.append(acc.copy())
        acc = add(acc, g)
    subkeys = {vec_key(v) for v in sub}
    # quotient: canonical representative = lexicographically smallest in coset
    rep_of: dict[bytes, bytes] = {}
    reps: dict[bytes, np.ndarray] = {}
    for v in elems:
        if vec_key(v) in rep_of:
            continue
        coset = [add(v, s) for s in sub]
        best = min(coset, key=lambda w: tuple(int(x) for x in w))
        bk = vec_key(best)
        reps[bk] = best
        for w in coset:
            rep_of[vec_key(w)] = bk

    def addq(a, b):
        return reps[rep_of[vec_key(add(a, b))]]

    def orderq(v):
        # order of coset: smallest t with t*v in <g>
        t = 1
        acc = v.copy()
        while vec_key(acc) not in subkeys:
            acc = add(acc, v)
            t += 1
        return t

    qelems = list(reps.values())
    qbasis = _group_basis(qelems, addq, orderq)
    lifted = []
    for h in qbasis:
        target_order = orderq(h)
        best = None
        for s in sub:
            cand = add(h, s)
            if orders_fn(cand) == target_order:
                if best is None or tuple(map(int, cand)) < tuple(map(int, best)):
                    best = cand
        lifted.append(best)
    return [g] + lifted


def ring_fiber_product(f1: RingSurjection, f2: RingSurjection) -> FiberProduct:
    """Fiber product of f1: R' -> R and f2: R'' -> R, with its projections."""
    if f1.target != f2.target:
        raise TargetMismatch("fiber product needs a common target")
    if f1.source.p != f2.source.p:
        raise CharMismatch("fiber product factors have different characteristic")
    R1, R2 = f1.source, f2.source
    joint_orders = np.concatenate([R1.orders, R2.orders])

    fibers: dict[bytes, list[np.ndarray]] = {}
    e2 = R2.elements()
    for row, img in zip(e2, f2.apply_many(e2)):
        fibers.setdefault(vec_key(img), []).append(row)
    pairs: list[np.ndarray] = []
    e1 = R1.elements()
    for row, img in zip(e1, f1.apply_many(e1)):
        for b in fibers.get(vec_key(img), ()):
            pairs.append(np.concatenate([row, b]))
    if len(pairs) > MAX_RING_SIZE:
        raise ValidationError("fiber product exceeds the ring size cap")

    def add(a, b):
        return (a + b) % joint_orders

    def order_of(v):
        t = 1
        acc = v.copy()
        while acc.any():
            acc = add(acc, v)
            t += 1
        return t

    one = np.concatenate([R1.one_vec(), R2.one_vec()])
    zero = np.zeros_like(one)
    # put the unit first so the greedy picks it as the leading basis vector
    rest = sorted((v for v in pairs if not np.array_equal(v, one)),
                  key=lambda w: tuple(int(x) for x in w))
    ordered = [zero] + [one] + [v for v in rest if v.any()]
    # _group_basis wants zero present exactly once; `rest` keeps other elements
    elems = []
    seen = set()
    for v in ordered:
        k = vec_key(v)
        if k not in seen:
            seen.add(k)
            elems.append(v)
    basis = _group_basis(elems, add, order_of)
    if basis and not np.array_equal(basis[0], one):
        raise ValidationError("fiber product basis does not start at the unit")
    if not basis:
        raise ValidationError("fiber product is the zero ring")

    borders = np.array([order_of(v) for v in basis], dtype=np.int64)
    # coordinates of every element
    coords: dict[bytes, np.ndarray] = {}
    for combo in itertools.product(*[range(int(o)) for o in borders]):
        v = zero.copy()
        for c, b in zip(combo, basis):
            v = add(v, (c * b) % joint_orders)
        coords[vec_key(v)] = np.asarray(combo, dtype=np.int64)
    if len(coords) != len(elems):
        raise ValidationError("fiber product basis does not span")

    m1 = R1.m
    def mulp(a, b):
        return np.concatenate([R1.mul_vec(a[:m1], b[:m1]), R2.mul_vec(a[m1:], b[m1:])])

    k = len(basis)
    mult = np.zeros((k, k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            mult[i, j] = coords[vec_key(mulp(basis[i], basis[j]))]
    ring = FiniteRing(f1.source.p, borders, mult)
    img1 = np.stack([b[:m1] for b in basis])
    img2 = np.stack([b[m1:] for b in basis])
    proj1 = RingSurjection(ring, R1, img1)
    proj2 = RingSurjection(ring, R2, img2)
    return FiberProduct(ring, proj1, proj2, coords)


def factor_through_fiber_product(fp: FiberProduct, g1: RingSurjection,
                                 g2: RingSurjection) -> np.ndarray:
    """The map Q -> P induced by compatible g1: Q -> R', g2: Q -> R''.

    Returns the image table of the factoring map and verifies, exhaustively,
    that it is a unital ring map commuting with the projections.
    """
    if g1.source != g2.source:
        raise TargetMismatch("factoring maps need a common source")
    Q = g1.source
    images = np.stack([
        fp.coords_of_pair(g1.images[i], g2.images[i]) for i in range(Q.m)
    ])
    # verifying via RingSurjection machinery minus surjectivity
    P = fp.ring

    def h(v):
        return (np.asarray(v, dtype=np.int64) @ images) % P.orders

    if not np.array_equal(h(Q.one_vec()), P.one_vec()):
        raise ValidationError("factoring map is not unital")
    for x in Q.elements():
        if not np.array_equal(fp.proj1.apply_vec(h(x)), g1.apply_vec(x)):
            raise ValidationError("factoring map does not commute with proj1")
        if not np.array_equal(fp.proj2.apply_vec(h(x)), g2.apply_vec(x)):
            raise ValidationError("factoring map does not commute with proj2")
    for i in range(Q.m):
        for j in range(Q.m):
            lhs = h(Q.mult[i, j])
            rhs = P.mul_vec(images[i], images[j])
            if not np.array_equal(lhs, rhs):
                raise ValidationError("factoring map is not multiplicative")
    return images
