"""Bounded cochain complexes of free modules over a LevelAlgebra.

Objects are graded ranks with finite support; morphisms of degree n are
families of matrices f_i : C_i -> D_{i+n}.  Composition is (g o f)_i =
g_{i+|f|} f_i and the differential on graded maps is

    delta(f)_i = d_{D, i+n} f_i - (-1)^n f_{i+1} d_{C, i}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDimensions,
    CapExceeded,
    LevelMismatch,
    NotADifferential,
    NotAHomotopy,
    NotCochainMap,
    ShapeMismatch,
)
from .algebra import AlgMatrix, DeformedAlgebra, LevelAlgebra


@dataclass(frozen=True)
class GradedObject:
    """Finitely supported graded ranks."""

    ranks: tuple[tuple[int, int], ...]   # sorted ((degree, rank), ...)

    @staticmethod
    def of(ranks: dict[int, int]) -> "GradedObject":
        items = tuple(sorted((int(i), int(r)) for i, r in ranks.items() if r))
        for _, r in items:
            if r < 0:
                raise BadDimensions("ranks must be nonnegative")
        return GradedObject(items)

    def rank(self, i: int) -> int:
        for d, r in self.ranks:
            if d == i:
                return r
        return 0

    @property
    def support(self) -> list[int]:
        return [d for d, _ in self.ranks]

    @property
    def min_deg(self) -> int:
        return self.ranks[0][0] if self.ranks else 0

    @property
    def max_deg(self) -> int:
        return self.ranks[-1][0] if self.ranks else 0

    def shift(self, s: int) -> "GradedObject":
        return GradedObject(tuple((d + s, r) for d, r in self.ranks))

    def direct_sum(self, other: "GradedObject") -> "GradedObject":
        degs = set(self.support) | set(other.support)
        return GradedObject.of({d: self.rank(d) + other.rank(d) for d in degs})


@dataclass(eq=False)
class GradedMap:
    """Degree-n map between graded objects, components f_i : src_i -> tgt_{i+n}."""

    alg: LevelAlgebra
    src: GradedObject
    tgt: GradedObject
    degree: int
    comps: dict[int, AlgMatrix] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for i, mat in self.comps.items():
            r, c = self.tgt.rank(i + self.degree), self.src.rank(i)
            if mat.alg != self.alg:
                raise LevelMismatch("component lives over the wrong algebra")
            if (mat.rows, mat.cols) != (r, c):
                raise ShapeMismatch(
                    f"component at degree {i} is {mat.rows}x{mat.cols}, "
                    f"expected {r}x{c}")
            if r and c and not mat.is_zero():
                cleaned[int(i)] = mat
        self.comps = cleaned

    def support(self) -> list[int]:
        """Degrees where a component can be nonzero (by ranks)."""
        return sorted(i for i in self.src.support
                      if self.tgt.rank(i + self.degree) > 0)

    def comp(self, i: int) -> AlgMatrix:
        if i in self.comps:
            return self.comps[i]
        return self.alg.zeros(self.tgt.rank(i + self.degree), self.src.rank(i))

    def _like(self, comps: dict[int, AlgMatrix]) -> "GradedMap":
        return GradedMap(self.alg, self.src, self.tgt, self.degree, comps)

    def __add__(self, other: "GradedMap") -> "GradedMap":
        self._check_parallel(other)
        return self._like({i: self.comp(i) + other.comp(i) for i in self.support()})

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        self._check_parallel(other)
        return self._like({i: self.comp(i) - other.comp(i) for i in self.support()})

    def __neg__(self) -> "GradedMap":
        return self._like({i: -m for i, m in self.comps.items()})

    def scale(self, c: int) -> "GradedMap":
        return self._like({i: m.scale(c) for i, m in self.comps.items()})

    def _check_parallel(self, other: "GradedMap"):
        if (self.alg != other.alg or self.src != other.src
                or self.tgt != other.tgt or self.degree != other.degree):
            raise ShapeMismatch("graded maps are not parallel")

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.comps.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        if (self.alg != other.alg or self.src != other.src
                or self.tgt != other.tgt or self.degree != other.degree):
            return False
        return all(self.comp(i) == other.comp(i) for i in self.support())

    __hash__ = None

    def __repr__(self) -> str:
        return (f"GradedMap(deg={self.degree}, "
                f"support={sorted(self.comps)})")


def zero_map(alg: LevelAlgebra, src: GradedObject, tgt: GradedObject,
             degree: int) -> GradedMap:
    return GradedMap(alg, src, tgt, degree, {})


def identity_map(alg: LevelAlgebra, ob: GradedObject) -> GradedMap:
    return GradedMap(alg, ob, ob, 0,
                     {d: alg.eye(r) for d, r in ob.ranks})


def compose(g: GradedMap, f: GradedMap) -> GradedMap:
    """g o f, degree |g| + |f|, components (g o f)_i = g_{i+|f|} f_i."""
    if f.alg != g.alg or f.tgt != g.src:
        raise ShapeMismatch("composition endpoints do not match")
    n = f.degree + g.degree
    comps = {}
    for i in f.support():
        if g.tgt.rank(i + n) > 0:
            comps[i] = g.comp(i + f.degree) @ f.comp(i)
    return GradedMap(f.alg, f.src, g.tgt, n, comps)


def delta(f: GradedMap, dC: GradedMap, dD: GradedMap) -> GradedMap:
    """delta(f) = dD o f - (-1)^|f| f o dC."""
    if dC.src != f.src or dD.src != f.tgt:
        raise ShapeMismatch("differentials do not match the map endpoints")
    sign = -1 if f.degree % 2 == 0 else 1
    return compose(dD, f) + compose(f, dC).scale(sign)


@dataclass(eq=False)
class PreComplex:
    """Graded object with a degree-1 endomorphism, d^2 = 0 not required."""

    alg: LevelAlgebra
    ob: GradedObject
    d: GradedMap

    def __post_init__(self):
        if self.d.alg != self.alg or self.d.src != self.ob or self.d.tgt != self.ob:
            raise ShapeMismatch("differential must be an endomorphism of the object")
        if self.d.degree != 1:
            raise ShapeMismatch("differential must have degree 1")

    def d_square(self) -> GradedMap:
        return compose(self.d, self.d)

    def is_complex(self) -> bool:
        return self.d_square().is_zero()


class Complex(PreComplex):
    """PreComplex with d^2 = 0 enforced."""

    def __post_init__(self):
        super().__post_init__()
        sq = self.d_square()
        if not sq.is_zero():
            bad = [i for i in sq.support() if not sq.comp(i).is_zero()]
            raise NotADifferential(f"d^2 != 0 at degrees {bad}")


def check_cochain_map(f: GradedMap, dC: GradedMap, dD: GradedMap):
    if f.degree != 0:
        raise NotCochainMap("cochain maps have degree 0")
    df = delta(f, dC, dD)
    if not df.is_zero():
        bad = [i for i in df.support() if not df.comp(i).is_zero()]
        raise NotCochainMap(f"d f != f d at degrees {bad}")


def check_homotopy(h: GradedMap, f: GradedMap, g: GradedMap,
                   dC: GradedMap, dD: GradedMap):
    """h is a homotopy from f to g: delta(h) = g - f."""
    if h.degree != f.degree - 1:
        raise NotAHomotopy("homotopy degree must be one below the maps")
    if delta(h, dC, dD) != g - f:
        raise NotAHomotopy("delta(h) != g - f")


# ---------------------------------------------------------------------------
# moving graded maps between tower levels
# ---------------------------------------------------------------------------

_REDUCERS = {
    ("bar", "mid"): "reduce_bar_to_mid",
    ("bar", "base"): "reduce_bar_to_base",
    ("mid", "base"): "reduce_mid_to_base",
}
_LIFTERS = {
    ("mid", "bar"): "lift_mid_to_bar",
    ("base", "bar"): "lift_base_to_bar",
    ("base", "mid"): "lift_base_to_mid",
}


def map_reduce(defalg: DeformedAlgebra, f: GradedMap, src: str, dst: str) -> GradedMap:
    """Push a graded map down the tower (coefficientwise)."""
    fn = getattr(defalg, _REDUCERS[(src, dst)])
    tgt_alg = defalg.level(dst)
    return GradedMap(tgt_alg, f.src, f.tgt, f.degree,
                     {i: fn(m) for i, m in f.comps.items()})


def map_lift(defalg: DeformedAlgebra, f: GradedMap, src: str, dst: str) -> GradedMap:
    """Lift a graded map up the tower by the minimal set-theoretic section."""
    fn = getattr(defalg, _LIFTERS[(src, dst)])
    tgt_alg = defalg.level(dst)
    comps = {}
    for i in f.support():
        comps[i] = fn(f.comp(i))
    return GradedMap(tgt_alg, f.src, f.tgt, f.degree, comps)


# ---------------------------------------------------------------------------
# the Hom complex over the base field
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class HomComplex:
    """Hom(C, D) as a complex of F_p-vector spaces at the base level.

    Degree-n flattening order: graded degree i (ascending over the support),
    then row-major matrix entries, then algebra basis index.
    """

    alg: LevelAlgebra          # base level (ring = F_p)
    obC: GradedObject
    obD: GradedObject
    dC: GradedMap              # base differential of C
    dD: GradedMap              # base differential of D

    def __post_init__(self):
        if self.alg.ring.m != 1:
            raise LevelMismatch("HomComplex lives at the base (prime field) level")
        self.p = self.alg.ring.p

    def support(self, n: int) -> list[int]:
        return sorted(i for i in self.obC.support if self.obD.rank(i + n) > 0)

    def dim(self, n: int) -> int:
        return sum(self.obD.rank(i + n) * self.obC.rank(i) * self.alg.k
                   for i in self.support(n))

    def degree_range(self) -> range:
        """Degrees n with possibly nonzero Hom^n."""
        if not self.obC.ranks or not self.obD.ranks:
            return range(0)
        return range(self.obD.min_deg - self.obC.max_deg,
                     self.obD.max_deg - self.obC.min_deg + 1)

    def flatten(self, f: GradedMap) -> np.ndarray:
        parts = [f.comp(i).data.reshape(-1) for i in self.support(f.degree)]
        if not parts:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(parts) % self.p

    def unflatten(self, vec: np.ndarray, n: int) -> GradedMap:
        vec = np.asarray(vec, dtype=np.int64) % self.p
        if vec.shape != (self.dim(n),):
            raise ShapeMismatch(f"expected a vector of length {self.dim(n)}")
        comps = {}
        pos = 0
        for i in self.support(n):
            r, c = self.obD.rank(i + n), self.obC.rank(i)
            size = r * c * self.alg.k
            block = vec[pos:pos + size].reshape(r, c, self.alg.k, 1)
            comps[i] = AlgMatrix(self.alg, block)
            pos += size
        return GradedMap(self.alg, self.obC, self.obD, n, comps)

    def delta_map(self, f: GradedMap) -> GradedMap:
        return delta(f, self.dC, self.dD)

    def delta_matrix(self, n: int) -> np.ndarray:
        """Matrix of delta: Hom^n -> Hom^{n+1} in the flattening bases."""
        dn, dn1 = self.dim(n), self.dim(n + 1)
        out = np.zeros((dn1, dn), dtype=np.int64)
        for j in range(dn):
            e = np.zeros(dn, dtype=np.int64)
            e[j] = 1
            out[:, j] = self.flatten(self.delta_map(self.unflatten(e, n)))
        return out


def count_graded_maps(ring_card: int, alg_k: int, obC: GradedObject,
                      obD: GradedObject, n: int) -> int:
    entries = sum(obD.rank(i + n) * obC.rank(i) for i in obC.support)
    return ring_card ** (entries * alg_k)


def enumerate_graded_maps(alg: LevelAlgebra, obC: GradedObject,
                          obD: GradedObject, n: int, cap: int):
    """Yield every degree-n graded map over `alg`, in lexicographic order.

    Raises CapExceeded before yielding anything if the count exceeds cap.
    """
    total = count_graded_maps(alg.ring.cardinality, alg.k, obC, obD, n)
    if total > cap:
        raise CapExceeded(f"{total} graded maps exceed the cap {cap}")
    support = sorted(i for i in obC.support if obD.rank(i + n) > 0)
    shapes = [(i, obD.rank(i + n), obC.rank(i)) for i in support]
    ncoef = sum(r * c for _, r, c in shapes) * alg.k
    orders = np.tile(alg.ring.orders, ncoef)
    for idx in range(total):
        digits = np.zeros(len(orders), dtype=np.int64)
        rem = idx
        for t in range(len(orders) - 1, -1, -1):
            digits[t] = rem % int(orders[t])
            rem //= int(orders[t])
        comps = {}
        pos = 0
        m = alg.ring.m
        for i, r, c in shapes:
            size = r * c * alg.k * m
            comps[i] = AlgMatrix(alg, digits[pos:pos + size].reshape(r, c, alg.k, m))
            pos += size
        yield GradedMap(alg, obC, obD, n, comps)
