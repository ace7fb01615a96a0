"""Cohomology of the kernel complex J (x) Hom(C0, D0) over F_p.

Graded maps whose coefficients lie in J = Ker(Rbar -> R) form, in each
degree, an F_p-vector space isomorphic to dimJ copies of the base-level Hom
space.  Because I*J = 0, composing such a map with bar-level differentials
only depends on the base reductions of the latter, so the complex carries the
differential id_J (x) delta_0.  All cohomology classes get canonical
representatives (reduction against the row-reduced coboundary space), which
keeps reports deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf
from .algebra import DeformedAlgebra
from .complexes import GradedMap, HomComplex
from .errors import NotACocycle, ShapeMismatch


@dataclass(frozen=True)
class CohClass:
    """Cohomology class in degree n with its canonical representative."""

    n: int
    rep: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return not any(self.rep)

    def vec(self) -> np.ndarray:
        return np.asarray(self.rep, dtype=np.int64)

    def __repr__(self) -> str:
        return f"CohClass(n={self.n}, rep={list(self.rep)})"


@dataclass(eq=False)
class KernelComplex:
    """J (x) Hom(C0, D0) with differential id_J (x) delta_0.

    Flattening order in degree n: J-basis index (major), then the HomComplex
    order (graded degree, row-major entries, algebra basis).
    """

    defalg: DeformedAlgebra
    hom: HomComplex

    def __post_init__(self):
        self.p = self.defalg.p
        self.dimJ = self.defalg.tower.dimJ
        self._dmat: dict[int, np.ndarray] = {}
        self._cobound: dict[int, tuple[np.ndarray, list[int]]] = {}

    def dim(self, n: int) -> int:
        return self.dimJ * self.hom.dim(n)

    def delta_matrix(self, n: int) -> np.ndarray:
        if n not in self._dmat:
            eye = np.eye(self.dimJ, dtype=np.int64)
            self._dmat[n] = np.kron(eye, self.hom.delta_matrix(n))
        return self._dmat[n]

    # -- moving between graded maps and coordinate vectors -----------------

    def into_kernel(self, f: GradedMap) -> np.ndarray:
        """Coordinates of a bar-level graded map with J coefficients."""
        n = f.degree
        parts = []
        for i in self.hom.support(n):
            mat = f.comp(i)
            coords = self.defalg.kernel_coords(mat).reshape(self.dimJ, -1)
            parts.append(coords)
        if not parts:
            return np.zeros(self.dim(n), dtype=np.int64)
        return np.concatenate(parts, axis=1).reshape(-1)

    def out_of_kernel(self, vec: np.ndarray, n: int) -> GradedMap:
        vec = np.asarray(vec, dtype=np.int64) % self.p
        if vec.shape != (self.dim(n),):
            raise ShapeMismatch(f"expected a vector of length {self.dim(n)}")
        coords = vec.reshape(self.dimJ, self.hom.dim(n))
        comps = {}
        pos = 0
        k = self.defalg.k
        for i in self.hom.support(n):
            r, c = self.hom.obD.rank(i + n), self.hom.obC.rank(i)
            size = r * c * k
            block = coords[:, pos:pos + size]
            comps[i] = self.defalg.kernel_matrix(block.reshape(-1), r, c)
            pos += size
        return GradedMap(self.defalg.bar, self.hom.obC, self.hom.obD, n, comps)

    # -- cohomology ----------------------------------------------------------

    def is_cocycle(self, vec: np.ndarray, n: int) -> bool:
        return not ((self.delta_matrix(n) @ (vec % self.p)) % self.p).any()

    def coboundary_space(self, n: int) -> tuple[np.ndarray, list[int]]:
        """Row-reduced basis of the degree-n coboundaries, with pivots."""
        if n not in self._cobound:
            img = self.delta_matrix(n - 1).T   # images as rows
            self._cobound[n] = gf.row_space(img, self.p)
        return self._cobound[n]

    def coh_class(self, vec: np.ndarray, n: int) -> CohClass:
        vec = np.asarray(vec, dtype=np.int64) % self.p
        if not self.is_cocycle(vec, n):
            raise NotACocycle(f"vector is not a degree-{n} cocycle")
        red, pivots = self.coboundary_space(n)
        rep = gf.reduce_mod_rowspace(vec, red, pivots, self.p)
        return CohClass(n, tuple(int(x) for x in rep))

    def solve_coboundary(self, vec: np.ndarray, n: int) -> np.ndarray | None:
        """x with delta(x) = vec (x in degree n-1), or None."""
        vec = np.asarray(vec, dtype=np.int64) % self.p
        return gf.solve(self.delta_matrix(n - 1), vec, self.p)

    def h_dim(self, n: int) -> int:
        cocycles = self.dim(n) - gf.rank(self.delta_matrix(n), self.p)
        cobound = gf.rank(self.delta_matrix(n - 1), self.p)
        return cocycles - cobound

    def h_basis(self, n: int) -> list[np.ndarray]:
        """Canonical representatives of a basis of H^n."""
        Z = gf.nullspace(self.delta_matrix(n), self.p)
        red, pivots = self.coboundary_space(n)
        out: list[np.ndarray] = []
        current = red
        r = gf.rank(current, self.p)
        for z in Z:
            rep = gf.reduce_mod_rowspace(z, red, pivots, self.p)
            if not rep.any():
                continue
            cand = np.vstack([current, rep[None, :]])
            if gf.rank(cand, self.p) > r:
                out.append(rep)
                current = cand
                r += 1
        return out

    def all_classes(self, n: int) -> list[CohClass]:
        """All of H^n, canonical representatives, lexicographic digit order."""
        basis = self.h_basis(n)
        h = len(basis)
        red, pivots = self.coboundary_space(n)
        classes = []
        for idx in range(self.p ** h):
            digits = np.zeros(h, dtype=np.int64)
            rem = idx
            for s in range(h):
                digits[s] = rem % self.p
                rem //= self.p
            vec = np.zeros(self.dim(n), dtype=np.int64)
            for c, b in zip(digits, basis):
                vec = (vec + c * b) % self.p
            rep = gf.reduce_mod_rowspace(vec, red, pivots, self.p)
            classes.append(CohClass(n, tuple(int(x) for x in rep)))
        return classes

    # -- consistency helper ----------------------------------------------

    def delta_via_bar(self, vec: np.ndarray, n: int, dbarC: GradedMap,
                      dbarD: GradedMap) -> np.ndarray:
        """Apply delta using bar-level graded lifts of the differentials.

        Must agree with delta_matrix(n) @ vec for any choice of graded lifts;
        exposed so that independence can be checked on concrete data.
        """
        from .complexes import delta as _delta
        f = self.out_of_kernel(vec, n)
        return self.into_kernel(_delta(f, dbarC, dbarD))


def kernel_complex(defalg: DeformedAlgebra, obC, obD, dC0: GradedMap,
                   dD0: GradedMap) -> KernelComplex:
    hom = HomComplex(defalg.base, obC, obD, dC0, dD0)
    return KernelComplex(defalg, hom)
