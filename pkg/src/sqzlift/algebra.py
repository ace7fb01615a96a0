"""Matrix categories over a finite algebra, at the three tower levels.

A LevelAlgebra is a free module over a FiniteRing with basis e_0, ..,
e_{k-1} and structure constants e_i * e_j = sum_l struct[i,j,l] e_l (each
struct[i,j,l] a ring coefficient vector).  Elements are (k, m) int arrays;
matrices over the algebra are (rows, cols, k, m) arrays.  A DeformedAlgebra
packages the same structure constants read over Rbar, R and R0, together
with the reduction and section maps between the levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    BadDimensions,
    LevelMismatch,
    NotAssociative,
    NotInKernel,
    NotUnital,
    ShapeMismatch,
    ValidationError,
)
from .finring import FiniteRing, RingSurjection, Tower, vec_key


@dataclass(eq=False)
class LevelAlgebra:
    """Associative unital algebra over a FiniteRing, with fixed basis."""

    ring: FiniteRing
    struct: np.ndarray        # (k, k, k, m)
    unit: np.ndarray          # (k, m) coefficients of 1

    def __post_init__(self):
        self.struct = np.asarray(self.struct, dtype=np.int64) % self.ring.orders
        self.unit = np.asarray(self.unit, dtype=np.int64) % self.ring.orders
        k = self.struct.shape[0]
        if self.struct.shape != (k, k, k, self.ring.m):
            raise BadDimensions("structure constants have wrong shape")
        if self.unit.shape != (k, self.ring.m):
            raise BadDimensions("unit has wrong shape")
        mult = self.ring.mult
        lhs = np.einsum("ijxu,xklv,uvw->ijklw", self.struct, self.struct,
                        mult) % self.ring.orders
        rhs = np.einsum("jkyv,iylu,uvw->ijklw", self.struct, self.struct,
                        mult) % self.ring.orders
        if not np.array_equal(lhs, rhs):
            raise NotAssociative("structure constants are not associative")
        eye = np.zeros((k, k, self.ring.m), dtype=np.int64)
        for i in range(k):
            eye[i, i] = self.ring.one_vec()
        left = np.einsum("iu,ijlv,uvw->jlw", self.unit, self.struct,
                         mult) % self.ring.orders
        right = np.einsum("ju,ijlv,uvw->ilw", self.unit, self.struct,
                          mult) % self.ring.orders
        if not (np.array_equal(left, eye) and np.array_equal(right, eye)):
            raise NotUnital("declared unit is not a two-sided unit")

    @property
    def k(self) -> int:
        return self.struct.shape[0]

    def __eq__(self, other) -> bool:
        return (isinstance(other, LevelAlgebra)
                and self.ring == other.ring
                and np.array_equal(self.struct, other.struct)
                and np.array_equal(self.unit, other.unit))

    __hash__ = object.__hash__

    @cached_property
    def _T(self) -> np.ndarray:
        """Combined tensor: (b_u e_i)(b_v e_j) = sum_{l,w} T[i,u,j,v,l,w] b_w e_l."""
        mult = self.ring.mult
        T = np.einsum("uvx,ijly,xyw->iujvlw", mult, self.struct,
                      mult) % self.ring.orders
        return T

    # -- element arithmetic ----------------------------------------------

    def elem_zero(self) -> np.ndarray:
        return np.zeros((self.k, self.ring.m), dtype=np.int64)

    def elem_reduce(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.int64) % self.ring.orders

    def elem_mul(self, x, y) -> np.ndarray:
        return np.einsum("iu,jv,iujvlw->lw", x, y, self._T) % self.ring.orders

    def elem_from_scalar(self, c: int) -> np.ndarray:
        return (int(c) * self.unit) % self.ring.orders

    # -- matrices ----------------------------------------------------------

    def mat(self, data: np.ndarray) -> "AlgMatrix":
        return AlgMatrix(self, data)

    def zeros(self, rows: int, cols: int) -> "AlgMatrix":
        return AlgMatrix(self, np.zeros((rows, cols, self.k, self.ring.m),
                                        dtype=np.int64))

    def eye(self, n: int) -> "AlgMatrix":
        data = np.zeros((n, n, self.k, self.ring.m), dtype=np.int64)
        for i in range(n):
            data[i, i] = self.unit
        return AlgMatrix(self, data)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
        return np.einsum("acis,cbjt,isjtlw->ablw", a, b,
                         self._T) % self.ring.orders


@dataclass(eq=False)
class AlgMatrix:
    """Matrix over a LevelAlgebra; data shape (rows, cols, k, m)."""

    alg: LevelAlgebra
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.int64) % self.alg.ring.orders
        if self.data.ndim != 4 or self.data.shape[2:] != (self.alg.k, self.alg.ring.m):
            raise BadDimensions(f"matrix data has shape {self.data.shape}")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def _check_level(self, other: "AlgMatrix"):
        if self.alg is not other.alg and self.alg != other.alg:
            raise LevelMismatch("matrices live over different algebras")

    def __add__(self, other: "AlgMatrix") -> "AlgMatrix":
        self._check_level(other)
        if self.data.shape != other.data.shape:
            raise ShapeMismatch("matrix shapes differ")
        return AlgMatrix(self.alg, self.data + other.data)

    def __sub__(self, other: "AlgMatrix") -> "AlgMatrix":
        self._check_level(other)
        if self.data.shape != other.data.shape:
            raise ShapeMismatch("matrix shapes differ")
        return AlgMatrix(self.alg, self.data - other.data)

    def __neg__(self) -> "AlgMatrix":
        return AlgMatrix(self.alg, -self.data)

    def __matmul__(self, other: "AlgMatrix") -> "AlgMatrix":
        self._check_level(other)
        return AlgMatrix(self.alg, self.alg.matmul(self.data, other.data))

    def scale(self, c: int) -> "AlgMatrix":
        return AlgMatrix(self.alg, int(c) * self.data)

    def is_zero(self) -> bool:
        return not self.data.any()

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgMatrix)
                and self.alg == other.alg
                and self.data.shape == other.data.shape
                and np.array_equal(self.data, other.data))

    __hash__ = None

    def copy(self) -> "AlgMatrix":
        return AlgMatrix(self.alg, self.data.copy())

    def __repr__(self) -> str:
        return f"AlgMatrix({self.rows}x{self.cols} over rank-{self.alg.k} algebra)"


@dataclass(eq=False)
class DeformedAlgebra:
    """One algebra read over all three levels of a tower.

    `bar` is the algebra over Rbar; `mid` and `base` carry the same structure
    constants pushed down along the tower surjections.
    """

    tower: Tower
    bar: LevelAlgebra
    mid: LevelAlgebra = field(init=False)
    base: LevelAlgebra = field(init=False)

    def __post_init__(self):
        if self.bar.ring != self.tower.Rbar:
            raise ValidationError("algebra must be defined over the top ring")
        self.mid = self._push(self.tower.pibar)
        self.base = self._push(self.tower.pibar0)

    def _push(self, surj: RingSurjection) -> LevelAlgebra:
        k, m = self.bar.k, self.bar.ring.m
        struct = surj.apply_many(self.bar.struct.reshape(-1, m)).reshape(
            k, k, k, surj.target.m)
        unit = surj.apply_many(self.bar.unit)
        return LevelAlgebra(surj.target, struct, unit)

    @property
    def k(self) -> int:
        return self.bar.k

    @property
    def p(self) -> int:
        return self.tower.p

    def level(self, name: str) -> LevelAlgebra:
        return {"bar": self.bar, "mid": self.mid, "base": self.base}[name]

    # -- reductions --------------------------------------------------------

    def _reduce(self, mat: AlgMatrix, surj: RingSurjection,
                target: LevelAlgebra) -> AlgMatrix:
        m = mat.alg.ring.m
        flat = mat.data.reshape(-1, m)
        out = surj.apply_many(flat).reshape(mat.data.shape[:3] + (surj.target.m,))
        return AlgMatrix(target, out)

    def reduce_bar_to_mid(self, mat: AlgMatrix) -> AlgMatrix:
        return self._reduce(mat, self.tower.pibar, self.mid)

    def reduce_bar_to_base(self, mat: AlgMatrix) -> AlgMatrix:
        return self._reduce(mat, self.tower.pibar0, self.base)

    def reduce_mid_to_base(self, mat: AlgMatrix) -> AlgMatrix:
        return self._reduce(mat, self.tower.pi, self.base)

    # -- sections ------------------------------------------------------------

    def _lift(self, mat: AlgMatrix, section: dict, target: LevelAlgebra) -> AlgMatrix:
        shape = mat.data.shape[:3] + (target.ring.m,)
        out = np.zeros(shape, dtype=np.int64)
        flat_in = mat.data.reshape(-1, mat.alg.ring.m)
        flat_out = out.reshape(-1, target.ring.m)
        for i, v in enumerate(flat_in):
            flat_out[i] = section[vec_key(v)]
        return AlgMatrix(target, out)

    def lift_mid_to_bar(self, mat: AlgMatrix) -> AlgMatrix:
        """Coefficientwise minimal section of Rbar -> R."""
        return self._lift(mat, self.tower.sigma, self.bar)

    def lift_base_to_bar(self, mat: AlgMatrix) -> AlgMatrix:
        return self._lift(mat, self.tower.sigma0, self.bar)

    def lift_base_to_mid(self, mat: AlgMatrix) -> AlgMatrix:
        return self._lift(mat, self.tower.sigma_mid, self.mid)

    # -- kernel coordinates --------------------------------------------------

    def in_kernel(self, mat: AlgMatrix) -> bool:
        """True iff every coefficient of mat lies in J = Ker(Rbar -> R)."""
        return self.reduce_bar_to_mid(mat).is_zero()

    def kernel_coords(self, mat: AlgMatrix) -> np.ndarray:
        """F_p coordinates of a J-coefficient matrix.

        Flat ordering: J-basis index (major), then row, column, algebra basis
        index.  Inverse of kernel_matrix.
        """
        t = self.tower
        flat_in = mat.data.reshape(-1, self.bar.ring.m)
        out = np.zeros((t.dimJ, len(flat_in)), dtype=np.int64)
        for i, v in enumerate(flat_in):
            lam = t.j_coords(v)
            if lam is None:
                raise NotInKernel("matrix coefficient outside Ker(Rbar -> R)")
            out[:, i] = lam
        return out.reshape(-1)

    def kernel_matrix(self, coords: np.ndarray, rows: int, cols: int) -> AlgMatrix:
        """Rebuild the J-coefficient matrix from its F_p coordinates."""
        t = self.tower
        n = rows * cols * self.k
        coords = np.asarray(coords, dtype=np.int64).reshape(t.dimJ, n) % self.p
        data = np.zeros((n, self.bar.ring.m), dtype=np.int64)
        for i in range(n):
            data[i] = t.j_reconstruct(coords[:, i])
        return AlgMatrix(self.bar, data.reshape(rows, cols, self.k, self.bar.ring.m))

    def kernel_dim(self, rows: int, cols: int) -> int:
        return self.tower.dimJ * rows * cols * self.k

    def base_coords(self, mat: AlgMatrix) -> np.ndarray:
        """F_p coordinates of a base-level matrix (row, col, basis order)."""
        if mat.alg != self.base:
            raise LevelMismatch("expected a base-level matrix")
        return mat.data.reshape(-1).copy()

    def base_matrix(self, coords: np.ndarray, rows: int, cols: int) -> AlgMatrix:
        coords = np.asarray(coords, dtype=np.int64) % self.p
        return AlgMatrix(self.base,
                         coords.reshape(rows, cols, self.k, 1))

    def act_on_kernel(self, left: AlgMatrix | None, mid: AlgMatrix,
                      right: AlgMatrix | None) -> AlgMatrix:
        """left @ mid @ right where mid has J coefficients.

        Since I*J = 0, the result only depends on the base reductions of
        left/right; the inputs here are bar-level matrices.
        """
        out = mid
        if left is not None:
            out = left @ out
        if right is not None:
            out = out @ right
        return out


def mk_algebra(tower: Tower, kind: str = "trivial", **params) -> DeformedAlgebra:
    """Build a DeformedAlgebra over a tower.

    kinds: trivial: Lambda = Rbar itself (rank 1);
           custom(struct, unit): explicit structure constants over Rbar.
    """
    R = tower.Rbar
    if kind == "trivial":
        struct = np.zeros((1, 1, 1, R.m), dtype=np.int64)
        struct[0, 0, 0] = R.one_vec()
        unit = R.one_vec().reshape(1, R.m)
        return DeformedAlgebra(tower, LevelAlgebra(R, struct, unit))
    if kind == "custom":
        return DeformedAlgebra(tower, LevelAlgebra(R, params["struct"], params["unit"]))
    raise ValidationError(f"unknown algebra kind {kind!r}")


def dual_numbers_algebra(tower: Tower) -> DeformedAlgebra:
    """Lambda-bar = Rbar[x]/(x^2 - c) style rank-2 algebras are built via
    mk_algebra(..., kind="custom"); this helper gives x^2 = 0."""
    R = tower.Rbar
    struct = np.zeros((2, 2, 2, R.m), dtype=np.int64)
    struct[0, 0, 0] = R.one_vec()
    struct[0, 1, 1] = R.one_vec()
    struct[1, 0, 1] = R.one_vec()
    # struct[1,1,*] = 0: x^2 = 0
    unit = np.zeros((2, R.m), dtype=np.int64)
    unit[0] = R.one_vec()
    return mk_algebra(tower, "custom", struct=struct, unit=unit)
