"""Obstruction classes and torsor classifications for the three lifting
problems: differentials, maps commuting with differentials, and homotopies.

All three follow the same pattern.  Take the coefficientwise minimal lift of
the given mid-level datum; the defect of the lifted datum (d-bar squared, or
delta of the lifted map, etc.) has coefficients in J, hence defines a cocycle
in the kernel complex.  Its class is the obstruction: the datum lifts iff the
class vanishes, and then the set of lifts, modulo the evident equivalences,
is a torsor over the neighbouring cohomology group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import gf
from .algebra import DeformedAlgebra
from .cohomology import CohClass, KernelComplex, kernel_complex
from .complexes import (
    Complex,
    GradedMap,
    GradedObject,
    compose,
    delta,
    identity_map,
    map_lift,
    map_reduce,
    zero_map,
)
from .errors import (
    LevelMismatch,
    NotAHomotopy,
    NotCochainMap,
    NotADifferential,
    NotInverse,
    Obstructed,
    ShapeMismatch,
    ValidationError,
)


# ---------------------------------------------------------------------------
# problem statements
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class DifferentialProblem:
    """Lift a square-zero differential from the mid level to the top level."""

    defalg: DeformedAlgebra
    ob: GradedObject
    d_mid: GradedMap

    def __post_init__(self):
        if self.d_mid.alg != self.defalg.mid:
            raise LevelMismatch("d_mid must live at the mid level")
        Complex(self.defalg.mid, self.ob, self.d_mid)   # validates d^2 = 0

    @cached_property
    def d_base(self) -> GradedMap:
        return map_reduce(self.defalg, self.d_mid, "mid", "base")

    @cached_property
    def kernel(self) -> KernelComplex:
        return kernel_complex(self.defalg, self.ob, self.ob,
                              self.d_base, self.d_base)


@dataclass(eq=False)
class MapProblem:
    """Lift a degree-n map commuting with the differentials, given top-level
    square-zero lifts of the differentials on both sides."""

    defalg: DeformedAlgebra
    C: Complex                 # bar level
    D: Complex                 # bar level
    f_mid: GradedMap

    def __post_init__(self):
        for X in (self.C, self.D):
            if X.alg != self.defalg.bar:
                raise LevelMismatch("complexes must live at the top level")
        if self.f_mid.alg != self.defalg.mid:
            raise LevelMismatch("f_mid must live at the mid level")
        if self.f_mid.src != self.C.ob or self.f_mid.tgt != self.D.ob:
            raise ShapeMismatch("f_mid endpoints do not match the complexes")
        dCm = map_reduce(self.defalg, self.C.d, "bar", "mid")
        dDm = map_reduce(self.defalg, self.D.d, "bar", "mid")
        if not delta(self.f_mid, dCm, dDm).is_zero():
            raise NotCochainMap("f_mid does not commute with the differentials")

    @cached_property
    def kernel(self) -> KernelComplex:
        dC0 = map_reduce(self.defalg, self.C.d, "bar", "base")
        dD0 = map_reduce(self.defalg, self.D.d, "bar", "base")
        return kernel_complex(self.defalg, self.C.ob, self.D.ob, dC0, dD0)


@dataclass(eq=False)
class HomotopyProblem:
    """Lift a homotopy between two given top-level lifted maps."""

    defalg: DeformedAlgebra
    C: Complex                 # bar level
    D: Complex                 # bar level
    f_bar: GradedMap
    g_bar: GradedMap
    H_mid: GradedMap

    def __post_init__(self):
        for m, name in ((self.f_bar, "f_bar"), (self.g_bar, "g_bar")):
            if m.alg != self.defalg.bar:
                raise LevelMismatch(f"{name} must live at the top level")
            if not delta(m, self.C.d, self.D.d).is_zero():
                raise NotCochainMap(f"{name} does not commute with the differentials")
        if self.f_bar.degree != self.g_bar.degree:
            raise ShapeMismatch("f_bar and g_bar must have the same degree")
        if self.H_mid.alg != self.defalg.mid:
            raise LevelMismatch("H_mid must live at the mid level")
        if self.H_mid.degree != self.f_bar.degree - 1:
            raise NotAHomotopy("homotopy degree must be one below the maps")
        dCm = map_reduce(self.defalg, self.C.d, "bar", "mid")
        dDm = map_reduce(self.defalg, self.D.d, "bar", "mid")
        fm = map_reduce(self.defalg, self.f_bar, "bar", "mid")
        gm = map_reduce(self.defalg, self.g_bar, "bar", "mid")
        if delta(self.H_mid, dCm, dDm) != gm - fm:
            raise NotAHomotopy("H_mid is not a homotopy between the reductions")

    @cached_property
    def kernel(self) -> KernelComplex:
        dC0 = map_reduce(self.defalg, self.C.d, "bar", "base")
        dD0 = map_reduce(self.defalg, self.D.d, "bar", "base")
        return kernel_complex(self.defalg, self.C.ob, self.D.ob, dC0, dD0)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class LiftReport:
    kind: str
    obstruction: CohClass
    obstructed: bool
    sigma_lift: GradedMap
    lifted: GradedMap | None


@dataclass
class Classification:
    """Equivalence classes of lifts: a torsor over H^torsor_degree."""

    torsor_degree: int
    h_dim: int
    count: int
    base: GradedMap
    class_reps: list[CohClass]
    reps: list[GradedMap]


# ---------------------------------------------------------------------------
# differentials
# ---------------------------------------------------------------------------

def obstruct_differential(prob: DifferentialProblem) -> tuple[CohClass, GradedMap]:
    """Obstruction class in H^2 of the kernel complex, and the minimal lift
    of d_mid whose square represents it."""
    dbar0 = map_lift(prob.defalg, prob.d_mid, "mid", "bar")
    sq = compose(dbar0, dbar0)
    vec = prob.kernel.into_kernel(sq)
    return prob.kernel.coh_class(vec, 2), dbar0


def lift_differential(prob: DifferentialProblem) -> LiftReport:
    K = prob.kernel
    dbar0 = map_lift(prob.defalg, prob.d_mid, "mid", "bar")
    sq = compose(dbar0, dbar0)
    vec = K.into_kernel(sq)
    obstruction = K.coh_class(vec, 2)
    if not obstruction.is_zero:
        return LiftReport("differential", obstruction, True, dbar0, None)
    corr = K.solve_coboundary((-vec) % K.p, 2)
    dbar = dbar0 + K.out_of_kernel(corr, 1)
    if not compose(dbar, dbar).is_zero():
        raise Obstructed("corrected lift fails d^2 = 0; internal inconsistency")
    if map_reduce(prob.defalg, dbar, "bar", "mid") != prob.d_mid:
        raise Obstructed("corrected lift does not reduce to d_mid")
    return LiftReport("differential", obstruction, False, dbar0, dbar)


def v_class(prob: DifferentialProblem, d1: GradedMap, d2: GradedMap) -> CohClass:
    """Difference class of two lifted differentials; zero iff they are
    connected by an isomorphism of the form 1 + kappa, kappa in J."""
    K = prob.kernel
    for d in (d1, d2):
        if map_reduce(prob.defalg, d, "bar", "mid") != prob.d_mid:
            raise ValidationError("not a lift of d_mid")
        if not compose(d, d).is_zero():
            raise NotADifferential("d^2 != 0 at the top level")
    return K.coh_class(K.into_kernel(d2 - d1), 1)


def classify_lifts(prob: DifferentialProblem,
                   base: GradedMap | None = None) -> Classification:
    """All equivalence classes of square-zero lifts of d_mid.

    The classes form a torsor over H^1 of the kernel complex; representatives
    are base + (canonical H^1 class representatives).
    """
    K = prob.kernel
    if base is None:
        rep = lift_differential(prob)
        if rep.obstructed:
            raise Obstructed(f"no lift exists; obstruction {rep.obstruction}")
        base = rep.lifted
    classes = K.all_classes(1)
    reps = [base + K.out_of_kernel(c.vec(), 1) for c in classes]
    return Classification(1, K.h_dim(1), len(classes), base, classes, reps)


def classify_connecting_isos(prob: DifferentialProblem, d1: GradedMap,
                             d2: GradedMap) -> Classification:
    """Isomorphisms 1 + kappa carrying d1 to d2, up to two-cells.

    (1+kappa) d1 (1+kappa)^{-1} = d1 - delta(kappa), so kappa must solve
    delta(kappa) = d1 - d2; two solutions give the same iso up to a two-cell
    iff they differ by a coboundary, so the classes are a torsor over H^0.
    """
    K = prob.kernel
    diff = K.into_kernel(d1 - d2)
    part = K.solve_coboundary(diff, 1)
    if part is None:
        raise Obstructed("the two lifts are not connected by any 1 + kappa")
    red, pivots = K.coboundary_space(0)
    part = gf.reduce_mod_rowspace(part, red, pivots, K.p)
    classes = K.all_classes(0)
    base = K.out_of_kernel(part, 0)
    reps = []
    for c in classes:
        reps.append(K.out_of_kernel((part + c.vec()) % K.p, 0))
    return Classification(0, K.h_dim(0), len(classes), base, classes, reps)


def apply_connecting_iso(prob: DifferentialProblem, d: GradedMap,
                         kappa: GradedMap) -> GradedMap:
    """Conjugate d by 1 + kappa (kappa with J coefficients): exact, since
    (1+kappa)^{-1} = 1 - kappa."""
    one = identity_map(prob.defalg.bar, prob.ob)
    u = one + kappa
    uinv = one - kappa
    return compose(compose(u, d), uinv)


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

def obstruct_map(prob: MapProblem) -> tuple[CohClass, GradedMap]:
    fbar0 = map_lift(prob.defalg, prob.f_mid, "mid", "bar")
    xi = delta(fbar0, prob.C.d, prob.D.d)
    n = prob.f_mid.degree
    vec = prob.kernel.into_kernel(xi)
    return prob.kernel.coh_class(vec, n + 1), fbar0


def lift_map(prob: MapProblem) -> LiftReport:
    K = prob.kernel
    n = prob.f_mid.degree
    fbar0 = map_lift(prob.defalg, prob.f_mid, "mid", "bar")
    xi = delta(fbar0, prob.C.d, prob.D.d)
    vec = K.into_kernel(xi)
    obstruction = K.coh_class(vec, n + 1)
    if not obstruction.is_zero:
        return LiftReport("map", obstruction, True, fbar0, None)
    corr = K.solve_coboundary((-vec) % K.p, n + 1)
    fbar = fbar0 + K.out_of_kernel(corr, n)
    if not delta(fbar, prob.C.d, prob.D.d).is_zero():
        raise Obstructed("corrected map lift does not commute; internal inconsistency")
    return LiftReport("map", obstruction, False, fbar0, fbar)


def classify_map_lifts(prob: MapProblem,
                       base: GradedMap | None = None) -> Classification:
    """Lifts of f_mid commuting with the differentials, modulo adding
    delta of a degree n-1 kernel element: a torsor over H^n."""
    K = prob.kernel
    n = prob.f_mid.degree
    if base is None:
        rep = lift_map(prob)
        if rep.obstructed:
            raise Obstructed(f"no map lift exists; obstruction {rep.obstruction}")
        base = rep.lifted
    classes = K.all_classes(n)
    reps = [base + K.out_of_kernel(c.vec(), n) for c in classes]
    return Classification(n, K.h_dim(n), len(classes), base, classes, reps)


# ---------------------------------------------------------------------------
# homotopies
# ---------------------------------------------------------------------------

def obstruct_homotopy(prob: HomotopyProblem) -> tuple[CohClass, GradedMap]:
    Hbar0 = map_lift(prob.defalg, prob.H_mid, "mid", "bar")
    n = prob.f_bar.degree
    xi = prob.g_bar - prob.f_bar - delta(Hbar0, prob.C.d, prob.D.d)
    vec = prob.kernel.into_kernel(xi)
    return prob.kernel.coh_class(vec, n), Hbar0


def lift_homotopy(prob: HomotopyProblem) -> LiftReport:
    K = prob.kernel
    n = prob.f_bar.degree
    Hbar0 = map_lift(prob.defalg, prob.H_mid, "mid", "bar")
    xi = prob.g_bar - prob.f_bar - delta(Hbar0, prob.C.d, prob.D.d)
    vec = K.into_kernel(xi)
    obstruction = K.coh_class(vec, n)
    if not obstruction.is_zero:
        return LiftReport("homotopy", obstruction, True, Hbar0, None)
    corr = K.solve_coboundary(vec, n)
    Hbar = Hbar0 + K.out_of_kernel(corr, n - 1)
    if delta(Hbar, prob.C.d, prob.D.d) != prob.g_bar - prob.f_bar:
        raise Obstructed("corrected homotopy lift fails; internal inconsistency")
    return LiftReport("homotopy", obstruction, False, Hbar0, Hbar)


def classify_homotopy_lifts_of(prob: HomotopyProblem,
                               base: GradedMap | None = None) -> Classification:
    """Homotopy lifts modulo two-cells: a torsor over H^{n-1}."""
    K = prob.kernel
    n = prob.f_bar.degree
    if base is None:
        rep = lift_homotopy(prob)
        if rep.obstructed:
            raise Obstructed(f"no homotopy lift exists; obstruction {rep.obstruction}")
        base = rep.lifted
    classes = K.all_classes(n - 1)
    reps = [base + K.out_of_kernel(c.vec(), n - 1) for c in classes]
    return Classification(n - 1, K.h_dim(n - 1), len(classes), base, classes, reps)


# ---------------------------------------------------------------------------
# inverses and iterated lifting
# ---------------------------------------------------------------------------

def invert_lift(defalg: DeformedAlgebra, f_bar: GradedMap,
                g_mid: GradedMap) -> GradedMap:
    """Exact two-sided inverse of a lifted isomorphism.

    g_mid must be the inverse of the mid reduction of f_bar.  With g' any
    coefficientwise lift of g_mid, eps = f_bar g' - 1 has J coefficients and
    squares to zero, so g = g' (1 - eps) satisfies f_bar g = 1; the analogous
    defect on the other side then also vanishes.
    """
    fm = map_reduce(defalg, f_bar, "bar", "mid")
    one_mid_D = identity_map(defalg.mid, f_bar.tgt)
    one_mid_C = identity_map(defalg.mid, f_bar.src)
    if compose(fm, g_mid) != one_mid_D or compose(g_mid, fm) != one_mid_C:
        raise NotInverse("g_mid is not a two-sided inverse of the reduction")
    gp = map_lift(defalg, g_mid, "mid", "bar")
    one = identity_map(defalg.bar, f_bar.tgt)
    eps = compose(f_bar, gp) - one
    g = gp - compose(gp, eps)
    one_C = identity_map(defalg.bar, f_bar.src)
    if compose(f_bar, g) != one or compose(g, f_bar) != one_C:
        raise NotInverse("exact inverse construction failed; internal inconsistency")
    return g


@dataclass
class ChainStep:
    level: int
    report: LiftReport


@dataclass
class ChainReport:
    steps: list[ChainStep]
    obstructed_at: int | None
    lifted: GradedMap | None


def lift_along_chain(defalgs: list[DeformedAlgebra], ob: GradedObject,
                     d_first: GradedMap) -> ChainReport:
    """Iteratively lift a differential along a chain of towers.

    defalgs[i].mid must equal defalgs[i-1].bar (same ring and structure
    constants); d_first lives over defalgs[0].mid.
    """
    for i in range(1, len(defalgs)):
        if defalgs[i].mid != defalgs[i - 1].bar:
            raise LevelMismatch(f"chain mismatch between steps {i-1} and {i}")
    steps: list[ChainStep] = []
    d = d_first
    for i, da in enumerate(defalgs):
        d = GradedMap(da.mid, ob, ob, 1,
                      {j: da.mid.mat(m.data) for j, m in d.comps.items()})
        prob = DifferentialProblem(da, ob, d)
        rep = lift_differential(prob)
        steps.append(ChainStep(i, rep))
        if rep.obstructed:
            return ChainReport(steps, i, None)
        d = rep.lifted
    return ChainReport(steps, None, d)
