"""Constructive pipeline turning a mid-level homotopy equivalence into a
full top-level one, plus the homotopy-category classification layer.

Given complexes C, D at the mid level, maps f: C -> D and g: D -> C
homotopy inverse to each other (witnessed by H: gf -> 1 and K: fg -> 1),
and a square-zero top-level lift of d_D, the pipeline produces top-level
d_C, f, g, H, K satisfying all five equations exactly:

    d_C^2 = 0,  delta(f) = 0,  delta(g) = 0,
    delta(H) = 1 - g f,  delta(K) = 1 - f g.

Every correction is either an explicit exact witness or an echelon-minimal
solve in the kernel complex; solvability is guaranteed, so a failed solve is
reported as InternalObstruction (always a bug, never a property of the
input).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DeformedAlgebra
from .cohomology import CohClass, KernelComplex, kernel_complex
from .complexes import (
    Complex,
    GradedMap,
    compose,
    delta,
    enumerate_graded_maps,
    identity_map,
    map_lift,
    map_reduce,
    zero_map,
)
from .errors import (
    CapExceeded,
    GuardUndecidable,
    InternalObstruction,
    LevelMismatch,
    NotAHomotopy,
    NotCochainMap,
    NotHomotopyEquivalence,
    ValidationError,
)
from .obstruction import (
    Classification,
    DifferentialProblem,
    LiftReport,
    MapProblem,
    classify_lifts,
    lift_differential,
    lift_map,
)


@dataclass(eq=False)
class HomotopyEquivData:
    """A homotopy equivalence between two mid-level complexes, with explicit
    homotopies H: gf -> 1_C and K: fg -> 1_D."""

    defalg: DeformedAlgebra
    C: Complex
    D: Complex
    f: GradedMap
    g: GradedMap
    H: GradedMap
    K: GradedMap

    def __post_init__(self):
        mid = self.defalg.mid
        for X, name in ((self.C, "C"), (self.D, "D")):
            if X.alg != mid:
                raise LevelMismatch(f"complex {name} must live at the mid level")
        if not delta(self.f, self.C.d, self.D.d).is_zero():
            raise NotHomotopyEquivalence("f is not a cochain map")
        if not delta(self.g, self.D.d, self.C.d).is_zero():
            raise NotHomotopyEquivalence("g is not a cochain map")
        oneC = identity_map(mid, self.C.ob)
        oneD = identity_map(mid, self.D.ob)
        if delta(self.H, self.C.d, self.C.d) != oneC - compose(self.g, self.f):
            raise NotHomotopyEquivalence("H is not a homotopy gf -> 1_C")
        if delta(self.K, self.D.d, self.D.d) != oneD - compose(self.f, self.g):
            raise NotHomotopyEquivalence("K is not a homotopy fg -> 1_D")


@dataclass
class CrudeResult:
    d_C: GradedMap
    f: GradedMap
    g: GradedMap
    H: GradedMap
    K: GradedMap
    K_mid_repaired: GradedMap
    trace: list[dict] = field(default_factory=list)


def _nonzero_count(m: GradedMap) -> int:
    return int(sum(np.count_nonzero(c.data) for c in m.comps.values()))


def crude_lift(E: HomotopyEquivData, dbar_D: GradedMap,
               collect_trace: bool = False) -> CrudeResult:
    """Run the five-stage pipeline; see the module docstring."""
    da = E.defalg
    bar = da.bar
    if dbar_D.alg != bar:
        raise LevelMismatch("dbar_D must live at the top level")
    if not compose(dbar_D, dbar_D).is_zero():
        raise ValidationError("dbar_D does not square to zero")
    if map_reduce(da, dbar_D, "bar", "mid") != E.D.d:
        raise ValidationError("dbar_D does not reduce to d_D")

    trace: list[dict] = []

    def record(stage: str, **checks):
        if collect_trace:
            trace.append({"stage": stage, **checks})

    # kernel complexes for the solves
    dC0 = map_reduce(da, E.C.d, "mid", "base")
    dD0 = map_reduce(da, E.D.d, "mid", "base")
    K_CD = kernel_complex(da, E.C.ob, E.D.ob, dC0, dD0)
    K_CC = kernel_complex(da, E.C.ob, E.C.ob, dC0, dC0)
    K_DD = kernel_complex(da, E.D.ob, E.D.ob, dD0, dD0)

    # stage (iv) first at the mid level: repair K so that [Hg - gK'] = 0,
    # with the explicit primitive z = H(Hg - gK)
    w = compose(E.H, E.g) - compose(E.g, E.K)
    K_mid = E.K + compose(E.f, w)
    z_mid = compose(E.H, w)
    oneD_mid = identity_map(da.mid, E.D.ob)
    if delta(K_mid, E.D.d, E.D.d) != oneD_mid - compose(E.f, E.g):
        raise InternalObstruction("repaired K is not a homotopy fg -> 1")
    if delta(z_mid, E.D.d, E.C.d) != compose(E.H, E.g) - compose(E.g, K_mid):
        raise InternalObstruction("explicit primitive for Hg - gK' failed")
    record("mid-repair", K_nonzero=_nonzero_count(K_mid))

    # coefficientwise minimal lifts of everything
    dC = map_lift(da, E.C.d, "mid", "bar")
    f = map_lift(da, E.f, "mid", "bar")
    g = map_lift(da, E.g, "mid", "bar")
    H = map_lift(da, E.H, "mid", "bar")
    Kb = map_lift(da, K_mid, "mid", "bar")
    dD = dbar_D

    def dl(u, s, t):
        return delta(u, s, t)

    # stage (i): d_C^2 = delta(eta) with eta = g eps + H xi, eps = -delta(f)
    xi = compose(dC, dC)
    eps = -dl(f, dC, dD)
    eta = compose(g, eps) + compose(H, xi)
    dC = dC - eta
    if not compose(dC, dC).is_zero():
        raise InternalObstruction("stage (i): d_C^2 != 0 after correction")
    record("i", dC_sq_nonzero=_nonzero_count(compose(dC, dC)))

    # stage (ii): shift d_C by g delta(f), then absorb the remaining defect
    # of f by an echelon-minimal solve in the kernel complex
    xif = dl(f, dC, dD)
    dC = dC + compose(g, xif)
    if not compose(dC, dC).is_zero():
        raise InternalObstruction("stage (ii): d_C^2 broken by the shift")
    vec = K_CD.into_kernel(dl(f, dC, dD))
    corr = K_CD.solve_coboundary((-vec) % K_CD.p, 1)
    if corr is None:
        raise InternalObstruction("stage (ii): defect of f is not a coboundary")
    f = f + K_CD.out_of_kernel(corr, 0)
    if not dl(f, dC, dD).is_zero():
        raise InternalObstruction("stage (ii): delta(f) != 0 after correction")
    record("ii", delta_f_nonzero=_nonzero_count(dl(f, dC, dD)))

    # stage (iii): g <- g - eta_g with eta_g = -g mu_K + H delta(g)
    oneD = identity_map(bar, E.D.ob)
    oneC = identity_map(bar, E.C.ob)
    mu_K = oneD - compose(f, g) - dl(Kb, dD, dD)
    xig = dl(g, dD, dC)
    eta_g = -compose(g, mu_K) + compose(H, xig)
    g = g - eta_g
    if not dl(g, dD, dC).is_zero():
        raise InternalObstruction("stage (iii): delta(g) != 0 after correction")
    record("iii", delta_g_nonzero=_nonzero_count(dl(g, dD, dC)))

    # stage (v): g <- g + mu_H g, then solve for the homotopy corrections
    mu_H = oneC - compose(g, f) - dl(H, dC, dC)
    gamma = compose(mu_H, g)
    if not dl(gamma, dD, dC).is_zero():
        raise InternalObstruction("stage (v): gamma is not a cocycle")
    g = g + gamma
    mu_H = oneC - compose(g, f) - dl(H, dC, dC)
    mu_K = oneD - compose(f, g) - dl(Kb, dD, dD)
    vH = K_CC.solve_coboundary(K_CC.into_kernel(mu_H), 0)
    if vH is None:
        raise InternalObstruction("stage (v): mu_H is not a coboundary")
    H = H + K_CC.out_of_kernel(vH, -1)
    vK = K_DD.solve_coboundary(K_DD.into_kernel(mu_K), 0)
    if vK is None:
        raise InternalObstruction("stage (v): mu_K is not a coboundary")
    Kb = Kb + K_DD.out_of_kernel(vK, -1)
    record("v", mu_H_nonzero=_nonzero_count(oneC - compose(g, f) - dl(H, dC, dC)),
           mu_K_nonzero=_nonzero_count(oneD - compose(f, g) - dl(Kb, dD, dD)))

    # final postconditions, all exact
    checks = {
        "d_C^2 = 0": compose(dC, dC).is_zero(),
        "delta(f) = 0": dl(f, dC, dD).is_zero(),
        "delta(g) = 0": dl(g, dD, dC).is_zero(),
        "delta(H) = 1 - gf": dl(H, dC, dC) == oneC - compose(g, f),
        "delta(K) = 1 - fg": dl(Kb, dD, dD) == oneD - compose(f, g),
        "reduce(d_C) = d_C": map_reduce(da, dC, "bar", "mid") == E.C.d,
        "reduce(f) = f": map_reduce(da, f, "bar", "mid") == E.f,
        "reduce(g) = g": map_reduce(da, g, "bar", "mid") == E.g,
        "reduce(H) = H": map_reduce(da, H, "bar", "mid") == E.H,
        "reduce(K) = K'": map_reduce(da, Kb, "bar", "mid") == K_mid,
    }
    for name, ok in checks.items():
        if not ok:
            raise InternalObstruction(f"postcondition failed: {name}")
    record("post", **{k: bool(v) for k, v in checks.items()})
    return CrudeResult(dC, f, g, H, Kb, K_mid, trace)


def strictify_homotopy_lift(E: HomotopyEquivData,
                            dbar_D: GradedMap) -> CrudeResult:
    """Move a homotopy-category lift onto the canonical graded lift of C.

    A lift of C up to homotopy is a homotopy equivalence f: C -> D together
    with a top-level complex over D; the pipeline transports it to an honest
    square-zero differential on the graded lift of C, with a top-level
    homotopy equivalence connecting the two.
    """
    return crude_lift(E, dbar_D)


# ---------------------------------------------------------------------------
# homotopy-category classification
# ---------------------------------------------------------------------------

def classify_homotopy_lifts(prob: DifferentialProblem) -> tuple[LiftReport, Classification | None]:
    """Classify lifts of a complex up to homotopy.

    Every homotopy-category lift is equivalent to a strict lift on the fixed
    graded object, and two strict lifts are homotopy-equivalent iff they are
    strictly equivalent, so the report coincides with the strict
    classification: obstruction in H^2, classes affine over H^1.
    """
    rep = lift_differential(prob)
    rep = LiftReport("homotopy-category differential", rep.obstruction,
                     rep.obstructed, rep.sigma_lift, rep.lifted)
    if rep.obstructed:
        return rep, None
    return rep, classify_lifts(prob, rep.lifted)


def h_minus1_guard(defalg: DeformedAlgebra, C: Complex, D: Complex,
                   cap: int = 1 << 20) -> str:
    """Decide whether H^{-1}Hom(C, D) vanishes at the mid level.

    Returns "zero", "nonzero", or "undecided" (enumeration cap exceeded).
    The mid ring need not be a field, so this is done by honest enumeration:
    count degree -1 cocycles and compare with the image of degree -2.
    """
    mid = defalg.mid
    dC = C.d if C.alg == mid else map_reduce(defalg, C.d, "bar", "mid")
    dD = D.d if D.alg == mid else map_reduce(defalg, D.d, "bar", "mid")
    try:
        cocycles = set()
        for z in enumerate_graded_maps(mid, C.ob, D.ob, -1, cap):
            if delta(z, dC, dD).is_zero():
                cocycles.add(_map_key(z))
        image = set()
        for w in enumerate_graded_maps(mid, C.ob, D.ob, -2, cap):
            image.add(_map_key(delta(w, dC, dD)))
    except CapExceeded:
        return "undecided"
    return "zero" if cocycles == image else "nonzero"


def _map_key(m: GradedMap) -> bytes:
    parts = []
    for i in sorted(set(m.src.support)):
        parts.append(m.comp(i).data.tobytes())
    return b"".join(parts)


@dataclass
class HomotopyMapReport:
    obstruction: CohClass
    obstructed: bool
    lifted: GradedMap | None
    homotopy: GradedMap | None          # set when realigned from a lift of g
    realigned: bool
    guard: str                          # "zero" | "nonzero" | "undecided"
    torsor_guaranteed: bool
    classification: Classification | None


def classify_homotopy_map_lifts(prob: MapProblem,
                                g_bar: GradedMap | None = None,
                                H_mid: GradedMap | None = None,
                                cap: int = 1 << 20) -> HomotopyMapReport:
    """Lift a cochain map up to homotopy, with the degree -1 guard.

    The obstruction lives in H^1 of the kernel complex.  If instead of f a
    lift g_bar of a homotopic map g (with homotopy H_mid: f -> g) is
    supplied, the lift of f is realigned to it: correct a strict lift of f by
    a canonical representative of the homotopy obstruction, then solve for a
    connecting homotopy.  The classes are affine over H^0 only when
    H^{-1}Hom(C, D) = 0 at the mid level, which is decided by bounded
    enumeration; otherwise the torsor structure is reported as not
    guaranteed.
    """
    K = prob.kernel
    n = prob.f_mid.degree
    rep = lift_map(prob)
    if rep.obstructed:
        guard = h_minus1_guard(prob.defalg, prob.C, prob.D, cap)
        return HomotopyMapReport(rep.obstruction, True, None, None, False,
                                 guard, guard == "zero", None)
    fbar = rep.lifted
    homotopy = None
    realigned = False
    if g_bar is not None:
        if H_mid is None:
            raise ValidationError("realignment needs the mid-level homotopy")
        Hbar0 = map_lift(prob.defalg, H_mid, "mid", "bar")
        xi = g_bar - fbar - delta(Hbar0, prob.C.d, prob.D.d)
        vec = K.into_kernel(xi)
        cls = K.coh_class(vec, n)
        rho = K.out_of_kernel(cls.vec(), n)
        fbar = fbar + rho
        resid = (vec - cls.vec()) % K.p
        corr = K.solve_coboundary(resid, n)
        if corr is None:
            raise InternalObstruction("homotopy realignment solve failed")
        homotopy = Hbar0 + K.out_of_kernel(corr, n - 1)
        if delta(homotopy, prob.C.d, prob.D.d) != g_bar - fbar:
            raise InternalObstruction("realigned homotopy check failed")
        realigned = True
    guard = h_minus1_guard(prob.defalg, prob.C, prob.D, cap)
    classes = K.all_classes(n)
    reps = [fbar + K.out_of_kernel(c.vec(), n) for c in classes]
    cls_data = Classification(n, K.h_dim(n), len(classes), fbar, classes, reps)
    return HomotopyMapReport(rep.obstruction, False, fbar, homotopy, realigned,
                             guard, guard == "zero", cls_data)
