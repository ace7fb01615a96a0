"""Shared fixtures and builders for the test suite."""

import numpy as np
import pytest

from sqzlift.algebra import AlgMatrix, mk_algebra
from sqzlift.complexes import Complex, GradedMap, GradedObject, compose, map_lift
from sqzlift.finring import mk_tower


def mid_matrix(defalg, entries):
    """AlgMatrix at the mid level from a nested list of coefficient vectors."""
    return AlgMatrix(defalg.mid, np.asarray(entries, dtype=np.int64))


def scalar_mid(defalg, rows):
    """Rank-1 algebra convenience: matrix from a list of lists of ring vectors."""
    arr = np.asarray(rows, dtype=np.int64)
    return AlgMatrix(defalg.mid, arr[:, :, None, :])


@pytest.fixture(scope="session")
def z4():
    """Z/4 -> Z/2 -> F_2 with the trivial rank-1 algebra."""
    return mk_algebra(mk_tower("zmod", 2, a=2, b=1), "trivial")


@pytest.fixture(scope="session")
def eps2():
    """F_2[t]/t^2 -> F_2 -> F_2 with the trivial rank-1 algebra."""
    return mk_algebra(mk_tower("trunc_poly", 2, a=2, b=1), "trivial")


@pytest.fixture(scope="session")
def t3():
    """F_3[t]/t^3 -> F_3[t]/t^2 -> F_3 with the trivial rank-1 algebra."""
    return mk_algebra(mk_tower("trunc_poly", 3, a=3, b=2), "trivial")


def build_equiv(defalg, obC, dC_mid, contr_deg):
    """A homotopy equivalence C -> D = C + (contractible two-term identity).

    D adds a rank-1 contractible summand in degrees contr_deg, contr_deg + 1;
    f is the inclusion, g the projection, H = 0, and K the identity on the
    contractible summand placed in degree contr_deg + 1.
    """
    from sqzlift.crude import HomotopyEquivData

    mid = defalg.mid
    k = defalg.k
    extra = GradedObject.of({contr_deg: 1, contr_deg + 1: 1})
    obD = obC.direct_sum(extra)

    def unit():
        return mid.unit.copy()

    # D's differential: C's blocks in the leading corner, identity on the tail
    dD_comps = {}
    for i in set(obC.support) | {contr_deg}:
        r, c = obD.rank(i + 1), obD.rank(i)
        if r == 0 or c == 0:
            continue
        data = np.zeros((r, c, k, mid.ring.m), dtype=np.int64)
        blk = dC_mid.comp(i).data
        data[:blk.shape[0], :blk.shape[1]] = blk
        if i == contr_deg:
            data[r - 1, c - 1] = unit()
        dD_comps[i] = AlgMatrix(mid, data)
    dD = GradedMap(mid, obD, obD, 1, dD_comps)

    f_comps, g_comps = {}, {}
    for i in obC.support:
        rC = obC.rank(i)
        rD = obD.rank(i)
        inc = np.zeros((rD, rC, k, mid.ring.m), dtype=np.int64)
        for a in range(rC):
            inc[a, a] = unit()
        f_comps[i] = AlgMatrix(mid, inc)
        proj = np.zeros((rC, rD, k, mid.ring.m), dtype=np.int64)
        for a in range(rC):
            proj[a, a] = unit()
        g_comps[i] = AlgMatrix(mid, proj)
    f = GradedMap(mid, obC, obD, 0, f_comps)
    g = GradedMap(mid, obD, obC, 0, g_comps)

    H = GradedMap(mid, obC, obC, -1, {})
    kdatr = obD.rank(contr_deg + 1)
    kdatc = obD.rank(contr_deg + 1)
    kdat = np.zeros((obD.rank(contr_deg), kdatc, k, mid.ring.m), dtype=np.int64)
    kdat[obD.rank(contr_deg) - 1, kdatc - 1] = unit()
    K = GradedMap(mid, obD, obD, -1, {contr_deg + 1: AlgMatrix(mid, kdat)})

    C = Complex(mid, obC, dC_mid)
    D = Complex(mid, obD, dD)
    E = HomotopyEquivData(defalg, C, D, f, g, H, K)
    dbar_D = map_lift(defalg, dD, "mid", "bar")
    if not compose(dbar_D, dbar_D).is_zero():
        from sqzlift.obstruction import DifferentialProblem, lift_differential
        rep = lift_differential(DifferentialProblem(defalg, obD, dD))
        assert not rep.obstructed, "test construction needs a liftable D"
        dbar_D = rep.lifted
    return E, dbar_D
