"""Brute-force enumeration oracle versus the cohomological classifier."""

import numpy as np
import pytest

from sqzlift.complexes import Complex, GradedObject, compose, delta, map_reduce, zero_map
from sqzlift.obstruction import (
    DifferentialProblem,
    classify_lifts,
    lift_differential,
    obstruct_differential,
    obstruct_homotopy,
    obstruct_map,
    v_class,
)
from sqzlift.oracle import (
    gen_instance,
    oracle_differential,
    oracle_homotopy,
    oracle_map,
    witness_differential,
    witness_map,
)

OB3 = GradedObject.of({0: 1, 1: 1, 2: 1})


def test_z4_oracle_counts(z4):
    prob = DifferentialProblem(z4, OB3, zero_map(z4.mid, OB3, OB3, 1))
    res = oracle_differential(prob)
    assert res.candidates == 4
    assert res.num_witnesses == 4
    assert res.num_classes == 4          # all classes are singletons here
    for idx in res.witness_indices:
        d = witness_differential(prob, int(idx))
        assert compose(d, d).is_zero()


def test_oracle_partition_matches_v_classes(z4):
    prob = DifferentialProblem(z4, OB3, zero_map(z4.mid, OB3, OB3, 1))
    res = oracle_differential(prob)
    witnesses = [witness_differential(prob, int(i)) for i in res.witness_indices]
    # group witnesses by vanishing difference class
    by_v = {}
    for w_idx, w in zip(res.witness_indices, witnesses):
        for key, (rep, members) in by_v.items():
            if v_class(prob, rep, w).is_zero:
                members.append(int(w_idx))
                break
        else:
            by_v[len(by_v)] = (w, [int(w_idx)])
    v_partition = sorted(tuple(sorted(m)) for _, m in by_v.values())
    o_partition = sorted(res.orbits)
    assert v_partition == o_partition
    assert len(o_partition) == 2 ** prob.kernel.h_dim(1) == classify_lifts(prob).count


@pytest.mark.parametrize("seed", range(12))
def test_differential_oracle_agreement(seed):
    inst = gen_instance("differential", seed)
    cls, _ = obstruct_differential(inst.problem)
    res = oracle_differential(inst.problem)
    assert cls.is_zero == (res.num_witnesses > 0)
    if res.num_witnesses:
        assert res.num_classes == inst.problem.kernel.p ** inst.problem.kernel.h_dim(1)


@pytest.mark.parametrize("seed", range(8))
def test_map_oracle_agreement(seed):
    inst = gen_instance("map", seed)
    cls, _ = obstruct_map(inst.problem)
    res = oracle_map(inst.problem)
    assert cls.is_zero == (res.num_witnesses > 0)
    for idx in res.witness_indices[:4]:
        f = witness_map(inst.problem, int(idx))
        assert delta(f, inst.problem.C.d, inst.problem.D.d).is_zero()


@pytest.mark.parametrize("seed", range(8))
def test_homotopy_oracle_agreement(seed):
    inst = gen_instance("homotopy", seed)
    cls, _ = obstruct_homotopy(inst.problem)
    res = oracle_homotopy(inst.problem)
    assert cls.is_zero == (res.num_witnesses > 0)


def test_sigma_lift_is_a_witness_for_trivial_deformation(z4):
    # lifting the zero differential: the coefficientwise lift (index 0 in
    # digit coordinates) must be among the witnesses
    prob = DifferentialProblem(z4, OB3, zero_map(z4.mid, OB3, OB3, 1))
    res = oracle_differential(prob)
    assert 0 in set(int(i) for i in res.witness_indices)


def test_parallel_scan_is_deterministic():
    inst = gen_instance("differential", 2)
    serial = oracle_differential(inst.problem, workers=1)
    parallel = oracle_differential(inst.problem, workers=4)
    assert np.array_equal(serial.witness_indices, parallel.witness_indices)
    assert serial.orbits == parallel.orbits


def test_gen_instance_is_deterministic():
    a = gen_instance("differential", 17)
    b = gen_instance("differential", 17)
    assert a.tower_desc == b.tower_desc
    assert a.problem.d_mid == b.problem.d_mid
    assert a.meta == b.meta


def test_gen_covers_towers_and_primes():
    seen_p = set()
    seen_kind = set()
    for seed in range(40):
        inst = gen_instance("differential", seed)
        seen_kind.add(inst.tower_desc[0])
        seen_p.add(inst.tower_desc[1])
    assert seen_p == {2, 3}
    assert len(seen_kind) >= 2
