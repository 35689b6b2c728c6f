import functools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tangencylab.cocycle import (
    PeriodicCocycle,
    SplittingCandidate,
    bound_constant,
    check_n_dominated,
    cocycle_distance,
    domination_dichotomy,
    domination_products,
    eigenspace_angle,
    is_invariant,
    jacobian,
    min_domination_time,
    quotient_cocycle,
    return_map,
    return_spectrum,
)
from tangencylab.errors import (
    ComplexOrRepeatedSpectrum,
    NonInvariantLine,
    NonInvariantSplitting,
    ShapeMismatch,
)
from tangencylab.linalg import rotation
from tangencylab.sampling import random_diagonalizable_cocycle

E1_2D = SplittingCandidate.constant(1, [[1.0, 0.0]], [[0.0, 1.0]])


def single(m):
    return PeriodicCocycle([np.asarray(m, dtype=float)])


def test_cocycle_validation():
    with pytest.raises(ValueError):
        PeriodicCocycle([np.zeros((2, 2))])
    with pytest.raises(ValueError):
        PeriodicCocycle([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        PeriodicCocycle([np.eye(4)])
    with pytest.raises(ValueError):
        PeriodicCocycle([])


def test_maps_are_read_only():
    c = single(np.eye(2))
    with pytest.raises(ValueError):
        c.maps[0][0, 0] = 5.0


def test_json_round_trip():
    c = PeriodicCocycle([np.diag([2.0, 1.0]), [[1.0, 2.0], [0.0, 3.0]]])
    back = PeriodicCocycle.from_json(json.dumps(c.to_json()))
    assert cocycle_distance(c, back) == 0.0


def test_return_map_identity_and_diagonal():
    np.testing.assert_array_equal(return_map(single(np.eye(2))), np.eye(2))
    c = PeriodicCocycle([np.diag([2.0, 1.0]), np.diag([1.0, 3.0])])
    np.testing.assert_array_equal(return_map(c, 0), np.diag([2.0, 3.0]))


def test_return_map_order_and_associativity(rng):
    maps = [rng.normal(size=(3, 3)) for _ in range(3)]
    c = PeriodicCocycle(maps)
    # maps[2] @ (maps[1] @ maps[0]) against (maps[2] @ maps[1]) @ maps[0]
    other = functools.reduce(lambda acc, m: acc @ m, [maps[2], maps[1], maps[0]])
    np.testing.assert_allclose(return_map(c, 0), other, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(return_map(c, 1), maps[0] @ maps[2] @ maps[1], atol=1e-12)
    assert jacobian(c, 1) == pytest.approx(np.linalg.det(return_map(c, 1)))


def test_return_map_is_conjugate_across_base(rng):
    c = PeriodicCocycle([rng.normal(size=(2, 2)) for _ in range(3)])
    s0 = sorted(abs(z) for z in return_spectrum(c, 0).eigenvalues)
    s2 = sorted(abs(z) for z in return_spectrum(c, 2).eigenvalues)
    np.testing.assert_allclose(s0, s2, rtol=1e-9)


def test_bound_constant_examples():
    assert bound_constant(single(np.eye(2))) == 1.0 + 1e-12
    assert bound_constant(single(np.diag([2.0, 0.25]))) == pytest.approx(4.0 + 1e-12, abs=1e-15)
    m = rotation(0.3) @ np.diag([3.0, 1.0 / 3.0])
    ref = max(np.linalg.svd(m, compute_uv=False)[0], np.linalg.svd(np.linalg.inv(m), compute_uv=False)[0])
    assert ref == pytest.approx(3.0)
    assert bound_constant(single(m)) == pytest.approx(ref + 1e-12, abs=1e-13)


@given(st.integers(0, 10**6))
def test_bound_constant_is_strict(seed):
    r = np.random.default_rng(seed)
    c = PeriodicCocycle([r.normal(size=(3, 3)) + 3 * np.eye(3) for _ in range(2)])
    K = bound_constant(c)
    for m in c.maps:
        assert np.linalg.norm(m, 2) < K
        assert np.linalg.norm(np.linalg.inv(m), 2) < K


def test_domination_examples():
    assert check_n_dominated(single(np.diag([0.5, 2.0])), E1_2D, 1)
    assert min_domination_time(single(np.diag([0.5, 2.0])), E1_2D, 10) == 1
    c = single(np.diag([0.9, 1.1]))
    # (0.9/1.1)^3 = 0.5477..., (0.9/1.1)^4 = 0.4481...
    assert (0.9 / 1.1) ** 3 > 0.5 > (0.9 / 1.1) ** 4
    assert not check_n_dominated(c, E1_2D, 3)
    assert check_n_dominated(c, E1_2D, 4)
    assert min_domination_time(c, E1_2D, 10) == 4
    np.testing.assert_allclose(domination_products(c, E1_2D.F, E1_2D.G, 4), [(0.9 / 1.1) ** 4])


def test_identity_never_dominated():
    c = single(np.eye(2))
    for n in (1, 5, 64):
        assert not check_n_dominated(c, E1_2D, n)
    assert min_domination_time(c, E1_2D, 64) is None
    tilted = SplittingCandidate.constant(1, [[1.0, 0.0]], [[math.sqrt(0.5), math.sqrt(0.5)]])
    assert min_domination_time(c, tilted, 64) is None


def test_non_invariant_splitting_rejected():
    c = single([[1.0, 1.0], [0.0, 2.0]])
    bad = SplittingCandidate.constant(1, [[0.0, 1.0]], [[1.0, 0.0]])
    with pytest.raises(NonInvariantSplitting):
        check_n_dominated(c, bad, 1)
    with pytest.raises(NonInvariantSplitting):
        min_domination_time(c, bad)


def test_splitting_validation():
    with pytest.raises(ValueError):
        SplittingCandidate.constant(1, [[2.0, 0.0]], [[0.0, 1.0]])
    with pytest.raises(ValueError):
        SplittingCandidate.constant(1, [[1.0, 0.0]], [[1.0, 0.0]])


def test_period_two_skewed_splitting():
    # lines rotate from one point to the next
    B0, B1 = rotation(0.2), rotation(-0.4)
    maps = [B1 @ np.diag([0.5, 2.0]) @ B0.T, B0 @ np.diag([0.7, 1.2]) @ B1.T]
    c = PeriodicCocycle(maps)
    s = SplittingCandidate((B0[:, [0]].T, B1[:, [0]].T), (B0[:, [1]].T, B1[:, [1]].T))
    assert is_invariant(c, s.F) and is_invariant(c, s.G)
    # per-point products (0.5/2)=0.25 and (0.7/1.2)=0.583...
    assert min_domination_time(c, s) == 2


@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(2, 4))
def test_domination_persists_at_multiples(seed, n, k):
    r = np.random.default_rng(seed)
    c, lines = random_diagonalizable_cocycle(r, dim=3)
    s = SplittingCandidate(tuple(np.array([v]) for v in lines[0]),
                           tuple(np.vstack([a, b]) for a, b in zip(lines[1], lines[2])))
    if check_n_dominated(c, s, n):
        assert check_n_dominated(c, s, k * n)


def test_eigenspace_angle_examples():
    assert eigenspace_angle(np.diag([1.0, 2.0])) == pytest.approx(math.pi / 2)
    assert eigenspace_angle([[1.0, 1.0], [0.0, 2.0]]) == pytest.approx(math.pi / 4)
    assert eigenspace_angle([[1.0, 100.0], [0.0, 2.0]]) == pytest.approx(math.atan(0.01), rel=1e-12)


def test_eigenspace_angle_errors():
    with pytest.raises(ComplexOrRepeatedSpectrum):
        eigenspace_angle(rotation(0.5))
    with pytest.raises(ComplexOrRepeatedSpectrum):
        eigenspace_angle(2.0 * np.eye(2))
    with pytest.raises(ComplexOrRepeatedSpectrum):
        eigenspace_angle([[1.0, 1.0], [0.0, 1.0]])


@given(st.floats(0.1, 3.0), st.floats(0.01, 2.0), st.floats(-50, 50).filter(lambda v: abs(v) > 1e-3),
       st.floats(0, 2 * math.pi))
def test_eigenspace_angle_triangular_formula(l1, gap, mu, phi):
    Q = rotation(phi)
    m = Q @ np.array([[l1, mu], [0.0, l1 + gap]]) @ Q.T
    assert eigenspace_angle(m) == pytest.approx(math.atan(gap / abs(mu)), rel=1e-7, abs=1e-12)


def test_distance_examples():
    c = single(np.diag([2.0, 3.0]))
    assert cocycle_distance(c, c) == 0.0
    h = 0.25
    d = cocycle_distance(single(np.eye(2)), single(np.diag([1 + h, 1.0])))
    assert d == pytest.approx(max(h, h / (1 + h)))
    with pytest.raises(ShapeMismatch):
        cocycle_distance(single(np.eye(2)), single(np.eye(3)))
    with pytest.raises(ShapeMismatch):
        cocycle_distance(single(np.eye(2)), PeriodicCocycle([np.eye(2), np.eye(2)]))


@given(st.integers(0, 10**6))
def test_distance_is_a_metric(seed):
    r = np.random.default_rng(seed)
    cs = [PeriodicCocycle([r.normal(size=(2, 2)) + 2 * np.eye(2) for _ in range(2)]) for _ in range(3)]
    a, b, c = cs
    assert cocycle_distance(a, b) == pytest.approx(cocycle_distance(b, a), rel=1e-12)
    assert cocycle_distance(a, c) <= cocycle_distance(a, b) + cocycle_distance(b, c) + 1e-12
    assert cocycle_distance(a, a) == 0.0 and cocycle_distance(a, b) > 0.0


def test_quotient_diagonal():
    q = quotient_cocycle(single(np.diag([2.0, 3.0, 5.0])), [[0.0, 1.0, 0.0]])
    np.testing.assert_allclose(q.maps[0], np.diag([2.0, 5.0]), atol=1e-15)


def test_quotient_of_block_lower_triangular():
    # span(e3) is invariant for [[A, 0], [w, lam]] and the quotient acts as A
    A = np.array([[1.0, 2.0], [-0.5, 3.0]])
    m = np.zeros((3, 3))
    m[:2, :2] = A
    m[2] = [0.7, -1.1, 4.0]
    q = quotient_cocycle(single(m), [[0.0, 0.0, 1.0]])
    np.testing.assert_allclose(q.maps[0], A, atol=1e-14)


def test_quotient_rejects_non_invariant_line():
    m = np.array([[1.0, 0.0, 1.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    with pytest.raises(NonInvariantLine):
        quotient_cocycle(single(m), [[0.0, 0.0, 1.0]])


@given(st.integers(0, 10**6))
def test_quotient_determinant_factorization(seed):
    r = np.random.default_rng(seed)
    c, lines = random_diagonalizable_cocycle(r, dim=3)
    line = lines[1]
    q = quotient_cocycle(c, line)
    sigma = return_map(c, 0)
    v = line[0] / np.linalg.norm(line[0])
    lam_line = float(v @ sigma @ v)
    lhs, rhs = np.linalg.det(sigma), lam_line * np.linalg.det(return_map(q, 0))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


COORD = ([[1.0, 0, 0]], [[0, 1.0, 0]], [[0, 0, 1.0]])


def test_dichotomy_examples():
    rep = domination_dichotomy(single(np.diag([0.5, 1.0, 2.0])), *COORD)
    assert rep.e1_vs_e23 and rep.e1_vs_e2 and rep.quotient
    # n=1 gives exactly 1/2 for E1 against E2+E3, which is not strict
    assert rep.time_e1_vs_e23 == 2 and rep.time_e1_vs_e2 == 2 and rep.time_quotient == 1
    assert rep.implication_holds
    rep = domination_dichotomy(single(np.eye(3)), *COORD)
    assert not (rep.e1_vs_e23 or rep.e1_vs_e2 or rep.quotient)
    assert rep.implication_holds
    assert set(rep.to_dict()) == {"n_max", "e1_vs_e23", "e1_vs_e2", "quotient", "conclusion_horizon", "implication_holds"}


def test_dichotomy_input_errors():
    m = np.array([[1.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    with pytest.raises(NonInvariantLine):
        domination_dichotomy(single(m), [[0, 1.0, 0]], [[1.0, 0, 0]], [[0, 0, 1.0]])
    with pytest.raises(NonInvariantLine):
        domination_dichotomy(single(np.eye(3)), [[1.0, 0, 0]], [[1.0, 0, 0]], [[0, 0, 1.0]])
    with pytest.raises(ShapeMismatch):
        domination_dichotomy(single(np.eye(2)), *COORD)


def test_dichotomy_random_instances(rng):
    for _ in range(40):
        c, lines = random_diagonalizable_cocycle(rng)
        assert domination_dichotomy(c, *lines).implication_holds


def test_dichotomy_conclusion_beyond_premise_horizon():
    # premises hold at n = 61 and n = 3; the combined splitting first dominates at n = 65
    rng = np.random.default_rng(20240601)
    for _ in range(83):
        c, lines = random_diagonalizable_cocycle(rng)
    rep = domination_dichotomy(c, *lines, n_max=64)
    assert (rep.time_e1_vs_e2, rep.time_quotient) == (61, 3)
    assert rep.time_e1_vs_e23 == 65
    assert rep.conclusion_horizon == 16 * 64
    assert rep.implication_holds


def test_domination_scan_survives_long_horizons():
    # forward and backward norms alone overflow long before n = 2000
    c = PeriodicCocycle([np.diag([1e3, 1.01e3])])
    s = SplittingCandidate([[[1.0, 0.0]]], [[[0.0, 1.0]]])
    vals = domination_products(c, s.F, s.G, 2000)
    assert vals[0] == pytest.approx(1.01 ** -2000, rel=1e-9)
