import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tangencylab.cocycle import PeriodicCocycle, bound_constant, eigenspace_angle, return_map
from tangencylab.errors import (
    AngleTooLarge,
    DiameterExceeded,
    DomainError,
    NotDoubleEigenvalue,
    SpectrumNotRealPositiveDistinct,
    TargetOutOfRange,
)
from tangencylab.linalg import eigen_spectrum, operator_norm, rotation
from tangencylab.paths import (
    CocyclePath,
    alpha_threshold,
    bounded_after_perturbation,
    build_rotation_path,
    complexify_double_eigenvalue,
    path_diameter,
    rotation_bound_check,
    trace_path,
    truncate_path,
    verify_path_contract,
)
from tangencylab.sampling import random_small_angle_cocycle


def single(m):
    return PeriodicCocycle([np.asarray(m, dtype=float)])


def test_alpha_threshold_examples():
    assert alpha_threshold(10.0, math.sqrt(3) / 10) == pytest.approx(0.01, rel=1e-15)
    assert alpha_threshold(1.0, 10.0) == math.pi / 4
    vals = [alpha_threshold(5.0, e) for e in (1.0, 0.1, 0.01, 0.001)]
    assert vals == sorted(vals, reverse=True) and vals[-1] < 1e-3
    with pytest.raises(ValueError):
        alpha_threshold(0.0, 1.0)


def test_rotation_bound_examples():
    assert rotation_bound_check(0.1, 0.1) == (0.0, 0.0)
    lhs, rhs = rotation_bound_check(0.0, math.pi / 4)
    assert lhs == pytest.approx(2 * math.sin(math.pi / 8), rel=1e-14)
    assert rhs == pytest.approx(math.sqrt(3) * math.pi / 4)
    assert lhs <= rhs
    with pytest.raises(DomainError):
        rotation_bound_check(0.0, 1.0)


@given(st.floats(-math.pi / 4, math.pi / 4), st.floats(-math.pi / 4, math.pi / 4))
def test_rotation_bound_holds(s, t):
    lhs, rhs = rotation_bound_check(s, t)
    assert lhs <= rhs + 1e-15
    # exact norm of a rotation difference
    assert lhs == pytest.approx(2 * abs(math.sin((s - t) / 2)), abs=1e-15)


def test_build_path_on_near_double_eigenvalue():
    c = single([[1.0, 10.0], [0.0, 1.01]])
    assert eigenspace_angle(c.maps[0]) == pytest.approx(math.atan(0.001))
    p = build_rotation_path(c, 0, 1.0)
    assert p.alpha == pytest.approx(alpha_threshold(bound_constant(c), 1.0))
    assert p.rotation_sign == -1.0
    assert eigen_spectrum(p.return_map(1.0)).is_complex
    np.testing.assert_array_equal(p.at(0.0).maps[0], c.maps[0])


def test_rotation_sign_follows_upper_corner():
    p = build_rotation_path(single([[1.0, -10.0], [0.0, 1.01]]), 0, 1.0)
    assert p.rotation_sign == 1.0
    assert eigen_spectrum(p.return_map(1.0)).is_complex


def test_period_two_rotation_only_at_last_index():
    A0 = np.array([[2.0, 0.0], [0.0, 1.0]])
    A1 = np.array([[0.5, 50.0], [0.0, 1.02]])
    c = PeriodicCocycle([A0, A1])
    np.testing.assert_allclose(return_map(c, 0), [[1.0, 50.0], [0.0, 1.02]])
    p = build_rotation_path(c, 0, 3.0)
    assert p.perturbed_index == 1
    g1 = p.at(1.0)
    np.testing.assert_array_equal(g1.maps[0], A0)
    assert not np.array_equal(g1.maps[1], A1)
    np.testing.assert_allclose(return_map(g1, 0), p.return_map(1.0), atol=1e-13)
    assert eigen_spectrum(return_map(g1, 0)).is_complex


def test_build_path_preconditions():
    with pytest.raises(AngleTooLarge):
        build_rotation_path(single([[1.0, 1.0], [0.0, 2.0]]), 0, 0.1)
    with pytest.raises(SpectrumNotRealPositiveDistinct):
        build_rotation_path(single(rotation(0.3)), 0, 1.0)
    with pytest.raises(SpectrumNotRealPositiveDistinct):
        build_rotation_path(single([[-1.0, 10.0], [0.0, -1.01]]), 0, 1.0)
    with pytest.raises(SpectrumNotRealPositiveDistinct):
        build_rotation_path(single([[1.0, 10.0], [0.0, 1.0]]), 0, 1.0)


def test_trace_starts_at_base_spectrum():
    c = single([[0.5, 10.0], [0.0, 0.51]])
    p = build_rotation_path(c, 0, 0.5)
    tr = trace_path(p, 50)
    s0 = eigen_spectrum(c.maps[0])
    assert tr.lambda_m[0] == pytest.approx(s0.lambda_m, rel=1e-14)
    assert tr.lambda_b[0] == pytest.approx(s0.lambda_b, rel=1e-14)
    assert np.all(np.diff(tr.t) > 0) and tr.t[0] == 0.0 and tr.t[-1] == 1.0
    assert tr.sample_count == 50


def test_theta_closed_forms_agree():
    c = single(rotation(0.4) @ np.array([[0.5, 10.0], [0.0, 0.51]]) @ rotation(-0.4))
    p = build_rotation_path(c, 0, 0.5)
    tf = p.triangular
    assert tf.lam1 == pytest.approx(0.5) and tf.lam2 == pytest.approx(0.51) and abs(tf.mu) == pytest.approx(10.0)
    tr = trace_path(p, 1000)
    amp = math.hypot(tf.lam1 + tf.lam2, tf.mu)
    beta = math.atan2(tf.lam1 + tf.lam2, abs(tf.mu))
    expected = amp * np.sin(beta - p.alpha * tr.t)
    assert np.max(np.abs(tr.theta - expected)) <= 1e-10
    assert np.max(np.abs(tr.theta - tr.theta_trace)) <= 1e-10
    assert np.max(np.abs(tr.det - tr.det[0])) <= 1e-12 * tr.det[0]


def test_trace_csv():
    p = build_rotation_path(single([[1.0, 10.0], [0.0, 1.01]]), 0, 1.0)
    text = trace_path(p, 5).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "lambda_m", "lambda_b", "theta", "det", "is_complex"]
    assert len(rows) == 6
    assert rows[1][5] == "false" and rows[-1][5] == "true"
    assert float(rows[-1][0]) == 1.0


def test_contract_on_small_angle_example():
    c = single([[0.5, 10.0], [0.0, 0.51]])
    p = build_rotation_path(c, 0, 0.5)
    rep = verify_path_contract(p, 0.5)
    assert rep.starts_at_base and rep.diameter_ok and rep.det_constant
    assert rep.monotone and rep.complex_at_end and rep.all_ok
    assert rep.hyperbolic_throughout


def test_contract_on_constant_path():
    c = single([[0.5, 10.0], [0.0, 0.51]])
    rep = verify_path_contract(CocyclePath(c, 0, 1.0, 0.0), 0.5)
    assert rep.starts_at_base and rep.det_constant and rep.monotone
    assert not rep.complex_at_end and not rep.all_ok
    assert rep.diameter == 0.0


def test_contract_flags_unit_modulus():
    s = 1.0 / math.sqrt(0.99)
    c = single([[0.9 * s, 30.0], [0.0, 1.1 * s]])
    assert eigen_spectrum(c.maps[0]).determinant == pytest.approx(1.0)
    p = build_rotation_path(c, 0, 1.0)
    rep = verify_path_contract(p, 1.0)
    assert rep.complex_at_end and rep.all_ok
    assert not rep.hyperbolic_throughout


def test_diameter_matches_rotation_formula():
    c = single([[0.5, 10.0], [0.0, 0.51]])
    p = build_rotation_path(c, 0, 0.5)
    A = c.maps[0]
    scale = max(operator_norm(A), operator_norm(np.linalg.inv(A)))
    assert path_diameter(p) == pytest.approx(2 * math.sin(p.alpha / 2) * scale, rel=1e-12)
    # brute force over all pairs of a coarse grid
    ts = np.linspace(0, 1, 21)
    brute = max(max(operator_norm(p.perturbed_map(s) - p.perturbed_map(t)),
                    operator_norm(np.linalg.inv(p.perturbed_map(s)) - np.linalg.inv(p.perturbed_map(t))))
                for s in ts for t in ts)
    assert path_diameter(p, 21) == pytest.approx(brute, rel=1e-12)


def test_bounded_after_perturbation():
    c = single([[0.5, 10.0], [0.0, 0.51]])
    K = bound_constant(c)
    assert bounded_after_perturbation(K, CocyclePath(c, 0, 1.0, 0.0), 0.0) == K
    p = build_rotation_path(c, 0, 0.5)
    bound = bounded_after_perturbation(K, p, 0.5)
    assert bound == K + 0.5
    assert bound_constant(p.at(1.0)) <= bound + 1e-12
    with pytest.raises(DiameterExceeded):
        bounded_after_perturbation(K, p, 1e-6)


def test_complexify_identity_block():
    B = complexify_double_eigenvalue([[2.0, 0.0], [0.0, 2.0]], 0.01)
    a = 0.01 / 2
    spec = eigen_spectrum(B)
    assert spec.is_complex
    assert spec.eigenvalues[0] == pytest.approx(2 * complex(math.cos(a), math.sin(a)), rel=1e-14)
    assert operator_norm(B - 2 * np.eye(2)) <= 0.01


def test_complexify_jordan_block():
    m = np.array([[2.0, 1.0], [0.0, 2.0]])
    B = complexify_double_eigenvalue(m, 0.01)
    np.testing.assert_allclose(B, [[2.0, 1.0], [-0.01, 2.0]])
    spec = eigen_spectrum(B)
    assert spec.eigenvalues[0] == pytest.approx(2 + 0.1j, rel=1e-14)
    assert operator_norm(B - m) <= 0.01 + 1e-15


@given(st.floats(0.1, 5.0), st.floats(-20, 20), st.floats(1e-6, 1.0))
def test_complexify_property(lam, t, delta):
    m = np.array([[lam, t], [0.0, lam]])
    B = complexify_double_eigenvalue(m, delta)
    assert eigen_spectrum(B).is_complex
    assert operator_norm(B - m) <= delta * (1 + 1e-12)


def test_complexify_rejects_distinct_eigenvalues():
    with pytest.raises(NotDoubleEigenvalue):
        complexify_double_eigenvalue([[2.0, 1.0], [0.0, 3.0]], 0.1)
    with pytest.raises(NotDoubleEigenvalue):
        complexify_double_eigenvalue([[-2.0, 0.0], [0.0, -2.0]], 0.1)


def test_truncate_at_start_is_constant():
    c = single([[0.5, 20.0], [0.0, 0.9]])
    p = build_rotation_path(c, 0, 2.0)
    q = truncate_path(p, eigen_spectrum(c.maps[0]).lambda_m)
    assert q.t_stop == 0.0
    np.testing.assert_array_equal(q.at(1.0).maps[0], c.maps[0])


def test_truncate_reaches_target():
    c = single([[0.5, 20.0], [0.0, 0.9]])
    p = build_rotation_path(c, 0, 2.0)
    q = truncate_path(p, 0.6)
    spec = eigen_spectrum(q.return_map(1.0))
    assert abs(spec.lambda_m - 0.6) <= 1e-10
    assert spec.lambda_b == pytest.approx(0.45 / 0.6, rel=1e-9)
    assert q.t_stop < 0.99
    np.testing.assert_array_equal(q.return_map(0.99), q.return_map(1.0))
    tr = trace_path(q, 200)
    assert np.all(np.diff(tr.lambda_m) >= -1e-12)


def test_truncate_rejects_unreachable_target():
    # det = 0.45, so the smaller modulus never exceeds sqrt(0.45) = 0.6708...
    c = single([[0.5, 20.0], [0.0, 0.9]])
    p = build_rotation_path(c, 0, 2.0)
    with pytest.raises(TargetOutOfRange):
        truncate_path(p, 0.7)
    with pytest.raises(TargetOutOfRange):
        truncate_path(p, 0.4)


@given(st.integers(0, 10**6))
def test_random_paths_properties(seed):
    r = np.random.default_rng(seed)
    c, eps = random_small_angle_cocycle(r)
    p = build_rotation_path(c, 0, eps)
    tr = trace_path(p, 1000)
    d = tr.det[0]
    assert tr.is_complex[-1]
    assert tr.theta[-1] < 2 * math.sqrt(d)
    assert np.all(tr.theta > 0) and np.all(np.diff(tr.theta) < 0)
    assert np.max(np.abs(tr.lambda_m * tr.lambda_b - d)) <= 1e-12 * d
    K = bound_constant(c)
    assert path_diameter(p) <= math.sqrt(3) * K * p.alpha
    assert verify_path_contract(p, eps).all_ok
    assert bound_constant(p.at(1.0)) <= bounded_after_perturbation(K, p, eps) + 1e-12


@pytest.mark.parametrize("t", [5e-324, -5e-324, 1e-310])
def test_complexify_tiny_shear(t):
    m = np.array([[1.0, t], [0.0, 1.0]])
    B = complexify_double_eigenvalue(m, 0.5)
    assert eigen_spectrum(B).is_complex
    assert operator_norm(B - m) <= 0.5 * (1 + 1e-12)
