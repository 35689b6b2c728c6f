"""One-parameter rotation paths that turn a small-angle real spectrum complex.

The path keeps every map of a 2-dimensional cocycle fixed except the last
one before returning to the base point, which is pre-composed with a rotation
``R(sign * alpha * t)``.  Along the path the return map is
``R(sign * alpha * t) @ sigma``, so its determinant is constant and its trace
``theta(t)`` is an explicit trigonometric function of ``t``.
"""
from __future__ import annotations

import csv
import io
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cocycle import PeriodicCocycle, bound_constant, eigenspace_angle, return_map
from .errors import (
    AngleTooLarge,
    DiameterExceeded,
    DomainError,
    NotDoubleEigenvalue,
    SpectrumNotRealPositiveDistinct,
    TargetOutOfRange,
)
from .linalg import SpectralData, eigen_spectrum, eigenvector_2x2, operator_norm, rotation

SQRT3 = math.sqrt(3.0)
QUARTER_PI = math.pi / 4.0
BISECTION_TOL = 1e-10


def rotation_constant(N: float = 1.0) -> float:
    return SQRT3 * N


def alpha_threshold(K: float, eps: float, N: float = 1.0) -> float:
    """Rotation budget eps / (sqrt(3) N K), clamped to pi/4."""
    if K <= 0 or eps <= 0:
        raise ValueError("K and eps must be positive")
    return min(eps / (rotation_constant(N) * K), QUARTER_PI)


def rotation_bound_check(s: float, t: float) -> tuple[float, float]:
    """(||R(s) - R(t)||, sqrt(3)|s - t|) for s, t in [-pi/4, pi/4]."""
    for name, v in (("s", s), ("t", t)):
        if abs(v) > QUARTER_PI:
            raise DomainError(f"{name}={v} outside [-pi/4, pi/4]")
    return operator_norm(rotation(s) - rotation(t)), SQRT3 * abs(s - t)


@dataclass(frozen=True, eq=False)
class TriangularForm:
    """sigma = Q @ [[lam1, mu], [0, lam2]] @ Q.T with Q a rotation."""
    lam1: float
    lam2: float
    mu: float
    Q: np.ndarray

    @property
    def beta(self) -> float:
        return math.atan2(self.lam1 + self.lam2, abs(self.mu))

    @property
    def angle(self) -> float:
        return math.atan2(self.lam2 - self.lam1, abs(self.mu))


def triangularize(sigma) -> TriangularForm:
    """Orthonormal (rotation) change of basis putting ``sigma`` in upper-triangular form.

    The first basis vector is the eigenvector of the smaller eigenvalue.
    """
    sigma = np.asarray(sigma, dtype=float)
    spec = eigen_spectrum(sigma)
    l1, l2 = (z.real for z in spec.eigenvalues)
    v = eigenvector_2x2(sigma, l1)
    Q = np.column_stack([v, [-v[1], v[0]]])
    T = Q.T @ sigma @ Q
    return TriangularForm(l1, l2, float(T[0, 1]), Q)


@dataclass(frozen=True, eq=False)
class CocyclePath:
    base: PeriodicCocycle
    base_index: int
    rotation_sign: float
    alpha: float
    # evaluation is frozen for t > t_stop
    t_stop: float = 1.0
    triangular: Optional[TriangularForm] = None

    def __post_init__(self):
        if self.base.dim != 2:
            raise ValueError("rotation paths live on 2-dimensional cocycles")
        if not 0.0 <= self.alpha <= QUARTER_PI:
            raise ValueError(f"alpha={self.alpha} outside [0, pi/4]")
        if self.rotation_sign not in (-1.0, 1.0, -1, 1):
            raise ValueError("rotation_sign must be +1 or -1")

    @property
    def perturbed_index(self) -> int:
        return (self.base_index - 1) % self.base.period

    def angle_at(self, t: float) -> float:
        return self.rotation_sign * self.alpha * min(t, self.t_stop)

    def perturbed_map(self, t: float) -> np.ndarray:
        return rotation(self.angle_at(t)) @ self.base.maps[self.perturbed_index]

    def at(self, t: float) -> PeriodicCocycle:
        if t == 0.0:
            return self.base
        return self.base.replace(self.perturbed_index, self.perturbed_map(t))

    def _prefix(self) -> np.ndarray:
        # maps[last-1] ... maps[base]: the part of the return map that never moves
        c = self.base
        out = np.eye(2)
        for k in range(c.period - 1):
            out = c.maps[(self.base_index + k) % c.period] @ out
        return out

    def return_map(self, t: float) -> np.ndarray:
        return self.perturbed_map(t) @ self._prefix()

    def theta_closed_form(self, t: float) -> float:
        x = self.angle_at(t)
        if self.triangular is not None:
            tf = self.triangular
            return (tf.lam1 + tf.lam2) * math.cos(x) + tf.mu * math.sin(x)
        # tr(R(x) M) = cos(x) tr(M) + sin(x) (M01 - M10)
        s = return_map(self.base, self.base_index)
        return (s[0, 0] + s[1, 1]) * math.cos(x) + (s[0, 1] - s[1, 0]) * math.sin(x)


def build_rotation_path(c: PeriodicCocycle, x_index: int, eps: float) -> CocyclePath:
    """Rotation path at the last orbit point before ``x_index``."""
    if c.dim != 2:
        raise ValueError("build_rotation_path expects a 2-dimensional cocycle")
    sigma = return_map(c, x_index)
    spec = eigen_spectrum(sigma)
    l1, l2 = spec.eigenvalues
    if spec.is_complex or l1.real <= 0 or l2.real <= 0 or abs(l2 - l1) <= 1e-12 * abs(l2):
        raise SpectrumNotRealPositiveDistinct(f"return map eigenvalues {l1}, {l2}")
    angle = eigenspace_angle(sigma)
    threshold = alpha_threshold(bound_constant(c), eps)
    if angle >= threshold:
        raise AngleTooLarge(f"eigenspace angle {angle:.6g} >= rotation budget {threshold:.6g}")
    tf = triangularize(sigma)
    # Rotating past beta drives the trace negative and can make the spectrum real again.
    alpha = threshold if threshold < tf.beta else 0.5 * (angle + tf.beta)
    sign = -1.0 if tf.mu > 0 else 1.0
    return CocyclePath(c, x_index, sign, alpha, triangular=tf)


@dataclass(frozen=True, eq=False)
class PathTrace:
    t: np.ndarray
    lambda_m: np.ndarray
    lambda_b: np.ndarray
    theta: np.ndarray
    theta_trace: np.ndarray
    det: np.ndarray
    is_complex: np.ndarray
    spectra: tuple = field(repr=False, default=())

    @property
    def sample_count(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> list:
        return list(zip(self.t, self.lambda_m, self.lambda_b, self.theta, self.det, self.is_complex))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "lambda_m", "lambda_b", "theta", "det", "is_complex"])
        for t, lm, lb, th, d, cx in self.samples:
            w.writerow([repr(float(t)), repr(float(lm)), repr(float(lb)), repr(float(th)),
                        repr(float(d)), "true" if cx else "false"])
        return buf.getvalue()


def trace_path(p: CocyclePath, samples: int = 1000) -> PathTrace:
    if samples < 2:
        raise ValueError("samples must be at least 2")
    ts = np.linspace(0.0, 1.0, samples)
    prefix = p._prefix()
    last = p.base.maps[p.perturbed_index]
    spectra = []
    lm, lb, th, th_tr, det, cx = ([] for _ in range(6))
    for t in ts:
        m = rotation(p.angle_at(t)) @ last @ prefix
        spec = eigen_spectrum(m)
        spectra.append(spec)
        lm.append(spec.lambda_m)
        lb.append(spec.lambda_b)
        th.append(p.theta_closed_form(t))
        th_tr.append(m[0, 0] + m[1, 1])
        det.append(spec.determinant)
        cx.append(spec.is_complex)
    return PathTrace(ts, np.array(lm), np.array(lb), np.array(th), np.array(th_tr),
                     np.array(det), np.array(cx), tuple(spectra))


def path_diameter(p: CocyclePath, samples: int = 1000) -> float:
    """Grid estimate of max dist(gamma(s), gamma(t)).

    Only one map moves, by a rotation, and ||(R(a) - R(b)) A|| depends on |a - b|
    alone (same for the inverse), so on a uniform grid the maximum over pairs
    equals the maximum over pairs (0, t_k).
    """
    A = p.base.maps[p.perturbed_index]
    Ai = np.linalg.inv(A)
    d = 0.0
    for t in np.linspace(0.0, 1.0, samples):
        x = p.angle_at(t)
        R = rotation(x)
        d = max(d, operator_norm(R @ A - A), operator_norm(Ai @ R.T - Ai))
    return d


@dataclass(frozen=True)
class PathContractReport:
    starts_at_base: bool
    diameter: float
    diameter_ok: bool
    det_drift: float
    det_constant: bool
    monotone: bool
    complex_at_end: bool
    hyperbolic_throughout: bool

    @property
    def all_ok(self) -> bool:
        """Conclusions (1)-(5); hyperbolicity is reported separately."""
        return (self.starts_at_base and self.diameter_ok and self.det_constant
                and self.monotone and self.complex_at_end)

    def to_dict(self) -> dict:
        return {
            "starts_at_base": self.starts_at_base,
            "diameter": self.diameter,
            "diameter_ok": self.diameter_ok,
            "det_drift": self.det_drift,
            "det_constant": self.det_constant,
            "monotone": self.monotone,
            "complex_at_end": self.complex_at_end,
            "hyperbolic_throughout": self.hyperbolic_throughout,
            "all_ok": self.all_ok,
        }


def _monotone(tr: PathTrace, slack: float = 1e-12) -> bool:
    lm, lb = tr.lambda_m, tr.lambda_b
    for k in range(len(lm) - 1):
        if lm[k + 1] < lm[k] - slack * max(1.0, lm[k]):
            return False
        if lb[k + 1] > lb[k] + slack * max(1.0, lb[k]):
            return False
    for k in np.flatnonzero(tr.is_complex):
        if abs(lm[k] - lb[k]) > slack * max(1.0, lb[k]):
            return False
    return True


def verify_path_contract(p: CocyclePath, eps: float, samples: int = 1000) -> PathContractReport:
    tr = trace_path(p, samples)
    g0 = p.at(0.0)
    starts = all(np.array_equal(a, b) for a, b in zip(g0.maps, p.base.maps))
    diam = path_diameter(p, samples)
    d0 = tr.det[0]
    drift = float(np.max(np.abs(tr.det - d0)) / abs(d0))
    return PathContractReport(
        starts_at_base=starts,
        diameter=diam,
        diameter_ok=diam < eps,
        det_drift=drift,
        det_constant=drift < 1e-12,
        monotone=_monotone(tr),
        complex_at_end=bool(tr.is_complex[-1]),
        hyperbolic_throughout=all(s.is_hyperbolic(1e-9) for s in tr.spectra),
    )


def bounded_after_perturbation(base_norm_bound: float, p: CocyclePath, eps: float,
                               samples: int = 1000) -> float:
    """Bound eps + ||sigma|| for the endpoint of a path of diameter below eps."""
    diam = path_diameter(p, samples)
    if diam > eps:
        raise DiameterExceeded(f"path diameter {diam:.6g} exceeds eps={eps:.6g}")
    return eps + base_norm_bound


def complexify_double_eigenvalue(m, delta: float) -> np.ndarray:
    """Matrix within ``delta`` of a Jordan block [[lam, t], [0, lam]] with a complex pair."""
    m = np.asarray(m, dtype=float)
    lam, t = m[0, 0], m[0, 1]
    if m.shape != (2, 2) or m[1, 0] != 0.0 or abs(m[1, 1] - lam) > 1e-12 * max(1.0, abs(lam)) or lam <= 0:
        raise NotDoubleEigenvalue("expected [[lam, t], [0, lam]] with lam > 0")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if delta * abs(t) < sys.float_info.min:
        # t = 0, or too small for the shear to split the root in floating point:
        # ||R(a) m - m|| = 2 sin(a/2) ||m|| <= a ||m||
        a = min(delta / operator_norm(m), QUARTER_PI)
        return rotation(a) @ m
    # discriminant -4 delta |t| < 0
    return np.array([[lam, t], [-math.copysign(delta, t), m[1, 1]]])


def truncate_path(p: CocyclePath, target_lambda_m: float) -> CocyclePath:
    """Freeze the path where the smaller modulus first reaches ``target_lambda_m``."""
    def lam_m(t):
        return eigen_spectrum(p.return_map(t)).lambda_m

    lo_val, hi_val = lam_m(0.0), lam_m(1.0)
    if not lo_val <= target_lambda_m <= hi_val:
        raise TargetOutOfRange(
            f"target {target_lambda_m} outside [lambda_m(0), lambda_m(1)] = [{lo_val}, {hi_val}]"
        )
    if target_lambda_m == lo_val:
        return replace(p, t_stop=0.0)
    lo, hi = 0.0, p.t_stop
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lam_m(mid) < target_lambda_m:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16:
            break
    t0 = hi if abs(lam_m(hi) - target_lambda_m) <= abs(lam_m(lo) - target_lambda_m) else lo
    if abs(lam_m(t0) - target_lambda_m) > BISECTION_TOL:
        raise TargetOutOfRange(f"bisection did not reach {target_lambda_m} within {BISECTION_TOL}")
    return replace(p, t_stop=t0)
