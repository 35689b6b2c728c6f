"""Piecewise-affine unfolding of a degenerate heterodimensional tangency.

The model lives in one chart around a saddle ``X`` at the origin:

* near ``X`` the map is linear, ``(x, y, z) -> (lam x, lam_t y, mu z)`` on the
  open box ``(-1, 1)^2 x (-1/mu, 1/mu)``;
* on the closed box ``W0 = [-e, e]^2 x [p-e, p+e]`` around ``P = (0, 0, p)``
  an excursion of ``N`` time steps lands affinely near ``Q = (0, q, 0)``:
  ``(x, y, p + z) -> (a z, b y + q, c x + t)``.

Points outside both pieces have no dynamics; iteration stops there.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    DegenerateEntries,
    InadmissibleN,
    InvalidModel,
    NotYetInWindow,
    OutOfChart,
    OutsideW0,
    ResonantDenominator,
)
from .linalg import SpectralData, eigen_spectrum

DEFAULT_N_MAX = 64
CLOSURE_TOL = 1e-9
MINIMALITY_TOL = 1e-6
RESONANCE_TOL = 1e-12

LOCAL, RETURN = "local", "return"
OK, LEFT_DOMAIN, BUDGET = "ok", "left_domain", "budget_exhausted"


def default_n_max() -> int:
    raw = os.environ.get("LAB_N_MAX")
    return int(raw) if raw else DEFAULT_N_MAX


@dataclass(frozen=True)
class UnfoldingModel:
    lam: float
    lam_t: float
    mu: float
    p: float
    q: float
    a: float
    b: float
    c: float
    N: int
    eps_box: float

    @property
    def volume_expanding(self) -> bool:
        return self.lam * self.lam_t * self.mu > 1.0

    @classmethod
    def from_dict(cls, d: dict) -> "UnfoldingModel":
        keys = {"lambda": "lam", "lambda_tilde": "lam_t", "mu": "mu", "p": "p", "q": "q",
                "a": "a", "b": "b", "c": "c", "N": "N", "eps_box": "eps_box"}
        missing = [k for k in keys if k not in d]
        if missing:
            raise InvalidModel(f"missing model field(s): {', '.join(missing)}")
        extra = sorted(set(d) - set(keys))
        if extra:
            raise InvalidModel(f"unknown model field(s): {', '.join(extra)}")
        kw = {}
        for k, attr in keys.items():
            v = d[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidModel(f"model field {k} must be a number")
            kw[attr] = v
        if kw["N"] != int(kw["N"]):
            raise InvalidModel("model field N must be an integer")
        kw["N"] = int(kw["N"])
        return cls(**{k: (v if k == "N" else float(v)) for k, v in kw.items()})

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "lambda_tilde": self.lam_t, "mu": self.mu, "p": self.p,
                "q": self.q, "a": self.a, "b": self.b, "c": self.c, "N": self.N,
                "eps_box": self.eps_box}

    def with_values(self, **kw) -> "UnfoldingModel":
        names = {f.name for f in fields(self)}
        alias = {"lambda": "lam", "lambda_tilde": "lam_t"}
        kw = {alias.get(k, k): v for k, v in kw.items()}
        bad = set(kw) - names
        if bad:
            raise InvalidModel(f"unknown model field(s): {', '.join(sorted(bad))}")
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return UnfoldingModel(**d)


REFERENCE_MODEL = UnfoldingModel(0.8, 0.7, 2.0, 0.5, 0.5, 1.0, 1.0, 1.0, 2, 0.05)


@dataclass(frozen=True)
class ModelReport:
    errors: tuple[str, ...]
    volume_expanding: bool
    lambda_mu_gt_one: bool

    @property
    def valid(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {"valid": self.valid, "errors": list(self.errors),
                "volume_expanding": self.volume_expanding,
                "lambda_mu_gt_one": self.lambda_mu_gt_one}


def validate_model(m: UnfoldingModel) -> ModelReport:
    errs = []
    if not 0.0 < m.lam_t < m.lam < 1.0 < m.mu:
        errs.append("ordering 0 < lambda_tilde < lambda < 1 < mu violated")
    if not (0.0 < m.p < 1.0 and 0.0 < m.q < 1.0):
        errs.append("p and q must lie in (0, 1)")
    for name in ("a", "b", "c"):
        if getattr(m, name) == 0.0:
            errs.append(f"{name} must be nonzero")
    if m.N < 2:
        errs.append("N must be at least 2")
    if not 0.0 < m.eps_box < min(1.0 - m.p, m.p):
        errs.append("eps_box must satisfy 0 < eps_box < min(p, 1 - p)")
    return ModelReport(tuple(errs), m.volume_expanding, m.lam * m.mu > 1.0)


def ensure_valid(m: UnfoldingModel) -> UnfoldingModel:
    rep = validate_model(m)
    if not rep.valid:
        raise InvalidModel("; ".join(rep.errors))
    return m


# --- dynamics -------------------------------------------------------------

def in_local_domain(m: UnfoldingModel, pt) -> bool:
    x, y, z = pt
    return abs(x) < 1.0 and abs(y) < 1.0 and abs(z) < 1.0 / m.mu


def in_W0(m: UnfoldingModel, pt) -> bool:
    x, y, z = pt
    e = m.eps_box
    return abs(x) <= e and abs(y) <= e and abs(z - m.p) <= e


def _local_raw(m, pt):
    x, y, z = pt
    return np.array([m.lam * x, m.lam_t * y, m.mu * z])


def _return_raw(m, t, pt):
    x, y, z = pt
    return np.array([m.a * (z - m.p), m.b * y + m.q, m.c * x + t])


def local_step(m: UnfoldingModel, point) -> np.ndarray:
    if not in_local_domain(m, point):
        raise OutOfChart(f"{tuple(point)} outside (-1,1)^2 x (-1/mu, 1/mu)")
    return _local_raw(m, point)


def return_step(m: UnfoldingModel, t: float, point) -> np.ndarray:
    if not in_W0(m, point):
        raise OutsideW0(f"{tuple(point)} outside W0")
    return _return_raw(m, t, point)


def inverse_local_step(m: UnfoldingModel, point) -> np.ndarray:
    x, y, z = point
    return np.array([x / m.lam, y / m.lam_t, z / m.mu])


def inverse_return_step(m: UnfoldingModel, t: float, point) -> np.ndarray:
    X, Y, Z = point
    return np.array([(Z - t) / m.c, (Y - m.q) / m.b, m.p + X / m.a])


@dataclass
class Trajectory:
    points: list
    kinds: list
    times: list
    status: str

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]

    @property
    def elapsed(self) -> int:
        return self.times[-1]


def step(m: UnfoldingModel, t: float, point):
    """One move of the model: (kind, image, duration), or None outside both pieces."""
    if in_W0(m, point):
        return RETURN, _return_raw(m, t, point), m.N
    if in_local_domain(m, point):
        return LOCAL, _local_raw(m, point), 1
    return None


def iterate(m: UnfoldingModel, t: float, start, max_steps: int) -> Trajectory:
    """Iterate for ``max_steps`` time units; an excursion through W0 costs N of them."""
    pt = np.asarray(start, dtype=float)
    tr = Trajectory([pt], [], [0], OK)
    elapsed = 0
    while elapsed < max_steps:
        mv = step(m, t, pt)
        if mv is None:
            tr.status = LEFT_DOMAIN
            break
        kind, pt, dt = mv
        if elapsed + dt > max_steps:
            tr.status = BUDGET
            break
        elapsed += dt
        tr.points.append(pt)
        tr.kinds.append(kind)
        tr.times.append(elapsed)
    return tr


def flow(m: UnfoldingModel, t: float, point, steps: int) -> np.ndarray:
    tr = iterate(m, t, point, steps)
    if tr.status != OK:
        raise OutOfChart(f"orbit stopped with status {tr.status} after {tr.elapsed} steps")
    return tr.final


# --- the bifurcating cycle ------------------------------------------------

def bifurcation_parameter(m: UnfoldingModel, n: int) -> float:
    if n < 1:
        raise ValueError("n must be at least 1")
    return m.p / m.mu ** n


def _y_n(m: UnfoldingModel, n: int) -> float:
    denom = 1.0 - m.b * m.lam_t ** n
    if abs(denom) <= RESONANCE_TOL:
        raise ResonantDenominator(f"b * lambda_tilde^{n} = 1")
    return m.q / denom


def cycle_window_checks(m: UnfoldingModel, n: int) -> dict:
    """Containment of R_n in I_n and of its W0-entry point in W0."""
    y = _y_n(m, n)
    z = m.p / m.mu ** n
    e = m.eps_box
    entry = np.array([0.0, m.lam_t ** n * y, m.p])
    return {
        "R_in_I_n": abs(y - m.q) <= e and (m.p - e) / m.mu ** n <= z <= (m.p + e) / m.mu ** n,
        "R_in_chart": in_local_domain(m, (0.0, y, z)),
        "entry_in_W0": in_W0(m, entry),
    }


def periodic_point(m: UnfoldingModel, n: int, check: bool = True) -> np.ndarray:
    y = _y_n(m, n)
    if check:
        failed = [k for k, ok in cycle_window_checks(m, n).items() if not ok]
        if failed:
            raise NotYetInWindow(f"n={n}: {', '.join(failed)} failed")
    return np.array([0.0, y, m.p / m.mu ** n])


def return_derivative(m: UnfoldingModel, n: int, at: str = "periodic") -> tuple[np.ndarray, SpectralData]:
    """Derivative of the (n+N)-step map along the cycle and its spectrum.

    ``at="periodic"`` differentiates at R_n (n local steps, then the excursion);
    ``at="entry"`` differentiates at the W0-entry point (excursion first).  The
    two are conjugate and share their spectrum {lam_t^n b, +-sqrt(ac lam^n mu^n)}.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    Ln = np.diag([m.lam ** n, m.lam_t ** n, m.mu ** n])
    dFN = np.array([[0.0, 0.0, m.a], [0.0, m.b, 0.0], [m.c, 0.0, 0.0]])
    if at == "periodic":
        D = dFN @ Ln
    elif at == "entry":
        D = Ln @ dFN
    else:
        raise ValueError("at must be 'periodic' or 'entry'")
    return D, eigen_spectrum(D)


def closed_form_spectrum(m: UnfoldingModel, n: int) -> tuple[complex, complex, complex]:
    s = m.lam_t ** n * m.b
    prod = m.a * m.c * m.lam ** n * m.mu ** n
    root = complex(math.sqrt(prod)) if prod >= 0 else complex(0.0, math.sqrt(-prod))
    return complex(s), root, -root


# --- segments ------------------------------------------------------------

@dataclass
class SegmentCheck:
    measured: float
    predicted: float
    stages: dict
    affine: bool

    @property
    def ok(self) -> bool:
        return all(self.stages.values())

    @property
    def rel_error(self) -> float:
        return abs(self.measured - self.predicted) / abs(self.predicted)

    def to_dict(self) -> dict:
        return {"measured": self.measured, "predicted": self.predicted,
                "rel_error": self.rel_error, "stages": dict(self.stages),
                "affine": self.affine, "ok": self.ok}


def _ratio_and_affinity(pre, img):
    lo, mid, hi = pre
    ilo, imid, ihi = img
    ratio = float(np.linalg.norm(ihi - ilo) / np.linalg.norm(hi - lo))
    scale = max(1.0, float(np.max(np.abs(img))))
    affine = bool(np.max(np.abs(imid - 0.5 * (ilo + ihi))) <= 1e-12 * scale)
    return ratio, affine


def ell_segment_check(m: UnfoldingModel, n: int, checked: bool = True) -> SegmentCheck:
    """Push the endpoints and midpoint of l_n once around the cycle."""
    t = bifurcation_parameter(m, n)
    y = _y_n(m, n)
    half = 2.0 * m.lam_t ** n * abs(y)
    centre = m.lam_t ** n * y
    pre = [np.array([0.0, centre + s, m.mu ** n * (m.p / m.mu ** n)]) for s in (-half, 0.0, half)]
    stages = {"ell_in_W0": all(in_W0(m, v) for v in pre)}
    img = []
    expected = [RETURN] + [LOCAL] * n
    orbit_ok = True
    for v in pre:
        if checked:
            tr = iterate(m, t, v, n + m.N)
            orbit_ok &= tr.status == OK and tr.kinds == expected
            img.append(tr.final)
        else:
            w = _return_raw(m, t, v)
            for _ in range(n):
                w = _local_raw(m, w)
            img.append(w)
    stages["ell_orbit_defined"] = orbit_ok
    stages["ell_image_on_line"] = all(
        abs(w[0]) <= 1e-12 and abs(w[2] - pre[0][2]) <= 1e-12 * max(1.0, m.p) for w in img
    )
    ratio, affine = _ratio_and_affinity(pre, img)
    return SegmentCheck(ratio, abs(m.b) * m.lam_t ** n, stages, affine)


def pi_segment_check(m: UnfoldingModel, n: int, checked: bool = True) -> SegmentCheck:
    """Pull the endpoints and midpoint of pi_n back twice around the cycle."""
    t = bifurcation_parameter(m, n)
    y = _y_n(m, n)
    z = m.p / m.mu ** n
    half = 2.0 * z
    pre = [np.array([0.0, y, z + s]) for s in (-half, 0.0, half)]
    names = ("pi_back_N_in_W0", "pi_back_nN_in_chart", "pi_back_n2N_in_W0", "pi_back_2n2N_in_chart")
    stages = {k: True for k in names}
    cur = list(pre)
    for lap in range(2):
        nxt = []
        for v in cur:
            w = inverse_return_step(m, t, v)
            stages[names[2 * lap]] &= in_W0(m, w)
            for _ in range(n):
                w = inverse_local_step(m, w)
                # the forward map must be the local step here, so W0 is excluded
                stages[names[2 * lap + 1]] &= in_local_domain(m, w) and not in_W0(m, w)
            nxt.append(w)
        cur = nxt
    if checked:
        fwd_ok = True
        for v, w in zip(pre, cur):
            tr = iterate(m, t, w, 2 * (n + m.N))
            fwd_ok &= tr.status == OK and bool(np.max(np.abs(tr.final - v)) <= CLOSURE_TOL)
        stages["pi_forward_consistent"] = fwd_ok
    ratio, affine = _ratio_and_affinity(pre, cur)
    return SegmentCheck(ratio, 1.0 / (abs(m.a * m.c) * m.lam ** n * m.mu ** n), stages, affine)


def admissibility(m: UnfoldingModel, n: int) -> dict:
    """The five predicates that make n a witnessed index-two bifurcation."""
    out = {
        "stable_eigenvalue_lt_one": abs(m.lam_t ** n * m.b) < 1.0,
        "unstable_pair_gt_one": abs(m.a * m.c) * m.lam ** n * m.mu ** n > 1.0,
    }
    try:
        out["cycle_in_window"] = all(cycle_window_checks(m, n).values())
        out["ell_segment"] = ell_segment_check(m, n).ok
        out["pi_segment"] = pi_segment_check(m, n).ok
    except ResonantDenominator:
        out.update(cycle_in_window=False, ell_segment=False, pi_segment=False)
    return out


def is_admissible(m: UnfoldingModel, n: int) -> bool:
    return all(admissibility(m, n).values())


def min_n_index_two(m: UnfoldingModel, n_max: Optional[int] = None) -> Optional[int]:
    ensure_valid(m)
    if n_max is None:
        n_max = default_n_max()
    if not m.volume_expanding or m.lam * m.mu <= 1.0:
        return None
    for n in range(1, n_max + 1):
        if is_admissible(m, n):
            return n
    return None


@dataclass
class CycleReport:
    n: int
    t_n: float
    R_n: np.ndarray
    period_ok: bool
    closure_error: float
    minimal_period: bool
    derivative: np.ndarray
    eigenvalues: SpectralData
    index: int
    ell: SegmentCheck
    pi: SegmentCheck
    containment: dict
    witnesses: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.period_ok and self.minimal_period and self.index == 2
                and all(self.containment.values())
                and self.ell.rel_error <= 1e-10 and self.pi.rel_error <= 1e-10
                and all(self.witnesses.values()))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t_n": self.t_n,
            "R_n": [float(v) for v in self.R_n],
            "period_ok": self.period_ok,
            "closure_error": self.closure_error,
            "minimal_period": self.minimal_period,
            "derivative": self.derivative.tolist(),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues.eigenvalues],
            "index": self.index,
            "ell": self.ell.to_dict(),
            "pi": self.pi.to_dict(),
            "containment": dict(self.containment),
            "witnesses": dict(self.witnesses),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def verify_cycle(m: UnfoldingModel, n: int, force: bool = False) -> CycleReport:
    ensure_valid(m)
    t = bifurcation_parameter(m, n)
    containment = dict(cycle_window_checks(m, n))
    ell = ell_segment_check(m, n)
    pi = pi_segment_check(m, n)
    containment.update(ell.stages)
    containment.update(pi.stages)
    failed = [k for k, ok in containment.items() if not ok]
    if failed and not force:
        raise InadmissibleN(f"n={n}: containment failed at {', '.join(failed)}")

    R = periodic_point(m, n, check=False)
    tr = iterate(m, t, R, n + m.N)
    closure = float(np.max(np.abs(tr.final - R))) if tr.status == OK else math.inf
    minimal = all(float(np.max(np.abs(v - R))) > MINIMALITY_TOL for v in tr.points[1:-1])
    D, spec = return_derivative(m, n)

    y, z = R[1], R[2]
    centre = m.lam_t ** n * y
    # l_n at s = -lam_t^n y_n is (0, 0, p) on the z-axis; pi_n at s = -z_n is (0, y_n, 0)
    ell_w = (0.0, centre - centre, m.mu ** n * z)
    pi_w = (0.0, y, z - z)
    witnesses = {
        "ell_meets_z_axis": abs(centre) <= 2.0 * m.lam_t ** n * abs(y) and ell_w[1] == 0.0,
        "pi_meets_xy_plane": z <= 2.0 * z and pi_w[2] == 0.0,
    }
    return CycleReport(
        n=n, t_n=t, R_n=R,
        period_ok=tr.status == OK and closure <= CLOSURE_TOL,
        closure_error=closure,
        minimal_period=minimal,
        derivative=D, eigenvalues=spec, index=spec.index(),
        ell=ell, pi=pi, containment=containment, witnesses=witnesses,
    )


# --- sweep ---------------------------------------------------------------

SWEEP_COLUMNS = ("n", "t_n", "y_n", "z_n", "eig_stable", "eig_unstable",
                 "ell_ratio", "pi_ratio", "admissible")


def sweep_row(m: UnfoldingModel, n: int) -> dict:
    t = bifurcation_parameter(m, n)
    try:
        y = _y_n(m, n)
        ell = ell_segment_check(m, n, checked=False).measured
        pi = pi_segment_check(m, n, checked=False).measured
        admissible = (m.volume_expanding and m.lam * m.mu > 1.0 and is_admissible(m, n))
    except ResonantDenominator:
        y = ell = pi = math.nan
        admissible = False
    return {
        "n": n, "t_n": t, "y_n": y, "z_n": m.p / m.mu ** n,
        "eig_stable": m.lam_t ** n * m.b,
        "eig_unstable": math.sqrt(abs(m.a * m.c) * m.lam ** n * m.mu ** n),
        "ell_ratio": ell, "pi_ratio": pi, "admissible": admissible,
    }


# --- renormalization and tangency reduction ------------------------------

def _diag_entries(L):
    arr = np.asarray(L, dtype=object)
    if arr.shape == (3,):
        return list(arr)
    if arr.shape == (3, 3):
        return [arr[i, i] for i in range(3)]
    raise ValueError("L must be a 3-vector or a diagonal 3x3 matrix")


def _as_matrix(M) -> np.ndarray:
    arr = np.asarray(M)
    if arr.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    if arr.dtype == object or any(isinstance(v, Fraction) for v in arr.flat):
        return np.array(arr, dtype=object)
    return np.asarray(arr, dtype=float)


def _diag_power(L, k: int, dtype) -> np.ndarray:
    vals = [v ** k for v in _diag_entries(L)]
    if dtype == object:
        out = np.zeros((3, 3), dtype=object)
        out[:, :] = 0
        for i, v in enumerate(vals):
            out[i, i] = v
        return out
    return np.diag(np.asarray(vals, dtype=float))


def _identity_like(dtype):
    if dtype == object:
        out = np.zeros((3, 3), dtype=object)
        out[:, :] = 0
        for i in range(3):
            out[i, i] = 1
        return out
    return np.eye(3)


def renormalize(dFN, L, nP: int, nQ: int) -> np.ndarray:
    """L^nQ dFN L^nP; entry (i, j) is dFN[i, j] * L_i^nQ * L_j^nP."""
    M = _as_matrix(dFN)
    return _diag_power(L, nQ, M.dtype) @ M @ _diag_power(L, nP, M.dtype)


def _nonzero(v) -> bool:
    if isinstance(v, Fraction) or isinstance(v, int):
        return v != 0
    return abs(v) > 1e-12


def tangency_reduction_stage1(dFN, L, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Correction C and C L^l dFN, which vanishes at (1,1), (2,1), (2,3), (3,3).

    ``dFN`` has the form [[a, d, g], [b, e, h], [c, f, 0]] with c, f, g nonzero.
    """
    M = _as_matrix(dFN)
    (a, d, g), (b, e, h), (c, f, last) = M.tolist()
    if _nonzero(last):
        raise DegenerateEntries("entry (3,3) must be zero")
    for name, v in (("c", c), ("f", f), ("g", g)):
        if not _nonzero(v):
            raise DegenerateEntries(f"entry {name} is zero")
    lam, lam_t, mu = _diag_entries(L)
    x = -((lam_t / lam) ** l) * (h / g)
    y = (lam_t / mu) ** l * (a * h / (c * g) - b / c)
    z = -((lam / mu) ** l) * (a / c)
    C = _identity_like(M.dtype)
    C[0, 2] = z
    C[1, 0] = x
    C[1, 2] = y
    return C, C @ _diag_power(L, l, M.dtype) @ M


def tangency_reduction_stage2(dFN, L, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Correction C and dFN L^l C, nonzero only at (1,3), (2,2), (3,1).

    ``dFN`` has the form [[0, b, e], [0, c, 0], [a, d, 0]] with a, c, e nonzero.
    """
    M = _as_matrix(dFN)
    for (i, j) in ((0, 0), (1, 0), (1, 2), (2, 2)):
        if _nonzero(M[i, j]):
            raise DegenerateEntries(f"entry ({i + 1},{j + 1}) must be zero")
    a, b, c, d, e = M[2, 0], M[0, 1], M[1, 1], M[2, 1], M[0, 2]
    for name, v in (("a", a), ("c", c), ("e", e)):
        if not _nonzero(v):
            raise DegenerateEntries(f"entry {name} is zero")
    lam, lam_t, mu = _diag_entries(L)
    C = _identity_like(M.dtype)
    C[0, 1] = -((lam_t / lam) ** l) * (d / a)
    C[2, 1] = -((lam_t / mu) ** l) * (b / e)
    return C, M @ _diag_power(L, l, M.dtype) @ C


STAGE1_ZEROS = ((0, 0), (1, 0), (1, 2), (2, 2))
STAGE2_SUPPORT = ((0, 2), (1, 1), (2, 0))


def zero_pattern_ok(M, zeros, tol: float = 1e-12) -> bool:
    """Entries listed in ``zeros`` vanish: exactly for rationals, relative to row scale for floats."""
    M = np.asarray(M)
    for i, j in zeros:
        v = M[i, j]
        if isinstance(v, (Fraction, int)):
            if v != 0:
                return False
            continue
        row = max(abs(float(w)) for w in M[i])
        if abs(float(v)) > tol * max(row, 1e-300):
            return False
    return True


def stage2_pattern_ok(M, tol: float = 1e-12) -> bool:
    zeros = [(i, j) for i in range(3) for j in range(3) if (i, j) not in STAGE2_SUPPORT]
    return zero_pattern_ok(M, zeros, tol)
