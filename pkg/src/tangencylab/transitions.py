"""Eight-factor transition products and their homothetic stable block.

A transition system is a diagonal return map ``sigma = diag(l1, l2, l3)`` with
``0 < l1 < l2 < 1 < l3`` and a transition ``T`` swapping the first two axes up
to the factors ``mu1, mu2`` and scaling the third by ``mu3``.  The product

    D_n = sigma^2n T sigma^n T sigma^n T sigma^2n T

acts on span(e1, e2) as a multiple of the identity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import det3

REL_TOL = 1e-12
LOG_TOL = 1e-10


@dataclass(frozen=True)
class TransitionSystem:
    lambdas: tuple[float, float, float]
    mus: tuple[float, float, float]

    def __post_init__(self):
        l1, l2, l3 = self.lambdas
        if not 0.0 < l1 < l2 < 1.0 < l3:
            raise ValueError(f"need 0 < l1 < l2 < 1 < l3, got {self.lambdas}")
        if any(m == 0.0 for m in self.mus):
            raise ValueError("transition factors must be nonzero")
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "mus", tuple(float(v) for v in self.mus))

    @property
    def sigma(self) -> np.ndarray:
        return np.diag(self.lambdas)

    @property
    def T(self) -> np.ndarray:
        m1, m2, m3 = self.mus
        # columns are the images of e1, e2, e3
        return np.array([[0.0, m2, 0.0], [m1, 0.0, 0.0], [0.0, 0.0, m3]])

    @property
    def det_sigma(self) -> float:
        l1, l2, l3 = self.lambdas
        return l1 * l2 * l3

    @property
    def det_T(self) -> float:
        m1, m2, m3 = self.mus
        return -m1 * m2 * m3

    @classmethod
    def from_matrices(cls, sigma, T) -> "TransitionSystem":
        sigma = np.asarray(sigma, dtype=float)
        T = np.asarray(T, dtype=float)
        if sigma.shape != (3, 3) or T.shape != (3, 3):
            raise ValueError("sigma and T must be 3x3")
        if np.count_nonzero(sigma - np.diag(np.diag(sigma))):
            raise ValueError("sigma must be diagonal")
        mask = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=bool)
        if np.count_nonzero(T[~mask]):
            raise ValueError("T must map e1 -> e2, e2 -> e1, e3 -> e3")
        return cls(tuple(np.diag(sigma)), (T[1, 0], T[0, 1], T[2, 2]))

    def to_dict(self) -> dict:
        return {"lambdas": list(self.lambdas), "mus": list(self.mus)}


def _exp(logv: float) -> float:
    # exp that saturates to inf instead of raising
    return math.exp(logv) if logv < 709.0 else math.inf


def _sigma_power(ts: TransitionSystem, k: int) -> np.ndarray:
    return np.diag([_exp(k * math.log(lam)) if k else 1.0 for lam in ts.lambdas])


def build_Dn(ts: TransitionSystem, n: int) -> np.ndarray:
    """Dense product; entries overflow to inf once n is large (see ``log_Dn``)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        s1, s2, T = _sigma_power(ts, n), _sigma_power(ts, 2 * n), ts.T
        return s2 @ T @ s1 @ T @ s1 @ T @ s2 @ T


@dataclass(frozen=True)
class Monomial:
    """Signed monomial matrix in log form: column j maps to sign[j]*exp(logmag[j]) e_perm[j]."""
    perm: tuple[int, ...]
    logmag: tuple[float, ...]
    sign: tuple[int, ...]

    def __matmul__(self, other: "Monomial") -> "Monomial":
        perm, logmag, sign = [], [], []
        for j in range(len(other.perm)):
            k = other.perm[j]
            perm.append(self.perm[k])
            logmag.append(self.logmag[k] + other.logmag[j])
            sign.append(self.sign[k] * other.sign[j])
        return Monomial(tuple(perm), tuple(logmag), tuple(sign))

    def diagonal(self) -> tuple[tuple[int, float], ...]:
        """(sign, log|entry|) on the diagonal; requires a diagonal monomial."""
        if any(p != j for j, p in enumerate(self.perm)):
            raise ValueError("not a diagonal monomial")
        return tuple(zip(self.sign, self.logmag))


def _monomial_sigma(ts: TransitionSystem, k: int) -> Monomial:
    return Monomial((0, 1, 2), tuple(k * math.log(v) for v in ts.lambdas), (1, 1, 1))


def _monomial_T(ts: TransitionSystem) -> Monomial:
    m1, m2, m3 = ts.mus
    return Monomial(
        (1, 0, 2),
        (math.log(abs(m1)), math.log(abs(m2)), math.log(abs(m3))),
        tuple(int(math.copysign(1, m)) for m in (m1, m2, m3)),
    )


def log_Dn(ts: TransitionSystem, n: int) -> Monomial:
    """D_n as a product of monomial matrices kept in log-magnitude form."""
    s1, s2, T = _monomial_sigma(ts, n), _monomial_sigma(ts, 2 * n), _monomial_T(ts)
    return s2 @ T @ s1 @ T @ s1 @ T @ s2 @ T


def log_stable_factor(ts: TransitionSystem, n: int) -> float:
    l1, l2, _ = ts.lambdas
    m1, m2, _ = ts.mus
    return 2.0 * (math.log(abs(m1)) + math.log(abs(m2))) + 3 * n * (math.log(l1) + math.log(l2))


def log_unstable_eigenvalue(ts: TransitionSystem, n: int) -> float:
    return 4.0 * math.log(abs(ts.mus[2])) + 6 * n * math.log(ts.lambdas[2])


def log_det(ts: TransitionSystem, n: int) -> float:
    return 6 * n * math.log(ts.det_sigma) + 4.0 * math.log(abs(ts.det_T))


def stable_factor(ts: TransitionSystem, n: int) -> float:
    m1, m2, _ = ts.mus
    l1, l2, _ = ts.lambdas
    if n <= 20:
        return (m1 * m2) ** 2 * (l1 * l2) ** (3 * n)
    return _exp(log_stable_factor(ts, n))


def unstable_eigenvalue(ts: TransitionSystem, n: int) -> float:
    if n <= 20:
        return ts.mus[2] ** 4 * ts.lambdas[2] ** (6 * n)
    return _exp(log_unstable_eigenvalue(ts, n))


def _first_n_below(intercept: float, slope: float) -> float:
    """Smallest integer n >= 0 with intercept + slope*n < 0, inf if none."""
    if intercept < 0:
        return 0
    if slope >= 0:
        return math.inf
    return math.floor(intercept / -slope) + 1


def index_threshold(ts: TransitionSystem) -> float:
    """Smallest n0 such that r < 1 < unstable eigenvalue for every n >= n0."""
    r0 = log_stable_factor(ts, 0)
    r_slope = log_stable_factor(ts, 1) - r0
    u0 = log_unstable_eigenvalue(ts, 0)
    u_slope = log_unstable_eigenvalue(ts, 1) - u0
    return max(_first_n_below(r0, r_slope), _first_n_below(-u0, -u_slope))


def det_threshold(ts: TransitionSystem) -> float:
    """Smallest n0 with det(D_n) > 1 for every n >= n0 (inf if det sigma <= 1)."""
    d0 = log_det(ts, 0)
    return _first_n_below(-d0, -(log_det(ts, 1) - d0))


def _rel_close(x: float, y: float, tol: float = REL_TOL) -> bool:
    return abs(x - y) <= tol * max(abs(x), abs(y))


@dataclass
class HomothetyReport:
    n: int
    r: float
    unstable_eigenvalue: float
    det: float
    index: int
    log_r: float
    log_unstable: float
    log_det: float
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "unstable_eigenvalue": self.unstable_eigenvalue,
            "det": self.det,
            "index": self.index,
            "log_r": self.log_r,
            "log_unstable": self.log_unstable,
            "log_det": self.log_det,
            "checks": list(self.checks),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)


def verify_homothety(ts: TransitionSystem, n: int) -> HomothetyReport:
    checks = []

    def add(name, ok, detail=""):
        checks.append({"name": name, "passed": bool(ok), "detail": detail})

    r_log = log_stable_factor(ts, n)
    u_log = log_unstable_eigenvalue(ts, n)
    d_log = log_det(ts, n)

    # monomial product: the structural checks hold at any n without overflow
    mono = log_Dn(ts, n)
    block_ok = mono.perm == (0, 1, 2)
    add("invariant_blocks", block_ok, f"permutation {mono.perm}")
    if block_ok:
        (s1, g1), (s2, g2), (s3, g3) = mono.diagonal()
        add("stable_block_log", s1 == s2 == 1 and abs(g1 - r_log) <= LOG_TOL and abs(g2 - r_log) <= LOG_TOL,
            f"log entries {g1!r}, {g2!r} vs {r_log!r}")
        add("unstable_log", s3 == 1 and abs(g3 - u_log) <= LOG_TOL, f"log entry {g3!r} vs {u_log!r}")
        moduli = (g1, g2, g3)
    else:
        moduli = (r_log, r_log, u_log)

    D = build_Dn(ts, n)
    r = stable_factor(ts, n)
    u = unstable_eigenvalue(ts, n)
    det = det3(D)
    dense_ok = bool(np.all(np.isfinite(D))) and r > 0.0 and math.isfinite(u)
    if dense_ok:
        off = [D[i, j] for i in range(3) for j in range(3)
               if (i, j) not in ((0, 0), (1, 1), (2, 2))]
        add("off_block_zero", all(v == 0.0 for v in off), f"max off entry {max(abs(v) for v in off)!r}")
        add("stable_block", _rel_close(D[0, 0], r) and _rel_close(D[1, 1], r),
            f"D[0,0]={D[0, 0]!r}, D[1,1]={D[1, 1]!r}, r={r!r}")
        add("unstable_eigenvalue", _rel_close(D[2, 2], u), f"D[2,2]={D[2, 2]!r} vs {u!r}")
        if det != 0.0 and math.isfinite(det):
            add("det_formula", _rel_close(det, math.exp(d_log), 1e-10 if abs(d_log) > 1 else REL_TOL),
                f"det={det!r} vs exp({d_log!r})")

    index = sum(1 for g in moduli if g > 0.0)
    n_index = index_threshold(ts)
    add("index_one", n < n_index or index == 1, f"index {index}, threshold n >= {n_index}")
    n_det = det_threshold(ts)
    if ts.det_sigma > 1.0:
        add("volume_expanding", n < n_det or d_log > 0.0, f"log det {d_log!r}, threshold n >= {n_det}")
    return HomothetyReport(n, r, u, det, index, r_log, u_log, d_log, checks)


@dataclass(frozen=True)
class NonPowerReport:
    n: int
    diff_first: float
    diff_second: float
    square_homothetic: bool
    degenerate: bool

    @property
    def differs_from_both(self) -> bool:
        return self.diff_first > 1e-9 and self.diff_second > 1e-9

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "diff_first": self.diff_first,
            "diff_second": self.diff_second,
            "square_homothetic": self.square_homothetic,
            "degenerate": self.degenerate,
            "differs_from_both": self.differs_from_both,
        }


def non_power_witness(ts: TransitionSystem, n: int) -> NonPowerReport:
    """Compare D_n against (sigma^n T)^2 and (sigma^2n T)^2 entrywise."""
    D = build_Dn(ts, n)
    M1 = _sigma_power(ts, n) @ ts.T
    M2 = _sigma_power(ts, 2 * n) @ ts.T
    sq1, sq2 = M1 @ M1, M2 @ M2
    homothetic = bool(sq1[0, 1] == sq1[1, 0] == 0.0 and _rel_close(sq1[0, 0], sq1[1, 1]))
    return NonPowerReport(
        n=n,
        diff_first=float(np.max(np.abs(D - sq1))),
        diff_second=float(np.max(np.abs(D - sq2))),
        square_homothetic=homothetic,
        # sigma^0 = I, so D_0 = (T^2)^2 is itself a square
        degenerate=(n == 0),
    )
