"""Periodic linear cocycles in dimension 2 and 3.

A periodic cocycle is a cyclic list of invertible matrices; ``maps[i]`` carries
the fiber over orbit point ``i`` to the fiber over ``(i + 1) % period``.
Subspaces are given by spanning vectors and handled through orthonormal bases.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ComplexOrRepeatedSpectrum,
    NonInvariantLine,
    NonInvariantSplitting,
    ShapeMismatch,
)
from .linalg import (
    SpectralData,
    determinant,
    eigen_spectrum,
    eigenvector_2x2,
    operator_norm,
)

INVARIANCE_TOL = 1e-9
BOUND_MARGIN = 1e-12
DEFAULT_N_MAX = 64


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PeriodicCocycle:
    maps: tuple

    def __post_init__(self):
        maps = tuple(_frozen(m) for m in self.maps)
        if not maps:
            raise ValueError("a periodic cocycle needs at least one map")
        dim = maps[0].shape[0]
        if dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {dim}")
        for i, m in enumerate(maps):
            if m.shape != (dim, dim):
                raise ValueError(f"map {i} has shape {m.shape}, expected {(dim, dim)}")
            if not abs(determinant(m)) > 1e-300:
                raise ValueError(f"map {i} is not invertible")
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self) -> int:
        return self.maps[0].shape[0]

    @property
    def period(self) -> int:
        return len(self.maps)

    def inverse_maps(self) -> tuple:
        return tuple(np.linalg.inv(m) for m in self.maps)

    def replace(self, index: int, matrix) -> "PeriodicCocycle":
        maps = list(self.maps)
        maps[index % self.period] = matrix
        return PeriodicCocycle(tuple(maps))

    def to_json(self) -> list:
        return [m.tolist() for m in self.maps]

    @classmethod
    def from_json(cls, data) -> "PeriodicCocycle":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(np.asarray(m, dtype=float) for m in data))

    def __repr__(self):
        return f"PeriodicCocycle(dim={self.dim}, period={self.period})"


def _as_rows(vectors) -> np.ndarray:
    a = np.asarray(vectors, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def orthonormal_basis(vectors) -> np.ndarray:
    """Columns form an orthonormal basis of the span of ``vectors`` (rows)."""
    rows = _as_rows(vectors)
    q, _ = np.linalg.qr(rows.T)
    return q


@dataclass(frozen=True, eq=False)
class SplittingCandidate:
    """Per-point pair of complementary subspaces F and G.

    ``F[i]`` and ``G[i]`` are arrays of unit spanning vectors (one row per vector).
    """
    F: tuple
    G: tuple

    def __post_init__(self):
        F = tuple(_frozen(_as_rows(v)) for v in self.F)
        G = tuple(_frozen(_as_rows(v)) for v in self.G)
        if len(F) != len(G):
            raise ValueError("F and G must list one subspace per orbit point")
        for i, (f, g) in enumerate(zip(F, G)):
            for v in np.vstack([f, g]):
                if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                    raise ValueError(f"spanning vector at point {i} is not a unit vector")
            stacked = np.vstack([f, g])
            if stacked.shape[0] != stacked.shape[1]:
                raise ValueError(f"F and G at point {i} do not have complementary dimensions")
            if abs(np.linalg.det(stacked)) <= 1e-12:
                raise ValueError(f"F and G at point {i} do not span the ambient space")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)

    @classmethod
    def constant(cls, period: int, F, G) -> "SplittingCandidate":
        return cls(tuple([F] * period), tuple([G] * period))


def return_map(c: PeriodicCocycle, base: int = 0) -> np.ndarray:
    """Composition once around the orbit, starting and ending at ``base``."""
    if not 0 <= base < c.period:
        raise IndexError(f"base {base} outside orbit of period {c.period}")
    out = np.eye(c.dim)
    for k in range(c.period):
        out = c.maps[(base + k) % c.period] @ out
    return out


def return_spectrum(c: PeriodicCocycle, base: int = 0) -> SpectralData:
    return eigen_spectrum(return_map(c, base))


def jacobian(c: PeriodicCocycle, base: int = 0) -> float:
    return determinant(return_map(c, base))


def bound_constant(c: PeriodicCocycle) -> float:
    """Smallest K (up to a 1e-12 margin) with every ||A|| < K and ||A^-1|| < K."""
    norms = [operator_norm(m) for m in c.maps] + [operator_norm(m) for m in c.inverse_maps()]
    return max(norms) + BOUND_MARGIN


def cocycle_distance(c1: PeriodicCocycle, c2: PeriodicCocycle) -> float:
    if c1.dim != c2.dim or c1.period != c2.period:
        raise ShapeMismatch(
            f"cocycles over different orbits: dim {c1.dim}/{c2.dim}, period {c1.period}/{c2.period}"
        )
    d = 0.0
    for a, b, ai, bi in zip(c1.maps, c2.maps, c1.inverse_maps(), c2.inverse_maps()):
        d = max(d, operator_norm(a - b), operator_norm(ai - bi))
    return d


def _subspace_residual(image: np.ndarray, basis: np.ndarray) -> float:
    """Largest sine of the angle between the columns of ``image`` and span(basis)."""
    worst = 0.0
    for col in image.T:
        n = np.linalg.norm(col)
        resid = col - basis @ (basis.T @ col)
        worst = max(worst, float(np.linalg.norm(resid) / n))
    return worst


def is_invariant(c: PeriodicCocycle, bundle, tol: float = INVARIANCE_TOL) -> bool:
    """Whether maps[i] sends span(bundle[i]) onto span(bundle[i+1]) for all i."""
    bases = [orthonormal_basis(v) for v in bundle]
    for i, m in enumerate(c.maps):
        nxt = bases[(i + 1) % c.period]
        if bases[i].shape[1] != nxt.shape[1]:
            return False
        if _subspace_residual(m @ bases[i], nxt) > tol:
            return False
    return True


class _DominationScan:
    """Incremental evaluation of ||A^n(x)|_F|| * ||A^-n(f^n x)|_G|| over the orbit.

    Each step is restricted to the bundles in orthonormal coordinates, so
    rounding in directions outside F or G never feeds back into the norms.
    """

    def __init__(self, c: PeriodicCocycle, F, G):
        p = c.period
        Fb = [orthonormal_basis(v) for v in F]
        Gb = [orthonormal_basis(v) for v in G]
        inv = c.inverse_maps()
        self.c = c
        self.fwd_step = [Fb[(i + 1) % p].T @ c.maps[i] @ Fb[i] for i in range(p)]
        self.back_step = [Gb[i].T @ inv[i] @ Gb[(i + 1) % p] for i in range(p)]
        self.n = 0
        self.fwd = [np.eye(Fb[i].shape[1]) for i in range(p)]
        self.back = [np.eye(Gb[i].shape[1]) for i in range(p)]
        # products are kept at unit norm with the scale tracked in log form
        self.log_scale = np.zeros(p)

    def advance(self) -> np.ndarray:
        p = self.c.period
        self.n += 1
        for x in range(p):
            k = (x + self.n - 1) % p
            f = self.fwd_step[k] @ self.fwd[x]
            b = self.back[x] @ self.back_step[k]
            nf, nb = operator_norm(f), operator_norm(b)
            self.fwd[x], self.back[x] = f / nf, b / nb
            self.log_scale[x] += math.log(nf) + math.log(nb)
        return self.products()

    def products(self) -> np.ndarray:
        return np.exp(self.log_scale)


def domination_products(c: PeriodicCocycle, F, G, n: int) -> np.ndarray:
    """Per-point values of ||A^n(x)|_F|| * ||A^-n(f^n(x))|_G|| for invariant F and G."""
    scan = _DominationScan(c, F, G)
    vals = None
    for _ in range(n):
        vals = scan.advance()
    return vals


def _check_splitting(c: PeriodicCocycle, s: SplittingCandidate):
    if len(s.F) != c.period:
        raise NonInvariantSplitting("splitting must list one subspace pair per orbit point")
    for name, bundle in (("F", s.F), ("G", s.G)):
        if not is_invariant(c, bundle):
            raise NonInvariantSplitting(f"subbundle {name} is not invariant under the cocycle")


def check_n_dominated(c: PeriodicCocycle, s: SplittingCandidate, n: int) -> bool:
    if n < 1:
        raise ValueError("n must be a positive integer")
    _check_splitting(c, s)
    return bool(np.all(domination_products(c, s.F, s.G, n) < 0.5))


def _first_dominated(c, F, G, n_max) -> Optional[int]:
    scan = _DominationScan(c, F, G)
    for n in range(1, n_max + 1):
        if np.all(scan.advance() < 0.5):
            return n
    return None


def min_domination_time(c: PeriodicCocycle, s: SplittingCandidate, n_max: int = DEFAULT_N_MAX) -> Optional[int]:
    _check_splitting(c, s)
    return _first_dominated(c, s.F, s.G, n_max)


def eigenspace_angle(m) -> float:
    """Angle in (0, pi/2] between the two real eigenlines of a 2x2 matrix."""
    m = np.asarray(m, dtype=float)
    spec = eigen_spectrum(m)
    l1, l2 = spec.eigenvalues
    scale = max(abs(l1), abs(l2), 1e-300)
    if spec.is_complex or abs(l1 - l2) <= 1e-12 * scale:
        raise ComplexOrRepeatedSpectrum(f"eigenvalues {l1}, {l2} are not real and distinct")
    v1 = eigenvector_2x2(m, l1.real)
    v2 = eigenvector_2x2(m, l2.real)
    cross = abs(v1[0] * v2[1] - v1[1] * v2[0])
    dot = abs(v1 @ v2)
    return math.atan2(cross, dot)


def complement_basis(v) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of the line span(v) in R^3.

    Built from the two standard basis vectors least aligned with ``v``, kept in
    index order, so coordinate lines give coordinate complements.
    """
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    eye = np.eye(3)
    resid = [eye[j] - (v @ eye[j]) * v for j in range(3)]
    norms = [np.linalg.norm(r) for r in resid]
    keep = sorted(sorted(range(3), key=lambda j: -norms[j])[:2])
    u1 = resid[keep[0]] / norms[keep[0]]
    u2 = resid[keep[1]] - (u1 @ resid[keep[1]]) * u1
    u2 /= np.linalg.norm(u2)
    return np.column_stack([u1, u2])


def _line_vectors(line, period: int) -> list:
    vecs = [np.asarray(v, dtype=float).reshape(-1) for v in line]
    if len(vecs) != period:
        raise NonInvariantLine("line bundle must list one vector per orbit point")
    return [v / np.linalg.norm(v) for v in vecs]


def quotient_cocycle(c: PeriodicCocycle, line) -> PeriodicCocycle:
    """The induced cocycle on R^3 / line, realised on the orthogonal complements."""
    if c.dim != 3:
        raise ShapeMismatch("quotient_cocycle expects a 3-dimensional cocycle")
    vecs = _line_vectors(line, c.period)
    if not is_invariant(c, vecs):
        raise NonInvariantLine("line bundle is not invariant under the cocycle")
    U = [complement_basis(v) for v in vecs]
    maps = tuple(U[(i + 1) % c.period].T @ m @ U[i] for i, m in enumerate(c.maps))
    return PeriodicCocycle(maps)


@dataclass(frozen=True)
class DichotomyReport:
    n_max: int
    time_e1_vs_e23: Optional[int]
    time_e1_vs_e2: Optional[int]
    time_quotient: Optional[int]
    conclusion_horizon: Optional[int] = None

    @property
    def e1_vs_e23(self) -> bool:
        return self.time_e1_vs_e23 is not None

    @property
    def e1_vs_e2(self) -> bool:
        return self.time_e1_vs_e2 is not None

    @property
    def quotient(self) -> bool:
        return self.time_quotient is not None

    @property
    def implication_holds(self) -> bool:
        # E1 not dominated by E2+E3  =>  E1 not dominated by E2, or E1/E2 not dominated by E3/E2
        return self.e1_vs_e23 or not self.e1_vs_e2 or not self.quotient

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "e1_vs_e23": self.time_e1_vs_e23,
            "e1_vs_e2": self.time_e1_vs_e2,
            "quotient": self.time_quotient,
            "conclusion_horizon": self.conclusion_horizon,
            "implication_holds": self.implication_holds,
        }


CONCLUSION_HORIZON_FACTOR = 16


def domination_dichotomy(c: PeriodicCocycle, E1, E2, E3, n_max: int = DEFAULT_N_MAX) -> DichotomyReport:
    if c.dim != 3:
        raise ShapeMismatch("domination_dichotomy expects a 3-dimensional cocycle")
    p = c.period
    e1, e2, e3 = (_line_vectors(E, p) for E in (E1, E2, E3))
    for name, vecs in (("E1", e1), ("E2", e2), ("E3", e3)):
        if not is_invariant(c, vecs):
            raise NonInvariantLine(f"{name} is not invariant under the cocycle")
    for i in range(p):
        if abs(np.linalg.det(np.column_stack([e1[i], e2[i], e3[i]]))) <= 1e-12:
            raise NonInvariantLine(f"line bundles are not transverse at point {i}")

    t_sub = _first_dominated(c, e1, e2, n_max)
    q = quotient_cocycle(c, e2)
    U = [complement_basis(v) for v in e2]
    q1 = [U[i].T @ e1[i] for i in range(p)]
    q3 = [U[i].T @ e3[i] for i in range(p)]
    t_quot = _first_dominated(q, q1, q3, n_max)

    # The combined domination time can exceed both premise times, so when
    # both premises hold the conclusion is searched over a longer horizon.
    horizon = n_max
    if t_sub is not None and t_quot is not None:
        horizon = CONCLUSION_HORIZON_FACTOR * n_max
    e23 = [np.vstack([a, b]) for a, b in zip(e2, e3)]
    t_full = _first_dominated(c, e1, e23, horizon)
    return DichotomyReport(n_max, t_full, t_sub, t_quot, horizon)
