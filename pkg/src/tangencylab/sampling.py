"""Seeded generators of random test instances."""
from __future__ import annotations

import math

import numpy as np

from .cocycle import PeriodicCocycle, bound_constant, eigenspace_angle
from .paths import alpha_threshold
from .transitions import TransitionSystem


def _well_conditioned_basis(rng: np.random.Generator, dim: int, max_cond: float = 10.0) -> np.ndarray:
    while True:
        B = rng.normal(size=(dim, dim))
        B /= np.linalg.norm(B, axis=0)
        if np.linalg.cond(B) < max_cond:
            return B


def random_diagonalizable_cocycle(rng: np.random.Generator, period: int | None = None, dim: int = 3):
    """Cocycle B_{i+1} D_i B_i^-1 with invariant lines given by the columns of B_i.

    Returns the cocycle and the three line bundles (one unit vector per point each).
    """
    if period is None:
        period = int(rng.integers(1, 4))
    bases = [_well_conditioned_basis(rng, dim) for _ in range(period)]
    maps = []
    for i in range(period):
        d = rng.uniform(0.2, 3.0, size=dim) * rng.choice([-1.0, 1.0], size=dim)
        maps.append(bases[(i + 1) % period] @ np.diag(d) @ np.linalg.inv(bases[i]))
    lines = [[bases[i][:, k] for i in range(period)] for k in range(dim)]
    return PeriodicCocycle(maps), lines


def _upper_triangular_target(rng: np.random.Generator):
    lam1 = rng.uniform(0.3, 2.0)
    lam2 = lam1 * (1.0 + 10.0 ** rng.uniform(-4.0, -2.0))
    mu = rng.uniform(1.0, 10.0) * rng.choice([-1.0, 1.0])
    phi = rng.uniform(0.0, 2.0 * math.pi)
    Q = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    return Q @ np.array([[lam1, mu], [0.0, lam2]]) @ Q.T


def random_small_angle_cocycle(rng: np.random.Generator, max_tries: int = 1000):
    """2-dimensional cocycle whose return map at point 0 has real positive
    eigenvalues with eigenspace angle below the rotation budget.

    Returns (cocycle, eps).
    """
    for _ in range(max_tries):
        period = int(rng.integers(1, 4))
        eps = rng.uniform(0.05, 0.5)
        target = _upper_triangular_target(rng)
        maps = []
        prod = np.eye(2)
        for _ in range(period - 1):
            B = _well_conditioned_basis(rng, 2, 4.0) * rng.uniform(0.5, 2.0)
            maps.append(B)
            prod = B @ prod
        maps.append(target @ np.linalg.inv(prod))
        c = PeriodicCocycle(maps)
        if eigenspace_angle(target) < alpha_threshold(bound_constant(c), eps):
            return c, eps
    raise RuntimeError("no admissible small-angle cocycle found")


def random_transition_system(rng: np.random.Generator) -> TransitionSystem:
    l1, l2 = sorted(rng.uniform(0.2, 0.99, size=2))
    if l1 == l2:
        l2 = min(0.995, l1 + 1e-3)
    l3 = rng.uniform(1.05, 3.0)
    mus = rng.uniform(0.5, 2.0, size=3) * rng.choice([-1.0, 1.0], size=3)
    return TransitionSystem((l1, l2, l3), tuple(mus))
