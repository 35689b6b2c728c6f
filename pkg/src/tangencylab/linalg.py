"""Closed-form spectra and operator norms for 2x2 and 3x3 real matrices.

Eigenvalues come from the roots of the characteristic polynomial (quadratic
or cubic formula), polished by a few guarded Newton steps.  Operator norms
are the largest singular value, computed in closed form for 2x2 matrices and
through the eigenvalues of the Gram matrix otherwise.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

# relative tolerance used to treat two moduli as tied when sorting
_MODULUS_TIE = 1e-12


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: tuple[complex, ...]
    moduli: tuple[float, ...]
    determinant: float

    @property
    def is_complex(self) -> bool:
        return any(z.imag != 0.0 for z in self.eigenvalues)

    @property
    def lambda_m(self) -> float:
        return self.moduli[0]

    @property
    def lambda_b(self) -> float:
        return self.moduli[-1]

    def is_hyperbolic(self, tol: float = 1e-9) -> bool:
        return all(abs(r - 1.0) > tol for r in self.moduli)

    def index(self) -> int:
        """Number of eigenvalues of modulus greater than one."""
        return sum(1 for r in self.moduli if r > 1.0)


def _eig_order(z: complex, w: complex) -> int:
    az, aw = abs(z), abs(w)
    if abs(az - aw) > _MODULUS_TIE * max(az, aw):
        return -1 if az < aw else 1
    if z.real != w.real:
        return -1 if z.real < w.real else 1
    # nonnegative imaginary part first
    kz, kw = z.imag < 0, w.imag < 0
    if kz != kw:
        return -1 if kw else 1
    return 0


def sort_eigenvalues(values) -> tuple[complex, ...]:
    # + 0.0 folds negative zeros
    vals = (complex(v.real + 0.0, v.imag + 0.0) for v in map(complex, values))
    return tuple(sorted(vals, key=functools.cmp_to_key(_eig_order)))


def quadratic_roots(tr: float, det: float, disc: float | None = None) -> tuple[complex, complex]:
    """Roots of x^2 - tr*x + det.

    ``disc`` may be supplied when a more accurate discriminant is available
    (e.g. ``(a-d)^2 + 4bc`` for a matrix).
    """
    if disc is None:
        disc = tr * tr - 4.0 * det
    if disc > 0.0:
        s = math.sqrt(disc)
        big = 0.5 * (tr + math.copysign(s, tr))
        small = det / big if big != 0.0 else 0.5 * (tr - math.copysign(s, tr))
        return complex(big), complex(small)
    if disc == 0.0:
        return complex(0.5 * tr), complex(0.5 * tr)
    im = 0.5 * math.sqrt(-disc)
    return complex(0.5 * tr, im), complex(0.5 * tr, -im)


def _horner(coeffs, x):
    """Evaluate the monic cubic with ``coeffs = (c2, c1, c0)`` as x^3 - c2 x^2 + c1 x - c0, and its derivative."""
    c2, c1, c0 = coeffs
    p = ((x - c2) * x + c1) * x - c0
    dp = (3.0 * x - 2.0 * c2) * x + c1
    return p, dp


def _polish(coeffs, x, steps: int = 6):
    px, _ = _horner(coeffs, x)
    for _ in range(steps):
        _, dp = _horner(coeffs, x)
        if dp == 0:
            break
        cand = x - px / dp
        pc, _ = _horner(coeffs, cand)
        if abs(pc) >= abs(px):
            break
        x, px = cand, pc
        if px == 0:
            break
    return x


def cubic_roots(c2: float, c1: float, c0: float) -> tuple[complex, complex, complex]:
    """Roots of x^3 - c2 x^2 + c1 x - c0."""
    coeffs = (c2, c1, c0)
    shift = c2 / 3.0
    P = c1 - c2 * c2 / 3.0
    Q = -2.0 * c2 ** 3 / 27.0 + c1 * c2 / 3.0 - c0
    delta = (0.5 * Q) ** 2 + (P / 3.0) ** 3

    # P > 0 forces one real root even when P^3 underflows and delta reads 0
    if delta > 0.0 or P > 0.0:
        # one real root, stable Cardano branch
        A = -math.copysign(np.cbrt(0.5 * abs(Q) + math.sqrt(delta)), Q)
        B = -P / (3.0 * A) if A != 0.0 else 0.0
        r = _polish(coeffs, A + B + shift)
        beta = r - c2
        if r != 0.0 and abs(r) ** 3 >= abs(c0):
            gamma = c0 / r
        else:
            gamma = c1 + r * beta
        z1, z2 = quadratic_roots(-beta, gamma)
        z1 = _polish(coeffs, z1)
        z2 = _polish(coeffs, z2)
        if z1.imag != 0.0 or z2.imag != 0.0:
            z2 = z1.conjugate()
        else:
            z1, z2 = complex(z1.real), complex(z2.real)
        return complex(r), z1, z2

    m = 2.0 * math.sqrt(-P / 3.0)
    if m == 0.0:
        r = _polish(coeffs, shift)
        return complex(r), complex(r), complex(r)
    # |Q| < (|P|/3)^1.5 here, so dividing in this order cannot overflow
    arg = (3.0 * Q / P) / m
    arg = min(1.0, max(-1.0, arg))
    phi = math.acos(arg) / 3.0
    roots = []
    for k in range(3):
        y = m * math.cos(phi - 2.0 * math.pi * k / 3.0)
        roots.append(complex(_polish(coeffs, y + shift)))
    return tuple(roots)


def char_coefficients(m) -> tuple[float, ...]:
    """Coefficients (trace, sum of principal 2x2 minors, det) of a 3x3 matrix."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    return tr, minors, det3(m)


def det2(m) -> float:
    return float(m[0][0] * m[1][1] - m[0][1] * m[1][0])


def det3(m) -> float:
    return float(
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def determinant(m) -> float:
    m = np.asarray(m, dtype=float)
    if m.shape == (2, 2):
        return det2(m)
    if m.shape == (3, 3):
        return det3(m)
    raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {m.shape}")


def _decoupled_index(m: np.ndarray):
    for k in range(3):
        others = [i for i in range(3) if i != k]
        if all(m[k, i] == 0.0 for i in others) or all(m[i, k] == 0.0 for i in others):
            return k
    return None


def eigen_spectrum(m) -> SpectralData:
    """Eigenvalues of a 2x2 or 3x3 real matrix with multiplicity."""
    m = np.asarray(m, dtype=float)
    if m.shape == (2, 2):
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        det = det2(m)
        roots = quadratic_roots(a + d, det, (a - d) ** 2 + 4.0 * b * c)
    elif m.shape == (3, 3):
        tr, minors, det = char_coefficients(m)
        k = _decoupled_index(m)
        if k is None:
            roots = cubic_roots(tr, minors, det)
        else:
            # block triangular up to a permutation: split off the 1x1 block so
            # a repeated root shared with the 2x2 block keeps full accuracy
            rest = [i for i in range(3) if i != k]
            roots = (complex(m[k, k]),) + eigen_spectrum(m[np.ix_(rest, rest)]).eigenvalues
    else:
        raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {m.shape}")
    eig = sort_eigenvalues(roots)
    return SpectralData(eig, tuple(abs(z) for z in eig), float(det))


def _sym2_max_eig(a: float, b: float, d: float) -> float:
    # largest eigenvalue of [[a, b], [b, d]]
    return 0.5 * (a + d) + math.hypot(0.5 * (a - d), b)


def largest_singular_value(m) -> float:
    """Operator 2-norm of a matrix whose smaller side is at most 3."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    rows, cols = m.shape
    if min(rows, cols) == 1:
        return float(math.sqrt(float(np.sum(m * m))))
    if m.shape == (2, 2):
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        return 0.5 * (math.hypot(a + d, c - b) + math.hypot(a - d, b + c))
    gram = m.T @ m if cols <= rows else m @ m.T
    k = gram.shape[0]
    if k == 2:
        return math.sqrt(max(0.0, _sym2_max_eig(gram[0, 0], gram[0, 1], gram[1, 1])))
    if k == 3:
        tr, minors, det = char_coefficients(gram)
        top = max(z.real for z in cubic_roots(tr, minors, det))
        return math.sqrt(max(0.0, top))
    raise ValueError(f"unsupported shape {m.shape}")


operator_norm = largest_singular_value


def rotation(x: float) -> np.ndarray:
    c, s = math.cos(x), math.sin(x)
    return np.array([[c, -s], [s, c]])


def eigenvector_2x2(m, lam: float) -> np.ndarray:
    """Unit eigenvector of a real 2x2 matrix for a real eigenvalue ``lam``."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    # two candidate kernel vectors of m - lam*I; keep the better conditioned one
    v1 = np.array([b, lam - a])
    v2 = np.array([lam - d, c])
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        # m is lam*I: every vector is an eigenvector
        return np.array([1.0, 0.0])
    return v / n
