"""Bivariate determinantal polynomial p(z,w) = det(I + zA + wB).

The zero set of p is the point projective spectrum of the pair (A, B).
Coefficients are recovered by evaluation-interpolation: determinants on a
tensor grid of scaled roots of unity, then one 2-d discrete Fourier pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .errors import DegreeBudgetExceeded, DimMismatch, InterpolationFailure

DEGREE_BUDGET = 64

# Interpolation dust: coefficients below this fraction of the largest are
# snapped to zero.
DUST_REL = 1e-12

# Self-check configuration: probe count and base tolerance are contract
# values; the seed is internal (independent of user-facing seeds).
PROBE_COUNT = 100
PROBE_TOL_BASE = 1e-8
_PROBE_SEED = 74207281

# The constant coefficient must interpolate to det(I) = 1 within this guard
# before it is pinned exactly.
_C00_GUARD = 1e-3

# Positive floor keeping grid radii finite for (near-)zero matrices.
_RADIUS_FLOOR = 2.0 ** -40


@dataclass
class BivarPoly:
    """Dense coefficient table: coeffs[j, k] multiplies z^j w^k.

    For polynomials produced by char_poly_pair, coeffs[0, 0] = 1 and the
    total degree is at most n (upper anti-triangle exactly zero; enforced at
    construction for every instance).
    """

    n: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if self.n < 0:
            raise ValueError(f"degree bound must be nonnegative, got {self.n}")
        if c.shape != (self.n + 1, self.n + 1):
            raise DimMismatch(
                f"coefficient table has shape {c.shape}, expected {(self.n + 1, self.n + 1)}"
            )
        if not np.isfinite(c).all():
            raise ValueError("coefficients must be finite")
        j, k = np.indices(c.shape)
        c[j + k > self.n] = 0.0
        self.coeffs = c

    def evaluate(self, z: complex, w: complex) -> complex:
        """Value of the polynomial at a point."""
        m = self.n + 1
        pz = np.power(complex(z), np.arange(m))
        pw = np.power(complex(w), np.arange(m))
        return complex(pz @ self.coeffs @ pw)


def total_degree(p: BivarPoly, rel: float = DUST_REL) -> int:
    """Largest j + k carrying a coefficient above the dust threshold."""
    mags = np.abs(p.coeffs)
    top = mags.max()
    if top == 0.0:
        return 0
    j, k = np.nonzero(mags > rel * top)
    if len(j) == 0:
        return 0
    return int((j + k).max())


def _spectral_norm(a: np.ndarray) -> float:
    """Largest singular value, from the Hermitian eigenvalues of A*A."""
    gram = a.conj().T @ a
    gram = (gram + gram.conj().T) / 2.0
    vals, _ = core._jacobi_hermitian(gram)
    return math.sqrt(max(float(vals.max()), 0.0))


def char_poly_pair(a, b, *, budget: int = DEGREE_BUDGET, tol=None) -> BivarPoly:
    """Interpolate det(I + zA + wB) on a scaled roots-of-unity grid.

    Grid radii are reciprocal spectral-norm scales, which keeps determinant
    values bounded while giving the recovered coefficients uniform absolute
    accuracy across total degrees. A 100-point self-check on the unit
    bicircle guards the result.
    """
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"operands have shapes {a.shape} and {b.shape}")
    n = a.shape[0]
    if n > budget:
        raise DegreeBudgetExceeded(f"dimension {n} exceeds degree budget {budget}")
    m = n + 1
    rho_a = 1.0 / (_RADIUS_FLOOR + _spectral_norm(a))
    rho_b = 1.0 / (_RADIUS_FLOOR + _spectral_norm(b))
    zs = rho_a * np.exp(2j * np.pi * np.arange(m) / m)
    ws = rho_b * np.exp(2j * np.pi * np.arange(m) / m)
    eye = np.eye(n, dtype=np.complex128)
    vals = np.empty((m, m), dtype=np.complex128)
    for s in range(m):
        stack = eye[None, :, :] + zs[s] * a[None, :, :] + ws[:, None, None] * b[None, :, :]
        vals[s, :] = np.linalg.det(stack)
    # Values are samples of gamma[j,k] = c[j,k] rho_a^j rho_b^k on the grid
    # of positive-frequency roots of unity, so fft2 / m^2 inverts.
    gamma = np.fft.fft2(vals) / (m * m)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        scal = np.power(rho_a, np.arange(m))[:, None] * np.power(rho_b, np.arange(m))[None, :]
        coeffs = gamma / scal
    if not np.isfinite(coeffs).all():
        raise InterpolationFailure(
            "coefficient magnitudes exceed double-precision range at these matrix norms"
        )
    j, k = np.indices(coeffs.shape)
    coeffs[j + k > n] = 0.0
    top = np.abs(coeffs).max()
    if top > 0.0:
        coeffs[np.abs(coeffs) < DUST_REL * top] = 0.0
    if abs(coeffs[0, 0] - 1.0) > _C00_GUARD:
        raise InterpolationFailure(
            f"constant coefficient interpolated to {coeffs[0, 0]:.6g}, expected 1"
        )
    coeffs[0, 0] = 1.0
    p = BivarPoly(n, coeffs)
    fa = core.frobenius(a)
    fb = core.frobenius(b)
    try:
        probe_tol = PROBE_TOL_BASE * (1.0 + fa + fb) ** n
    except OverflowError:
        probe_tol = math.inf
    rng = np.random.default_rng(_PROBE_SEED)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(PROBE_COUNT, 2))
    pz = np.exp(1j * angles[:, 0])
    pw = np.exp(1j * angles[:, 1])
    powers_z = pz[:, None] ** np.arange(m)[None, :]
    powers_w = pw[:, None] ** np.arange(m)[None, :]
    approx = np.einsum("pj,jk,pk->p", powers_z, p.coeffs, powers_w)
    exact = np.linalg.det(
        eye[None, :, :] + pz[:, None, None] * a[None, :, :] + pw[:, None, None] * b[None, :, :]
    )
    worst = float(np.abs(approx - exact).max())
    if worst > probe_tol:
        raise InterpolationFailure(
            f"self-check residual {worst:.3e} exceeds tolerance {probe_tol:.3e}"
        )
    return p


def eval_poly(p: BivarPoly, z: complex, w: complex) -> complex:
    return p.evaluate(z, w)


def univariate_slice(p: BivarPoly, mode: str, value: complex) -> np.ndarray:
    """Coefficients of a univariate restriction of p, length n + 1.

    fix_z: t -> p(value, t); fix_w: t -> p(t, value); ray: t -> p(t, value*t).
    """
    m = p.n + 1
    value = complex(value)
    if mode == "fix_z":
        pz = np.power(value, np.arange(m))
        return np.asarray(pz @ p.coeffs, dtype=np.complex128)
    if mode == "fix_w":
        pw = np.power(value, np.arange(m))
        return np.asarray(p.coeffs @ pw, dtype=np.complex128)
    if mode == "ray":
        out = np.zeros(m, dtype=np.complex128)
        gpow = np.power(value, np.arange(m))
        for deg in range(m):
            ks = np.arange(deg + 1)
            out[deg] = np.sum(p.coeffs[deg - ks, ks] * gpow[ks])
        return out
    raise ValueError(f"unknown slice mode {mode!r}")


def parse_bipoly(text: str) -> BivarPoly:
    """Parse the bipoly text format: `bipoly <n>` then `<j> <k> <re> <im>` rows."""
    from .errors import ParseError

    items = list(core._content_lines(text))
    if not items:
        raise ParseError("expected 'bipoly <n>' header, found end of input")
    lineno, line = items[0]
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "bipoly":
        raise ParseError("expected 'bipoly <n>' header", line=lineno, col=1)
    try:
        n = int(tokens[1])
    except ValueError:
        raise ParseError("degree bound must be an integer", line=lineno, col=1) from None
    if n < 0:
        raise ParseError("degree bound must be nonnegative", line=lineno, col=1)
    coeffs = np.zeros((n + 1, n + 1), dtype=np.complex128)
    seen = set()
    for lineno, line in items[1:]:
        tokens = line.split()
        if len(tokens) != 4:
            raise ParseError("expected '<j> <k> <re> <im>'", line=lineno, col=1)
        try:
            j, k = int(tokens[0]), int(tokens[1])
            re_part, im_part = float(tokens[2]), float(tokens[3])
        except ValueError:
            raise ParseError("bad coefficient row", line=lineno, col=1) from None
        if not (0 <= j <= n and 0 <= k <= n):
            raise ParseError(f"index ({j},{k}) outside table", line=lineno, col=1)
        if j + k > n:
            raise ParseError(f"index ({j},{k}) violates total degree {n}", line=lineno, col=1)
        if (j, k) in seen:
            raise ParseError(f"duplicate index ({j},{k})", line=lineno, col=1)
        if not (math.isfinite(re_part) and math.isfinite(im_part)):
            raise ParseError("coefficient must be finite", line=lineno, col=1)
        seen.add((j, k))
        coeffs[j, k] = complex(re_part, im_part)
    return BivarPoly(n, coeffs)


def emit_bipoly(p: BivarPoly) -> str:
    out = [f"bipoly {p.n}"]
    for j in range(p.n + 1):
        for k in range(p.n + 1):
            c = p.coeffs[j, k]
            if c != 0:
                out.append(f"{j} {k} {c.real:.17g} {c.imag:.17g}")
    return "\n".join(out) + "\n"
