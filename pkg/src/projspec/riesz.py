"""Resolvent contour quadrature and its perturbation consequences.

Riesz projections P = (1/2 pi i) integral of (uI - A)^{-1} du over a circle,
the first-order term of the projector expansion under A + eps B, a slope
check for the second-order remainder of the eigen-equation identity, and the
large-|z| singular-vector construction that extracts a common eigenvector
from a line contained in the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import core
from .agmon import strong_agmon_check
from .errors import (
    ContourCapturesPerturbedSpectrumBoundary,
    DimMismatch,
    EigenvalueOnContour,
    LineNotInSpectrum,
    NoConvergence,
    ProjspecError,
    SingularResolvent,
)

# No eigenvalue may sit closer to the circle than this fraction of the radius.
CONTOUR_MARGIN = 0.05

# Non-normal inputs: singularity proximity probed via |det| at this many
# points per quadrature node.
DET_PROBE_FACTOR = 4

DEFAULT_NODES = 64

_TRACE_TOL = 1e-6

_LINE_PROBE_COUNT = 5
_LINE_PROBE_TOL = 1e-8

_LEMMA34_RESID_TOL = 1e-6


@dataclass(frozen=True)
class Contour:
    """Positively oriented circle with a fixed trapezoid node count."""

    center: complex
    radius: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.nodes < 16:
            raise ValueError(f"nodes must be >= 16, got {self.nodes}")


@dataclass
class RieszResult:
    projection: np.ndarray
    idempotency_residual: float
    commutation_residual: float
    rank_estimate: int


@dataclass
class PerturbationReport:
    eps: np.ndarray
    residuals: np.ndarray
    slope: Optional[float]
    exact: bool


@dataclass
class Lemma34Result:
    vector: np.ndarray
    residual_a: float
    residual_b: float
    # (z, smallest singular value, ||Av||, ||Bv - mu v||) per ramp step
    history: List[Tuple[complex, float, float, float]] = field(default_factory=list)


def _check_margin(a: np.ndarray, c: Contour, tol: core.Tolerances) -> None:
    """Reject contours passing within CONTOUR_MARGIN * radius of the spectrum.

    Normal inputs get exact eigenvalue distances; otherwise the geometric
    mean |det(uI - A)|^{1/n} is probed on a fine circle grid as a distance
    proxy.
    """
    n = a.shape[0]
    margin = CONTOUR_MARGIN * c.radius
    defect = core.normality_defect(a)
    if defect <= tol.normal * core.frobenius(a):
        try:
            vals = core.eig_normal(a, tol=tol).values
        except ProjspecError:
            vals = None
        if vals is not None:
            dist = np.abs(np.abs(vals - c.center) - c.radius)
            if dist.size and float(dist.min()) < margin:
                raise EigenvalueOnContour(
                    f"eigenvalue within {float(dist.min()):.3e} of the contour "
                    f"(margin {margin:.3e})"
                )
            return
    m = DET_PROBE_FACTOR * c.nodes
    us = c.center + c.radius * np.exp(2j * np.pi * np.arange(m) / m)
    eye = np.eye(n, dtype=np.complex128)
    dets = np.abs(np.linalg.det(us[:, None, None] * eye[None, :, :] - a[None, :, :]))
    proxy = float(dets.min()) ** (1.0 / n)
    if proxy < margin:
        raise EigenvalueOnContour(
            f"|det| probe indicates spectrum within {proxy:.3e} of the contour "
            f"(margin {margin:.3e})"
        )


def _resolvent_nodes(a: np.ndarray, c: Contour):
    """Quadrature phases and resolvent solves (uI - A)^{-1} at every node."""
    n = a.shape[0]
    phases = np.exp(2j * np.pi * np.arange(c.nodes) / c.nodes)
    eye = np.eye(n, dtype=np.complex128)
    resolvents = []
    for ph in phases:
        u = c.center + c.radius * ph
        try:
            resolvents.append(np.linalg.solve(u * eye - a, eye))
        except np.linalg.LinAlgError:
            raise SingularResolvent(f"resolvent solve failed at node u = {u:.6g}") from None
    return phases, resolvents


def _combine(phases: np.ndarray, terms: Sequence[np.ndarray], c: Contour) -> np.ndarray:
    # (1/2 pi i) * sum over nodes of f(u_j) * i r e^{i phi_j} * (2 pi / N)
    acc = np.zeros_like(terms[0])
    for ph, t in zip(phases, terms):
        acc = acc + ph * t
    return (c.radius / c.nodes) * acc


def _finish_projection(a: np.ndarray, p: np.ndarray) -> RieszResult:
    idem = float(np.linalg.norm(p @ p - p))
    comm = float(np.linalg.norm(a @ p - p @ a))
    tr = complex(np.trace(p))
    rank = int(round(tr.real))
    if abs(tr - rank) > _TRACE_TOL:
        raise EigenvalueOnContour(
            f"projection trace {tr:.8g} is not within {_TRACE_TOL} of an integer; "
            "the contour runs too close to the spectrum for this node count"
        )
    return RieszResult(p, idem, comm, rank)


def riesz_projection(a, c: Contour, *, tol: Optional[core.Tolerances] = None) -> RieszResult:
    """Trapezoid quadrature of the spectral projection onto the enclosed part."""
    a = core.as_cmatrix(a)
    if tol is None:
        tol = core.default_tolerances()
    _check_margin(a, c, tol)
    phases, resolvents = _resolvent_nodes(a, c)
    p = _combine(phases, resolvents, c)
    return _finish_projection(a, p)


def first_order_term(a, b, c: Contour, *, tol: Optional[core.Tolerances] = None) -> np.ndarray:
    """Quadrature of (1/2 pi i) integral (uI-A)^{-1} B (uI-A)^{-1} du."""
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if tol is None:
        tol = core.default_tolerances()
    _check_margin(a, c, tol)
    phases, resolvents = _resolvent_nodes(a, c)
    return _combine(phases, [r @ b @ r for r in resolvents], c)


def perturbation_check(a, b, lam, mu, c: Contour, eps_list, *, tol: Optional[core.Tolerances] = None) -> PerturbationReport:
    """Residual slope of the first-order eigen-identity under A + eps B.

    For each eps, r(eps) = ||P0 (A_eps - lambda_eps I) P_eps
    - eps P0 (B - mu I) P0||_F with lambda_eps = lambda + eps mu; the
    least-squares slope of log r vs log eps certifies the quadratic
    remainder when >= 1.8. Residuals at the rounding floor for every eps are
    reported as exact instead of sloped.
    """
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if tol is None:
        tol = core.default_tolerances()
    lam = complex(lam)
    mu = complex(mu)
    eps_arr = np.asarray(list(eps_list), dtype=np.float64)
    if eps_arr.size == 0 or np.any(eps_arr <= 0):
        raise ValueError("eps_list must contain positive reals")
    _check_margin(a, c, tol)
    phases, resolvents = _resolvent_nodes(a, c)
    p0 = _combine(phases, resolvents, c)
    eye = np.eye(a.shape[0], dtype=np.complex128)
    lead = p0 @ (b - mu * eye) @ p0
    residuals = np.empty(eps_arr.size, dtype=np.float64)
    for k, eps in enumerate(eps_arr):
        a_eps = a + eps * b
        try:
            _check_margin(a_eps, c, tol)
        except EigenvalueOnContour as exc:
            raise ContourCapturesPerturbedSpectrumBoundary(
                f"at eps = {eps:g}: {exc}"
            ) from None
        ph_e, res_e = _resolvent_nodes(a_eps, c)
        p_eps = _combine(ph_e, res_e, c)
        m = p0 @ (a_eps - (lam + eps * mu) * eye) @ p_eps - eps * lead
        residuals[k] = float(np.linalg.norm(m))
    floor = 1e-13 * (1.0 + core.frobenius(a) + core.frobenius(b))
    live = residuals > floor
    if int(live.sum()) < 2:
        return PerturbationReport(eps_arr, residuals, None, True)
    slope = float(
        np.polyfit(np.log10(eps_arr[live]), np.log10(residuals[live]), 1)[0]
    )
    return PerturbationReport(eps_arr, residuals, slope, False)


def emit_slope_csv(report: PerturbationReport) -> str:
    out = ["epsilon,residual"]
    for e, r in zip(report.eps, report.residuals):
        out.append(f"{e:.17g},{r:.17g}")
    if report.exact:
        out.append("# exact=true")
    else:
        out.append(f"# slope={report.slope:.17g}")
    return "\n".join(out) + "\n"


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v)))
    pivot = v[idx]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)


def _opnorm(b: np.ndarray) -> float:
    return float(np.linalg.svd(b, compute_uv=False)[0]) if b.size else 0.0


def lemma34_solver(a, b, mu, zs=None, *, tol: Optional[core.Tolerances] = None) -> Lemma34Result:
    """Common-eigenvector extraction from a line {mu w + 1 = 0} in the spectrum.

    Along a ramp of |z| -> large, the smallest right singular vector of
    I + zA - B/mu converges to a unit vector with Av = 0 and Bv = mu v; the
    weak-compactness selection of the infinite-dimensional argument becomes
    a deterministic singular-vector sequence here.
    """
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    mu = complex(mu)
    if mu == 0:
        raise ValueError("mu must be nonzero")
    opn = _opnorm(b)
    if abs(abs(mu) - opn) > 1e-8 * (1.0 + opn):
        raise ValueError(
            f"|mu| = {abs(mu):.12g} must match the operator norm of b ({opn:.12g})"
        )
    n = a.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    shifted = eye - b / mu
    # probe that I + zA - B/mu is singular along the line, not just at one z
    rho = 1.0 / (1.0 + _opnorm(a))
    for k in range(_LINE_PROBE_COUNT):
        z = rho * np.exp(2j * np.pi * k / _LINE_PROBE_COUNT)
        sigma = np.linalg.svd(shifted + z * a, compute_uv=False)[-1]
        if sigma > _LINE_PROBE_TOL:
            raise LineNotInSpectrum(
                f"smallest singular value {sigma:.3e} at probe z = {z:.6g} "
                f"exceeds {_LINE_PROBE_TOL}"
            )
    if zs is None:
        wit = strong_agmon_check(np.linalg.eigvals(a))
        theta = wit.theta if wit is not None else 0.0
        zs = np.exp(1j * theta) * (10.0 ** np.arange(1, 7))
    zarr = np.asarray(list(zs), dtype=np.complex128)
    if zarr.size == 0:
        raise ValueError("zs must be nonempty")
    history = []
    v = None
    for z in zarr:
        _, svals, vh = np.linalg.svd(shifted + z * a)
        v = _fix_phase(np.conj(vh[-1]))
        res_a = float(np.linalg.norm(a @ v))
        res_b = float(np.linalg.norm(b @ v - mu * v))
        history.append((complex(z), float(svals[-1]), res_a, res_b))
    res_a, res_b = history[-1][2], history[-1][3]
    if res_a > _LEMMA34_RESID_TOL or res_b > _LEMMA34_RESID_TOL:
        raise NoConvergence(
            f"residuals ||Av|| = {res_a:.3e}, ||Bv - mu v|| = {res_b:.3e} "
            f"did not settle below {_LEMMA34_RESID_TOL} along the z ramp"
        )
    return Lemma34Result(v, res_a, res_b, history)
