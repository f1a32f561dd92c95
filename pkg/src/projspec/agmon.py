"""Sector analysis of spectra and escape-radius diagnostics.

A spectrum with an angular sector free of nonzero eigenvalues admits a ray
z_n = e^{i theta} n along which |1 + lambda z_n| stays bounded below; this
module finds the widest free sector, builds and checks that witness ray, and
measures how far rays must travel to clear the forbidden disks
D(-1/lambda, eps/|lambda|). The diagonal model operator with eigenvalues
1/(nu_n w) for w ranging over 2^n-th roots of unity feeds the truncation
ladder where the escape radii diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidEpsilon, LevelTooLarge

_TWO_PI = 2.0 * math.pi

# Angular resolution: arguments closer than this are one direction.
_ANGLE_DEDUP = 1e-12

_EPS_CAP = 1.0 - 1e-12

_MAX_LEVEL = 14

_PROFILE_CHUNK = 512

DEFAULT_N_ANGLES = 4096


@dataclass(frozen=True)
class SectorWitness:
    """Certificate that a sector of half-width delta is free of spectrum.

    theta is the direction of the witness ray z_n = e^{i theta} n. The free
    sector itself is centered at the antipode of the forbidden direction,
    exposed as sector_center; epsilon is a certified lower bound for
    |1 + lambda z| along the whole ray.
    """

    theta: float
    delta: float
    epsilon: float

    @property
    def sector_center(self) -> float:
        return (math.pi - self.theta) % _TWO_PI


@dataclass
class WitnessCheck:
    ok: bool
    lam: Optional[complex]
    z: Optional[complex]
    value: float


@dataclass
class EscapeProfile:
    epsilon: float
    angles: np.ndarray
    radii: np.ndarray
    min_radius: float


def _distinct_directions(spectrum) -> np.ndarray:
    """Sorted deduplicated arguments of the nonzero spectrum entries."""
    vals = np.asarray(list(spectrum), dtype=np.complex128).ravel()
    nz = vals[np.abs(vals) > 0.0]
    if nz.size == 0:
        return np.zeros(0)
    args = np.sort(np.mod(np.angle(nz), _TWO_PI))
    keep = [float(args[0])]
    for a in args[1:]:
        if float(a) - keep[-1] > _ANGLE_DEDUP:
            keep.append(float(a))
    if len(keep) > 1 and (keep[0] + _TWO_PI) - keep[-1] <= _ANGLE_DEDUP:
        keep.pop()
    return np.array(keep)


def _circular_gaps(directions: np.ndarray):
    """(width, start) for each circular gap between consecutive directions."""
    k = directions.size
    if k == 0:
        return [(_TWO_PI, 0.0)]
    if k == 1:
        return [(_TWO_PI, float(directions[0]))]
    gaps = [
        (float(directions[i + 1] - directions[i]), float(directions[i]))
        for i in range(k - 1)
    ]
    gaps.append((float(directions[0] + _TWO_PI - directions[-1]), float(directions[-1])))
    return gaps


def max_circular_gap(spectrum) -> float:
    """Widest angular gap free of nonzero-spectrum directions (2pi if none)."""
    return max(g for g, _ in _circular_gaps(_distinct_directions(spectrum)))


def strong_agmon_check(spectrum) -> Optional[SectorWitness]:
    """Locate the widest eigenvalue-free sector and certify a witness ray.

    Returns None only when every circular gap is below the 1e-12 angular
    resolution. Ties between equally wide gaps resolve to the smallest
    returned theta. The certified epsilon is min(sin(min(delta, pi/2)),
    1 - 1e-12): along z = e^{i theta} t the point lambda z stays at angular
    distance >= delta from -1, and the distance from -1 to that ray is
    sin(delta) for delta <= pi/2 and 1 beyond.
    """
    directions = _distinct_directions(spectrum)
    gaps = _circular_gaps(directions)
    widest = max(g for g, _ in gaps)
    if widest <= _ANGLE_DEDUP:
        return None
    theta = None
    for width, start in gaps:
        if width < widest - _ANGLE_DEDUP:
            continue
        center = (start + width / 2.0) % _TWO_PI
        cand = (math.pi - center) % _TWO_PI
        if theta is None or cand < theta:
            theta = cand
    delta = widest / 2.0
    epsilon = min(math.sin(min(delta, math.pi / 2.0)), _EPS_CAP)
    return SectorWitness(theta=theta, delta=delta, epsilon=epsilon)


def witness_sequence(wit: SectorWitness, count: int) -> np.ndarray:
    """The ray points z_n = e^{i theta} n for n = 1..count."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return np.exp(1j * wit.theta) * np.arange(1, count + 1, dtype=np.float64)


def verify_witness(spectrum, zs, epsilon: float) -> WitnessCheck:
    """Check |1 + lambda z| >= epsilon over the whole spectrum-by-ray grid."""
    vals = np.asarray(list(spectrum), dtype=np.complex128).ravel()
    zarr = np.asarray(list(zs), dtype=np.complex128).ravel()
    if vals.size == 0 or zarr.size == 0:
        return WitnessCheck(True, None, None, math.inf)
    mods = np.abs(1.0 + vals[:, None] * zarr[None, :])
    flat = int(mods.argmin())
    i, j = np.unravel_index(flat, mods.shape)
    value = float(mods[i, j])
    return WitnessCheck(value >= epsilon, complex(vals[i]), complex(zarr[j]), value)


def escape_radius_profile(spectrum, epsilon: float, n_angles: int = DEFAULT_N_ANGLES) -> EscapeProfile:
    """Per-direction blocking radii of the forbidden disks D(-1/l, eps/|l|).

    radii[k] is the largest ray parameter t > 0 at which e^{i theta_k} t sits
    on the boundary of some forbidden disk, 0 when the ray misses every disk.
    """
    if not (0.0 < epsilon < 1.0):
        raise InvalidEpsilon(f"epsilon must lie in (0,1), got {epsilon}")
    if n_angles < 8:
        raise ValueError(f"n_angles must be >= 8, got {n_angles}")
    angles = _TWO_PI * np.arange(n_angles, dtype=np.float64) / n_angles
    vals = np.asarray(list(spectrum), dtype=np.complex128).ravel()
    vals = vals[np.abs(vals) > 0.0]
    radii = np.zeros(n_angles, dtype=np.float64)
    if vals.size:
        centers = -1.0 / vals
        # |center|^2 - r^2 = (1 - eps^2)/|lambda|^2 > 0: no disk reaches the origin
        gap = np.abs(centers) ** 2 - (epsilon / np.abs(vals)) ** 2
        for lo in range(0, n_angles, _PROFILE_CHUNK):
            hi = min(lo + _PROFILE_CHUNK, n_angles)
            u = np.exp(1j * angles[lo:hi])
            b = (np.conj(u)[:, None] * centers[None, :]).real
            disc = b * b - gap[None, :]
            hit = disc >= 0.0
            t = np.where(hit, b + np.sqrt(np.where(hit, disc, 0.0)), 0.0)
            np.maximum(t, 0.0, out=t)
            radii[lo:hi] = t.max(axis=1)
    return EscapeProfile(epsilon, angles, radii, float(radii.min()))


def _harmonic(level: int) -> np.ndarray:
    return np.cumsum(1.0 / np.arange(1, level + 1, dtype=np.float64))


def example_spectrum(level: int) -> np.ndarray:
    """Eigenvalues 1/(nu_n w_{n,i}) in (n, i) lexicographic order.

    w_{n,i} = e^{2 pi i (i-1)/2^n} for i = 1..2^n, nu_n the n-th harmonic
    number; block n contributes 2^n entries of modulus 1/nu_n at every
    2^n-th root direction (conjugated, since 1/w = conj(w) on the circle).
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    if level > _MAX_LEVEL:
        raise LevelTooLarge(f"level {level} exceeds maximum {_MAX_LEVEL}")
    nu = _harmonic(level)
    blocks = []
    for n in range(1, level + 1):
        i = np.arange(2**n, dtype=np.float64)
        blocks.append(np.exp(-2j * np.pi * i / (2**n)) / nu[n - 1])
    return np.concatenate(blocks)


def example_operator(level: int) -> np.ndarray:
    """Diagonal matrix carrying example_spectrum(level); dimension 2^{level+1}-2."""
    return np.diag(example_spectrum(level))


def escape_ladder(levels, epsilon: float = 0.5, n_angles: int = DEFAULT_N_ANGLES):
    """Rows (level, dim, max_gap, min_escape_radius) per truncation level.

    Escape radii that grow without bound down the ladder are the finite-rank
    signature of a spectrum accumulating at 0 from every direction.
    """
    if isinstance(levels, (int, np.integer)):
        levels = range(1, int(levels) + 1)
    rows = []
    for level in levels:
        spectrum = example_spectrum(int(level))
        profile = escape_radius_profile(spectrum, epsilon, n_angles)
        rows.append(
            (int(level), int(spectrum.size), max_circular_gap(spectrum), profile.min_radius)
        )
    return rows


def emit_profile_csv(profile: EscapeProfile) -> str:
    out = ["angle,escape_radius"]
    for a, r in zip(profile.angles, profile.radii):
        out.append(f"{a:.17g},{r:.17g}")
    return "\n".join(out) + "\n"


def emit_ladder_csv(rows) -> str:
    out = ["level,dim,max_gap,min_escape_radius"]
    for level, dim, gap, radius in rows:
        out.append(f"{level},{dim},{gap:.17g},{radius:.17g}")
    return "\n".join(out) + "\n"
