"""Line geometry of determinantal zero sets.

Decides whether the zero set of a bivariate polynomial with p(0,0) = 1 is a
union of complex lines {1 + lambda z + mu w = 0} and extracts the arrangement
when it is. The candidate multisets come from axis slices; the pairing of
lambda with mu values is resolved on two independent random rays; a
reconstruction check is mandatory before any affirmative verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linear_sum_assignment

from . import core
from .detpoly import BivarPoly, total_degree, univariate_slice
from .errors import DegenerateInput, NumericalAmbiguity, ParseError

# Greedy pairing acceptance: per-pair ray mismatch relative to the pair scale.
PAIR_TOL = 1e-5

# Multiplicity clustering radius, relative to 1 + |lambda| + |mu|.
CLUSTER_PAIR_REL = 1e-6

# Off-line witness admission: |p(witness)| bound (absolute).
WITNESS_PTOL = 1e-8

# Dust threshold when reading degrees off slice coefficient vectors.
_SLICE_DUST_REL = 1e-12

# p(0,0) must equal 1 within this bound before factorization is attempted.
_C00_TOL = 1e-6

_NEWTON_STEPS = 3


@dataclass(frozen=True)
class Line:
    """The affine complex line {1 + lam*z + mu*w = 0}; (lam, mu) != (0, 0)."""

    lam: complex
    mu: complex


@dataclass
class LineArrangement:
    """Distinct lines with multiplicities; deficit counts missing degree.

    Multiplicities sum to the total degree of the source polynomial; when
    that degree falls short of the ambient bound n the difference is the
    deficit (degree carried by lines at infinity, absent from this chart).
    """

    lines: list
    deficit: int = 0

    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.lines)


@dataclass
class LineVerdict:
    """Outcome of factor_lines: a certified arrangement or a certified witness."""

    is_lines: bool
    arrangement: Optional[LineArrangement] = None
    witness: Optional[Tuple[complex, complex]] = None
    witness_residual: Optional[float] = None


def _sorted_complex(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.size == 0:
        return arr
    order = np.lexsort((arr.imag, arr.real))
    return arr[order]


def poly_roots(coeffs, rel: float = _SLICE_DUST_REL) -> np.ndarray:
    """Roots of an ascending-coefficient polynomial via its companion matrix.

    Leading coefficients below rel * max|c| are treated as zero.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    mags = np.abs(c)
    top = mags.max() if c.size else 0.0
    if top == 0.0:
        raise ValueError("zero polynomial has no well-defined roots")
    deg = int(np.nonzero(mags > rel * top)[0].max())
    if deg == 0:
        return np.zeros(0, dtype=np.complex128)
    monic = c[: deg + 1] / c[deg]
    comp = np.zeros((deg, deg), dtype=np.complex128)
    if deg > 1:
        comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -monic[:deg]
    roots = np.linalg.eigvals(comp)
    return _sorted_complex(_polish_roots(monic, roots))


def _polish_roots(monic_ascending: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """A few guarded Newton steps on each root; steps kept only on improvement."""
    c = np.asarray(monic_ascending, dtype=np.complex128)
    dc = npoly.polyder(c)
    out = np.array(roots, dtype=np.complex128)
    for i, r in enumerate(out):
        val = npoly.polyval(r, c)
        for _ in range(_NEWTON_STEPS):
            dv = npoly.polyval(r, dc)
            if dv == 0:
                break
            cand = r - val / dv
            cval = npoly.polyval(cand, c)
            if abs(cval) >= abs(val):
                break
            r, val = cand, cval
        out[i] = r
    return out


def _monic_reversed_roots(slice_coeffs, d: int) -> np.ndarray:
    """Line coefficients read off a slice of p with p-slice(0) = 1.

    For a slice q(t) = prod(1 + s_i t) of total-degree budget d, returns the
    multiset {s_i} padded with exact zeros for the degree deficit: reversing
    q at length (effective degree + 1) is monic because the constant term is
    1, so companion roots need no leading-coefficient guesswork.
    """
    s = np.asarray(slice_coeffs, dtype=np.complex128)[: d + 1]
    mags = np.abs(s)
    top = mags.max()
    if top == 0.0:
        raise DegenerateInput("slice polynomial is identically zero")
    k = int(np.nonzero(mags > _SLICE_DUST_REL * top)[0].max())
    if k == 0:
        return np.zeros(d, dtype=np.complex128)
    rev = s[: k + 1][::-1].copy()
    rev = rev / rev[k]
    comp = np.zeros((k, k), dtype=np.complex128)
    if k > 1:
        comp[1:, :-1] = np.eye(k - 1)
    comp[:, -1] = -rev[:k]
    y = np.linalg.eigvals(comp)
    y = _polish_roots(rev, y)
    vals = np.concatenate([-y, np.zeros(d - k, dtype=np.complex128)])
    return _sorted_complex(vals)


def cluster_pairs(pairs, rel: float = CLUSTER_PAIR_REL):
    """Greedy radius clustering of (lam, mu) pairs into (lam, mu, multiplicity).

    Deterministic: seeds are taken in lexicographic order and absorb every
    unused pair within rel * (1 + |lam| + |mu|).
    """
    items = [(complex(l), complex(m)) for l, m in pairs]
    order = sorted(
        range(len(items)),
        key=lambda i: (items[i][0].real, items[i][0].imag, items[i][1].real, items[i][1].imag),
    )
    used = [False] * len(items)
    clusters = []
    for i in order:
        if used[i]:
            continue
        seed_l, seed_m = items[i]
        radius = rel * (1.0 + abs(seed_l) + abs(seed_m))
        members = []
        for j in order:
            if used[j]:
                continue
            dl = items[j][0] - seed_l
            dm = items[j][1] - seed_m
            if math.hypot(abs(dl), abs(dm)) <= radius:
                members.append(j)
                used[j] = True
        lam = sum(items[j][0] for j in members) / len(members)
        mu = sum(items[j][1] for j in members) / len(members)
        clusters.append((lam, mu, len(members)))
    clusters.sort(key=lambda t: (t[0].real, t[0].imag, t[1].real, t[1].imag))
    return clusters


def expand_arrangement(lines, n: int) -> BivarPoly:
    """Expand prod(1 + lam z + mu w)^mult into a coefficient table of bound n."""
    degree = sum(m for _, m in lines)
    if degree > n:
        raise ValueError(f"arrangement degree {degree} exceeds bound {n}")
    coeffs = np.zeros((n + 1, n + 1), dtype=np.complex128)
    coeffs[0, 0] = 1.0
    for line, mult in lines:
        for _ in range(mult):
            nxt = coeffs.copy()
            nxt[1:, :] += line.lam * coeffs[:-1, :]
            nxt[:, 1:] += line.mu * coeffs[:, :-1]
            coeffs = nxt
    return BivarPoly(n, coeffs)


def _polish_lines(coeffs: np.ndarray, lines, n: int, steps: int = 3):
    """Joint Gauss-Newton refinement of all line parameters at once.

    Minimizes ||expand(lines) - coeffs||_F over every (lam_i, mu_i); the
    partial derivative with respect to lam_i is m_i * z * (product with one
    copy of factor i removed), a plain coefficient shift of the deflated
    product. Individual slice roots carry interpolation noise amplified by
    conditioning; fitting the whole table washes that out quadratically.
    """
    work = [[line.lam, line.mu, mult] for line, mult in lines]
    norm_c = np.linalg.norm(coeffs)
    best = None
    for _ in range(steps):
        current = [(Line(l, m), mu) for l, m, mu in work]
        recon = expand_arrangement(current, n)
        r = (coeffs - recon.coeffs).ravel()
        err = float(np.linalg.norm(r))
        if best is not None and err >= best[0]:
            return best[1]
        best = (err, current)
        if err <= 1e-15 * norm_c:
            return current
        cols = []
        for i, (lam, mu, mult) in enumerate(work):
            others = []
            for j, (l, m, mj) in enumerate(work):
                mt = mj - 1 if j == i else mj
                if mt > 0:
                    others.append((Line(l, m), mt))
            q = expand_arrangement(others, n).coeffs
            dz = np.zeros((n + 1, n + 1), dtype=np.complex128)
            dz[1:, :] = mult * q[:n, :]
            dw = np.zeros((n + 1, n + 1), dtype=np.complex128)
            dw[:, 1:] = mult * q[:, :n]
            cols.append(dz.ravel())
            cols.append(dw.ravel())
        jac = np.stack(cols, axis=1)
        delta, *_ = np.linalg.lstsq(jac, r, rcond=None)
        for i in range(len(work)):
            work[i][0] = work[i][0] + complex(delta[2 * i])
            work[i][1] = work[i][1] + complex(delta[2 * i + 1])
    current = [(Line(l, m), mu) for l, m, mu in work]
    recon = expand_arrangement(current, n)
    err = float(np.linalg.norm(coeffs - recon.coeffs))
    if best is not None and err >= best[0]:
        return best[1]
    return current


def _greedy_pairing(lams, mus, gammas, ray_roots, pair_tol):
    """Pair lambda and mu candidates using nearest ray-root consistency.

    Returns the list of paired (lam, mu) or None when some selection exceeds
    the pairing tolerance.
    """
    d = len(lams)
    lam_arr = np.asarray(lams)
    mu_arr = np.asarray(mus)
    avail_l = np.ones(d, dtype=bool)
    avail_m = np.ones(d, dtype=bool)
    avail_s = [np.ones(d, dtype=bool) for _ in gammas]
    predicted = [np.add.outer(lam_arr, g * mu_arr) for g in gammas]
    pairs = []
    for _ in range(d):
        li = np.flatnonzero(avail_l)
        mi = np.flatnonzero(avail_m)
        ray_min = []
        ray_arg = []
        for r in range(len(gammas)):
            si = np.flatnonzero(avail_s[r])
            dist = np.abs(predicted[r][np.ix_(li, mi)][:, :, None] - ray_roots[r][si][None, None, :])
            ray_min.append(dist.min(axis=2))
            ray_arg.append((si, dist.argmin(axis=2)))
        cost = np.maximum.reduce(ray_min)
        ii, jj = np.unravel_index(int(cost.argmin()), cost.shape)
        i0, j0 = int(li[ii]), int(mi[jj])
        scale = 1.0 + max(abs(predicted[r][i0, j0]) for r in range(len(gammas)))
        if cost[ii, jj] > pair_tol * scale:
            return None
        pairs.append((complex(lam_arr[i0]), complex(mu_arr[j0])))
        avail_l[i0] = False
        avail_m[j0] = False
        for r in range(len(gammas)):
            si, arg = ray_arg[r]
            avail_s[r][si[arg[ii, jj]]] = False
    return pairs


def _witness_search(p, lam_vals, mu_vals, ray_info, rng, tol):
    """Hunt for a certified point of the zero set off every candidate line."""
    cand = [(l, m) for l in lam_vals for m in mu_vals]
    points = []
    for gamma, coeffs, roots in ray_info:
        for s in roots:
            if abs(s) < 1e-12:
                continue
            t = -1.0 / s
            t = complex(_polish_roots(coeffs / coeffs[0], np.array([t]))[0])
            points.append((t, gamma * t))
    scale_l = max((abs(v) for v in lam_vals), default=0.0)
    scale_m = max((abs(v) for v in mu_vals), default=0.0)
    for attempt in range(6):
        if attempt % 2 == 0:
            z0 = (1.0 / (1.0 + scale_l)) * np.exp(2j * np.pi * rng.uniform())
            coeffs = univariate_slice(p, "fix_z", z0)
            try:
                for w0 in poly_roots(coeffs):
                    points.append((complex(z0), complex(w0)))
            except ValueError:
                pass
        else:
            w0 = (1.0 / (1.0 + scale_m)) * np.exp(2j * np.pi * rng.uniform())
            coeffs = univariate_slice(p, "fix_w", w0)
            try:
                for z0 in poly_roots(coeffs):
                    points.append((complex(z0), complex(w0)))
            except ValueError:
                pass
    for z, w in points:
        val = abs(p.evaluate(z, w))
        if val > WITNESS_PTOL:
            continue
        margin = tol.line * (1.0 + abs(z) + abs(w))
        if all(abs(1.0 + l * z + m * w) > margin for l, m in cand):
            return (z, w), val
    return None


def factor_lines(p: BivarPoly, *, seed: int = 0, tol: Optional[core.Tolerances] = None) -> LineVerdict:
    """Decide union-of-lines structure for the zero set of p.

    Affirmative verdicts always pass the reconstruction check (expanded
    product within tol.recon * ||coeffs|| of p); negative verdicts carry a
    zero-set point separated from every candidate line. Anything weaker
    raises NumericalAmbiguity.
    """
    if tol is None:
        tol = core.default_tolerances()
    c = p.coeffs
    if abs(c[0, 0] - 1.0) > _C00_TOL:
        raise DegenerateInput(f"p(0,0) = {c[0, 0]:.6g}, expected 1")
    norm_c = float(np.linalg.norm(c))
    d = total_degree(p)
    deficit = p.n - d
    if d == 0:
        return LineVerdict(True, LineArrangement([], deficit))
    lams = _monic_reversed_roots(c[:, 0], d)
    mus = _monic_reversed_roots(c[0, :], d)
    rng = np.random.default_rng(seed)
    gammas = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=2))
    ray_info = []
    for g in gammas:
        coeffs = univariate_slice(p, "ray", g)
        ray_info.append((complex(g), coeffs, _monic_reversed_roots(coeffs, d)))
    ray_roots = [info[2] for info in ray_info]
    pairs = _greedy_pairing(lams, mus, gammas, ray_roots, PAIR_TOL)
    if pairs is not None:
        clusters = cluster_pairs(pairs)
        lines = [(Line(l, m), mult) for l, m, mult in clusters]
        lines = _polish_lines(c, lines, p.n)
        lines.sort(
            key=lambda t: (t[0].lam.real, t[0].lam.imag, t[0].mu.real, t[0].mu.imag)
        )
        recon = expand_arrangement(lines, p.n)
        err = float(np.linalg.norm(recon.coeffs - c))
        if err <= tol.recon * norm_c:
            return LineVerdict(True, LineArrangement(lines, deficit))
        raise NumericalAmbiguity(
            f"pairing succeeded but reconstruction residual {err:.3e} exceeds "
            f"{tol.recon * norm_c:.3e}"
        )
    lam_vals = [l for l, _, _ in cluster_pairs([(l, 0.0) for l in lams])]
    mu_vals = [m for m, _, _ in cluster_pairs([(m, 0.0) for m in mus])]
    found = _witness_search(p, lam_vals, mu_vals, ray_info, rng, tol)
    if found is not None:
        (z, w), val = found
        return LineVerdict(False, None, (z, w), val)
    raise NumericalAmbiguity("no consistent line pairing and no certified off-line witness")


def line_through_point(arr: LineArrangement, z: complex, w: complex, *, tol=None):
    """All arrangement lines passing within tol.line of the point (z, w)."""
    if tol is None:
        tol = core.default_tolerances()
    z = complex(z)
    w = complex(w)
    bound = tol.line * (1.0 + abs(z) + abs(w))
    return [line for line, _ in arr.lines if abs(1.0 + line.lam * z + line.mu * w) <= bound]


def compare_arrangements(a: LineArrangement, b: LineArrangement) -> float:
    """Optimal-assignment distance between multiplicity-expanded arrangements.

    Returns the largest matched pair distance under a minimal-cost matching,
    or +inf when the expanded cardinalities differ.
    """
    ea = [(line.lam, line.mu) for line, m in a.lines for _ in range(m)]
    eb = [(line.lam, line.mu) for line, m in b.lines for _ in range(m)]
    if len(ea) != len(eb):
        return math.inf
    if not ea:
        return 0.0
    la = np.array([t[0] for t in ea])
    ma = np.array([t[1] for t in ea])
    lb = np.array([t[0] for t in eb])
    mb = np.array([t[1] for t in eb])
    cost = np.sqrt(
        np.abs(la[:, None] - lb[None, :]) ** 2 + np.abs(ma[:, None] - mb[None, :]) ** 2
    )
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def parse_arrangement(text: str) -> LineArrangement:
    """Parse the arrangement format: `lines <count>` then coefficient rows."""
    items = list(core._content_lines(text))
    if not items:
        raise ParseError("expected 'lines <count>' header, found end of input")
    lineno, line = items[0]
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "lines":
        raise ParseError("expected 'lines <count>' header", line=lineno, col=1)
    try:
        count = int(tokens[1])
    except ValueError:
        raise ParseError("line count must be an integer", line=lineno, col=1) from None
    if count < 0 or len(items) - 1 != count:
        raise ParseError(f"expected {count} line rows, found {len(items) - 1}", line=lineno, col=1)
    out = []
    for lineno, row in items[1:]:
        tokens = row.split()
        if len(tokens) != 5:
            raise ParseError("expected '<re l> <im l> <re m> <im m> <mult>'", line=lineno, col=1)
        try:
            rl, il, rm, im = (float(t) for t in tokens[:4])
            mult = int(tokens[4])
        except ValueError:
            raise ParseError("bad arrangement row", line=lineno, col=1) from None
        if mult <= 0:
            raise ParseError("multiplicity must be positive", line=lineno, col=1)
        out.append((Line(complex(rl, il), complex(rm, im)), mult))
    return LineArrangement(out)


def emit_arrangement(arr: LineArrangement) -> str:
    out = [f"lines {len(arr.lines)}"]
    for line, mult in arr.lines:
        out.append(
            f"{line.lam.real:.17g} {line.lam.imag:.17g} "
            f"{line.mu.real:.17g} {line.mu.imag:.17g} {mult}"
        )
    return "\n".join(out) + "\n"
