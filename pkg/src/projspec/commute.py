"""Both sides of the commutativity / line-structure equivalence.

For normal matrices, [A,B] = 0 exactly when det(I + zA + wB) factors into
linear terms, i.e. the zero set is a union of lines. This module runs the
algebraic side (commutator norm), the geometric side (bivariate
factorization), cross-checks the recovered arrangement against the
eigenvalue pairs of a common eigenbasis, and extends the test to tuples by
pairwise reduction. Interpolation or matching failures surface as
indeterminate outcomes, never as definitive verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import core
from .detpoly import char_poly_pair
from .errors import (
    DimMismatch,
    InterpolationFailure,
    NotCommuting,
    NotInvariant,
    NotNormal,
    NumericalAmbiguity,
)
from .linegeom import (
    Line,
    LineArrangement,
    LineVerdict,
    cluster_pairs,
    compare_arrangements,
    factor_lines,
)

# A-eigenvalue clusters wider than this (relative to ||A||_F) are distinct.
DEFLATION_CLUSTER_REL = 1e-7

# Eigenvalue pairs with both entries below this relative size correspond to
# constant factors of the determinant, not lines.
_ZERO_PAIR_REL = 1e-12

_OFFDIAG_REL = 1e-8

_ORTHO_TOL = 1e-8
_INVARIANT_REL = 1e-8


@dataclass
class EquivalenceReport:
    commute: bool
    commutator_norm: float
    verdict: Optional[LineVerdict]
    consistent: Optional[bool]
    arrangement_vs_eigenpairs_distance: Optional[float] = None
    indeterminate: Optional[str] = None


@dataclass
class CommonEigenbasis:
    unitary: np.ndarray
    diag_a: np.ndarray
    diag_b: np.ndarray
    offdiag_residual: float


@dataclass
class TupleReport:
    reports: List[Tuple[Tuple[int, int], EquivalenceReport]]
    commute: bool
    indeterminate: Optional[str] = None
    unitary: Optional[np.ndarray] = None
    diagonals: Optional[np.ndarray] = None
    hyperplanes: Optional[list] = None
    deficit: int = 0


def _require_normal(m: np.ndarray, tag: str, tol: core.Tolerances) -> float:
    norm = core.frobenius(m)
    defect = core.normality_defect(m)
    if defect > tol.normal * norm:
        raise NotNormal(
            f"{tag}: normality defect {defect:.3e} exceeds {tol.normal * norm:.3e}"
        )
    return norm


def _cluster_ranges(values: np.ndarray, radius: float):
    """Contiguous index ranges of near-equal complex values (sorted input)."""
    ranges = []
    lo = 0
    for i in range(1, values.size + 1):
        if i == values.size or abs(values[i] - values[i - 1]) > radius:
            ranges.append((lo, i))
            lo = i
    return ranges


def common_eigenbasis(a, b, *, tol: Optional[core.Tolerances] = None) -> CommonEigenbasis:
    """Joint unitary diagonalization of a commuting normal pair by deflation.

    Diagonalize A; inside each eigenvalue cluster of A the compressed B is
    again normal and is diagonalized in place; a final pass re-diagonalizes
    the compressed A inside near-degenerate B subclusters so that neither
    side is left carrying its cluster spread.
    """
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if tol is None:
        tol = core.default_tolerances()
    na = _require_normal(a, "a", tol)
    nb = _require_normal(b, "b", tol)
    cn = core.commutator_norm(a, b)
    if cn > tol.commute * (na + nb):
        raise NotCommuting(
            f"commutator norm {cn:.3e} exceeds {tol.commute * (na + nb):.3e}"
        )
    n = a.shape[0]
    ea = core.eig_normal(a, tol=tol)
    u = np.array(ea.unitary)
    radius_a = DEFLATION_CLUSTER_REL * na
    radius_b = DEFLATION_CLUSTER_REL * nb
    for lo, hi in _cluster_ranges(ea.values, radius_a):
        if hi - lo == 1:
            continue
        w = u[:, lo:hi]
        bc = w.conj().T @ b @ w
        defect = core.normality_defect(bc)
        if defect > tol.normal * max(core.frobenius(bc), 1e-300):
            raise NotNormal(
                f"compressed b on an eigenvalue cluster of a is not normal "
                f"(defect {defect:.3e}); the pair does not commute cleanly"
            )
        eb = core.eig_normal(bc, tol=tol)
        u[:, lo:hi] = w @ eb.unitary
        for slo, shi in _cluster_ranges(eb.values, radius_b):
            if shi - slo == 1:
                continue
            w2 = u[:, lo + slo : lo + shi]
            ac = w2.conj().T @ a @ w2
            ec = core.eig_normal(ac, tol=tol)
            u[:, lo + slo : lo + shi] = w2 @ ec.unitary
    ta = u.conj().T @ a @ u
    tb = u.conj().T @ b @ u
    diag_a = np.diag(ta).copy()
    diag_b = np.diag(tb).copy()
    off_a = float(np.linalg.norm(ta - np.diag(diag_a)))
    off_b = float(np.linalg.norm(tb - np.diag(diag_b)))
    residual = max(off_a, off_b)
    if residual > _OFFDIAG_REL * (na + nb) + 1e-300:
        raise NotCommuting(
            f"joint diagonalization left off-diagonal residual {residual:.3e}; "
            "the pair commutes only approximately"
        )
    return CommonEigenbasis(u, diag_a, diag_b, residual)


def eigenpair_arrangement(diag_a, diag_b, *, norm_a: float = 1.0, norm_b: float = 1.0) -> LineArrangement:
    """Lines {1 + a_j z + b_j w = 0} from joint eigenvalues, with multiplicity.

    Pairs with both entries at relative zero contribute constant determinant
    factors and are counted in the deficit instead.
    """
    da = np.asarray(diag_a, dtype=np.complex128).ravel()
    db = np.asarray(diag_b, dtype=np.complex128).ravel()
    keep = (np.abs(da) > _ZERO_PAIR_REL * max(norm_a, 1e-300)) | (
        np.abs(db) > _ZERO_PAIR_REL * max(norm_b, 1e-300)
    )
    pairs = list(zip(da[keep], db[keep]))
    lines = [(Line(l, m), mult) for l, m, mult in cluster_pairs(pairs)]
    return LineArrangement(lines, deficit=int(da.size - len(pairs)))


def equivalence_check(a, b, *, seed: int = 0, tol: Optional[core.Tolerances] = None) -> EquivalenceReport:
    """Run both sides of the equivalence and cross-check them.

    commute is decided by the commutator norm; the geometric verdict comes
    from factoring det(I + zA + wB); consistent records whether the two
    sides agree. When both are affirmative the recovered arrangement is also
    matched against the eigenvalue pairs of a common eigenbasis.
    """
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if tol is None:
        tol = core.default_tolerances()
    na = _require_normal(a, "a", tol)
    nb = _require_normal(b, "b", tol)
    cn = core.commutator_norm(a, b)
    commute = cn <= tol.commute * (na + nb)
    try:
        p = char_poly_pair(a, b, tol=tol)
        verdict = factor_lines(p, seed=seed, tol=tol)
    except (InterpolationFailure, NumericalAmbiguity) as exc:
        return EquivalenceReport(commute, cn, None, None, indeterminate=str(exc))
    consistent = commute == verdict.is_lines
    distance = None
    if commute and verdict.is_lines:
        try:
            basis = common_eigenbasis(a, b, tol=tol)
        except (NotCommuting, NotNormal) as exc:
            return EquivalenceReport(commute, cn, verdict, None, indeterminate=str(exc))
        reference = eigenpair_arrangement(
            basis.diag_a, basis.diag_b, norm_a=na, norm_b=nb
        )
        distance = compare_arrangements(verdict.arrangement, reference)
    return EquivalenceReport(commute, cn, verdict, consistent, distance)


def tuple_test(mats, *, seed: int = 0, tol: Optional[core.Tolerances] = None) -> TupleReport:
    """Pairwise equivalence over a tuple, plus a joint eigenbasis when it commutes.

    The hyperplane arrangement {1 + sum_i a_i^{(k)} z_i = 0} is emitted from
    the joint diagonals; all-zero coefficient tuples are dropped as constant
    factors.
    """
    mats = [core.as_cmatrix(m) for m in mats]
    if not mats:
        raise ValueError("tuple must contain at least one matrix")
    n = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape != (n, n):
            raise DimMismatch(f"tuple members differ in dimension: {m.shape} vs {(n, n)}")
    if tol is None:
        tol = core.default_tolerances()
    norms = [_require_normal(m, f"member {i}", tol) for i, m in enumerate(mats)]
    reports = []
    indeterminate = None
    all_commute = True
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            rep = equivalence_check(mats[i], mats[j], seed=seed, tol=tol)
            reports.append(((i, j), rep))
            if rep.indeterminate is not None and indeterminate is None:
                indeterminate = f"pair ({i},{j}): {rep.indeterminate}"
            if not rep.commute:
                all_commute = False
    if indeterminate is not None:
        return TupleReport(reports, all_commute, indeterminate=indeterminate)
    if not all_commute:
        return TupleReport(reports, False)
    u, diags = _joint_eigenbasis(mats, norms, tol)
    tuples = [tuple(diags[m][k] for m in range(len(mats))) for k in range(n)]
    scale = max(norms) if norms else 1.0
    keep = [
        t for t in tuples if any(abs(x) > _ZERO_PAIR_REL * max(scale, 1e-300) for x in t)
    ]
    dropped = n - len(keep)
    hyperplanes = _cluster_tuples(keep)
    return TupleReport(
        reports,
        True,
        unitary=u,
        diagonals=diags,
        hyperplanes=hyperplanes,
        deficit=dropped,
    )


def _joint_eigenbasis(mats, norms, tol):
    """Iterated deflation across all tuple members; two sweeps settle ties."""
    n = mats[0].shape[0]
    u = np.eye(n, dtype=np.complex128)
    clusters = [(0, n)]
    for _ in range(2):
        for m, norm in zip(mats, norms):
            radius = DEFLATION_CLUSTER_REL * norm
            refined = []
            for lo, hi in clusters:
                if hi - lo == 1:
                    refined.append((lo, hi))
                    continue
                w = u[:, lo:hi]
                mc = w.conj().T @ m @ w
                em = core.eig_normal(mc, tol=tol)
                u[:, lo:hi] = w @ em.unitary
                for slo, shi in _cluster_ranges(em.values, radius):
                    refined.append((lo + slo, lo + shi))
            clusters = refined
    diags = np.stack([np.diag(u.conj().T @ m @ u).copy() for m in mats])
    return u, diags


def _cluster_tuples(tuples, rel: float = 1e-6):
    """Greedy radius clustering of coefficient tuples into (tuple, mult)."""
    items = [tuple(complex(x) for x in t) for t in tuples]
    order = sorted(
        range(len(items)),
        key=lambda i: tuple(v for x in items[i] for v in (x.real, x.imag)),
    )
    used = [False] * len(items)
    out = []
    for i in order:
        if used[i]:
            continue
        seed_t = items[i]
        radius = rel * (1.0 + sum(abs(x) for x in seed_t))
        members = []
        for j in order:
            if used[j]:
                continue
            dist = np.sqrt(sum(abs(x - y) ** 2 for x, y in zip(items[j], seed_t)))
            if dist <= radius:
                members.append(j)
                used[j] = True
        k = len(seed_t)
        center = tuple(
            sum(items[j][c] for j in members) / len(members) for c in range(k)
        )
        out.append((center, len(members)))
    out.sort(key=lambda t: tuple(v for x in t[0] for v in (x.real, x.imag)))
    return out


def restriction_check(a, b, basis_w, *, seed: int = 0, tol: Optional[core.Tolerances] = None) -> EquivalenceReport:
    """Equivalence check of the pair compressed to an invariant subspace."""
    a = core.as_cmatrix(a)
    b = core.as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    w = np.asarray(basis_w, dtype=np.complex128)
    if w.ndim == 1:
        w = w[:, None]
    elif w.ndim == 2 and w.shape[0] != a.shape[0] and w.shape[1] == a.shape[0]:
        # sequence of row vectors
        w = w.T
    if w.ndim != 2 or w.shape[1] == 0 or w.shape[0] != a.shape[0]:
        raise ValueError("basis_w must be a nonempty set of vectors of matching dimension")
    k = w.shape[1]
    if np.linalg.norm(w.conj().T @ w - np.eye(k)) > _ORTHO_TOL:
        raise ValueError("basis_w is not orthonormal")
    proj = w @ w.conj().T
    eye = np.eye(a.shape[0], dtype=np.complex128)
    for m, tag in ((a, "a"), (b, "b")):
        leak = float(np.linalg.norm((eye - proj) @ m @ w))
        bound = _INVARIANT_REL * max(1.0, core.frobenius(m))
        if leak > bound:
            raise NotInvariant(f"{tag} leaks {leak:.3e} out of span(basis_w) (bound {bound:.3e})")
    return equivalence_check(w.conj().T @ a @ w, w.conj().T @ b @ w, seed=seed, tol=tol)


def format_report(report: EquivalenceReport) -> str:
    """Flat key-value text block with stable key order."""
    from .linegeom import emit_arrangement

    lines = [
        f"commute={'true' if report.commute else 'false'}",
        f"commutator_norm={report.commutator_norm:.17g}",
    ]
    if report.indeterminate is not None:
        lines.append("verdict=indeterminate")
        lines.append("consistent=indeterminate")
        msg = " ".join(str(report.indeterminate).split())
        lines.append(f"indeterminate={msg}")
        return "\n".join(lines) + "\n"
    verdict = report.verdict
    lines.append(f"verdict={'lines' if verdict.is_lines else 'notlines'}")
    lines.append(f"consistent={'true' if report.consistent else 'false'}")
    if verdict.is_lines:
        if report.arrangement_vs_eigenpairs_distance is not None:
            lines.append(
                "arrangement_vs_eigenpairs_distance="
                f"{report.arrangement_vs_eigenpairs_distance:.17g}"
            )
        lines.append(f"deficit={verdict.arrangement.deficit}")
        lines.append("lines=" + emit_arrangement(verdict.arrangement).rstrip("\n"))
    else:
        z, w = verdict.witness
        lines.append(f"witness_z={core.emit_complex(z)}")
        lines.append(f"witness_w={core.emit_complex(w)}")
        lines.append(f"witness_residual={verdict.witness_residual:.17g}")
    return "\n".join(lines) + "\n"
