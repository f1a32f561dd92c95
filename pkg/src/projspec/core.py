"""Matrix substrate: validation, norms, normal eigendecomposition, file formats.

Complex matrices are plain ``numpy.ndarray`` objects with dtype complex128.
``as_cmatrix`` is the single admission point; every public operation routes
its inputs through it. The eigensolver is a hand-rolled cyclic Jacobi for
Hermitian matrices, extended to normal matrices by splitting A into its
Hermitian part H = (A + A*)/2 and skew part, then jointly refining the two
commuting Hermitian pieces block by block.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimMismatch, NoConvergence, NotNormal, ParseError

# Jacobi sweep budget and the relative off-diagonal mass at which a sweep
# pass declares convergence.
JACOBI_MAX_SWEEPS = 60
JACOBI_OFF_REL = 1e-14

# Relative cluster radius used when splitting Hermitian eigenvalues into
# blocks for the skew-part refinement stage.
EIG_CLUSTER_REL = 1e-8

DEFAULT_TOL_BASE = 1e-8


@dataclass(frozen=True)
class Tolerances:
    """Bundle of admission and certification tolerances.

    All fields are relative unless noted. ``unitary`` is absolute on
    ``||U*U - I||_F``.
    """

    normal: float = 1e-8
    eig: float = 1e-9
    unitary: float = 1e-10
    commute: float = 1e-8
    line: float = 1e-6
    recon: float = 1e-6

    @classmethod
    def from_base(cls, base: float) -> "Tolerances":
        """Scale every field proportionally from the default base 1e-8."""
        if not (base > 0 and math.isfinite(base)):
            raise ValueError(f"tolerance base must be positive and finite, got {base!r}")
        f = base / DEFAULT_TOL_BASE
        d = cls()
        return cls(
            normal=d.normal * f,
            eig=d.eig * f,
            unitary=d.unitary * f,
            commute=d.commute * f,
            line=d.line * f,
            recon=d.recon * f,
        )

    def override(self, **fields) -> "Tolerances":
        return replace(self, **{k: v for k, v in fields.items() if v is not None})


def default_tolerances() -> Tolerances:
    """Default tolerances, honoring the PROJSPEC_TOL environment variable."""
    raw = os.environ.get("PROJSPEC_TOL")
    if raw is None:
        return Tolerances()
    try:
        base = float(raw)
    except ValueError:
        raise ValueError(f"PROJSPEC_TOL is not a number: {raw!r}") from None
    return Tolerances.from_base(base)


def as_cmatrix(obj) -> np.ndarray:
    """Validate and coerce to a square complex128 matrix with finite entries."""
    a = np.asarray(obj, dtype=np.complex128)
    if a.ndim != 2:
        raise DimMismatch(f"expected a 2-d matrix, got ndim={a.ndim}")
    if a.shape[0] != a.shape[1]:
        raise DimMismatch(f"matrix is {a.shape[0]}x{a.shape[1]}, operators must be square")
    if a.shape[0] == 0:
        raise DimMismatch("matrix must be nonempty")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def frobenius(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=np.complex128)))


def normality_defect(a) -> float:
    """``||A*A - AA*||_F``; zero exactly when A is normal."""
    a = as_cmatrix(a)
    ah = a.conj().T
    return float(np.linalg.norm(ah @ a - a @ ah))


def commutator_norm(a, b) -> float:
    """``||AB - BA||_F`` for same-dimension square matrices."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"operands have shapes {a.shape} and {b.shape}")
    return float(np.linalg.norm(a @ b - b @ a))


def _jacobi_hermitian(h: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi for a Hermitian matrix.

    Returns (values, v) with values real ascending-unsorted (diagonal order)
    and v unitary such that v* h v is diagonal to within JACOBI_OFF_REL
    relative off-diagonal mass.
    """
    n = h.shape[0]
    a = np.array(h, dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.real.diagonal().copy(), v
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), v
    stop = JACOBI_OFF_REL * scale
    # Entries below skip never contribute enough off-diagonal mass to matter.
    skip = stop / n
    for _ in range(max_sweeps):
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        if np.linalg.norm(off) <= stop:
            return a.real.diagonal().copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                ag = abs(g)
                if ag <= skip:
                    continue
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2.0 * ag)
                # Smaller root of t^2 + 2*tau*t - 1 = 0 keeps |t| <= 1.
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = (t * c) * (g / ag)
                # Right-multiply by the rotation, then left-multiply by its
                # adjoint; the pivot entry is annihilated exactly.
                col_p = c * a[:, p] - np.conj(s) * a[:, q]
                col_q = s * a[:, p] + c * a[:, q]
                a[:, p] = col_p
                a[:, q] = col_q
                row_p = c * a[p, :] - s * a[q, :]
                row_q = np.conj(s) * a[p, :] + c * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vis_p = c * v[:, p] - np.conj(s) * v[:, q]
                vis_q = s * v[:, p] + c * v[:, q]
                v[:, p] = vis_p
                v[:, q] = vis_q
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    if np.linalg.norm(off) <= stop:
        return a.real.diagonal().copy(), v
    raise NoConvergence(f"Jacobi sweeps exhausted ({max_sweeps}) without convergence")


def _split_sorted(vals: np.ndarray, radius: float):
    """Chain-cluster ascending real values; break where the gap exceeds radius."""
    groups = []
    start = 0
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] > radius:
            groups.append(np.arange(start, i))
            start = i
    groups.append(np.arange(start, len(vals)))
    return groups


def _refine_blocks(mats, radii, v, blocks):
    """Jointly refine a unitary so each matrix becomes block-diagonal.

    mats are (nearly) commuting Hermitian matrices, processed in order; each
    stage diagonalizes the compression of one matrix inside every current
    block and splits the block by the clustered eigenvalues.
    """
    for m, radius in zip(mats, radii):
        out = []
        for idx in blocks:
            if idx.size == 1:
                out.append(idx)
                continue
            sub = v[:, idx]
            c = sub.conj().T @ (m @ sub)
            c = (c + c.conj().T) / 2.0
            vals, w = _jacobi_hermitian(c)
            order = np.argsort(vals, kind="stable")
            vals = vals[order]
            w = w[:, order]
            v[:, idx] = sub @ w
            for g in _split_sorted(vals, radius):
                out.append(idx[g])
        blocks = out
    return blocks


def _arg2pi(z: complex) -> float:
    a = float(np.angle(z))
    return a + 2.0 * math.pi if a < 0.0 else a


@dataclass
class EigenDecomposition:
    """Unitary diagonalization A = U diag(values) U* of a normal matrix.

    values are ordered by descending modulus, then ascending argument in
    [0, 2pi), then original diagonal position.
    """

    values: np.ndarray
    unitary: np.ndarray
    residual: float


def eig_normal(a, *, tol: Tolerances | None = None) -> EigenDecomposition:
    """Eigendecomposition of a (numerically) normal matrix.

    Raises NotNormal when the normality defect exceeds ``tol.normal * ||A||_F``
    and NoConvergence when the diagonal residual cannot be driven below
    ``tol.eig * ||A||_F + defect``.
    """
    if tol is None:
        tol = default_tolerances()
    a = as_cmatrix(a)
    n = a.shape[0]
    fa = frobenius(a)
    defect = normality_defect(a)
    if defect > tol.normal * fa:
        raise NotNormal(
            f"normality defect {defect:.3e} exceeds {tol.normal:.1e} * ||A||_F = {tol.normal * fa:.3e}"
        )
    if fa == 0.0:
        return EigenDecomposition(np.zeros(n, dtype=np.complex128), np.eye(n, dtype=np.complex128), 0.0)
    ah = a.conj().T
    herm = (a + ah) / 2.0
    skew = (a - ah) / 2.0j  # Hermitian since A - A* is skew-Hermitian
    radius = EIG_CLUSTER_REL * fa
    v = np.eye(n, dtype=np.complex128)
    blocks = [np.arange(n)]
    # The trailing Hermitian pass cleans the case where a skew-part degeneracy
    # straddles two merged near-degenerate Hermitian clusters.
    _refine_blocks([herm, skew, herm], [radius, radius, radius], v, blocks)
    t = v.conj().T @ (a @ v)
    values = t.diagonal().copy()
    residual = float(np.linalg.norm(t - np.diag(values)))
    if residual > tol.eig * fa + defect:
        raise NoConvergence(
            f"diagonal residual {residual:.3e} exceeds {tol.eig:.1e} * ||A||_F + defect = {tol.eig * fa + defect:.3e}"
        )
    order = sorted(range(n), key=lambda j: (-abs(values[j]), _arg2pi(values[j]), j))
    return EigenDecomposition(values[order], v[:, order], residual)


# ---------------------------------------------------------------------------
# Text formats

_NUM_BODY = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^([+-]?{_NUM_BODY})([+-]{_NUM_BODY})i$")


def parse_complex(token: str) -> complex:
    """Parse ``<re><sign><im>i`` with a mandatory signed imaginary part."""
    m = _COMPLEX_RE.match(token)
    if m is None:
        raise ValueError(f"bad complex literal {token!r}")
    return complex(float(m.group(1)), float(m.group(2)))


def emit_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _content_lines(text: str):
    """Yield (1-based line number, line) skipping blanks and # comments."""
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield i, line


def _token_col(line: str, token: str) -> int:
    pos = line.find(token)
    return pos + 1 if pos >= 0 else 1


def _parse_matrix_block(items, pos):
    """Parse one cmatrix block from _content_lines items starting at pos."""
    if pos >= len(items):
        raise ParseError("expected 'cmatrix <rows> <cols>' header, found end of input")
    lineno, line = items[pos]
    tokens = line.split()
    if len(tokens) != 3 or tokens[0] != "cmatrix":
        raise ParseError("expected 'cmatrix <rows> <cols>' header", line=lineno, col=1)
    try:
        rows, cols = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise ParseError("matrix dimensions must be integers", line=lineno, col=_token_col(line, tokens[1])) from None
    if rows <= 0 or cols <= 0:
        raise ParseError("matrix dimensions must be positive", line=lineno, col=1)
    data = np.empty((rows, cols), dtype=np.complex128)
    pos += 1
    for r in range(rows):
        if pos >= len(items):
            raise ParseError(f"expected {rows} matrix rows, found {r}", line=lineno, col=1)
        rline_no, rline = items[pos]
        row_tokens = rline.split()
        if len(row_tokens) != cols:
            raise ParseError(
                f"expected {cols} entries in row, found {len(row_tokens)}", line=rline_no, col=1
            )
        for c, tok in enumerate(row_tokens):
            try:
                data[r, c] = parse_complex(tok)
            except ValueError:
                raise ParseError(
                    f"bad complex literal {tok!r}", line=rline_no, col=_token_col(rline, tok)
                ) from None
        pos += 1
    if rows != cols:
        raise DimMismatch(f"matrix is {rows}x{cols}, operators must be square")
    return as_cmatrix(data), pos


def parse_matrix(text: str) -> np.ndarray:
    """Parse a single-matrix file in the ``cmatrix`` format."""
    items = list(_content_lines(text))
    mat, pos = _parse_matrix_block(items, 0)
    if pos != len(items):
        lineno, _ = items[pos]
        raise ParseError("trailing content after matrix block", line=lineno, col=1)
    return mat


def emit_matrix(a) -> str:
    a = as_cmatrix(a)
    rows, cols = a.shape
    out = [f"cmatrix {rows} {cols}"]
    for r in range(rows):
        out.append(" ".join(emit_complex(a[r, c]) for c in range(cols)))
    return "\n".join(out) + "\n"


def parse_tuple(text: str) -> list[np.ndarray]:
    """Parse a ``ctuple`` file: k same-dimension square matrix blocks."""
    items = list(_content_lines(text))
    if not items:
        raise ParseError("expected 'ctuple <k>' header, found end of input")
    lineno, line = items[0]
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "ctuple":
        raise ParseError("expected 'ctuple <k>' header", line=lineno, col=1)
    try:
        k = int(tokens[1])
    except ValueError:
        raise ParseError("tuple size must be an integer", line=lineno, col=_token_col(line, tokens[1])) from None
    if k <= 0:
        raise ParseError("tuple size must be positive", line=lineno, col=1)
    mats = []
    pos = 1
    for _ in range(k):
        mat, pos = _parse_matrix_block(items, pos)
        mats.append(mat)
    if pos != len(items):
        lineno, _ = items[pos]
        raise ParseError("trailing content after tuple blocks", line=lineno, col=1)
    dims = {m.shape[0] for m in mats}
    if len(dims) > 1:
        raise DimMismatch(f"tuple members have mixed dimensions {sorted(dims)}")
    return mats


def emit_tuple(mats) -> str:
    mats = [as_cmatrix(m) for m in mats]
    if not mats:
        raise ValueError("tuple must be nonempty")
    return f"ctuple {len(mats)}\n" + "".join(emit_matrix(m) for m in mats)
