"""Command-line interface: file-in/file-out subcommands over all modules.

Exit codes: 0 affirmative verdict or plain success, 1 negative verdict
(not a union of lines, not commuting, no sector, slope below threshold,
line not in spectrum), 2 errors and indeterminate outcomes. Identical
arguments, files, and seeds produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import agmon as agmon_mod
from . import commute as commute_mod
from . import core, detpoly, linegeom, riesz
from .errors import (
    LineNotInSpectrum,
    NoConvergence,
    NumericalAmbiguity,
    ProjspecError,
)

_SLOPE_THRESHOLD = 1.8

_TOL_FIELDS = ("normal", "eig", "unitary", "commute", "line", "recon")


def _add_common(sub, seed: bool = False):
    sub.add_argument("-o", "--output", metavar="PATH", help="write the result here instead of stdout")
    for name in _TOL_FIELDS:
        sub.add_argument(
            f"--tol-{name}", type=float, default=None, metavar="X",
            help=f"override the {name} tolerance",
        )
    if seed:
        sub.add_argument("--seed", type=int, default=0, help="deterministic seed (default 0)")


def _tolerances(args) -> core.Tolerances:
    overrides = {}
    for name in _TOL_FIELDS:
        val = getattr(args, f"tol_{name.replace('-', '_')}", None)
        if val is not None:
            overrides[name] = val
    return core.default_tolerances().override(**overrides)


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _cli_complex(text: str) -> complex:
    try:
        return core.parse_complex(text.strip())
    except ValueError:
        return complex(text.strip().replace("i", "j"))


def _cmd_eig(args) -> int:
    a = core.parse_matrix(_read(args.matrix))
    dec = core.eig_normal(a, tol=_tolerances(args))
    out = [f"eigenvalues {dec.values.size}"]
    out.extend(core.emit_complex(v) for v in dec.values)
    out.append(f"residual={dec.residual:.17g}")
    out.append(core.emit_matrix(dec.unitary).rstrip("\n"))
    _write(args, "\n".join(out) + "\n")
    return 0


def _cmd_detpoly(args) -> int:
    a = core.parse_matrix(_read(args.matrix_a))
    b = core.parse_matrix(_read(args.matrix_b))
    p = detpoly.char_poly_pair(a, b, tol=_tolerances(args))
    _write(args, detpoly.emit_bipoly(p))
    return 0


def _cmd_lines(args) -> int:
    p = detpoly.parse_bipoly(_read(args.poly))
    verdict = linegeom.factor_lines(p, seed=args.seed, tol=_tolerances(args))
    if verdict.is_lines:
        text = linegeom.emit_arrangement(verdict.arrangement)
        text += f"# deficit={verdict.arrangement.deficit}\n"
        _write(args, text)
        return 0
    z, w = verdict.witness
    out = [
        "notlines",
        f"witness_z={core.emit_complex(z)}",
        f"witness_w={core.emit_complex(w)}",
        f"witness_residual={verdict.witness_residual:.17g}",
    ]
    _write(args, "\n".join(out) + "\n")
    return 1


def _cmd_agmon(args) -> int:
    a = core.parse_matrix(_read(args.matrix))
    dec = core.eig_normal(a, tol=_tolerances(args))
    wit = agmon_mod.strong_agmon_check(dec.values)
    if wit is None:
        _write(args, "nosector\n")
        return 1
    out = [
        f"theta={wit.theta:.17g}",
        f"delta={wit.delta:.17g}",
        f"epsilon={wit.epsilon:.17g}",
        f"sector_center={wit.sector_center:.17g}",
        f"gap={2.0 * wit.delta:.17g}",
    ]
    _write(args, "\n".join(out) + "\n")
    return 0


def _cmd_escape(args) -> int:
    if args.ladder is not None:
        rows = agmon_mod.escape_ladder(args.ladder, args.epsilon, args.n_angles)
        _write(args, agmon_mod.emit_ladder_csv(rows))
        return 0
    if args.matrix is None:
        raise ValueError("escape requires a matrix file unless --ladder is given")
    a = core.parse_matrix(_read(args.matrix))
    dec = core.eig_normal(a, tol=_tolerances(args))
    profile = agmon_mod.escape_radius_profile(dec.values, args.epsilon, args.n_angles)
    _write(args, agmon_mod.emit_profile_csv(profile))
    return 0


def _cmd_example(args) -> int:
    mat = agmon_mod.example_operator(args.level)
    _write(args, core.emit_matrix(mat))
    return 0


def _contour(args) -> riesz.Contour:
    return riesz.Contour(_cli_complex(args.center), args.radius, args.nodes)


def _cmd_riesz(args) -> int:
    a = core.parse_matrix(_read(args.matrix))
    res = riesz.riesz_projection(a, _contour(args), tol=_tolerances(args))
    out = [
        f"# idempotency_residual={res.idempotency_residual:.17g}",
        f"# commutation_residual={res.commutation_residual:.17g}",
        f"# rank_estimate={res.rank_estimate}",
        core.emit_matrix(res.projection).rstrip("\n"),
    ]
    _write(args, "\n".join(out) + "\n")
    return 0


def _cmd_perturb(args) -> int:
    a = core.parse_matrix(_read(args.matrix_a))
    b = core.parse_matrix(_read(args.matrix_b))
    eps_list = [float(t) for t in args.eps_list.split(",") if t.strip()]
    report = riesz.perturbation_check(
        a, b, _cli_complex(args.lam), _cli_complex(args.mu),
        _contour(args), eps_list, tol=_tolerances(args),
    )
    _write(args, riesz.emit_slope_csv(report))
    if report.exact or (report.slope is not None and report.slope >= _SLOPE_THRESHOLD):
        return 0
    return 1


def _cmd_lemma34(args) -> int:
    a = core.parse_matrix(_read(args.matrix_a))
    b = core.parse_matrix(_read(args.matrix_b))
    zs = None
    if args.zs:
        zs = [_cli_complex(t) for t in args.zs.split(",") if t.strip()]
    res = riesz.lemma34_solver(a, b, _cli_complex(args.mu), zs, tol=_tolerances(args))
    out = [
        f"residual_a={res.residual_a:.17g}",
        f"residual_b={res.residual_b:.17g}",
        f"vector {res.vector.size}",
    ]
    out.extend(core.emit_complex(v) for v in res.vector)
    _write(args, "\n".join(out) + "\n")
    return 0


def _cmd_commute(args) -> int:
    a = core.parse_matrix(_read(args.matrix_a))
    b = core.parse_matrix(_read(args.matrix_b))
    report = commute_mod.equivalence_check(a, b, seed=args.seed, tol=_tolerances(args))
    _write(args, commute_mod.format_report(report))
    if report.indeterminate is not None:
        return 2
    return 0 if report.commute else 1


def _cmd_tuple(args) -> int:
    mats = core.parse_tuple(_read(args.tuple))
    report = commute_mod.tuple_test(mats, seed=args.seed, tol=_tolerances(args))
    out = [f"members={len(mats)}", f"commute={'true' if report.commute else 'false'}"]
    for (i, j), rep in report.reports:
        prefix = f"pair_{i}_{j}_"
        out.append(f"{prefix}commute={'true' if rep.commute else 'false'}")
        out.append(f"{prefix}commutator_norm={rep.commutator_norm:.17g}")
        if rep.indeterminate is not None:
            out.append(f"{prefix}verdict=indeterminate")
        else:
            out.append(f"{prefix}verdict={'lines' if rep.verdict.is_lines else 'notlines'}")
            out.append(f"{prefix}consistent={'true' if rep.consistent else 'false'}")
    if report.indeterminate is not None:
        msg = " ".join(report.indeterminate.split())
        out.append(f"indeterminate={msg}")
        _write(args, "\n".join(out) + "\n")
        return 2
    if report.commute and report.hyperplanes is not None:
        out.append(f"deficit={report.deficit}")
        out.append(f"hyperplanes {len(report.hyperplanes)} {len(mats)}")
        for coeffs, mult in report.hyperplanes:
            row = " ".join(core.emit_complex(x) for x in coeffs)
            out.append(f"{row} {mult}")
    _write(args, "\n".join(out) + "\n")
    return 0 if report.commute else 1


def plot_slice(p: detpoly.BivarPoly, wmin: float, wmax: float, samples: int):
    """Root traces of p(z, w0) for real w0 sweeping [wmin, wmax]."""
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    rows = []
    for w0 in np.linspace(wmin, wmax, samples):
        coeffs = detpoly.univariate_slice(p, "fix_w", complex(w0))
        try:
            roots = linegeom.poly_roots(coeffs)
        except ValueError:
            continue
        for z in roots:
            rows.append((float(w0), float(z.real), float(z.imag)))
    return rows


def _svg_scatter(rows, wmin: float, wmax: float) -> str:
    size, margin = 640, 48
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if rows:
        xs = [r[1] for r in rows]
        ys = [r[2] for r in rows]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        span = max(x1 - x0, y1 - y0, 1e-9)
        pad = 0.05 * span
        x0, y0, span = x0 - pad, y0 - pad, span + 2 * pad
        scale = (size - 2 * margin) / span
        wspan = max(wmax - wmin, 1e-9)
        for w0, x, y in rows:
            px = margin + (x - x0) * scale
            py = size - margin - (y - y0) * scale
            t = (w0 - wmin) / wspan
            r, g, b = int(40 + 180 * t), 60, int(220 - 180 * t)
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" '
                f'fill="rgb({r},{g},{b})"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_plot_slice(args) -> int:
    p = detpoly.parse_bipoly(_read(args.poly))
    rows = plot_slice(p, args.wmin, args.wmax, args.samples)
    out = ["w0,re_z,im_z"]
    for w0, x, y in rows:
        out.append(f"{w0:.17g},{x:.17g},{y:.17g}")
    _write(args, "\n".join(out) + "\n")
    if args.svg:
        Path(args.svg).write_text(_svg_scatter(rows, args.wmin, args.wmax))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projspec",
        description="point projective spectra of matrix pairs: determinantal "
        "polynomials, line factorization, sector and escape analysis, Riesz "
        "projections, and the commutativity equivalence",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("eig", help="eigendecomposition of a normal matrix")
    s.add_argument("matrix")
    _add_common(s)
    s.set_defaults(func=_cmd_eig)

    s = subs.add_parser("detpoly", help="coefficients of det(I + zA + wB)")
    s.add_argument("matrix_a")
    s.add_argument("matrix_b")
    _add_common(s)
    s.set_defaults(func=_cmd_detpoly)

    s = subs.add_parser("lines", help="factor a bivariate polynomial into lines")
    s.add_argument("poly")
    _add_common(s, seed=True)
    s.set_defaults(func=_cmd_lines)

    s = subs.add_parser("agmon", help="widest eigenvalue-free sector of a spectrum")
    s.add_argument("matrix")
    _add_common(s)
    s.set_defaults(func=_cmd_agmon)

    s = subs.add_parser("escape", help="escape-radius profile or truncation ladder")
    s.add_argument("matrix", nargs="?", default=None)
    s.add_argument("--epsilon", type=float, default=0.5, help="disk parameter in (0,1)")
    s.add_argument("--n-angles", type=int, default=agmon_mod.DEFAULT_N_ANGLES)
    s.add_argument("--ladder", type=int, default=None, metavar="N",
                   help="emit the ladder CSV for levels 1..N instead of a profile")
    _add_common(s)
    s.set_defaults(func=_cmd_escape)

    s = subs.add_parser("example", help="diagonal model operator at a truncation level")
    s.add_argument("--level", type=int, required=True)
    _add_common(s)
    s.set_defaults(func=_cmd_example)

    s = subs.add_parser("riesz", help="Riesz projection over a circular contour")
    s.add_argument("matrix")
    s.add_argument("--center", required=True, help="contour center (complex literal)")
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--nodes", type=int, default=riesz.DEFAULT_NODES)
    _add_common(s)
    s.set_defaults(func=_cmd_riesz)

    s = subs.add_parser("perturb", help="first-order perturbation residual slope")
    s.add_argument("matrix_a")
    s.add_argument("matrix_b")
    s.add_argument("--lam", required=True, help="unperturbed eigenvalue (complex literal)")
    s.add_argument("--mu", required=True, help="first-order eigenvalue rate (complex literal)")
    s.add_argument("--center", required=True)
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--nodes", type=int, default=riesz.DEFAULT_NODES)
    s.add_argument("--eps-list", default="1e-2,1e-3,1e-4")
    _add_common(s)
    s.set_defaults(func=_cmd_perturb)

    s = subs.add_parser("lemma34", help="common eigenvector from a spectral line")
    s.add_argument("matrix_a")
    s.add_argument("matrix_b")
    s.add_argument("--mu", required=True, help="eigenvalue with |mu| = ||B||")
    s.add_argument("--zs", default=None, help="comma-separated complex ramp points")
    _add_common(s)
    s.set_defaults(func=_cmd_lemma34)

    s = subs.add_parser("commute", help="commutativity vs line-structure equivalence")
    s.add_argument("matrix_a")
    s.add_argument("matrix_b")
    _add_common(s, seed=True)
    s.set_defaults(func=_cmd_commute)

    s = subs.add_parser("tuple", help="pairwise equivalence over an operator tuple")
    s.add_argument("tuple")
    _add_common(s, seed=True)
    s.set_defaults(func=_cmd_tuple)

    s = subs.add_parser("plot-slice", help="root traces of p(z, w0) over a real sweep")
    s.add_argument("poly")
    s.add_argument("--wmin", type=float, default=-1.0)
    s.add_argument("--wmax", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=41)
    s.add_argument("--svg", default=None, metavar="PATH", help="also write an SVG scatter")
    _add_common(s)
    s.set_defaults(func=_cmd_plot_slice)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ProjspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
