"""Reproducibility harness: solve, sweep, straighten, diagnose, test-curve.

Every command validates its configuration (exit 2 on bad input), writes
curves and certificates as JSON with 17-significant-digit floats, tables
as CSV with fixed headers, and figures as hand-emitted SVG 1.1.  Exit
code 3 flags solver non-convergence; artifacts are still written.
Sweep rows run on a worker pool bounded by ELASTICA_LAB_THREADS.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from elastica_lab.diagnostics import (
    classify_elastica,
    count_inflections,
    has_self_intersection,
    rescaled_deviation,
    straightness_profile,
)
from elastica_lab.geometry import (
    BoundaryCondition,
    DiscreteCurve,
    energies,
    reconstruct_positions,
)
from elastica_lab.inextensible import straightening_sweep
from elastica_lab.solve_extensible import (
    SolveOptions,
    build_test_curve,
    minimize_extensible,
)

__all__ = ["main"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _jdump(obj) -> str:
    """JSON with floats at 17 significant digits (round-trip exact)."""
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_jdump(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = ",".join(f"{json.dumps(str(k))}:{_jdump(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj)}")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _polyline_svg(points, width=640, height=480, margin=40):
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    scale = min((width - 2 * margin) / span[0], (height - 2 * margin) / span[1])
    mapped = np.empty_like(pts)
    mapped[:, 0] = margin + (pts[:, 0] - lo[0]) * scale
    mapped[:, 1] = height - margin - (pts[:, 1] - lo[1]) * scale
    poly = " ".join(f"{p[0]:.3f},{p[1]:.3f}" for p in mapped)
    ax_y = height - margin - (0.0 - lo[1]) * scale if lo[1] < 0 < hi[1] else None
    axis = (
        f'<line x1="{margin}" y1="{ax_y:.3f}" x2="{width - margin}" '
        f'y2="{ax_y:.3f}" stroke="#bbb" stroke-width="1"/>'
        if ax_y is not None
        else ""
    )
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f"{axis}\n"
        f'<polyline points="{poly}" fill="none" stroke="#084c94" '
        'stroke-width="1.5"/>\n'
        "</svg>\n"
    )


def _series_svg(x, series, xlabel, ylabel, width=640, height=480, margin=50):
    x = np.asarray(x, dtype=float)
    colors = ("#084c94", "#c02020", "#2a8a2a", "#8a2a8a")
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    xlo, xhi = float(x.min()), float(x.max())
    ylo, yhi = float(all_y.min()), float(all_y.max())
    xspan = max(xhi - xlo, 1e-12)
    yspan = max(yhi - ylo, 1e-12)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 10}" font-size="13" '
        f'text-anchor="middle">{xlabel}</text>',
        f'<text x="15" y="{height / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 15 {height / 2:.0f})">{ylabel}</text>',
    ]
    for idx, (name, ys) in enumerate(series.items()):
        ys = np.asarray(ys, dtype=float)
        px = margin + (x - xlo) / xspan * (width - 2 * margin)
        py = height - margin - (ys - ylo) / yspan * (height - 2 * margin)
        poly = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
        color = colors[idx % len(colors)]
        parts.append(
            f'<polyline points="{poly}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        for a, b in zip(px, py):
            parts.append(f'<circle cx="{a:.3f}" cy="{b:.3f}" r="3" fill="{color}"/>')
        parts.append(
            f'<text x="{width - margin - 5}" y="{margin + 16 * idx + 12}" '
            f'font-size="12" text-anchor="end" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _curve_payload(curve: DiscreteCurve) -> dict:
    return {"length": curve.length, "theta": curve.theta}


def _diagnostics_payload(curve, bc, eps, cs):
    fit = classify_elastica(curve, eps)
    payload = {
        "bc": {"l": bc.l, "theta0": bc.theta0, "theta1": bc.theta1},
        "eps": eps,
        "inflections": count_inflections(curve),
        "self_intersection": has_self_intersection(curve),
        "classification": {
            "family": fit.family,
            "A": fit.A,
            "alpha": fit.alpha,
            "beta": fit.beta,
            "k": fit.k,
            "residual": fit.residual,
            "ok": fit.ok,
        },
        "straightness": {},
        "rescaled_deviation": {},
    }
    for c in cs:
        if 2.0 * c * eps < curve.length:
            payload["straightness"][_fmt(c)] = straightness_profile(curve, eps, c)
            d0, d1 = rescaled_deviation(curve, eps, bc.theta0, c)
            payload["rescaled_deviation"][_fmt(c)] = [d0, d1]
    return payload


def _certificate_payload(cert) -> dict:
    return {
        "energy": {
            "bending": cert.energy.bending,
            "length": cert.energy.length,
            "e_eps": cert.energy.e_eps,
            "f_eps": cert.energy.f_eps,
        },
        "endpoint_residual": cert.endpoint_residual,
        "stationarity_residual": cert.stationarity_residual,
        "elastica_residual": cert.elastica_res,
        "winding": cert.winding,
        "multistart_rank": cert.multistart_rank,
        "is_global": cert.is_global,
        "converged": cert.converged,
        "start_label": cert.start_label,
        "ties": list(cert.ties),
    }


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("ELASTICA_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _bc_from(args) -> BoundaryCondition:
    return BoundaryCondition(args.l, args.theta0, args.theta1)


def _opts_from(args) -> SolveOptions:
    return SolveOptions(grid=args.grid, seed=args.seed)


def cmd_solve(args) -> int:
    bc = _bc_from(args)
    eps = args.eps[0]
    out = Path(args.out)
    curve, cert = minimize_extensible(bc, eps, _opts_from(args))
    _write(out / "curve.json", _jdump(_curve_payload(curve)))
    _write(out / "certificate.json", _jdump(_certificate_payload(cert)))
    _write(
        out / "diagnostics.json",
        _jdump(_diagnostics_payload(curve, bc, eps, args.c)),
    )
    _write(out / "curve.svg", _polyline_svg(reconstruct_positions(curve)))
    return 0 if cert.converged else 3


def _sweep_header(cs) -> list:
    head = ["eps", "E", "(E-l)/eps", "L", "(L-l)/eps", "inflections", "self_x"]
    for c in cs:
        head.append(f"straightness(c={c:g})")
    for c in cs:
        head.append(f"rescaled_dev(c={c:g})")
    return head


def cmd_sweep_eps(args) -> int:
    bc = _bc_from(args)
    out = Path(args.out)
    eps_list = list(args.eps)
    opts = _opts_from(args)

    def solve_one(eps):
        curve, cert = minimize_extensible(bc, eps, opts)
        return eps, curve, cert

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        results = list(pool.map(solve_one, eps_list))

    rows = []
    ok = True
    for eps, curve, cert in results:
        ok = ok and cert.converged
        row = [
            _fmt(eps),
            _fmt(cert.energy.e_eps),
            _fmt((cert.energy.e_eps - bc.l) / eps),
            _fmt(curve.length),
            _fmt((curve.length - bc.l) / eps),
            str(count_inflections(curve)),
            str(int(has_self_intersection(curve))),
        ]
        for c in args.c:
            row.append(_fmt(straightness_profile(curve, eps, c)))
        for c in args.c:
            row.append(_fmt(rescaled_deviation(curve, eps, bc.theta0, c)[0]))
        rows.append(row)
        stem = out / f"curve_eps_{_fmt(eps)}"
        _write(Path(f"{stem}.json"), _jdump(_curve_payload(curve)))
        _write(
            Path(f"{stem}.certificate.json"), _jdump(_certificate_payload(cert))
        )

    lines = [",".join(_sweep_header(args.c))] + [",".join(r) for r in rows]
    _write(out / "sweep.csv", "\n".join(lines) + "\n")
    _write(
        out / "sweep.svg",
        _series_svg(
            eps_list,
            {
                "(E-l)/eps": [float(r[2]) for r in rows],
                "(L-l)/eps": [float(r[4]) for r in rows],
            },
            "eps",
            "first-order ratios",
        ),
    )
    return 0 if ok else 3


def cmd_straighten(args) -> int:
    out = Path(args.out)
    rows = straightening_sweep(
        args.big_l,
        args.theta0,
        args.theta1,
        args.l_values,
        opts=SolveOptions(grid=args.grid, seed=args.seed),
    )
    header = "l,eps_tilde,L_minus_l_over_eps,energy,inflections,self_intersections"
    lines = [header]
    for r in rows:
        lines.append(
            ",".join(
                [
                    _fmt(r.l),
                    _fmt(r.eps_tilde),
                    _fmt(r.ratio),
                    _fmt(r.energy),
                    str(r.inflections),
                    str(int(r.self_intersections)),
                ]
            )
        )
    _write(out / "straighten.csv", "\n".join(lines) + "\n")
    _write(
        out / "straighten.svg",
        _series_svg(
            [r.l for r in rows],
            {"(L-l)/eps_tilde": [r.ratio for r in rows]},
            "l",
            "(L-l)/eps_tilde",
        ),
    )
    return 0


def cmd_diagnose(args) -> int:
    bc = _bc_from(args)
    eps = args.eps[0]
    out = Path(args.out)
    curve, cert = minimize_extensible(bc, eps, _opts_from(args))
    _write(out / "curve.json", _jdump(_curve_payload(curve)))
    _write(
        out / "diagnostics.json",
        _jdump(_diagnostics_payload(curve, bc, eps, args.c)),
    )
    return 0 if cert.converged else 3


def cmd_test_curve(args) -> int:
    bc = _bc_from(args)
    eps = args.eps[0]
    out = Path(args.out)
    curve = build_test_curve(bc, eps, n=args.grid)
    rep = energies(curve, eps)
    _write(out / "test_curve.json", _jdump(_curve_payload(curve)))
    _write(
        out / "test_curve.energy.json",
        _jdump(
            {
                "bending": rep.bending,
                "length": rep.length,
                "e_eps": rep.e_eps,
                "f_eps": rep.f_eps,
            }
        ),
    )
    _write(out / "test_curve.svg", _polyline_svg(reconstruct_positions(curve)))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastica-lab",
        description="straightened clamped elastic curves: solvers and sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps_required=True):
        p.add_argument("--l", type=float, default=1.0, help="endpoint distance")
        p.add_argument("--theta0", type=float, required=True)
        p.add_argument("--theta1", type=float, required=True)
        p.add_argument(
            "--eps", type=float, action="append", default=None, required=eps_required
        )
        p.add_argument("--grid", type=int, default=4096)
        p.add_argument("--c", type=float, action="append", default=None)
        p.add_argument("--out", default="elastica_out")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("solve", help="global minimizer at one eps")
    common(p)
    p.set_defaults(fn=cmd_solve, single_eps=True)

    p = sub.add_parser("sweep-eps", help="eps sweep with CSV/SVG outputs")
    common(p)
    p.set_defaults(fn=cmd_sweep_eps, single_eps=False)

    p = sub.add_parser("straighten", help="fixed-length straightening sweep")
    p.add_argument("--big-l", dest="big_l", type=float, required=True)
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--theta1", type=float, required=True)
    p.add_argument(
        "--l", dest="l_values", type=float, action="append", required=True
    )
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--out", default="elastica_out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_straighten, single_eps=False)

    p = sub.add_parser("diagnose", help="solve and report diagnostics only")
    common(p)
    p.set_defaults(fn=cmd_diagnose, single_eps=True)

    p = sub.add_parser("test-curve", help="explicit layer/arc/segment curve")
    common(p)
    p.set_defaults(fn=cmd_test_curve, single_eps=True)

    return parser


def _validate(args) -> str | None:
    if hasattr(args, "eps"):
        if not args.eps:
            return "at least one --eps is required"
        if any(not e > 0.0 for e in args.eps):
            return "--eps must be positive"
        if args.single_eps and len(args.eps) != 1:
            return "this command takes exactly one --eps"
    if hasattr(args, "l") and not args.l > 0.0:
        return "--l must be positive"
    for name in ("theta0", "theta1"):
        if abs(getattr(args, name)) > math.pi:
            return f"--{name} must lie in [-pi, pi]"
    if hasattr(args, "grid") and args.grid < 64:
        return "--grid must be at least 64"
    if hasattr(args, "big_l"):
        if any(not 0.0 < l < args.big_l for l in args.l_values):
            return "--l values must lie strictly between 0 and --big-l"
        if args.theta0 == 0.0 and args.theta1 == 0.0:
            return "theta0 = theta1 = 0 is the buckling case; not representable"
    if hasattr(args, "c") and args.c is not None and any(c <= 0 for c in args.c):
        return "--c must be positive"
    return None


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "c", None) is None:
        args.c = [5.0]
    problem = _validate(args)
    if problem is not None:
        print(f"error: {problem}", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
