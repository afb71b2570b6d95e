"""Command-line front end: spectra, kappa sweeps, critical loci, verification, raw ED."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bethe_two as bt
from .bethe_two import Kind, SpectrumRecord
from .chain_model import ChainParams, Variant, ed_spectrum
from .checks import SUITES, run_suite
from .elliptic_kernel import EllipticError
from .limits_bridge import Branch, CriticalQuery, FixKappa, FixL, NotCriticalError, critical_locus
from .magnon import dispersion

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
TWO_PI = 2 * math.pi

COLUMNS = [
    "L", "kappa", "I1", "I2", "Re_p1", "Im_p1", "Re_p2", "Im_p2",
    "p_tot", "E_n", "kind", "constraint_residual", "hw_residual",
]
DEFAULT_TOL = {"ed": 1e-8, "constraint": 1e-8, "hw": 1e-8, "crossing": 1e-9}
KIND_COLOR = {
    "Descendant": "#7f7f7f",
    "Scattering": "#1f77b4",
    "Bound": "#d62728",
    "Exceptional": "#2ca02c",
    "Magnon": "#9467bd",
    "Vacuum": "#000000",
}


class ValidationError(Exception):
    pass


class SolverFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are validation failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    command: str
    L: int | None = None
    kappa: float | None = None
    kappa_grid: list[float] | None = None
    sector: int = 2
    only: dict[str, str] = field(default_factory=dict)
    fmt: str = "csv"
    out: str | None = None
    tol: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOL))
    verify_ed: bool = False


def parse_grid(text: str) -> list[float]:
    """``start:stop:points`` (linear) or ``start:stop:pointslog``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("kappa grid must be start:stop:points[log]")
    log = parts[2].endswith("log")
    n = int(parts[2][:-3] if log else parts[2])
    a, b = float(parts[0]), float(parts[1])
    if n < 2:
        raise ValidationError("kappa grid needs at least 2 points")
    if not 0 < a < b:
        raise ValidationError("kappa grid must be positive and strictly increasing")
    g = np.geomspace(a, b, n) if log else np.linspace(a, b, n)
    return [float(x) for x in g]


def parse_pairs(text: str | None) -> dict[str, str]:
    out: dict[str, str] = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ValidationError(f"expected NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_tol(items: list[str] | None) -> dict[str, float]:
    tol = dict(DEFAULT_TOL)
    for item in items or []:
        for k, v in parse_pairs(item).items():
            if k not in tol:
                raise ValidationError(f"unknown tolerance {k!r}; known: {', '.join(tol)}")
            tol[k] = float(v)
    return tol


def workers() -> int:
    env = os.environ.get("INO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValidationError("INO_THREADS must be an integer") from exc
    return min(4, os.cpu_count() or 1)


def pool_map(fn, items: list, min_items: int = 2) -> list:
    """Order-preserving map over a bounded process pool."""
    n = min(workers(), len(items))
    if n <= 1 or len(items) < min_items:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- records


def _sector_task(args: tuple[int, float, int]) -> tuple[int, list[SpectrumRecord] | str]:
    L, k, J = args
    p = ChainParams(L, k)
    try:
        roots = [bt.descendant_root(J, p)] + bt.sector_roots(J, p)
        return J, [bt.record_for(r, p) for r in roots]
    except (bt.BetheError, EllipticError, ArithmeticError) as exc:
        return J, f"{type(exc).__name__}: {exc}"


def spectrum_records(L: int, kappa: float, sector: int = 2) -> list[SpectrumRecord]:
    p = ChainParams(L, kappa)
    if sector == 0:
        return [SpectrumRecord(L, p.kappa, 0, 0, 0j, 0j, 0.0, 0.0, Kind.VACUUM, {"constraint": 0.0, "hw": 0.0})]
    if sector == 1:
        out = []
        for I in range(L):
            q = TWO_PI * I / L
            e = float(dispersion(q, p))
            out.append(SpectrumRecord(L, p.kappa, 0, I, 0j, complex(q), q, e, Kind.MAGNON, {"constraint": 0.0, "hw": float(L) if I == 0 else 0.0}))
        return out
    if sector != 2:
        raise ValidationError("sector must be 0, 1 or 2")
    results = pool_map(_sector_task, [(L, kappa, J) for J in range(L)], min_items=12)
    recs: list[SpectrumRecord] = []
    errors = []
    for J, res in results:
        if isinstance(res, str):
            errors.append(f"L={L} kappa={kappa} I_tot={J}: {res}")
        else:
            recs.extend(res)
    if errors:
        raise SolverFailure("\n".join(errors))
    recs.sort(key=SpectrumRecord.sort_key)
    return recs


def attach_ed_gaps(recs: list[SpectrumRecord], sector: int) -> float:
    """Pair records with ED eigenvalues in energy order; returns the max relative gap."""
    if not recs:
        return 0.0
    p = ChainParams(recs[0].L, recs[0].kappa)
    ed = np.sort(ed_spectrum(p, sector)) if sector > 0 else np.array([0.0])
    order = np.argsort([r.energy for r in recs], kind="stable")
    worst = 0.0
    for i, j in enumerate(order):
        g = abs(recs[j].energy - ed[i]) / max(1.0, abs(ed[i]))
        recs[j].residuals["ed_gap"] = g
        worst = max(worst, g)
    return worst


def filter_records(recs: list[SpectrumRecord], only: dict[str, str]) -> list[SpectrumRecord]:
    def keep(r: SpectrumRecord) -> bool:
        for k, v in only.items():
            if k == "I1" and r.I1 != int(v):
                return False
            if k == "I2" and r.I2 != int(v):
                return False
            if k == "Itot" and (r.I1 + r.I2) % r.L != int(v) % r.L:
                return False
            if k == "kind" and Kind(r.kind).value.lower() != v.lower():
                return False
        return True

    bad = set(only) - {"I1", "I2", "Itot", "kind"}
    if bad:
        raise ValidationError(f"unknown --only keys: {', '.join(sorted(bad))}")
    return [r for r in recs if keep(r)]


def record_row(r: SpectrumRecord, with_ed: bool) -> dict:
    row = {
        "L": r.L,
        "kappa": r.kappa,
        "I1": r.I1,
        "I2": r.I2,
        "Re_p1": complex(r.p1).real,
        "Im_p1": complex(r.p1).imag,
        "Re_p2": complex(r.p2).real,
        "Im_p2": complex(r.p2).imag,
        "p_tot": r.p_tot,
        "E_n": r.energy,
        "kind": Kind(r.kind).value,
        "constraint_residual": r.residuals.get("constraint", 0.0),
        "hw_residual": r.residuals.get("hw", 0.0),
    }
    if with_ed:
        row["ed_gap"] = r.residuals.get("ed_gap", math.nan)
    return row


def row_record(row: dict) -> SpectrumRecord:
    res = {"constraint": float(row["constraint_residual"]), "hw": float(row["hw_residual"])}
    if "ed_gap" in row and row["ed_gap"] not in ("", None):
        res["ed_gap"] = float(row["ed_gap"])
    return SpectrumRecord(
        int(row["L"]),
        float(row["kappa"]),
        int(row["I1"]),
        int(row["I2"]),
        complex(float(row["Re_p1"]), float(row["Im_p1"])),
        complex(float(row["Re_p2"]), float(row["Im_p2"])),
        float(row["p_tot"]),
        float(row["E_n"]),
        Kind(row["kind"]),
        res,
    )


# ---------------------------------------------------------------- encoding


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.16e}"
    return str(v)


def encode_table(rows: list[dict], fmt: str, extra: dict | None = None) -> str:
    if fmt == "json":
        doc = {"rows": rows}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1, allow_nan=True) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def decode_records(text: str, fmt: str) -> list[SpectrumRecord]:
    if fmt == "json":
        rows = json.loads(text)["rows"]
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    return [row_record(r) for r in rows]


def emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# ---------------------------------------------------------------- svg


def svg_plot(series: list[dict], xlabel: str, ylabel: str, width: int = 720, height: int = 480) -> str:
    """Minimal standalone SVG: axes, polylines, markers, legend.

    Each series: {"x": [...], "y": [...], "color": str, "label": str}.
    """
    xs = [x for s in series for x in s["x"]]
    ys = [y for s in series for y in s["y"] if math.isfinite(y)]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    ml, mr, mt, mb = 70, 150, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def X(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def Y(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(6):
        xv = x0 + i * (x1 - x0) / 5
        yv = y0 + i * (y1 - y0) / 5
        out.append(f'<text x="{X(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{ml - 6}" y="{Y(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" transform="rotate(-90 16 {mt + ph / 2})" text-anchor="middle">{ylabel}</text>')
    seen = {}
    for s in series:
        pts = [(X(x), Y(y)) for x, y in zip(s["x"], s["y"]) if math.isfinite(y)]
        if len(pts) > 1:
            path = " ".join(f"{a:.1f},{b:.1f}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{s["color"]}" stroke-width="1.2"/>')
        for a, b in pts:
            out.append(f'<circle cx="{a:.1f}" cy="{b:.1f}" r="1.8" fill="{s["color"]}"/>')
        seen.setdefault(s["label"], s["color"])
    for i, (lab, col) in enumerate(seen.items()):
        y = mt + 14 + 18 * i
        out.append(f'<rect x="{ml + pw + 14}" y="{y - 9}" width="10" height="10" fill="{col}"/>')
        out.append(f'<text x="{ml + pw + 30}" y="{y}">{lab}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands


def _require(cfg: RunConfig, *names: str) -> None:
    for n in names:
        if getattr(cfg, n) is None:
            raise ValidationError(f"--{n.replace('_', '-')} is required for {cfg.command}")
    if cfg.kappa is not None and not cfg.kappa > 0:
        raise ValidationError("kappa must be positive")
    if cfg.L is not None and cfg.L < 2:
        raise ValidationError("length must be >= 2")


def cmd_spectrum(cfg: RunConfig) -> int:
    _require(cfg, "L", "kappa")
    recs = spectrum_records(cfg.L, cfg.kappa, cfg.sector)
    status = EXIT_OK
    if cfg.verify_ed:
        gap = attach_ed_gaps(recs, cfg.sector)
        if gap > cfg.tol["ed"]:
            print(f"ed_gap {gap:.3e} exceeds tolerance {cfg.tol['ed']:.1e}", file=sys.stderr)
            status = EXIT_VALIDATION
    scale = max(1.0, 1.0 / cfg.kappa)
    for r in recs:
        if Kind(r.kind) in (Kind.SCATTERING, Kind.BOUND, Kind.EXCEPTIONAL):
            if r.residuals["constraint"] > cfg.tol["constraint"] * scale or r.residuals["hw"] > cfg.tol["hw"]:
                print(f"I=({r.I1},{r.I2}): residuals {r.residuals}", file=sys.stderr)
                status = EXIT_VALIDATION
    recs = filter_records(recs, cfg.only)
    emit(encode_table([record_row(r, cfg.verify_ed) for r in recs], cfg.fmt), cfg.out)
    return status


def _sweep_task(args: tuple[int, float, int]) -> list[SpectrumRecord] | str:
    L, k, M = args
    try:
        return spectrum_records(L, k, M)
    except SolverFailure as exc:
        return str(exc)


def detect_crossings(grid: list[float], table: dict[tuple[int, int], list[float]], tol: float) -> list[dict]:
    """Sign changes of E_a - E_b between adjacent kappa samples."""
    keys = sorted(table)
    E = np.array([table[k] for k in keys])
    out = []
    for j in range(len(grid) - 1):
        a, b = E[:, j], E[:, j + 1]
        da = a[:, None] - a[None, :]
        db = b[:, None] - b[None, :]
        sa = np.maximum(1.0, np.abs(a))[:, None]
        sb = np.maximum(1.0, np.abs(b))[:, None]
        hit = (da * db < 0) & (np.abs(da) > tol * sa) & (np.abs(db) > tol * sb)
        for x, y in zip(*np.nonzero(np.triu(hit, 1))):
            out.append({"state_a": list(keys[x]), "state_b": list(keys[y]), "kappa_lo": grid[j], "kappa_hi": grid[j + 1]})
    return out


def cmd_sweep(cfg: RunConfig, svg_path: str | None = None) -> int:
    _require(cfg, "L", "kappa_grid")
    grid = cfg.kappa_grid
    results = pool_map(_sweep_task, [(cfg.L, k, cfg.sector) for k in grid])
    errs = [r for r in results if isinstance(r, str)]
    if errs:
        raise SolverFailure("\n".join(errs))
    rows = []
    table: dict[tuple[int, int], list[float]] = {}
    kinds: dict[tuple[int, int], str] = {}
    for j, recs in enumerate(results):
        for r in filter_records(recs, cfg.only):
            key = (r.I1, r.I2)
            table.setdefault(key, [math.nan] * len(grid))[j] = r.energy
            kinds[key] = Kind(r.kind).value
            rows.append(record_row(r, False))
    crossings = detect_crossings(grid, table, cfg.tol["crossing"])
    for c in crossings:
        print(
            f"crossing {tuple(c['state_a'])} x {tuple(c['state_b'])} in kappa [{c['kappa_lo']:.6g}, {c['kappa_hi']:.6g}]",
            file=sys.stderr,
        )
    emit(encode_table(rows, cfg.fmt, {"crossings": crossings}), cfg.out)
    if svg_path:
        series = [
            {"x": [math.log10(k) for k in grid], "y": table[key], "color": KIND_COLOR.get(kinds[key], "#333"), "label": kinds[key]}
            for key in sorted(table)
        ]
        emit(svg_plot(series, "log10 kappa", "E", ), svg_path)
    return EXIT_OK


def _crit_task(args) -> list:
    n, fixed, value = args
    row: list = [n, value]
    for br in (Branch.IMAG, Branch.REAL):
        if br is Branch.REAL and n % 2 == 0:
            row.append(None)
            continue
        fx = FixKappa(value) if fixed == "kappa" else FixL(value)
        try:
            row.append(critical_locus(CriticalQuery(n, br, fx)))
        except NotCriticalError:
            row.append(None)
    return row


def cmd_crit(cfg: RunConfig, ns: list[int]) -> int:
    if any(n < 2 for n in ns):
        raise ValidationError("n must be >= 2")
    if cfg.L is not None:
        if any(n > cfg.L / 2 for n in ns):
            raise ValidationError("at fixed length n must be <= L/2")
        tasks = [(n, "L", float(cfg.L)) for n in ns]
        head = ["n", "L", "kappa_cr_i", "kappa_cr_r"]
    else:
        ks = cfg.kappa_grid or ([cfg.kappa] if cfg.kappa is not None else None)
        if not ks:
            raise ValidationError("crit needs --kappa, --kappa-grid or --length")
        tasks = [(n, "kappa", k) for n in ns for k in ks]
        head = ["n", "kappa", "L_cr_i", "L_cr_r"]
    rows = [dict(zip(head, r)) for r in pool_map(_crit_task, tasks)]
    emit(encode_table(rows, cfg.fmt), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    names = SUITES if suite == "all" else (suite,)
    summary = {}
    failed = []
    for name in names:
        checks, secs = run_suite(name, cfg.L, cfg.kappa)
        summary[name] = {"seconds": secs, "checks": [c.as_dict() for c in checks]}
        failed += [f"{name}.{c.name}: {c.value:.3e} >= {c.limit:.1e}" for c in checks if not c.ok]
    summary["pass"] = not failed
    emit(json.dumps(summary, indent=1) + "\n", cfg.out)
    for f in failed:
        print(f"FAIL {f}", file=sys.stderr)
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_diag(cfg: RunConfig, variant: Variant) -> int:
    _require(cfg, "L", "kappa")
    ev = ed_spectrum(ChainParams(cfg.L, cfg.kappa), cfg.sector, variant)
    rows = [{"index": i, "E": float(e)} for i, e in enumerate(np.sort(ev))]
    emit(encode_table(rows, cfg.fmt), cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------- entry


def _variant(text: str) -> Variant:
    for v in Variant:
        if v.value.lower() == text.lower():
            return v
    raise argparse.ArgumentTypeError(f"unknown variant {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--length", type=int, help="number of sites L")
    common.add_argument("--kappa", type=float, help="interaction range parameter")
    common.add_argument("--kappa-grid", help="start:stop:points, or start:stop:pointslog")
    common.add_argument("--sector", type=int, default=2, choices=[0, 1, 2], help="magnon number M")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--only", help="row filter, e.g. I1=1,I2=2 or kind=Bound")
    common.add_argument("--verify-ed", action="store_true", help="add ED comparison column")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")

    ap = _Parser(prog="inozemtsev", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("spectrum", parents=[common], help="two-magnon spectrum from the Bethe ansatz")
    sw = sub.add_parser("sweep", parents=[common], help="spectrum along a kappa grid")
    sw.add_argument("--svg", help="write an energy vs log kappa plot")
    cr = sub.add_parser("crit", parents=[common], help="critical lengths or couplings")
    cr.add_argument("--n", required=True, help="comma-separated I_tot values")
    vf = sub.add_parser("verify", parents=[common], help="run invariant suites")
    vf.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    dg = sub.add_parser("diag", parents=[common], help="raw exact-diagonalisation eigenvalues")
    dg.add_argument(
        "--variant", type=_variant, default=Variant.ELLIPTIC, help=", ".join(v.value for v in Variant)
    )
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            L=args.length,
            kappa=args.kappa,
            kappa_grid=parse_grid(args.kappa_grid) if args.kappa_grid else None,
            sector=args.sector,
            only=parse_pairs(args.only),
            fmt=args.fmt,
            out=args.out,
            tol=parse_tol(args.tol),
            verify_ed=args.verify_ed,
        )
        if cfg.kappa is not None and not cfg.kappa > 0:
            raise ValidationError("kappa must be positive")
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.svg)
        if args.command == "crit":
            return cmd_crit(cfg, [int(x) for x in args.n.split(",")])
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        return cmd_diag(cfg, args.variant)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverFailure as exc:
        print(f"solver failure:\n{exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (bt.BetheError, EllipticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
