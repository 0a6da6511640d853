"""Command-line interface: ``energame report|audit|sweep|shapley``.

Exit codes: 0 all guaranteed checks pass; 1 a guaranteed check failed;
2 usage or parse error; 3 a conjecture counterexample survived re-verification.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, precise
from .bounds import run_all_bounds
from .game import (
    EXACT_SHAPLEY_REPORT_N,
    FAIL,
    MAX_TABLE_N,
    SKIPPED,
    AuditResult,
    CoreCertificate,
    audit_convexity,
    audit_superadditivity,
    build_tables,
    check_core,
    check_imputation,
    core_inequalities,
    marginal_contribution_audit,
    null_and_symmetry_classify,
    shapley_exact,
    shapley_monte_carlo,
    skipped,
)
from .graph import (
    Graph,
    GraphFormatError,
    SizeCapError,
    GENERATORS,
    encode_graph6,
    from_generator_spec,
    mask_to_vertices,
    parse_edge_list,
    parse_graph6,
)
from .spectral import eig_symmetric, profile_from_spectrum
from .sweep import CHECKS, GRAPHS, THEOREM_CHECKS, TREES, run_sweep
from .tolerances import as_dict as tolerance_dict
from .tolerances import tol_core

log = logging.getLogger("energame")

EXIT_OK, EXIT_GUARANTEED_FAIL, EXIT_USAGE, EXIT_CONJECTURE = 0, 1, 2, 3
DEFAULT_P_GRID = (1.0, 1.5, 2.0, 3.0)
CORE_INEQUALITIES_MAX_N = 6
PRECISE_SHAPLEY_MAX_N = 10


class UsageError(Exception):
    pass


# -- input and serialization ------------------------------------------------

def load_graph(source: str) -> Graph:
    """Resolve a file path, generator spec (``path:6``) or graph6 string."""
    name = source.partition(":")[0]
    if ":" in source and name in GENERATORS:
        return from_generator_spec(source)
    p = Path(source)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
        first = next((ln.strip() for ln in text.splitlines() if ln.strip()), "")
        if first.lstrip("-").isdigit():
            return parse_edge_list(text)
        return parse_graph6(first)
    return parse_graph6(source)


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def envelope(command: str, digest_source: Any) -> dict:
    payload = json.dumps(jsonable(digest_source), sort_keys=True, separators=(",", ":"))
    return {
        "tool_version": __version__,
        "command": command,
        "input_digest": "sha256:" + hashlib.sha256(payload.encode()).hexdigest(),
        "tolerances": tolerance_dict(),
    }


def dump_json(doc: dict) -> str:
    return json.dumps(jsonable(doc), indent=2, sort_keys=False) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p grid {text!r}") from None
    if not grid:
        raise argparse.ArgumentTypeError("empty p grid")
    return grid


def _fmt(x: float, digits: int = 10) -> str:
    return f"{x:.{digits}g}"


def _vec(xs) -> str:
    return "(" + ", ".join(_fmt(float(x), 8) for x in xs) + ")"


def _cert_dict(cert: CoreCertificate) -> dict:
    return {
        "is_member": cert.is_member,
        "worst_slack": cert.worst_slack,
        "worst_coalition": mask_to_vertices(cert.worst_coalition),
        "efficiency_gap": cert.efficiency_gap,
    }


def _audit_dict(a: AuditResult) -> dict:
    pair = None if a.worst_pair is None else [mask_to_vertices(a.worst_pair[0]), mask_to_vertices(a.worst_pair[1])]
    first = None if a.first_violation is None else [mask_to_vertices(a.first_violation[0]),
                                                    mask_to_vertices(a.first_violation[1])]
    return {"name": a.name, "status": a.status, "worst_slack": a.worst_slack,
            "worst_pair": pair, "first_violation": first, "reason": a.reason}


# -- report -----------------------------------------------------------------

def build_report(g: Graph, p: float, p_grid: Sequence[float], samples: int, seed: int) -> dict:
    spec = eig_symmetric(g)
    grid = sorted(set(float(q) for q in p_grid) | {float(p)})
    profiles = {q: profile_from_spectrum(spec, q) for q in grid}
    doc: dict[str, Any] = {
        "graph6": encode_graph6(g),
        "n": g.n,
        "m": g.m,
        "degrees": list(g.degrees),
        "spectrum": spec.eigenvalues,
        "energy": float(np.abs(spec.eigenvalues).sum()),
        "vertex_energies": {str(q): profiles[q].per_vertex for q in grid},
        "p_energies": {str(q): profiles[q].total for q in grid},
        "game_p": float(p),
        "notices": [],
    }
    if g.n > MAX_TABLE_N:
        doc["notices"].append(f"n={g.n} exceeds the game cap n <= {MAX_TABLE_N}; spectral-only report")
        return doc
    table = build_tables(g, [p])[float(p)]
    if g.n <= EXACT_SHAPLEY_REPORT_N:
        phi = shapley_exact(table)
        doc["shapley"] = {"method": "exact", "values": phi}
    else:
        mc = shapley_monte_carlo(table, samples, seed)
        phi = mc.values
        doc["shapley"] = {"method": "monte-carlo", "samples": samples, "seed": seed,
                          "values": phi, "stderr": mc.stderr}
    e = profiles[float(p)].per_vertex
    doc["core"] = {"vertex_energy": _cert_dict(check_core(table, e)),
                   "shapley": _cert_dict(check_core(table, phi))}
    imp = check_imputation(table, e)
    doc["vertex_energy_is_imputation"] = imp.is_imputation
    classes = null_and_symmetry_classify(g)
    doc["null_players"] = [v for v, flag in enumerate(classes.null) if flag]
    doc["symmetry_classes"] = [list(c) for c in classes.symmetry_classes]
    if g.n <= CORE_INEQUALITIES_MAX_N:
        doc["core_inequalities"] = core_inequalities(table)
    return doc


def report_text(doc: dict) -> str:
    lines = [
        f"graph6 {doc['graph6']}  n={doc['n']}  m={doc['m']}",
        f"degrees {doc['degrees']}",
        f"spectrum {_vec(doc['spectrum'])}",
        f"energy {_fmt(doc['energy'])}",
    ]
    for q, vals in doc["vertex_energies"].items():
        lines.append(f"vertex energies p={q}: {_vec(vals)}  total {_fmt(doc['p_energies'][q])}")
    for notice in doc["notices"]:
        lines.append(f"notice: {notice}")
    if "shapley" in doc:
        sh = doc["shapley"]
        lines.append(f"shapley ({sh['method']}, p={doc['game_p']:g}): {_vec(sh['values'])}")
        if "stderr" in sh:
            lines.append(f"  stderr {_vec(sh['stderr'])}")
        for name, cert in doc["core"].items():
            lines.append(f"core[{name}]: member={cert['is_member']} worst_slack={_fmt(cert['worst_slack'])} "
                         f"at {cert['worst_coalition']} efficiency_gap={_fmt(cert['efficiency_gap'], 3)}")
        lines.append(f"null players {doc['null_players']}; symmetry classes {doc['symmetry_classes']}")
    if "core_inequalities" in doc:
        lines.append("core inequalities:")
        lines.extend("  " + ln for ln in doc["core_inequalities"])
    return "\n".join(lines) + "\n"


def report_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    grid = list(doc["vertex_energies"])
    header = ["vertex", "degree"] + [f"energy_p{q}" for q in grid]
    if "shapley" in doc:
        header.append("shapley")
    writer.writerow(header)
    for v in range(doc["n"]):
        row = [v, doc["degrees"][v]] + [repr(float(doc["vertex_energies"][q][v])) for q in grid]
        if "shapley" in doc:
            row.append(repr(float(doc["shapley"]["values"][v])))
        writer.writerow(row)
    return buf.getvalue()


def cmd_report(args) -> int:
    g = load_graph(args.input)
    grid = args.p_grid or list(DEFAULT_P_GRID)
    doc = build_report(g, args.p, grid, args.samples, args.seed)
    full = envelope("report", {"graph6": doc["graph6"], "p": args.p, "p_grid": grid,
                               "samples": args.samples, "seed": args.seed}) | doc
    renderer = {"json": dump_json, "text": report_text, "csv": report_csv}[args.format]
    emit(renderer(full), args.out)
    return EXIT_OK


# -- audit ------------------------------------------------------------------

def build_audit(g: Graph, p_grid: Sequence[float]) -> tuple[dict, int]:
    grid = [float(p) for p in p_grid]
    bounds = run_all_bounds(g, grid)
    tables = build_tables(g, grid)
    spec = eig_symmetric(g)
    games = []
    guaranteed_fail = any(r.status == FAIL for r in bounds)
    conjecture_fail = False
    for p in grid:
        t = tables[p]
        sup = audit_superadditivity(t)
        try:
            conv = audit_convexity(t)
        except SizeCapError as exc:
            conv = skipped("convexity", str(exc))
        e = profile_from_spectrum(spec, p).per_vertex
        phi = shapley_exact(t)
        ve_core = check_core(t, e)
        sh_core = check_core(t, phi)
        marg = marginal_contribution_audit(g, p)
        entry = {
            "p": p,
            "superadditivity": _audit_dict(sup),
            # convexity is only guaranteed for p = 2
            "convexity": _audit_dict(conv) | {"guaranteed": p == 2.0},
            "marginal_contribution": _audit_dict(marg),
            "vertex_energy": e,
            "shapley": phi,
            "core": {"vertex_energy": _cert_dict(ve_core), "shapley": _cert_dict(sh_core)},
        }
        if p == 2.0:
            gap = float(np.abs(phi - np.array(g.degrees)).max()) if g.n else 0.0
            entry["p2_shapley_equals_degree"] = {"max_abs_gap": gap, "holds": gap <= tol_core()}
            guaranteed_fail |= gap > tol_core()
            guaranteed_fail |= conv.status == FAIL
        guaranteed_fail |= sup.status == FAIL or marg.status == FAIL or not ve_core.is_member
        if not sh_core.is_member:
            entry["shapley_core_reverification"] = _reverify_shapley(g, p, sh_core)
            conjecture_fail |= entry["shapley_core_reverification"].get("survived", True)
        games.append(entry)
    classes = null_and_symmetry_classify(g)
    doc = {
        "graph6": encode_graph6(g),
        "n": g.n,
        "m": g.m,
        "bounds": [r.as_dict() for r in bounds],
        "skipped": [f"{r.bound_id.value} {r.params}: {r.reason}" for r in bounds if r.status == SKIPPED],
        "games": games,
        "null_players": [v for v, flag in enumerate(classes.null) if flag],
        "symmetry_classes": [list(c) for c in classes.symmetry_classes],
    }
    code = EXIT_GUARANTEED_FAIL if guaranteed_fail else EXIT_CONJECTURE if conjecture_fail else EXIT_OK
    doc["exit_code"] = code
    return doc, code


def _reverify_shapley(g: Graph, p: float, cert: CoreCertificate) -> dict:
    if g.n > PRECISE_SHAPLEY_MAX_N:
        return {"status": "skipped", "reason": f"extended-precision Shapley limited to n <= {PRECISE_SHAPLEY_MAX_N}"}
    full = (1 << g.n) - 1
    mask = cert.worst_coalition if -cert.efficiency_gap >= cert.worst_slack else full
    slack = cert.worst_slack if mask != full else -cert.efficiency_gap
    return precise.reverify_core(g, p, "shapley", mask, slack).as_dict()


def audit_text(doc: dict) -> str:
    lines = [f"audit graph6 {doc['graph6']}  n={doc['n']}  m={doc['m']}"]
    for r in doc["bounds"]:
        slack = "-" if r["slack"] is None else _fmt(r["slack"], 6)
        extra = f" ({r['reason']})" if r["reason"] else ""
        lines.append(f"  {r['status']:7s} {r['bound_id']:24s} {json.dumps(r['params'])} slack={slack}{extra}")
    for game in doc["games"]:
        p = game["p"]
        for key in ("superadditivity", "convexity", "marginal_contribution"):
            a = game[key]
            detail = ""
            if a["first_violation"]:
                detail = f" counterexample S={a['first_violation'][0]} T={a['first_violation'][1]}"
            lines.append(f"  {a['status']:7s} {key:24s} p={p:g} worst_slack={_fmt(a['worst_slack'] or 0.0, 6)}{detail}")
        for name, cert in game["core"].items():
            status = "pass" if cert["is_member"] else "fail"
            lines.append(f"  {status:7s} core[{name}] p={p:g} worst_slack={_fmt(cert['worst_slack'], 6)}")
        if "p2_shapley_equals_degree" in game:
            chk = game["p2_shapley_equals_degree"]
            lines.append(f"  {'pass' if chk['holds'] else 'fail':7s} p2-shapley-degree gap={_fmt(chk['max_abs_gap'], 3)}")
    lines.append(f"null players {doc['null_players']}; symmetry classes {doc['symmetry_classes']}")
    lines.append(f"exit code {doc['exit_code']}")
    return "\n".join(lines) + "\n"


def audit_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["graph6", "n", "m", "check_id", "status", "worst_slack", "params", "witness"])
    for r in doc["bounds"]:
        writer.writerow([doc["graph6"], doc["n"], doc["m"], r["bound_id"], r["status"],
                         "" if r["slack"] is None else repr(r["slack"]), json.dumps(r["params"]),
                         json.dumps(r["witness"])])
    for game in doc["games"]:
        for key in ("superadditivity", "convexity", "marginal_contribution"):
            a = game[key]
            writer.writerow([doc["graph6"], doc["n"], doc["m"], key, a["status"],
                             "" if a["worst_slack"] is None else repr(a["worst_slack"]),
                             json.dumps({"p": game["p"]}), json.dumps(a["worst_pair"])])
    return buf.getvalue()


def cmd_audit(args) -> int:
    g = load_graph(args.input)
    grid = args.p_grid or list(DEFAULT_P_GRID)
    doc, code = build_audit(g, grid)
    full = envelope("audit", {"graph6": doc["graph6"], "p_grid": grid}) | doc
    renderer = {"json": dump_json, "text": audit_text, "csv": audit_csv}[args.format]
    emit(renderer(full), args.out)
    return code


# -- sweep ------------------------------------------------------------------

def cmd_sweep(args) -> int:
    checks = args.checks or (["tree-extremal"] if args.graph_class == TREES else list(THEOREM_CHECKS))
    grid = args.p_grid or ([1.5, 3.0] if args.graph_class == TREES else [1.0, 2.0, 3.0])
    result = run_sweep(args.max_n, args.graph_class, checks, grid, jobs=args.jobs, min_n=args.min_n,
                       progress=lambda msg: log.info(msg))
    doc = envelope("sweep", result.scope) | result.as_dict()
    doc["exit_code"] = result.exit_code()
    if args.out:
        out = Path(args.out)
        out.write_text(dump_json(doc), encoding="utf-8")
        out.with_suffix(".csv").write_text(result.csv_text(), encoding="utf-8")
        log.info("wrote %s and %s", out, out.with_suffix(".csv"))
    if args.format == "csv":
        sys.stdout.write(result.csv_text())
    elif args.format == "json":
        if not args.out:
            sys.stdout.write(dump_json(doc))
    else:
        sys.stdout.write(sweep_text(doc))
    return result.exit_code()


def sweep_text(doc: dict) -> str:
    c = doc["counts"]
    lines = [
        f"sweep {doc['scope']['class']} n={doc['scope']['min_n']}..{doc['scope']['max_n']} "
        f"p={doc['scope']['p_grid']} checks={doc['scope']['checks']}" + ("  [PARTIAL]" if doc["partial"] else ""),
        f"graphs scanned {c['graphs_scanned']} {c['graphs_by_n']}; checks run {c['checks_run']}",
        f"violations flagged {c['violations_flagged']}, surviving re-verification {c['violations_surviving']}",
    ]
    for name, w in doc["worst_slack"].items():
        lines.append(f"  {doc['kinds'][name]:10s} {name:24s} worst_slack={_fmt(w['slack'], 6)} at {w['graph6']}")
    for e in doc["tree_extremal"]:
        if e.get("status") == "skipped":
            continue
        lines.append(f"  trees n={e['n']} p={e['p']:g}: min={e['minimizer']} (margin {_fmt(e['lower_margin'], 6)}), "
                     f"max={e['maximizer']} (margin {_fmt(e['upper_margin'], 6)}) {e['status']}")
    for v in doc["counterexamples"]:
        lines.append(f"  COUNTEREXAMPLE {v['check']} {v['graph6']} slack={v['slack']} {v['witness']}")
    if doc["scope"]["checks"] and any(doc["kinds"][k] == "evidence" for k in doc["kinds"]):
        lines.append("conjecture checks report evidence only, not proof")
    lines.append(f"exit code {doc['exit_code']}")
    return "\n".join(lines) + "\n"


# -- shapley ----------------------------------------------------------------

def cmd_shapley(args) -> int:
    g = load_graph(args.input)
    table = build_tables(g, [args.p])[float(args.p)]
    doc: dict[str, Any] = {"graph6": encode_graph6(g), "n": g.n, "p": args.p, "mode": args.mode}
    if args.mode == "exact":
        doc["values"] = shapley_exact(table)
    else:
        if args.samples == 0 and g.n > 8:
            raise UsageError("--samples 0 (exhaustive permutations) requires n <= 8")
        mc = shapley_monte_carlo(table, args.samples, args.seed)
        doc |= {"values": mc.values, "stderr": mc.stderr, "samples": mc.samples,
                "seed": args.seed, "exhaustive": mc.exhaustive}
    full = envelope("shapley", {k: doc[k] for k in ("graph6", "p", "mode")} | {
        "samples": args.samples, "seed": args.seed}) | doc
    if args.format == "json":
        text = dump_json(full)
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["vertex", "shapley"] + (["stderr"] if "stderr" in doc else []))
        for v in range(g.n):
            writer.writerow([v, repr(float(doc["values"][v]))] + ([repr(float(doc["stderr"][v]))] if "stderr" in doc else []))
        text = buf.getvalue()
    else:
        text = f"shapley p={args.p:g} {args.mode}: {_vec(doc['values'])}\n"
        if "stderr" in doc:
            text += f"stderr {_vec(doc['stderr'])}  samples={args.samples} seed={args.seed}\n"
    emit(text, args.out)
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="energame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True, single_p=False):
        p.add_argument("--format", choices=["json", "csv", "text"], default="text")
        p.add_argument("--out", help="write output to this file")
        if grid:
            p.add_argument("--p-grid", type=_parse_grid, help="comma-separated exponents, e.g. 1,1.5,2,3")
        if single_p:
            p.add_argument("--p", type=float, default=1.0, help="Schatten exponent of the game (>= 1)")

    rep = sub.add_parser("report", help="energies, Shapley value and core certificates for one graph")
    rep.add_argument("input", help="edge-list file, graph6 string, or generator spec like path:6")
    common(rep, single_p=True)
    rep.add_argument("--samples", type=int, default=20_000, help="Monte Carlo samples when n > 12")
    rep.add_argument("--seed", type=int, default=0)
    rep.set_defaults(func=cmd_report)

    aud = sub.add_parser("audit", help="evaluate every bound and game audit on one graph")
    aud.add_argument("input")
    common(aud)
    aud.set_defaults(func=cmd_audit)

    sw = sub.add_parser("sweep", help="exhaustive sweep over labeled graphs or trees")
    sw.add_argument("--max-n", type=int, required=True)
    sw.add_argument("--min-n", type=int, default=1)
    sw.add_argument("--class", dest="graph_class", choices=[GRAPHS, TREES], default=GRAPHS)
    sw.add_argument("--checks", type=lambda s: [c.strip() for c in s.split(",") if c.strip()],
                    help=f"comma-separated; available: {', '.join(CHECKS)}")
    sw.add_argument("--jobs", type=int, default=1)
    common(sw)
    sw.set_defaults(func=cmd_sweep)

    sh = sub.add_parser("shapley", help="Shapley value of the energy game")
    sh.add_argument("input")
    sh.add_argument("--mode", choices=["exact", "mc"], default="exact")
    sh.add_argument("--samples", type=int, default=100_000, help="0 = all permutations (n <= 8)")
    sh.add_argument("--seed", type=int, default=0)
    common(sh, grid=False, single_p=True)
    sh.set_defaults(func=cmd_shapley)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GraphFormatError, SizeCapError, UsageError, ValueError) as exc:
        print(f"energame {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
