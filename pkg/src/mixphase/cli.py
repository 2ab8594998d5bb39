"""Command line entry point: ``run``, ``sweep`` and ``selftest``.

Exit codes: 0 success, 1 invariant check failed, 2 parse error,
3 validation error, 4 numerical failure (undefined phase, degenerate
spectrum).
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import oracle, transport
from .errors import (DegenerateSpectrum, MixPhaseError, ScenarioError, UndefinedPhase,
                     ValidationError)
from .oracle import MAX_LIFT_DIM
from .phases import (decomposition_geometric_phase, decomposition_relative_phase,
                     kraus_completeness_residual, mixed_geometric_phase,
                     per_kraus_geometric_phase, phase_distance, recombine, visibility)
from .scenario import build, load
from .states import mix

EXIT_CHECK, EXIT_NUMERIC = 1, 4
GAUGE_SAMPLES = 20


def bundled_scenarios():
    root = resources.files("mixphase") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def resolve(name: str) -> Path:
    """A path on disk, else a bundled scenario matched by file name."""
    p = Path(name)
    if p.exists():
        return p
    stem = p.name if p.name.endswith(".json") else p.name + ".json"
    if stem in bundled_scenarios():
        return Path(str(resources.files("mixphase") / "scenarios" / stem))
    return p


def _fmt(x) -> str:
    return f"{x:.12g}"


def _phase_str(res) -> str:
    return f"{res.phase:+.12f} rad (|amplitude| = {res.magnitude:.6g})"


def _commuting(d) -> bool:
    mats = [c.matrix for c in d.components]
    return all(np.abs(a @ b - b @ a).max() < 1e-10 for a in mats for b in mats)


def _same_components(d) -> bool:
    ref = d.components[0].matrix
    return all(np.abs(c.matrix - ref).max() < 1e-12 for c in d.components)


def _shared_path(dp) -> bool:
    first = dp.component_paths[0]
    return all(p is first or np.array_equal(p.unitaries, first.unitaries)
               for p in dp.component_paths)


def analyze(sc, out):
    """Write the report for a scenario; return True when every check passed."""
    d, dp, tol = sc.decomposition, sc.path, sc.tolerances
    ok = True

    def check(name, passed, detail):
        nonlocal ok
        ok &= passed
        out(f"check {name}: {detail}  {'PASS' if passed else 'FAIL'}")

    out(f"scenario: {sc.name}")
    out(f"system_dim {d.dim}, components {d.M}, intervals {dp.component_paths[0].intervals}, "
        f"tau {_fmt(dp.times[-1])}, steps/unit time {sc.steps_per_unit_time}")
    gamma = decomposition_relative_phase(dp)
    gamma_d = decomposition_geometric_phase(dp)
    out(f"relative phase   Gamma    = {_phase_str(gamma)}")
    out(f"geometric phase  Gamma[D] = {_phase_str(gamma_d)}")
    for k, ((lam, rho), p) in enumerate(zip(d, dp.component_paths), 1):
        r_k = visibility(rho, p)
        try:
            g = f"{per_kraus_geometric_phase(rho, p).phase:+.12f}"
        except UndefinedPhase:
            g = "UNDEFINED"
        out(f"component {k}: weight {_fmt(lam)}, gamma_g = {g}, r = {r_k:.12f}")

    res = transport.transport_residuals(dp)
    out("transport residuals max_t |<k_l|U_k^+ dU_k/dt|k_l>| (rows k, columns l):")
    for k, row in enumerate(res, 1):
        out(f"  k={k}: " + " ".join(f"{v:.6e}" for v in row))

    if "transport" in sc.checks:
        par = transport.parallelize(dp)
        worst = float(transport.transport_residuals(par).max())
        diff = phase_distance(decomposition_geometric_phase(par).phase,
                              decomposition_relative_phase(par).phase)
        check("transport", worst <= tol["transport"] and diff <= tol["phase"],
              f"after parallelize residual {worst:.2e} <= {tol['transport']:g}, "
              f"|Gamma[D] - Gamma| {diff:.2e} <= {tol['phase']:g}")
    if "gauge" in sc.checks:
        rng = np.random.default_rng(sc.seed)
        worst = 0.0
        for _ in range(GAUGE_SAMPLES):
            prof = transport.random_phase_profiles(d.M, d.dim, dp.times, rng)
            g = transport.admissible_gauge(d, dp.times, prof)
            worst = max(worst, phase_distance(
                gamma_d.phase, decomposition_geometric_phase(transport.apply_gauge(dp, g)).phase))
        check("gauge", worst <= tol["phase"],
              f"{GAUGE_SAMPLES} admissible gauges, max |dGamma[D]| {worst:.2e} <= {tol['phase']:g}")
    if "oracle" in sc.checks:
        rel = phase_distance(gamma.phase, oracle.enlarged_relative_phase(d, dp).phase)
        check("oracle relative", rel <= tol["trace"],
              f"|Gamma - arg Tr(rho_sa U_sa)| {rel:.2e} <= {tol['trace']:g}")
        if (d.dim * d.M) ** 2 <= MAX_LIFT_DIM:
            hol = phase_distance(gamma_d.phase, oracle.enlarged_geometric_phase(dp).phase)
            check("oracle holonomy", hol <= tol["phase"],
                  f"|Gamma[D] - lifted holonomy| {hol:.2e} <= {tol['phase']:g}")
        else:
            out(f"check oracle holonomy: lifted dimension above {MAX_LIFT_DIM}  SKIPPED")
    if "common_basis" in sc.checks:
        if not _shared_path(dp):
            out("check common_basis: component paths differ  SKIPPED")
        else:
            try:
                gc = mixed_geometric_phase(mix(d), dp.component_paths[0]).phase
            except DegenerateSpectrum:
                out("check common_basis: mixture is degenerate  SKIPPED")
            else:
                diff = phase_distance(gamma_d.phase, gc)
                flag = "EQUAL" if diff <= tol["phase"] else "DIFFERENT"
                line = f"Gamma[D] = gamma[C]: {flag} (gamma[C] = {gc:+.12f}, diff {diff:.2e})"
                if _commuting(d):
                    check("common_basis", flag == "EQUAL", line)
                else:
                    out(f"check common_basis: {line}  INFO (eigenbases do not commute)")
    if "recombination" in sc.checks:
        if not _same_components(d):
            out("check recombination: components differ (not a Kraus evolution)  SKIPPED")
        else:
            rho0 = d.components[0]
            r = [visibility(rho0, p) for p in dp.component_paths]
            g = []
            for p in dp.component_paths:
                try:
                    g.append(per_kraus_geometric_phase(rho0, p).phase)
                except UndefinedPhase:
                    g.append(0.0)
            diff = phase_distance(gamma_d.phase, recombine(d.weights, r, g).phase)
            check("recombination", diff <= tol["phase"],
                  f"|Gamma[D] - arg sum lambda r e^(i gamma)| {diff:.2e} <= {tol['phase']:g}")
            comp = kraus_completeness_residual(d.weights, dp.component_paths)
            check("kraus completeness", comp <= 1e-8, f"residual {comp:.2e} <= 1e-08")
    out(f"result: {'PASS' if ok else 'FAIL'}")
    return ok


def _emit(text: str, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _run_one(job):
    """(report, exit code, error message) for one scenario file."""
    name, steps, seed, tol_phase = job
    lines = []
    try:
        sc = build(load(resolve(name)), steps_per_unit_time=steps, seed=seed,
                   tol_phase=tol_phase)
        ok = analyze(sc, lines.append)
    except ScenarioError as exc:
        return "", exc.exit_code, f"error: {exc}"
    except (UndefinedPhase, DegenerateSpectrum) as exc:
        lines.append(f"numerical failure: {exc}")
        return "\n".join(lines) + "\n", EXIT_NUMERIC, f"numerical failure: {exc}"
    return "\n".join(lines) + "\n", 0 if ok else EXIT_CHECK, ""


def cmd_run(args) -> int:
    jobs = [(f, args.steps, args.seed, args.tol_phase) for f in args.files]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    for _, _, err in results:
        if err:
            print(err, file=sys.stderr)
    _emit("\n".join(text for text, _, _ in results if text), args.output)
    return max(code for _, code, _ in results)


def _sweep_row(job):
    raw, param, value, steps, seed = job
    sc = build(raw, overrides={param: value}, steps_per_unit_time=steps, seed=seed)
    d, dp = sc.decomposition, sc.path
    row = {"value": value, "status": "OK"}
    for key, fn in (("gamma", decomposition_relative_phase),
                    ("gamma_d", decomposition_geometric_phase)):
        try:
            res = fn(dp)
            row[key], row[key + "_mag"] = res.phase, res.magnitude
        except UndefinedPhase as exc:
            row[key], row[key + "_mag"] = np.nan, exc.result.magnitude
            row["status"] = "UNDEFINED"
        except DegenerateSpectrum:
            row[key], row[key + "_mag"] = np.nan, np.nan
            row["status"] = "DEGENERATE"
    vis = []
    for rho, p in zip(d.components, dp.component_paths):
        try:
            vis.append(visibility(rho, p))
        except DegenerateSpectrum:
            vis.append(np.nan)
            row["status"] = "DEGENERATE"
    row["r"] = vis
    return row


def _unwrap(values):
    v = np.array(values, dtype=float)
    ok = np.isfinite(v)
    v[ok] = np.unwrap(v[ok])
    return v


def sweep_rows(raw, param, start, stop, samples, steps=None, seed=None, workers=1):
    if samples < 1:
        raise ValidationError("--samples must be at least 1")
    values = [float(start)] if start == stop or samples == 1 else \
        np.linspace(start, stop, samples).tolist()
    # Validate every sample before computing, so failures leave no partial table.
    for v in values:
        build(raw, overrides={param: v}, steps_per_unit_time=steps, seed=seed)
    jobs = [(raw, param, v, steps, seed) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_sweep_row, jobs))
    return [_sweep_row(j) for j in jobs]


def format_table(rows, param, unwrap=False) -> str:
    M = len(rows[0]["r"])
    header = [param, "gamma", "gamma_d", "gamma_mag", "gamma_d_mag"] + \
        [f"r_{k}" for k in range(1, M + 1)] + ["status"]
    g = [r["gamma"] for r in rows]
    gd = [r["gamma_d"] for r in rows]
    if unwrap:
        g, gd = _unwrap(g), _unwrap(gd)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r, a, b in zip(rows, g, gd):
        w.writerow([_fmt(r["value"]), _fmt(a), _fmt(b), _fmt(r["gamma_mag"]),
                    _fmt(r["gamma_d_mag"])] + [_fmt(x) for x in r["r"]] + [r["status"]])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    raw = load(resolve(args.file))
    rows = sweep_rows(raw, args.param, args.start, args.stop, args.samples,
                      steps=args.steps, seed=args.seed, workers=args.workers)
    _emit(format_table(rows, args.param, unwrap=args.unwrap), args.output)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    lines = []

    def out(line):
        lines.append(line)
        if not args.output:
            print(line, flush=True)

    ok = run_all(out, witness_path=args.witness)
    if args.output:
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0 if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mixphase",
        description="Geometric and relative phases of decomposition-dependent evolutions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--steps", type=int, default=None,
                       help="steps per unit time (overrides the scenario)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--output", default=None, help="write to this file instead of stdout")

    p = sub.add_parser("run", help="evaluate scenarios and their checks")
    p.add_argument("files", nargs="+", metavar="file",
                   help=f"scenario path or bundled name ({', '.join(bundled_scenarios())})")
    p.add_argument("--tol-phase", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="tabulate phases over one scenario parameter")
    p.add_argument("file")
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--unwrap", action="store_true", help="unwrap phase columns across rows")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="run the invariant suite on generated instances")
    p.add_argument("--output", default=None)
    p.add_argument("--witness", default=None, help="where to store the non-commuting witness")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (UndefinedPhase, DegenerateSpectrum) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MixPhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
