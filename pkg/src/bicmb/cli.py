"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 model error (catastrophic code, unusable pattern, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import config as cfgmod
from .demux import code_rate
from .diversity import (DiversityReport, pep_mc_estimate, rate_region_csv, slope_estimate)
from .errors import BicmbError, ConfigInvalid, DesignUnverifiable, ModelError
from .pdf_oracle import appendix_table, verify_appendix
from .sim import Constellation, SimConfig, resolve_pattern, run_ber
from .spectrum import (exact_q_max, labeled_product_graph, q_max, transfer_polynomial,
                       transfer_series)
from .trellis import (CodeSpec, PunctureMatrix, build_encoder, check_reference_free_distance,
                      free_distance)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_MODEL = 0, 1, 2, 3
WORKERS_ENV = "BICMB_WORKERS"


def _code(doc: dict):
    code = doc["code"]
    try:
        spec = CodeSpec.from_octal(code["generators"], code.get("constraint_length"))
        puncture = PunctureMatrix.parse(code["puncture"]) if code.get("puncture") is not None else None
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(f"code: {exc}") from exc
    trellis = build_encoder(spec)
    check_reference_free_distance(trellis, puncture)
    return trellis, puncture


def _write(out_dir: Path | None, name: str, text: str):
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


def _header(resolved: dict) -> str:
    return "# config " + json.dumps(resolved, sort_keys=True) + "\n"


def cmd_spectrum(doc: dict, out: Path | None, workers: int) -> int:
    trellis, puncture = _code(doc)
    S = doc["S"]
    pattern = resolve_pattern(doc["pattern"], trellis, S, puncture, doc["seed"], doc["n"])
    dfree = free_distance(trellis, puncture)
    max_dH = doc["max_dH"] or dfree + 6
    graph = labeled_product_graph(trellis, pattern, puncture)
    spec = transfer_series(graph, max_dH)
    qt = q_max(spec)
    qx = exact_q_max(trellis, pattern, puncture)
    rate = code_rate(trellis, puncture)
    M, N = doc.get("M", S), doc.get("N", S)
    report = DiversityReport.build(M, N, S, rate, qx)
    lines = [f"code ({trellis.octal()}) rate {rate}, d_free {dfree}, S={S}, "
             f"pattern {list(pattern.assignment)}",
             f"dimension {graph.dimension}, truncation d_H <= {max_dH}"]
    if S <= 8 and graph.dimension <= 64:
        lines.append("T = " + transfer_polynomial(graph, max_dH).drop_input_weight().format())
    lines.append("alpha-vectors:")
    for t in spec.terms():
        lines.append(f"  d_H={t.d_H} [{' '.join(map(str, t.alpha))}] x{t.multiplicity} "
                     f"input weight {t.input_weight}")
    lines.append(f"Q_max (truncated spectrum) = {qt}; Q_max (exact, reachability) = {qx}")
    lines.append(f"Singleton floor ceil(S*R_c) = {report.singleton_floor}; "
                 f"diversity order at {M}x{N} = {report.order}")
    print("\n".join(lines))
    payload = {"config": doc, "pattern": list(pattern.assignment), "free_distance": dfree,
               "q_max_truncated": qt, "q_max_exact": qx, "report": report.as_dict(),
               "spectrum": json.loads(spec.to_json())}
    _write(out, "spectrum.json", json.dumps(payload, indent=1, sort_keys=True) + "\n")
    _write(out, "spectrum.txt", _header(doc) + spec.to_text())
    return EXIT_OK


def cmd_design(doc: dict, out: Path | None, workers: int) -> int:
    from .demux import design_demux

    trellis, puncture = _code(doc)
    S = doc["S"]
    rate = code_rate(trellis, puncture)
    try:
        pattern = design_demux(trellis, S, doc["n"], puncture, doc["seed"], doc["period_bits"])
    except DesignUnverifiable as exc:
        print(f"design failed verification: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    qx = exact_q_max(trellis, pattern, puncture)
    M, N = doc.get("M", S), doc.get("N", S)
    report = DiversityReport.build(M, N, S, rate, qx)
    print(f"designed pattern (period {pattern.period_bits}): {list(pattern.assignment)}")
    print(f"Q_max = {qx} (target ceil(S*R_c) = {report.singleton_floor}); "
          f"diversity order at {M}x{N} = {report.order}")
    payload = {"config": doc, "pattern": list(pattern.assignment), "q_max": qx,
               "report": report.as_dict()}
    _write(out, "design.json", json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return EXIT_OK if qx == report.singleton_floor else EXIT_VERIFY


def _sim_config(run: dict, seed: int) -> SimConfig:
    code = run["code"]
    return SimConfig(generators=code["generators"], constraint_length=code.get("constraint_length"),
                     puncture=code.get("puncture"), pattern=run["pattern"], M=run["M"], N=run["N"],
                     S=run["S"], m=run["m"], L=run["L"], snr_db=list(run["snr_db"]),
                     target_bit_errors=run["target_bit_errors"], max_packets=run["max_packets"],
                     min_packets=run["min_packets"], batch_packets=run["batch_packets"], seed=seed,
                     interleave=run["interleave"], chain=run["chain"])


def cmd_simulate_ber(doc: dict, out: Path | None, workers: int) -> int:
    summary = []
    for run in doc["runs"]:
        trellis, puncture = _code(run)
        cfg = _sim_config(run, doc["seed"])
        pattern = resolve_pattern(cfg.pattern, trellis, cfg.S, puncture, cfg.seed)
        qx = exact_q_max(trellis, pattern, puncture)
        predicted = DiversityReport.build(cfg.M, cfg.N, cfg.S, code_rate(trellis, puncture), qx).order
        curve = run_ber(cfg, workers)
        try:
            slope = slope_estimate(curve, tuple(run["slope_window"]))
        except BicmbError as exc:
            slope = None
            print(f"[{run['label']}] slope unavailable: {exc}", file=sys.stderr)
        print(f"[{run['label']}] Q_max={qx} predicted order {predicted}, measured slope "
              f"{'n/a' if slope is None else f'{slope:.2f}'}")
        for s, b, e in zip(curve.snr_db, curve.values, curve.bit_errors):
            print(f"  {s:6.2f} dB  BER {b:.3e}  ({int(e)} errors)")
        curve.meta = {"config": run, "seed": doc["seed"]}
        _write(out, f"ber_{run['label']}.csv", curve.to_csv())
        summary.append({"label": run["label"], "q_max": qx, "predicted_order": predicted,
                        "measured_slope": slope, "slope_window": run["slope_window"]})
    _write(out, "ber_slopes.json", json.dumps({"config": doc, "runs": summary}, indent=1,
                                              sort_keys=True) + "\n")
    return EXIT_OK


def cmd_simulate_pep(doc: dict, out: Path | None, workers: int) -> int:
    d_min = Constellation.qam(doc["m"]).d_min
    summary = []
    for i, alpha in enumerate(doc["alphas"]):
        curve = pep_mc_estimate(alpha, doc["M"], doc["N"], d_min, doc["snr_db"], doc["trials"],
                                doc["seed"] + i, doc["method"])
        nz = [k + 1 for k, a in enumerate(alpha) if a]
        q = nz[0] if nz else None
        predicted = (doc["M"] - q + 1) * (doc["N"] - q + 1) if q else None
        try:
            slope = slope_estimate(curve, tuple(doc["slope_window"]))
        except BicmbError as exc:
            slope = None
            print(f"alpha {alpha}: slope unavailable: {exc}", file=sys.stderr)
        print(f"alpha {alpha}: predicted exponent {predicted}, measured slope "
              f"{'n/a' if slope is None else f'{slope:.2f}'}")
        curve.meta["config"] = doc
        _write(out, f"pep_{i}.csv", curve.to_csv())
        summary.append({"alpha": alpha, "predicted_order": predicted, "measured_slope": slope})
    _write(out, "pep_slopes.json", json.dumps({"config": doc, "curves": summary}, indent=1,
                                              sort_keys=True) + "\n")
    return EXIT_OK


def cmd_diversity_table(doc: dict, out: Path | None, workers: int) -> int:
    rates = [Fraction(r) for r in doc["rates"]]
    text = rate_region_csv(doc["M"], doc["N"], rates)
    print(text, end="")
    _write(out, "diversity_table.csv", _header(doc) + text)
    return EXIT_OK


def cmd_verify_appendix(doc: dict, out: Path | None, workers: int) -> int:
    cases = verify_appendix(doc["M_max"], doc["N_max"], doc["formula_offset"])
    text = appendix_table(cases)
    print(text, end="")
    failed = sum(not c.passed for c in cases)
    print(f"{len(cases) - failed}/{len(cases)} cases pass")
    _write(out, "appendix.txt", _header(doc) + text)
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {
    "spectrum": cmd_spectrum,
    "design": cmd_design,
    "simulate-ber": cmd_simulate_ber,
    "simulate-pep": cmd_simulate_pep,
    "diversity-table": cmd_diversity_table,
    "verify-appendix": cmd_verify_appendix,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bicmb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment document")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${WORKERS_ENV} or 1)")
        p.add_argument("--out", default=None, help="directory for CSV/JSON artifacts")
        p.add_argument("--dry-run", action="store_true", help="print the resolved config and stop")
    return parser


def _workers(flag):
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigInvalid(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        workers = _workers(args.workers)
        doc = cfgmod.resolve(args.command, cfgmod.load_config(args.config), args.seed)
        if args.dry_run:
            print(json.dumps({"command": args.command, "workers": workers, "config": doc},
                             indent=1, sort_keys=True))
            return EXIT_OK
        out = Path(args.out) if args.out else None
        return COMMANDS[args.command](doc, out, workers)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_MODEL
    except BicmbError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
