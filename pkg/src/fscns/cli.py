"""Command-line entry point: ``fscns {fit,simulate,wdbc,lemma,enrichment}``.

Config files are flat ``key = value`` text; grid axes use dotted keys and
comma-separated values (``grid.k = 2, 3, 5``).  ``--set key=value`` overrides
a file entry.  Every command that writes a CSV also writes a JSON manifest
next to it.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from .dataio import read_dataset_csv
from .em import GENERAL, MODELS, EmConfig, Weights, fit_fsc_ns, fit_fsc_srs
from .errors import DataParseError, DegenerateFitError, FscError, InsufficientDataError
from .harness import SimConfig, lemma_demo, run_grid, write_csv, write_grid_csv, write_manifest
from .metrics import enrichment_ratio
from .mixture import ComponentParams, MixtureParams, RareEventParams
from .sampling import draw_ns_max, make_rng
from .wdbc import WdbcConfig, load_wdbc, run_wdbc

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_INSUFFICIENT = 4
EXIT_DEGENERATE = 5

log = logging.getLogger("fscns")


def parse_config_text(text):
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataParseError(f"expected 'key = value', got {raw.strip()!r}", line_no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DataParseError("empty key", line_no)
        out[key] = value
    return out


def _load_config(path, overrides):
    entries = {}
    if path:
        try:
            with open(path) as fh:
                entries = parse_config_text(fh.read())
        except OSError as exc:
            raise DataParseError(f"cannot read config {path}: {exc}") from None
    for item in overrides or []:
        if "=" not in item:
            raise DataParseError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise DataParseError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise DataParseError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in values)


def _scalar(entries, key, cast, default):
    if key not in entries:
        return default
    try:
        return cast(entries.pop(key))
    except ValueError:
        raise DataParseError(f"bad value for {key!r}") from None


def sim_config_from_entries(entries) -> SimConfig:
    entries = dict(entries)
    kwargs = {}
    for axis, cast in (("epsilon", _floats), ("delta", _floats), ("tau", _floats), ("k", _ints),
                       ("rho", _floats), ("w3", _floats), ("n3", _ints)):
        key = f"grid.{axis}"
        if key in entries:
            kwargs[axis] = cast(entries.pop(key))
    for key, cast in (("n1", int), ("n2", int), ("B", int), ("seed", int)):
        if key in entries:
            kwargs[key] = _scalar(entries, key, cast, None)
    if "methods" in entries:
        kwargs["methods"] = tuple(m.strip() for m in entries.pop("methods").split(",") if m.strip())
    if entries:
        raise DataParseError(f"unknown config keys: {sorted(entries)}")
    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        raise DataParseError(str(exc)) from None


def wdbc_config_from_entries(entries) -> WdbcConfig:
    entries = dict(entries)
    kwargs = {}
    if "grid.k" in entries:
        kwargs["ks"] = _ints(entries.pop("grid.k"))
    if "grid.w3" in entries:
        kwargs["w3s"] = _floats(entries.pop("grid.w3"))
    for key in ("n1", "n2", "n3", "B", "seed"):
        if key in entries:
            kwargs[key] = _scalar(entries, key, int, None)
    if "path" in entries:
        kwargs["path"] = entries.pop("path")
    if "methods" in entries:
        kwargs["methods"] = tuple(m.strip() for m in entries.pop("methods").split(",") if m.strip())
    if entries:
        raise DataParseError(f"unknown config keys: {sorted(entries)}")
    return WdbcConfig(**kwargs)


def _manifest_path(out):
    return out + ".manifest.json"


# ---------------------------------------------------------------------------
# commands


def cmd_fit(args):
    data = read_dataset_csv(args.data, args.k)
    if data.n1 + data.n2 + data.n3 < 2:
        raise InsufficientDataError("need at least two observations")
    w = Weights(*_floats(args.weights))
    config = EmConfig(tol=args.tol, max_iter=args.max_iter, threshold=args.threshold)
    fitter = fit_fsc_ns if args.mode == "ns" else fit_fsc_srs
    fit = fitter(data, w, config, model=args.model)
    if isinstance(fit.psi_hat, RareEventParams):
        est = {"epsilon": fit.psi_hat.epsilon, "delta": fit.psi_hat.delta, "tau": fit.psi_hat.tau}
    else:
        p = fit.psi_hat
        est = {"pi": p.pi, "mu1": p.comp1.mu, "sigma1": p.comp1.sigma,
               "mu2": p.comp2.mu, "sigma2": p.comp2.sigma}
    report = {
        "method": fit.method,
        "model": fit.model,
        "k": data.k,
        "weights": [w.w1, w.w2, w.w3],
        "seed": args.seed,
        "estimates": est,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "loglik_trace": [float(x) for x in fit.loglik_trace],
        "posteriors": {
            "z_tilde": [float(x) for x in fit.posteriors.z_tilde],
            "v_tilde": [float(x) for x in fit.posteriors.v_tilde],
        },
        "scores": [float(x) for x in fit.scores],
        "classifications": [int(c) for c in fit.classifications],
    }
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _progress(n, total):
    if n == total or n % max(1, total // 20) == 0:
        log.info("replicate %d / %d", n, total)


def cmd_simulate(args):
    config = sim_config_from_entries(_load_config(args.config, args.set))
    started = time.time()
    rows = run_grid(config, jobs=args.jobs, progress=_progress)
    finished = time.time()
    write_grid_csv(rows, args.out)
    aborts = {f"{r.method}|{r.scenario}": r.n_aborted for r in rows if r.n_aborted}
    write_manifest(_manifest_path(args.out), "simulate", config, config.seed, started, finished,
                   aborts, {"rows": len(rows), "argv": sys.argv[1:]})
    return EXIT_OK


def cmd_wdbc(args):
    entries = _load_config(args.config, args.set)
    config = wdbc_config_from_entries(entries)
    if args.data:
        config.path = args.data
    records = load_wdbc(config.path)
    started = time.time()
    rows = run_wdbc(config, records, jobs=args.jobs)
    finished = time.time()
    write_csv(rows, args.out)
    aborts = {f"{r['method']}|k={r['k']}|w3={r['w3']}": r["n_aborted"] for r in rows if r["n_aborted"]}
    write_manifest(_manifest_path(args.out), "wdbc", config, config.seed, started, finished,
                   aborts, {"rows": len(rows), "argv": sys.argv[1:]})
    return EXIT_OK


def cmd_lemma(args):
    psi0 = MixtureParams(args.pi, ComponentParams(args.mu1, args.sigma1),
                         ComponentParams(args.mu2, args.sigma2))
    started = time.time()
    res = lemma_demo(psi0, args.k, args.n, args.seed, surfaces=bool(args.surfaces))
    write_csv(res.records(), args.out)
    extra = {"argmax_correct": res.argmax_correct, "argmax_improper": res.argmax_improper}
    if args.surfaces:
        s = res.surfaces
        recs = [{"mu2": m, "sigma2": sg, "loglik_correct": s["correct"][i, j],
                 "loglik_improper": s["improper"][i, j]}
                for i, m in enumerate(s["mu_grid"]) for j, sg in enumerate(s["sigma_grid"])]
        write_csv(recs, args.surfaces)
        extra["surface_argmax_correct"] = s["argmax_correct"]
        extra["surface_argmax_improper"] = s["argmax_improper"]
    write_manifest(_manifest_path(args.out), "lemma", vars_clean(args), args.seed, started,
                   time.time(), None, extra)
    print(json.dumps(extra))
    return EXIT_OK


def vars_clean(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_enrichment(args):
    params = RareEventParams(args.epsilon, args.delta, args.tau)
    records = []
    for i, k in enumerate(_ints(args.k)):
        rec = {"k": k, "er": enrichment_ratio(params, k)}
        if args.mc:
            _, comp = draw_ns_max(params, k, make_rng(args.seed, i), size=args.mc)
            p = np.mean(comp == 2)
            rec["er_mc"] = p / args.epsilon
            rec["er_mc_se"] = np.sqrt(p * (1 - p) / args.mc) / args.epsilon
        records.append(rec)
    if args.out:
        write_csv(records, args.out)
    else:
        header = list(records[0])
        print(",".join(header))
        for rec in records:
            print(",".join("%.17g" % rec[h] if isinstance(rec[h], float) else str(rec[h]) for h in header))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fscns", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit FSC-NS or FSC-SRS to a dataset CSV")
    p.add_argument("--data", required=True, help="CSV with columns group,value[,truth]")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--weights", default="1,1,1", help="w1,w2,w3")
    p.add_argument("--model", choices=MODELS, default=GENERAL)
    p.add_argument("--mode", choices=("ns", "srs"), default="ns")
    p.add_argument("--seed", type=int, default=0, help="recorded in the report")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="Monte Carlo grid over rare-event scenarios")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("wdbc", help="imposed-NS experiment on the WDBC data")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--data", help="path to wdbc.data (default: $FSCNS_DATA_DIR/wdbc.data)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_wdbc)

    p = sub.add_parser("lemma", help="correct vs single-indicator objective curves")
    p.add_argument("--pi", type=float, default=0.40)
    p.add_argument("--mu1", type=float, default=0.0)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--mu2", type=float, default=3.5)
    p.add_argument("--sigma2", type=float, default=1.2)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seed", type=int, default=2025)
    p.add_argument("--out", required=True)
    p.add_argument("--surfaces", help="optional CSV for the (mu2, sigma2) surfaces")
    p.set_defaults(func=cmd_lemma)

    p = sub.add_parser("enrichment", help="enrichment ratio ER(k) of the rare class")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=4.0)
    p.add_argument("--tau", type=float, default=1.5)
    p.add_argument("--k", default="1,2,3,5,8")
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo sets per k for a cross-check")
    p.add_argument("--seed", type=int, default=2025)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enrichment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DataParseError as exc:
        print(f"fscns: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InsufficientDataError as exc:
        print(f"fscns: insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (DegenerateFitError, FscError) as exc:
        print(f"fscns: degenerate fit: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"fscns: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
