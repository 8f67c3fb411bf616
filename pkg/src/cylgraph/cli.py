"""Command-line entry point for truncated proximity-graph spectra.

Subcommands::

    cylgraph sweep    --config sweep.json [--out DIR]
    cylgraph audit    --config audit.json [--out DIR]
    cylgraph spectrum --model cylinder2:C=1,H=1 --eps 0.01 --rho 0.05 --t 0.2 --k 5
    cylgraph oracle   --model interval:L=1 --t 0.1 --k 3

Exit codes: 0 pass, 1 verdict fail, 2 configuration error, 3 solver error.
"""

import argparse
import logging
import os
import sys

from . import harness, io, oracle
from . import manifold as mf
from .errors import ConfigError, CylGraphError, DomainError, SolverError

log = logging.getLogger("cylgraph")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def _parse_model(text):
    try:
        return mf.parse_model(text)
    except (DomainError, ValueError) as exc:
        raise ConfigError(f"bad --model {text!r}: {exc}") from None


def cmd_sweep(args):
    cfg = harness.SweepConfig.load(args.config)
    out = args.out or cfg.out or "out"
    report = harness.run_sweep(cfg)
    verdict = harness.check_sandwich(report)
    harness.write_report(report, verdict, out)
    for lv in report.levels:
        status = "ok" if lv.ok else (lv.error or "failed")
        log.info("eps=%.6g rho=%.6g |X_t|=%d edges=%d %s", lv.eps, lv.rho, lv.xt_size, lv.edges, status)
    sys.stdout.write(verdict.text())
    if verdict.passed:
        return EXIT_PASS
    if any(lv.error.startswith("SolverError") for lv in report.levels):
        return EXIT_SOLVER
    return EXIT_FAIL


def cmd_audit(args):
    cfg = harness.AuditConfig.load(args.config)
    out = args.out or cfg.out or "out"
    records = harness.lemma_audit(cfg)
    os.makedirs(out, exist_ok=True)
    io.write_text(os.path.join(out, "lemmas.json"), harness.audit_to_json(cfg, records))
    failed = [r for r in records if not r.get("pass", False)]
    sys.stdout.write(f"{len(records) - len(failed)}/{len(records)} checks passed\n")
    for r in failed:
        sys.stdout.write(f"FAIL {r['lemma']}: {r.get('error', r.get('ratio'))}\n")
    return EXIT_PASS if not failed else EXIT_FAIL


def cmd_spectrum(args):
    m = _parse_model(args.model)
    failed = harness.hard_constraints(m, args.eps, args.rho, args.t)
    if failed:
        raise ConfigError("constraints violated: " + "; ".join(failed))
    p = harness.run_pipeline(
        m, args.eps, args.rho, args.t, args.k, solver=args.solver, tol=args.tol,
        max_iter=args.max_iter, seed=args.seed,
    )
    spec = p.spectrum
    if not spec.converged:
        raise SolverError("Lanczos did not converge", {"iterations": spec.iterations})
    params = {k: v for k, v in m.describe().items()}
    params.update(eps=args.eps, rho=args.rho, t=args.t, method=spec.method)
    sys.stdout.write(io.spectrum_to_csv(spec.eigenvalues, spec.residuals, params))
    if args.eigenvectors:
        io.write_text(args.eigenvectors, io.eigenvectors_to_text(spec.eigenvectors, p.laplacian.index))
    return EXIT_PASS


def cmd_oracle(args):
    m = _parse_model(args.model)
    try:
        spec = oracle.model_spectrum(m, args.t, args.k)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    params = {k: v for k, v in m.describe().items()}
    params.update(t=args.t, method="closed_form")
    sys.stdout.write(io.spectrum_to_csv(spec.values, None, params))
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(prog="cylgraph", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a convergence sweep and check the sandwich bound")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit", help="run the lemma checks and write lemmas.json")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("spectrum", help="single pipeline run; spectrum CSV on stdout")
    p.add_argument("--model", required=True, help="e.g. interval:L=1 or cylinder2:C=1,H=1")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--solver", choices=("auto", "dense", "lanczos"), default="auto")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eigenvectors", metavar="PATH", help="also write eigenvectors to PATH")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("oracle", help="closed-form Dirichlet spectrum CSV on stdout")
    p.add_argument("--model", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SolverError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except CylGraphError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
