"""Command-line entry point: ``vqtrain <command> [options]``.

Exit status is 0 on success, 1 when a verification fails and 2 for
configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import experiments
from .ansatz import AnsatzKind
from .config import ConfigError, ExperimentKind, load_config
from .io import (
    HIST_COLUMNS,
    SAMPLE_COLUMNS,
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    hist_rows,
    trace_rows,
    write_csv,
    write_json,
)
from .linalg import target_from_name
from .trainer import train_layerwise

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("vqtrain")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--ansatz", choices=["hea", "checkerboard"])
    p.add_argument("--k", type=int, help="number of controls of the target (n = k + 1)")
    p.add_argument("--base", help="base gate of the controlled target: X, Y, Z or I")
    p.add_argument("--j", type=int, help="layers per stack")
    p.add_argument("--j-range", dest="j_range", help="e.g. 1..11")
    p.add_argument("--k-range", dest="k_range", help="e.g. 1..3")
    p.add_argument("--n-range", dest="n_range", help="e.g. 2..5")
    p.add_argument("--stacks", type=int, help="maximum number of stacks")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--init", choices=["RANDOM_UNIFORM", "IDENTITY_VARIETY"])
    p.add_argument("--samples", type=int)
    p.add_argument("--inject", type=int, help="append this many identity-variety points")
    p.add_argument("--points", type=int, help="variety points per branch")
    p.add_argument("--perturb", type=float)
    p.add_argument("--cases", type=int)
    p.add_argument("--h", type=float, help="finite-difference step")
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vqtrain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("compile", "layer-wise training of one ansatz against one target"),
        ("sweep", "critical-depth sweep over layers per stack"),
        ("sample", "distances of random single layers to identity and target"),
        ("verify-extrema", "check that identity layers are cost extrema"),
        ("gradcheck", "analytic vs finite-difference gradients"),
    ]:
        _common(sub.add_parser(name, help=help_))
    return parser


_OVERRIDE_KEYS = ["seed", "out", "ansatz", "k", "base", "j", "j_range", "k_range", "n_range",
                  "stacks", "restarts", "max_iter", "step_size", "init", "samples", "inject",
                  "points", "perturb", "cases", "h", "strict"]


def cmd_compile(cfg) -> int:
    layout, t = cfg.layout(), cfg.target()
    rec = train_layerwise(layout, cfg.j, t, cfg.schedule())
    write_json(cfg.out / "record.json", rec.to_dict())
    write_csv(cfg.out / "trace.csv", TRACE_COLUMNS, trace_rows(rec))
    print(f"{layout.kind.value} n={layout.n} j={cfg.j}: final cost {rec.final_cost:.6g} "
          f"after {rec.stacks_used} stacks ({rec.stop_reason})")
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    ks = cfg.k_range or [cfg.k]
    rows, results = experiments.sweep(cfg.ansatz, ks, cfg.j_range, cfg.schedule(),
                                      lambda k: target_from_name(cfg.base, k), cfg.wrap)
    write_csv(cfg.out / "sweep.csv", SWEEP_COLUMNS, rows)
    write_json(cfg.out / "sweep_records.json",
               {str(k): {str(j): r.to_dict() for j, r in cd.records.items()}
                for k, cd in results.items()})
    for k, cd in results.items():
        print(f"k={k}: critical layers per stack c = {cd.verdict}")
    return EXIT_OK


def cmd_sample(cfg) -> int:
    layout, t = cfg.layout(), cfg.target()
    d_id, d_t, hashes = experiments.sample_single_layer(layout, t, cfg.samples, cfg.seed,
                                                        cfg.inject)
    write_csv(cfg.out / "samples.csv", SAMPLE_COLUMNS,
              ((i, a, b, h) for i, (a, b, h) in enumerate(zip(d_id, d_t, hashes))))
    write_csv(cfg.out / "hist.csv", HIST_COLUMNS, hist_rows(experiments.sample_histogram(d_id, d_t)))
    print(f"{len(d_t)} samples: min d_to_target {np.min(d_t):.12g}, "
          f"min d_to_identity {np.min(d_id):.12g}")
    return EXIT_OK


def cmd_verify_extrema(cfg) -> int:
    n_values = cfg.n_range or [cfg.n]
    summary = experiments.verify_extrema_batch(
        cfg.ansatz, n_values, cfg.points, cfg.seed,
        lambda k: target_from_name(cfg.base, k), cfg.perturb)
    write_json(cfg.out / "extrema.json", summary)
    print(f"confirmed {summary['confirmed']}, violations {summary['violation']}, "
          f"max |grad| {summary['max_grad']:.3e}")
    return EXIT_OK if summary["violation"] == 0 else EXIT_FAIL


def cmd_gradcheck(cfg) -> int:
    n_values = cfg.n_range or [2, 3, 4]
    rep = experiments.gradcheck(cfg.cases, cfg.seed, cfg.h, cfg.tol, n_values, bool(cfg.strict))
    write_json(cfg.out / "gradcheck.json", rep)
    print(f"max relative error {rep['max_rel_err']:.3e} over {rep['cases']} cases "
          f"({'pass' if rep['passed'] else 'FAIL'})")
    return EXIT_OK if rep["passed"] else EXIT_FAIL


COMMANDS = {
    ExperimentKind.COMPILE: cmd_compile,
    ExperimentKind.SWEEP: cmd_sweep,
    ExperimentKind.SAMPLE: cmd_sample,
    ExperimentKind.VERIFY_EXTREMA: cmd_verify_extrema,
    ExperimentKind.GRADCHECK: cmd_gradcheck,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in _OVERRIDE_KEYS}
    overrides["experiment"] = args.command
    try:
        cfg = load_config(args.config, overrides).validate()
        if args.command == "verify-extrema" and cfg.ansatz is AnsatzKind.CHECKERBOARD \
                and any(n < 2 for n in (cfg.n_range or [cfg.n])):
            raise ConfigError("checkerboard needs n >= 2")
    except ConfigError as exc:
        print(f"vqtrain: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[cfg.experiment](cfg)


if __name__ == "__main__":
    sys.exit(main())
