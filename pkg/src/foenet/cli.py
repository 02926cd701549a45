"""``foenet`` command line: data generation, training, evaluation, comparison.

Exit codes: 0 success, 1 failed gradient check, 2 usage or configuration
error, 3 unreadable or malformed input/output files, 4 degenerate data,
5 incompatible checkpoint. ``FUSE_LOG`` (error, info or debug) sets the
log level on stderr and nothing else.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import comparison, data
from .data import SynthConfig, load_trials, make_datasets, save_trials, to_arrays
from .estimators import SYSTEMS, load_system
from .evaluation import DEFAULT_TARGET_FARS, compare_systems
from .exceptions import (
    BothSidesAbsent,
    CacheMismatch,
    DegenerateCalibration,
    DegenerateClasses,
    DegenerateValidation,
    DimensionMismatch,
    EmptyDataset,
    FoenetError,
    InsufficientSpeakers,
    SchemaError,
    TooFewTrials,
    VersionMismatch,
)
from .model import save_checkpoint
from .training import TrainConfig, grad_check_suite, train

logger = logging.getLogger("foenet")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_IO, EXIT_DATA, EXIT_CHECKPOINT = 0, 1, 2, 3, 4, 5
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
DEGENERATE = (BothSidesAbsent, DegenerateCalibration, DegenerateClasses, DegenerateValidation,
              EmptyDataset, InsufficientSpeakers, TooFewTrials)


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _read_trials(path):
    try:
        return load_trials(path)
    except FileNotFoundError:
        raise CommandError(EXIT_IO, f"trial file not found: {path}") from None
    except SchemaError as exc:
        raise CommandError(EXIT_IO, f"{path}: {exc}") from None


def _parse_fars(text):
    try:
        fars = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise CommandError(EXIT_USAGE, f"--target-fars must be comma-separated numbers, got {text!r}") from None
    if not fars or not all(0 < f < 1 for f in fars):
        raise CommandError(EXIT_USAGE, "--target-fars values must lie in (0, 1)")
    return fars


def _train_config(args):
    return TrainConfig(
        eta=args.lr, itr_max=args.epochs, k=args.batch, alpha=args.alpha,
        p_td_absent=args.mask_td, p_ti_absent=args.mask_ti, seed=args.seed,
        valid_scenario=args.valid_scenario,
    ).validate()


def _split_summary(trials):
    pos = sum(t.label for t in trials)
    return {"trials": len(trials), "positives": pos, "negatives": len(trials) - pos}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen_data(args):
    if args.config is None:
        cfg = SynthConfig().validate()
    else:
        try:
            cfg = SynthConfig.from_json(args.config)
        except FileNotFoundError:
            raise CommandError(EXIT_USAGE, f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise CommandError(EXIT_USAGE, f"{args.config}: invalid JSON ({exc.msg})") from None
        except TypeError as exc:
            raise CommandError(EXIT_USAGE, f"{args.config}: {exc}") from None

    train_set, valid_set, test_set = make_datasets(cfg, args.seed)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, trials in (("train", train_set), ("valid", valid_set), ("test", test_set)):
            path = out / f"{name}.jsonl"
            save_trials(path, trials)
            files[name] = dict(_split_summary(trials), file=path.name, sha256=_sha256(path))
        manifest = {"seed": args.seed, "config": cfg.to_dict(),
                    "config_sha256": cfg.digest(), "splits": files}
        _write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write to {out}: {exc}") from None
    for name, info in files.items():
        print(f"{name}: {info['trials']} trials ({info['positives']} target, "
              f"{info['negatives']} imposter)")
    return EXIT_OK


def cmd_train(args):
    cfg = _train_config(args)
    train_trials, valid_trials = _read_trials(args.train), _read_trials(args.valid)
    if not train_trials:
        raise EmptyDataset(f"{args.train} holds no trials")
    tr = to_arrays(train_trials)
    va = to_arrays(valid_trials, tr.td_dim, tr.ti_dim)
    params, report = train(tr, va, cfg)
    report_path = args.report or str(Path(args.out).with_suffix(".report.json"))
    try:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(params, args.out)
        _write_text(report_path, report.to_json() + "\n")
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write outputs: {exc}") from None
    for e in report.epochs:
        print(f"epoch {e['epoch']:3d}  loss {e['train_loss']:.5f}  valid EER {e['valid_eer']:.4f}")
    print(f"best epoch {report.best_epoch}  valid EER {report.best_eer:.4f}")
    return EXIT_OK


def _load_model(path):
    try:
        return load_system(path)
    except FileNotFoundError:
        raise CommandError(EXIT_IO, f"checkpoint not found: {path}") from None
    except (SchemaError, VersionMismatch, DimensionMismatch, KeyError, TypeError, ValueError) as exc:
        raise CommandError(EXIT_CHECKPOINT, f"{path}: incompatible checkpoint ({exc})") from None


def _write_report(report, path, csv_path):
    try:
        _write_text(path, report.to_json() + "\n")
        if csv_path:
            _write_text(csv_path, report.to_csv())
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write report: {exc}") from None


def cmd_eval(args):
    fars = _parse_fars(args.target_fars)
    est = _load_model(args.model)
    trials = _read_trials(args.test)
    if not trials:
        raise EmptyDataset(f"{args.test} holds no trials")
    td_dim = getattr(getattr(est, "params_", None), "td_dim", None)
    ti_dim = getattr(getattr(est, "params_", None), "ti_dim", None)
    try:
        test = to_arrays(trials, td_dim, ti_dim)
        if td_dim is not None and (test.td_dim, test.ti_dim) != (td_dim, ti_dim):
            raise DimensionMismatch(f"test dims ({test.td_dim}, {test.ti_dim}) vs model ({td_dim}, {ti_dim})")
        if est.td_dim is None:
            est.td_dim = test.td_dim
        scores = comparison.score_system(est, test)
    except (DimensionMismatch, CacheMismatch) as exc:
        raise CommandError(EXIT_CHECKPOINT, f"{args.model} does not fit {args.test}: {exc}") from None
    report = compare_systems({est.system: scores}, [], est.system, fars)
    _write_report(report, args.report, args.csv)
    for tag, res in report.systems[est.system].items():
        cells = "  ".join(f"FRR@{100 * f:g}%={res.frr_at_far[f]['frr']:.4f}" for f in fars)
        print(f"{tag}: EER={res.eer:.4f}  {cells}")
    return EXIT_OK


def cmd_compare(args):
    try:
        names = comparison.parse_systems(args.systems)
    except FoenetError as exc:
        raise CommandError(EXIT_USAGE, str(exc)) from None
    fars = _parse_fars(args.target_fars)
    cfg = _train_config(args)
    d = Path(args.data_dir)
    splits = [_read_trials(d / f"{name}.jsonl") for name in ("train", "valid", "test")]
    if not all(splits):
        raise EmptyDataset(f"{d}: train, valid and test files must all hold trials")
    report = comparison.run_comparison(names, *splits, seed=args.seed, target_fars=fars,
                                       train_cfg=cfg)
    _write_report(report, args.report, args.csv)
    sys.stdout.write(report.to_csv())
    return EXIT_OK


def cmd_gradcheck(args):
    reports = grad_check_suite(range(args.seed, args.seed + args.seeds), args.td_dim,
                               args.ti_dim, args.batch, args.h, args.tol)
    worst = max(r.max_rel_error for r in reports.values())
    failed = {s: r for s, r in reports.items() if not r.ok}
    for seed, r in failed.items():
        for name, idx, a, n, err in r.violations[:5]:
            print(f"seed {seed}: {name}{list(idx)} analytic {a:.6g} numeric {n:.6g} rel {err:.2e}")
    print(f"{len(reports)} seeds, {sum(r.n_checked for r in reports.values())} coordinates, "
          f"max relative error {worst:.2e}: {'FAIL' if failed else 'ok'}")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_train_flags(p):
    d = TrainConfig()
    p.add_argument("--epochs", type=int, default=d.itr_max)
    p.add_argument("--lr", type=float, default=d.eta)
    p.add_argument("--alpha", type=float, default=d.alpha, help="L2 weight on the weight matrices")
    p.add_argument("--batch", type=int, default=d.k)
    p.add_argument("--mask-td", type=float, default=d.p_td_absent,
                   help="probability of hiding the TD utterance during training")
    p.add_argument("--mask-ti", type=float, default=d.p_ti_absent,
                   help="probability of hiding the TI utterance during training")
    p.add_argument("--valid-scenario", choices=sorted(data.SCENARIOS), default=None,
                   help="evaluate validation trials under this availability pattern")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="foenet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate synthetic train/valid/test trial files")
    p.add_argument("--config", help="SynthConfig JSON (defaults when omitted)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train the fusion network")
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--report", help="training report path (default: <out>.report.json)")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    fars = ",".join(f"{f:g}" for f in DEFAULT_TARGET_FARS)
    p = sub.add_parser("eval", help="evaluate a saved system per scenario")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--target-fars", default=fars)
    p.add_argument("--report", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="fit several systems and tabulate FRR reductions")
    p.add_argument("--systems", default=",".join(SYSTEMS),
                   help=f"comma-separated subset of {','.join(SYSTEMS)}")
    p.add_argument("--data-dir", required=True, help="directory with train/valid/test.jsonl")
    p.add_argument("--target-fars", default=fars)
    p.add_argument("--report", required=True)
    p.add_argument("--csv")
    _add_train_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", help="finite-difference check of the training gradients")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--td-dim", type=int, default=8)
    p.add_argument("--ti-dim", type=int, default=8)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def configure_logging():
    name = os.environ.get("FUSE_LOG", "error").lower()
    level = LOG_LEVELS.get(name, logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)
    if name not in LOG_LEVELS:
        logger.error("ignoring FUSE_LOG=%r; expected one of %s", name, ", ".join(LOG_LEVELS))


def main(argv=None):
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        code, msg = exc.code, str(exc)
    except DEGENERATE as exc:
        code, msg = EXIT_DATA, str(exc)
    except (SchemaError, VersionMismatch) as exc:
        code, msg = EXIT_CHECKPOINT, str(exc)
    except FoenetError as exc:
        code, msg = EXIT_USAGE, str(exc)
    except OSError as exc:
        code, msg = EXIT_IO, str(exc)
    print(f"foenet {args.command}: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
