"""Command-line entry point for the churn pipeline."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src import __version__
from src.config import settings
from src.exceptions import ChurnError
from src.metrics import REFERENCE_MATRIX, REFERENCE_TABLE, scalar_metrics
from src.models import EvaluationSummary, ExperimentConfig, SweepSpec
from src.pipeline import PREDICTIONS_FILE, evaluate, predict, run_train, sweep, write_json
from src.synthetic import gen_synthetic

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=settings.log_format, stream=sys.stderr, force=True)


def _read_json(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ChurnError(f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ChurnError(f"{path} must hold a JSON object")
    return data


def load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    """ExperimentConfig from --config, with --data/--out/--seed/--threshold applied on top.

    Output directory, null tokens and threshold fall back to settings when
    neither the file nor a flag gives them.
    """
    data = _read_json(args.config)
    train = data.setdefault("train", {})
    if not isinstance(train, dict):
        raise ChurnError(f"{args.config}: \"train\" must be a JSON object")
    if args.data is not None:
        data["data_path"] = args.data
    data.setdefault("output_dir", settings.output_dir)
    data.setdefault("null_tokens", settings.null_tokens)
    if args.out is not None:
        data["output_dir"] = args.out
    if args.threshold is not None:
        train["classification_threshold"] = args.threshold
    train.setdefault("classification_threshold", settings.default_threshold)
    config = ExperimentConfig.model_validate(data)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def _print_summary(summary: EvaluationSummary) -> None:
    print(f"rows: {summary.n_rows}  threshold: {summary.threshold}  baseline accuracy: {summary.baseline_accuracy:.4f}")
    for label, report in (("churn positive", summary.churn_positive), ("non-churn positive", summary.non_churn_positive)):
        m = report.matrix
        print(
            f"{label:>18}: accuracy={report.accuracy:.4f} precision={report.precision:.4f} "
            f"recall={report.recall:.4f} f_measure={report.f_measure:.4f} auc={report.roc.auc:.4f} "
            f"(tp={m.tp} fp={m.fp} fn={m.fn} tn={m.tn})"
        )


def _print_reference() -> None:
    metrics = scalar_metrics(REFERENCE_MATRIX)
    m = REFERENCE_MATRIX
    print(f"published counts (non-churner positive): tp={m.tp} fp={m.fp} fn={m.fn} tn={m.tn}")
    for name in ("accuracy", "precision", "recall", "f_measure"):
        value = getattr(metrics, name) * 100
        print(f"{name:>10}: recomputed {value:.2f}%  published {REFERENCE_TABLE[name]}%")


def cmd_gen(args: argparse.Namespace) -> int:
    seed = settings.default_seed if args.seed is None else args.seed
    frame = gen_synthetic(args.rows, churn_rate=args.churn_rate, null_rate=args.null_rate, seed=seed, path=args.out)
    print(f"wrote {frame.n_rows} rows to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    result = run_train(load_experiment(args))
    _print_summary(result.report)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_experiment(args)
    spec = SweepSpec.model_validate(_read_json(args.grid))
    result = sweep(config, spec)
    print(f"trained {len(result.leaderboard)} models; winner is model {result.winner.index} {result.winner.hidden_sizes}")
    _print_summary(result.report)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    if args.reference:
        _print_reference()
        return 0
    if args.model is None or args.data is None:
        raise ChurnError("evaluate needs --model and --data (or --reference)")
    summary = evaluate(args.model, args.data, threshold=args.threshold)
    if args.out is not None:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_json(summary, path)
    _print_summary(summary)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    out = Path(args.out) if args.out is not None else Path(settings.output_dir) / PREDICTIONS_FILE
    predictions = predict(args.model, args.data, threshold=args.threshold, out=out)
    print(f"wrote {len(predictions)} predictions to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="churn", description="Customer churn prediction with a from-scratch MLP")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="write a synthetic customer CSV")
    gen.add_argument("--rows", type=int, default=5000)
    gen.add_argument("--churn-rate", type=float, default=0.03)
    gen.add_argument("--null-rate", type=float, default=0.05)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", required=True, help="CSV path to write")
    gen.set_defaults(handler=cmd_gen)

    for name, handler, help_text in (
        ("train", cmd_train, "train one model end to end"),
        ("sweep", cmd_sweep, "train a hyperparameter grid and keep the best model"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", help="ExperimentConfig JSON file")
        sub.add_argument("--data", help="training CSV (overrides data_path)")
        sub.add_argument("--out", help="output directory (overrides output_dir)")
        sub.add_argument("--seed", type=int, help="seed for init, split and training")
        sub.add_argument("--threshold", type=float, help="classification threshold")
        sub.set_defaults(handler=handler)
        if name == "sweep":
            sub.add_argument("--grid", help="SweepSpec JSON file")

    ev = commands.add_parser("evaluate", help="score a labeled CSV with a saved model")
    ev.add_argument("--model", help="model.json artifact")
    ev.add_argument("--data", help="labeled CSV")
    ev.add_argument("--threshold", type=float)
    ev.add_argument("--out", help="write the report JSON here")
    ev.add_argument("--reference", action="store_true", help="recompute metrics from the published counts")
    ev.set_defaults(handler=cmd_evaluate)

    pr = commands.add_parser("predict", help="write churn probabilities for a CSV")
    pr.add_argument("--model", required=True, help="model.json artifact")
    pr.add_argument("--data", required=True, help="CSV to score")
    pr.add_argument("--threshold", type=float)
    pr.add_argument("--out", help="predictions CSV path")
    pr.set_defaults(handler=cmd_predict)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (ChurnError, ValidationError, OSError) as e:
        message = " ".join(str(e).split())
        logger.debug("command failed", exc_info=True)
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
