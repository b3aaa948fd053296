"""
Command-line entry point: python cli.py <command> [flags].

Commands: gen, encode, decode, eval, analyze, train, infer, presets, ci, gradcheck.
Every command that writes an artefact also writes <stem>.config.json holding
the fully resolved arguments, defaults and the effective seed included; passing
that file back with --config re-runs the command, with explicit flags taking
precedence over the file. Next to the artefact goes <stem>.result.json, the
machine-readable twin of what the command prints; --json prints that JSON
instead of the text.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from config import settings
from engines.bignum import from_decimal_string
from engines.errors import MalformedSequence, OrthographyError, ParseError
from engines.orthography import Order, OrthographySpec, Scheme, decode, encode, parse_scheme
from engines.tokens import TokenSequence
from library.evaluator import (
    EvaluationError,
    analyze_position_skips,
    confidence_interval,
    evaluate,
    render_table,
    write_per_length_csv,
)
from library.presets import PRESETS, get_preset
from library.sampling import derive_seed
from library.taskgen import (
    DatasetFormatError,
    Operation,
    SamplingConfig,
    SamplingMethod,
    dataset_digest,
    generate_dataset,
    parse_records,
    read_dataset,
    read_predictions,
    records_to_jsonl,
    split_examples,
    write_dataset,
    write_predictions,
)
from microformer.errors import ModelConfigError, TrainingDiverged, VocabularyError

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_MISSING_FILE = 4
EXIT_DATA = 5
EXIT_DIVERGED = 6

SCHEME_CHOICES = [s.value for s in Scheme] + ["character", "fixed", "10", "10e"]

# Values used when neither the command line nor a --config file gives one;
# the seed default is read from settings at lookup time
DEFAULTS: dict[str, Any] = {
    "order": Order.REGULAR.value,
    "base": 10,
    "count": 1000,
    "min_digits": 2,
    "method": SamplingMethod.BALANCED.value,
    "operation": Operation.PLUS.value,
    "batch_size": 8,
    "samples": 240,
    "step": 1e-5,
}

# Keys that only steer the current invocation and are never echoed
_TRANSIENT = {"command", "config", "json", "verbose", "quiet", "handler"}


class RunConfig(BaseModel):
    command: str
    args: dict[str, Any]


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


# ---------- argument helpers ----------

def _opt(args: dict, key: str):
    """Value of key; a default is written back into args so the config echo records it."""
    if key not in args:
        value = settings.DEFAULT_SEED if key == "seed" else DEFAULTS.get(key)
        if value is None:
            return None
        args[key] = value
    return args[key]


def _require(args: dict, key: str, flag: str):
    value = _opt(args, key)
    if value is None:
        raise CommandError(f"{flag} is required", EXIT_USAGE)
    return value


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return p


def _orthography(args: dict, fallback: OrthographySpec | None = None, width: int | None = None) -> OrthographySpec:
    """Orthography from flags, falling back field by field to a preset or manifest."""
    fields = fallback.model_dump(mode="json") if fallback is not None else {}
    for key, field in (("scheme", "scheme"), ("order", "order"), ("base", "base"), ("width", "max_digits")):
        if key in args:
            fields[field] = args[key]
    if "scheme" not in fields:
        raise CommandError("--scheme is required", EXIT_USAGE)
    fields.setdefault("order", DEFAULTS["order"])
    if fields.get("max_digits") is None and width is not None and parse_scheme(fields["scheme"]) == Scheme.FIXED_CHARACTER:
        fields["max_digits"] = width
    return OrthographySpec.model_validate(fields)


def _sampling_overrides(args: dict) -> dict:
    keys = ("method", "max_digits", "min_digits", "count", "operation", "require_digits_above")
    return {k: args[k] for k in keys if k in args}


def _write_echo(command: str, args: dict, artefact: Path) -> Path:
    echo = artefact.with_name(artefact.stem + ".config.json")
    resolved = {k: v for k, v in args.items() if k not in _TRANSIENT}
    echo.write_text(RunConfig(command=command, args=resolved).model_dump_json(indent=2) + "\n", encoding="utf-8")
    return echo


def _emit(args: dict, payload: dict, text: str, artefact: Path | None = None) -> None:
    if artefact is not None:
        result = artefact.with_name(artefact.stem + ".result.json")
        result.write_text(json.dumps(payload, indent=2, default=str) + "\n", encoding="utf-8")
    if args.get("json"):
        print(json.dumps(payload, indent=2, default=str))
    else:
        print(text)


def _open_db():
    from database.connection import SessionLocal, init_db

    init_db()
    return SessionLocal()


# ---------- commands ----------

def _holdout_parts(examples, manifest, ratio: tuple[int, int], seed: int, out: Path) -> list:
    """Divide one generated split into train and test files by ratio."""
    parts = []
    for name, part in zip(("train", "test"), split_examples(examples, seed, ratio)):
        digest = dataset_digest(records_to_jsonl(part))
        part_manifest = manifest.model_copy(update={"split": name, "count": len(part), "digest": digest})
        parts.append((part, part_manifest, out.with_name(f"{out.stem}.{name}{out.suffix or '.jsonl'}")))
    return parts


def cmd_gen(args: dict) -> int:
    out = Path(_require(args, "out", "--out"))
    seed = _opt(args, "seed")
    jobs = []
    if "preset" in args:
        preset = get_preset(args["preset"])
        splits = [args["split"]] if "split" in args else [s.name for s in preset.splits]
        top = max(preset.split(s).max_digits for s in splits)
        spec = _orthography(args, preset.orthography, width=top + 1)
        for split in splits:
            base_cfg = preset.sampling_config(split, seed).model_dump()
            base_cfg["base"] = spec.base
            cfg = SamplingConfig.model_validate({**base_cfg, **_sampling_overrides(args)})
            path = out if len(splits) == 1 else out.with_name(f"{out.stem}.{split}{out.suffix or '.jsonl'}")
            jobs.append((split, cfg, path))
        preset_name = preset.name
        holdout = preset.holdout_ratio
    else:
        max_digits = _require(args, "max_digits", "--max-digits")
        spec = _orthography(args, width=max_digits + 1)
        cfg = SamplingConfig(
            method=_opt(args, "method"),
            max_digits=max_digits,
            min_digits=_opt(args, "min_digits"),
            base=spec.base,
            count=_opt(args, "count"),
            seed=seed,
            operation=_opt(args, "operation"),
            require_digits_above=args.get("require_digits_above"),
        )
        jobs.append((args.get("split", "data"), cfg, out))
        preset_name = None
        holdout = None

    parts = []
    for split, cfg, path in jobs:
        examples, manifest = generate_dataset(cfg, spec, split, preset_name)
        if holdout is not None:
            parts.extend(_holdout_parts(examples, manifest, holdout, derive_seed(seed, f"{preset.seed_name}/holdout"), out))
        else:
            parts.append((examples, manifest, path))

    written = []
    db = _open_db() if args.get("record") else None
    try:
        for examples, manifest, path in parts:
            write_dataset(examples, manifest, path)
            if db is not None:
                from library.runs import record_dataset

                record_dataset(manifest, db)
            written.append({"split": manifest.split, "path": str(path), "count": manifest.count, "digest": manifest.digest})
    finally:
        if db is not None:
            db.close()
    echo = _write_echo("gen", args, out)
    lines = [f"{w['path']}: {w['count']} examples, sha256 {w['digest']}" for w in written]
    _emit(args, {"files": written, "config": str(echo)}, "\n".join(lines), out)
    return EXIT_OK


def cmd_encode(args: dict) -> int:
    spec = _orthography(args)
    n = from_decimal_string(args["number"])
    tokens = encode(n, spec)
    _emit(args, {"number": n.to_decimal_string(), "orthography": spec.label, "tokens": list(tokens.tokens)}, tokens.wire)
    return EXIT_OK


def cmd_decode(args: dict) -> int:
    spec = _orthography(args)
    tokens = TokenSequence.from_wire(" ".join(args["tokens"]))
    n = decode(tokens, spec)
    _emit(args, {"tokens": list(tokens.tokens), "orthography": spec.label, "number": n.to_decimal_string()}, n.to_decimal_string())
    return EXIT_OK


def cmd_eval(args: dict) -> int:
    gold = read_dataset(_existing(_require(args, "gold", "--gold")))
    predictions = read_predictions(_existing(_require(args, "pred", "--pred")))
    fallback = gold.manifest.orthography if gold.manifest else None
    spec = _orthography(args, fallback) if ("scheme" in args or fallback) else None
    report = evaluate(predictions, [r.answer for r in gold.records], gold.records, spec)

    if "csv" in args:
        write_per_length_csv(report, Path(args["csv"]))
    if "report" in args:
        report_path = Path(args["report"])
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        _write_echo("eval", args, report_path)
    if "record" in args:
        from library.runs import record_eval_run

        db = _open_db()
        try:
            record_eval_run(args["record"], report, db, gold.manifest)
        finally:
            db.close()
        logger.info(f"Recorded run under label {args['record']!r}")
    _emit(args, report.model_dump(mode="json"), render_table(report))
    return EXIT_OK


def cmd_analyze(args: dict) -> int:
    order = Order(_opt(args, "order"))
    if "pred" in args:
        sequences = read_predictions(_existing(args["pred"]))
    elif args.get("tokens"):
        sequences = [" ".join(args["tokens"])]
    else:
        raise CommandError("give tokens or --pred", EXIT_USAGE)
    reports = [analyze_position_skips(s, order) for s in sequences]
    skipping = sum(1 for r in reports if r.max_exponent_seen is not None and not r.well_formed)
    lines = []
    for r in reports[:20]:
        state = "ok" if r.well_formed else f"missing {r.missing_exponents} duplicated {r.duplicated_exponents}"
        lines.append(f"max 10e{r.max_exponent_seen}: {state}" + (" (out of order)" if r.out_of_order else ""))
    if len(reports) > 1:
        lines.append(f"{skipping} of {len(reports)} sequences skip or repeat positions")
    payload = {"sequences": len(reports), "skipping": skipping, "reports": [r.model_dump() for r in reports]}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _model_and_train_config(args: dict, preset=None):
    from microformer.config import ModelConfig, TrainConfig

    model_fields = {
        "layers_encoder": args.get("layers"),
        "layers_decoder": args.get("layers"),
        "model_width": args.get("model_width"),
        "heads": args.get("heads"),
        "feedforward_width": args.get("ff_width"),
        "position_mode": args.get("position_mode"),
        "target_position_mode": args.get("target_mode"),
        "max_sequence_length": args.get("max_seq_len"),
    }
    train_fields = {
        "epochs": args.get("epochs", preset.epochs if preset else None),
        "learning_rate": args.get("lr"),
        "batch_size": _opt(args, "batch_size"),
        "seed": _opt(args, "seed"),
        "precision": args.get("precision"),
        "dev_limit": args.get("dev_limit"),
    }
    base_model = preset.model.model_dump() if preset is not None and preset.model is not None else {}
    model_cfg = ModelConfig.model_validate({**base_model, **{k: v for k, v in model_fields.items() if v is not None}})
    train_cfg = TrainConfig.model_validate({k: v for k, v in train_fields.items() if v is not None})
    if "clip_norm" in args:
        train_cfg = train_cfg.model_copy(update={"clip_norm": args["clip_norm"] or None})
    return model_cfg, train_cfg


def cmd_train(args: dict) -> int:
    from microformer.checkpoint import save_checkpoint
    from microformer.train import train

    data = read_dataset(_existing(_require(args, "train", "--train")))
    preset = get_preset(args["preset"]) if "preset" in args else None
    if "dev" in args:
        dev = read_dataset(_existing(args["dev"])).records
    elif args.get("no_dev") or (preset is not None and preset.holdout_ratio is not None):
        # holdout presets already wrote the test split; train on all of --train
        dev = []
    else:
        dev = None
    fallback = data.manifest.orthography if data.manifest else (preset.orthography if preset else None)
    spec = _orthography(args, fallback)
    model_cfg, train_cfg = _model_and_train_config(args, preset)

    out = Path(_require(args, "out", "--out"))
    log_path = Path(args.get("log", out.with_name(out.stem + ".log.csv")))
    checkpoint = train(
        model_cfg,
        train_cfg,
        data.records,
        spec,
        dev=dev,
        log_path=log_path,
        max_vocabulary=settings.MAX_VOCABULARY,
        dataset_digest=data.manifest.digest if data.manifest else None,
        progress=not args.get("quiet") and sys.stderr.isatty(),
    )
    save_checkpoint(checkpoint, out)
    _write_echo("train", args, out)
    payload = {
        "checkpoint": str(out),
        "log": str(log_path),
        "epoch": checkpoint.epoch,
        "dev_accuracy": checkpoint.dev_accuracy,
        "train_loss": checkpoint.train_loss,
    }
    _emit(args, payload, f"{out}: best epoch {checkpoint.epoch}, dev accuracy {checkpoint.dev_accuracy}", out)
    return EXIT_OK


def cmd_infer(args: dict) -> int:
    from microformer.checkpoint import load_checkpoint
    from microformer.decode import predict

    checkpoint = load_checkpoint(_existing(_require(args, "checkpoint", "--checkpoint")))
    source = _existing(_require(args, "input", "--input"))
    text = source.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        questions = [r.question for r in parse_records(text, str(source))]
    else:
        questions = [line for line in text.splitlines() if line.strip()]
    spec = _orthography(args, checkpoint.orthography)
    model = checkpoint.build_model()
    results = predict(model, questions, spec, _opt(args, "batch_size"), args.get("max_len"))
    out = Path(_require(args, "out", "--out"))
    write_predictions([r.tokens.wire for r in results], out)
    _write_echo("infer", args, out)
    truncated = sum(r.truncated for r in results)
    _emit(
        args,
        {"predictions": str(out), "count": len(results), "truncated": truncated},
        f"{out}: {len(results)} predictions ({truncated} truncated)",
        out,
    )
    return EXIT_OK


def cmd_presets(args: dict) -> int:
    rows = [
        {"name": p.name, "description": p.description, "orthography": p.orthography.label,
         "splits": {s.name: s.count for s in p.splits}, "epochs": p.epochs}
        for p in PRESETS.values()
    ]
    lines = [f"{r['name']:<24} {r['orthography']:<28} {r['description']}" for r in rows]
    _emit(args, {"presets": rows}, "\n".join(lines))
    return EXIT_OK


def cmd_ci(args: dict) -> int:
    if "label" in args:
        from library.runs import summarize_runs

        db = _open_db()
        try:
            summary = summarize_runs(args["label"], db)
        finally:
            db.close()
    else:
        summary = confidence_interval(args.get("values") or [])
    text = f"{summary.mean:.4f} ± {summary.half_width:.4f} over {len(summary.run_accuracies)} runs"
    _emit(args, {**summary.model_dump(), "low": summary.low, "high": summary.high}, text)
    return EXIT_OK


def cmd_gradcheck(args: dict) -> int:
    from microformer.gradcheck import gradient_check

    report = gradient_check(samples=_opt(args, "samples"), step=_opt(args, "step"), seed=_opt(args, "seed"))
    groups = ", ".join(f"{g}={e:.1e}" for g, e in sorted(report.per_group.items()))
    text = (
        f"max relative error {report.max_relative_error:.2e} over {report.checked} samples "
        f"({report.skipped_kinks} ReLU-kink samples skipped)\n{groups}"
    )
    _emit(args, {**report.model_dump(), "passed": report.passed}, text)
    return EXIT_OK if report.passed else EXIT_ERROR


# ---------- parser ----------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config echo to replay")
    p.add_argument("--json", action="store_true", help="print the machine-readable JSON instead of text")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("-q", "--quiet", action="store_true")
    p.add_argument("--seed", type=int)


def _orthography_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=SCHEME_CHOICES)
    p.add_argument("--order", choices=[o.value for o in Order])
    p.add_argument("--base", type=int)
    p.add_argument("--width", type=int, help="digit count of fixedchar numbers")


def _sampling_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--split")
    p.add_argument("--method", choices=[m.value for m in SamplingMethod])
    p.add_argument("--max-digits", type=int)
    p.add_argument("--min-digits", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--operation", choices=[o.value for o in Operation])
    p.add_argument("--require-digits-above", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arith", description="Arithmetic orthography toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        _common(p)
        p.set_defaults(handler=handler)
        return p

    p = add("gen", cmd_gen, "generate a dataset")
    _orthography_flags(p)
    _sampling_flags(p)
    p.add_argument("--out")
    p.add_argument("--record", action="store_true", help="store the manifest in the database")

    p = add("encode", cmd_encode, "encode a decimal integer")
    _orthography_flags(p)
    p.add_argument("number")

    p = add("decode", cmd_decode, "decode a token sequence")
    _orthography_flags(p)
    p.add_argument("tokens", nargs="+")

    p = add("eval", cmd_eval, "score predictions against a gold dataset")
    _orthography_flags(p)
    p.add_argument("--gold")
    p.add_argument("--pred")
    p.add_argument("--csv", help="write per-length accuracy CSV")
    p.add_argument("--report", help="write the JSON report")
    p.add_argument("--record", metavar="LABEL", help="store the run under LABEL")

    p = add("analyze", cmd_analyze, "check position-token ladders of 10e-based sequences")
    p.add_argument("--order", choices=[o.value for o in Order])
    p.add_argument("--pred")
    p.add_argument("tokens", nargs="*")

    p = add("train", cmd_train, "train a model on a dataset")
    _orthography_flags(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--train")
    p.add_argument("--dev", help="dev set that picks the best epoch; without it 10%% of --train is held out")
    p.add_argument("--no-dev", action="store_true", help="train on all of --train and keep the last epoch")
    p.add_argument("--out", help="checkpoint path (.npz)")
    p.add_argument("--log", help="training log CSV")
    p.add_argument("--position-mode", choices=["sinusoidal", "pos_masked"])
    p.add_argument("--target-mode", choices=["with_tgt", "no_tgt"])
    p.add_argument("--layers", type=int)
    p.add_argument("--model-width", type=int)
    p.add_argument("--heads", type=int)
    p.add_argument("--ff-width", type=int)
    p.add_argument("--max-seq-len", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--precision", choices=["f32", "f64"])
    p.add_argument("--clip-norm", type=float, help="0 disables clipping")
    p.add_argument("--dev-limit", type=int)

    p = add("infer", cmd_infer, "greedy-decode answers with a checkpoint")
    _orthography_flags(p)
    p.add_argument("--checkpoint")
    p.add_argument("--input", help="dataset JSONL or one question per line")
    p.add_argument("--out")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--max-len", type=int)

    add("presets", cmd_presets, "list experiment presets")

    p = add("ci", cmd_ci, "95% confidence interval of run accuracies")
    p.add_argument("values", nargs="*", type=float)
    p.add_argument("--label", help="use runs recorded under LABEL")

    p = add("gradcheck", cmd_gradcheck, "finite-difference check of the backward pass")
    p.add_argument("--samples", type=int)
    p.add_argument("--step", type=float)

    return parser


def resolve_args(namespace: argparse.Namespace) -> dict:
    """Explicit flags over --config values; DEFAULTS apply at lookup time."""
    explicit = vars(namespace)
    merged: dict[str, Any] = {}
    if "config" in explicit:
        echo = RunConfig.model_validate_json(_existing(explicit["config"]).read_text(encoding="utf-8"))
        if echo.command != explicit["command"]:
            raise CommandError(f"config was written by {echo.command!r}, not {explicit['command']!r}", EXIT_USAGE)
        merged.update(echo.args)
    merged.update(explicit)
    return merged


def _exit_code(error: Exception) -> int:
    if isinstance(error, CommandError):
        return error.code
    if isinstance(error, TrainingDiverged):
        return EXIT_DIVERGED
    if isinstance(error, (OrthographyError, ValidationError, ModelConfigError, VocabularyError)):
        return EXIT_INVALID
    if isinstance(error, FileNotFoundError):
        return EXIT_MISSING_FILE
    if isinstance(error, (MalformedSequence, ParseError, EvaluationError, DatasetFormatError, json.JSONDecodeError)):
        return EXIT_DATA
    if isinstance(error, KeyError):
        return EXIT_USAGE
    return EXIT_ERROR


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    level = logging.DEBUG if getattr(namespace, "verbose", False) else settings.LOG_LEVEL
    if getattr(namespace, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")

    try:
        args = resolve_args(namespace)
        return args["handler"](args)
    except Exception as e:
        code = _exit_code(e)
        message = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {message}", file=sys.stderr)
        if code == EXIT_ERROR:
            logger.exception("unexpected failure")
        return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
