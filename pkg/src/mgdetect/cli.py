"""Command-line front-end.

One subcommand per pipeline stage plus `pipeline` to run them all from a
single JSON config. Every command that involves randomness takes explicit
seeds; nothing reads the clock or global RNG state, so identical
invocations produce identical outputs. Toolkit errors exit with status 1
and a one-line message on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .attacks import ATTACK_KINDS, KEYBOARDS, PerturbationSpec, perturb_testset
from .corpus import (
    UNIT_KINDS,
    build_split,
    build_units,
    parse_corpus_file,
    parse_record,
    read_units,
    write_corpus,
    write_units,
)
from .detector import (
    DEFAULT_LR_GRID,
    Hyperparams,
    grid_search,
    load_model,
    predict_units,
    save_model,
    train,
)
from .errors import ConfigError, ParseError, ToolkitError
from .evaluate import (
    EvalReport,
    aggregate_reports,
    correlate_quality,
    render_report_json,
    render_rows_markdown,
    robustness_table,
)
from .features import FeatureConfig
from .pipeline import REPORT_FORMAT, run_pipeline

# HC3 column names mapped onto Record fields; unlisted keys pass through.
HC3_FIELD_MAP = {"chatgpt_answers": "machine_answers", "source": "source_tag"}
SCHEMAS = ("native", "hc3")


def _load_features(path: str | None) -> FeatureConfig:
    if path is None:
        return FeatureConfig()
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"feature config is not valid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("feature config must be a JSON object")
    for key in ("char_ngram_range", "word_ngram_range"):
        if key in payload:
            payload[key] = tuple(payload[key])
    try:
        return FeatureConfig(**payload)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad feature config: {exc}") from exc


def _parse_seeds(text: str) -> list[int]:
    """Seed list: '3,7,11' is explicit; a bare count '5' means seeds 0..4."""
    try:
        parts = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --seeds value {text!r}") from exc
    if not parts:
        raise ConfigError("--seeds must name at least one seed")
    if len(parts) == 1 and "," not in text:
        count = parts[0]
        if count < 1:
            raise ConfigError("--seeds count must be >= 1")
        return list(range(count))
    return parts


def _seed_path(template: Path, seed: int, multi: bool) -> Path:
    if not multi:
        return template
    return template.with_name(f"{template.stem}.seed{seed}{template.suffix}")


def _ingest_file(path: Path, schema: str) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ToolkitError(f"{path}: line {line_no}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ToolkitError(f"{path}: line {line_no}: record is not an object")
            if schema == "hc3":
                obj = {HC3_FIELD_MAP.get(k, k): v for k, v in obj.items()}
            try:
                records.append(parse_record(obj, line_no, f"{path.stem}-line-{line_no}"))
            except ParseError as exc:
                raise ToolkitError(f"{path}: {exc}") from exc
    return records


def _cmd_ingest(args: argparse.Namespace) -> int:
    all_records = []
    seen: dict[str, str] = {}
    for name in args.inputs:
        path = Path(name)
        records = _ingest_file(path, args.schema)
        for rec in records:
            if rec.id in seen:
                raise ToolkitError(
                    f"duplicate record id {rec.id!r} in {name} (also in {seen[rec.id]})"
                )
            seen[rec.id] = name
        all_records.extend(records)
        print(f"ingest: {len(records)} records from {name}")
    if not all_records:
        print("ingest: warning: no records in input", file=sys.stderr)
    n = write_corpus(all_records, args.out)
    print(f"ingest: wrote {n} records to {args.out}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    records = parse_corpus_file(args.corpus)
    split = build_split(records, args.test_pairs, args.valid_fraction, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for part, chunk in (("train", split.train), ("valid", split.valid), ("test", split.test)):
        path = out_dir / f"split_{part}.jsonl"
        write_corpus(chunk, path)
        print(f"split: {part}: {len(chunk)} records -> {path}")
    return 0


def _cmd_units(args: argparse.Namespace) -> int:
    records = parse_corpus_file(args.corpus)
    build = build_units(records, args.kind)
    write_units(build.units, args.out)
    print(f"units: {len(build.units)} {args.kind} units -> {args.out}")
    if build.skipped_empty:
        print(f"units: skipped {build.skipped_empty} empty answers", file=sys.stderr)
    return 0


def _cmd_attack(args: argparse.Namespace) -> int:
    units = read_units(getattr(args, "in"))
    perturbed = perturb_testset(units, args.kind, args.rate, args.seed, keyboard=args.keyboard)
    write_units(perturbed, args.out)
    print(f"attack: {args.kind} rate {args.rate} on {len(units)} units -> {args.out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    units = read_units(args.units)
    config = _load_features(args.config)
    seeds = _parse_seeds(args.seeds)
    valid_units = read_units(args.valid) if args.valid else None
    if args.grid and valid_units is None:
        raise ConfigError("--grid requires --valid units for model selection")
    multi = len(seeds) > 1
    out = Path(args.out)
    for seed in seeds:
        hyper = Hyperparams(
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            batch_size=args.batch_size,
            l2_penalty=args.l2,
            seed=seed,
        )
        if args.grid:
            hyper, table = grid_search(units, valid_units, config, hyper)
            picks = " ".join(f"{lr}:{f1:.4f}" for lr, f1 in sorted(table.items()))
            print(f"train: seed {seed}: grid pick lr={hyper.learning_rate} ({picks})")
        params = train(units, config, hyper)
        path = _seed_path(out, seed, multi)
        save_model(params, path)
        losses = " ".join(f"{x:.4f}" for x in params.epoch_losses)
        print(f"train: seed {seed}: model -> {path} (epoch loss {losses})")
    return 0


def _build_test_sets(units, corpus_path: str | None) -> dict:
    if corpus_path is None:
        return {"test": list(units)}
    tags = {rec.id: rec.source_tag or "untagged" for rec in parse_corpus_file(corpus_path)}
    test_sets: dict[str, list] = {}
    for unit in units:
        tag = tags.get(unit.record_id)
        if tag is None:
            raise ConfigError(f"unit record id {unit.record_id!r} not in --corpus")
        test_sets.setdefault(tag, []).append(unit)
    return test_sets


def _cmd_eval(args: argparse.Namespace) -> int:
    params = load_model(args.model)
    config = _load_features(args.config)
    units = read_units(args.units)
    test_sets = _build_test_sets(units, args.corpus)
    attacks = []
    if args.rate > 0:
        attacks = [
            PerturbationSpec("misspelling", args.rate, args.attack_seed),
            PerturbationSpec("homoglyph", args.rate, args.attack_seed),
        ]
    report = robustness_table(params, config, test_sets, attacks)
    payload = {"rows": list(report.rows)}
    Path(args.out).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"eval: {len(report.rows)} rows -> {args.out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    reports = []
    for name in args.inputs:
        payload = json.loads(Path(name).read_text(encoding="utf-8"))
        if not isinstance(payload, dict) or "rows" not in payload:
            raise ConfigError(f"{name} is not an eval output (missing 'rows')")
        reports.append(EvalReport(rows=tuple(payload["rows"])))
    rows = aggregate_reports(reports)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"format": REPORT_FORMAT, "sources": list(args.inputs), "rows": rows}
    (out_dir / "report.json").write_text(render_report_json(payload), encoding="utf-8")
    markdown = "# Detection robustness report\n\n" + render_rows_markdown(rows) + "\n"
    (out_dir / "report.md").write_text(markdown, encoding="utf-8")
    print(f"report: {len(rows)} rows -> {out_dir / 'report.json'}, {out_dir / 'report.md'}")
    return 0


def _cmd_correlate(args: argparse.Namespace) -> int:
    records = parse_corpus_file(args.corpus)
    params = load_model(args.model)
    config = _load_features(args.config)
    build = build_units(records, args.kind)
    labels, _scores = predict_units(params, build.units, config)
    correct_by_id: dict[str, list[float]] = {}
    for unit, label in zip(build.units, labels):
        correct_by_id.setdefault(unit.record_id, []).append(
            1.0 if label is unit.label else 0.0
        )
    scores_by_id = {rid: sum(v) / len(v) for rid, v in correct_by_id.items()}
    result = correlate_quality(records, scores_by_id)
    payload = {
        "coefficients": result.coefficients,
        "used": result.used,
        "skipped": result.skipped,
    }
    text = render_report_json(payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"correlate: used {result.used}, skipped {result.skipped} -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    summary = run_pipeline(args.config, args.out_dir, force=args.force)
    done = ",".join(summary["completed"]) or "none"
    skipped = ",".join(summary["skipped"]) or "none"
    print(f"pipeline: stages run: {done}; skipped: {skipped}")
    print(f"pipeline: report at {summary['report_json']}")
    return 0


def _add_feature_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=None,
        metavar="FEATURES.JSON",
        help="feature extraction config (JSON object); defaults apply when omitted",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgdetect",
        description="Train and evaluate a machine-generated-text detector "
        "with reproducible perturbation robustness reports.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize corpora into the native record format")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="FILE")
    p.add_argument("--out", required=True)
    p.add_argument("--schema", choices=SCHEMAS, default="native")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("split", help="carve balanced test set plus train/valid split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--test-pairs", type=int, required=True)
    p.add_argument("--valid-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("units", help="build classification units from a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kind", choices=UNIT_KINDS, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_units)

    p = sub.add_parser("attack", help="perturb a unit file with one attack")
    p.add_argument("--kind", choices=ATTACK_KINDS, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--in", dest="in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keyboard", choices=sorted(KEYBOARDS), default="azerty")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("train", help="train detector models, one per seed")
    p.add_argument("--units", required=True)
    _add_feature_flag(p)
    p.add_argument(
        "--seeds",
        default="1",
        help="comma-separated seed list, or a bare count N for seeds 0..N-1",
    )
    p.add_argument("--valid", default=None, help="validation units for --grid")
    p.add_argument(
        "--grid",
        action="store_true",
        help=f"pick learning rate from {list(DEFAULT_LR_GRID)} by validation macro-F1",
    )
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--out", required=True, help="model path; .seedN inserted when multi-seed")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="robustness table for one model on test units")
    p.add_argument("--model", required=True)
    p.add_argument("--units", required=True)
    _add_feature_flag(p)
    p.add_argument(
        "--corpus", default=None, help="records file; groups rows by its source tags"
    )
    p.add_argument("--rate", type=float, default=0.3, help="attack rate; 0 disables attacks")
    p.add_argument("--attack-seed", type=int, default=97)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="aggregate eval outputs into report.json/report.md")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="EVAL.JSON")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("correlate", help="correlate per-record quality with detector correctness")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    _add_feature_flag(p)
    p.add_argument("--kind", choices=UNIT_KINDS, default="full")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("pipeline", help="run all stages from a JSON config, resumably")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true", help="rerun stages even when fresh")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
