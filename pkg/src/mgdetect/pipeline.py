"""End-to-end pipeline: split, units, optional mix, train, eval, report.

Every stage reads its inputs from files in the output directory and writes
its outputs there, so a run can resume: a stage is skipped when the
manifest already records its outputs and the files on disk still match.
All randomness flows from seeds named in the config, so two runs with the
same config and inputs produce byte-identical reports and manifests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .attacks import PerturbationSpec, build_training_mix
from .corpus import (
    UNIT_KINDS,
    ExampleUnit,
    Record,
    build_split,
    build_units,
    parse_corpus_file,
    read_units,
    write_corpus,
    write_units,
)
from .detector import Hyperparams, grid_search, load_model, save_model, train
from .errors import ConfigError, ToolkitError
from .evaluate import (
    EvalReport,
    aggregate_reports,
    render_report_json,
    render_rows_markdown,
    robustness_table,
)
from .features import FeatureConfig
from .manifest import MANIFEST_NAME, RunManifest, append_log, sha256_file, sha256_text

REPORT_FORMAT = "mgdetect-report v1"
STAGES = ("split", "units", "mix", "train", "eval", "report")


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str
    test_pairs: int
    valid_fraction: float = 0.2
    split_seed: int = 13
    subsets: tuple[str, ...] = ("qa", "full", "sentence")
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    train_mix: bool = False
    mix_seed: int = 53
    attack_rate: float = 0.3
    attack_seed: int = 97
    grid: bool = False
    ood_corpora: tuple[str, ...] = ()
    features: FeatureConfig = FeatureConfig()
    hyper: Hyperparams = Hyperparams()

    def __post_init__(self) -> None:
        for kind in self.subsets:
            if kind not in UNIT_KINDS:
                raise ConfigError(f"unknown subset kind {kind!r}")
        if not self.subsets:
            raise ConfigError("subsets must not be empty")
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        if not (0.0 <= self.attack_rate <= 1.0):
            raise ConfigError(f"attack_rate {self.attack_rate} outside [0,1]")


_TOP_LEVEL_KEYS = {
    "corpus",
    "test_pairs",
    "valid_fraction",
    "split_seed",
    "subsets",
    "seeds",
    "train_mix",
    "mix_seed",
    "attack_rate",
    "attack_seed",
    "grid",
    "ood_corpora",
    "features",
    "hyper",
}


def _build_section(payload: dict, cls, what: str):
    try:
        return cls(**payload)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {what} section: {exc}") from exc


def parse_config(text: str) -> PipelineConfig:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(payload) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "corpus" not in payload or "test_pairs" not in payload:
        raise ConfigError("config requires 'corpus' and 'test_pairs'")
    features_payload = dict(payload.get("features", {}))
    for key in ("char_ngram_range", "word_ngram_range"):
        if key in features_payload:
            features_payload[key] = tuple(features_payload[key])
    features = _build_section(features_payload, FeatureConfig, "features")
    hyper = _build_section(dict(payload.get("hyper", {})), Hyperparams, "hyper")
    try:
        return PipelineConfig(
            corpus=payload["corpus"],
            test_pairs=int(payload["test_pairs"]),
            valid_fraction=float(payload.get("valid_fraction", 0.2)),
            split_seed=int(payload.get("split_seed", 13)),
            subsets=tuple(payload.get("subsets", ("qa", "full", "sentence"))),
            seeds=tuple(int(s) for s in payload.get("seeds", (1, 2, 3, 4, 5))),
            train_mix=bool(payload.get("train_mix", False)),
            mix_seed=int(payload.get("mix_seed", 53)),
            attack_rate=float(payload.get("attack_rate", 0.3)),
            attack_seed=int(payload.get("attack_seed", 97)),
            grid=bool(payload.get("grid", False)),
            ood_corpora=tuple(payload.get("ood_corpora", ())),
            features=features,
            hyper=hyper,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


class _Stage:
    """Shared bookkeeping: skip when fresh, log, record output digests."""

    def __init__(self, run: "_PipelineRun", name: str):
        self.run = run
        self.name = name

    def outputs(self) -> list[str]:
        raise NotImplementedError

    def execute(self) -> None:
        raise NotImplementedError

    def ensure(self) -> bool:
        run = self.run
        if run.resume and run.manifest.stage_fresh(self.name, run.out_dir):
            append_log(run.out_dir, f"stage {self.name}: skipped (outputs fresh)")
            run.skipped.append(self.name)
            return False
        try:
            self.execute()
        except ToolkitError as exc:
            append_log(run.out_dir, f"stage {self.name}: failed ({exc})")
            raise ToolkitError(f"stage {self.name} failed: {exc}") from exc
        run.manifest.record_stage(self.name, run.out_dir, self.outputs())
        run.manifest.save(run.out_dir)
        append_log(run.out_dir, f"stage {self.name}: done")
        run.completed.append(self.name)
        return True


def _split_name(part: str) -> str:
    return f"split_{part}.jsonl"


def _units_name(kind: str, part: str) -> str:
    return f"units_{kind}_{part}.jsonl"


def _mix_name(kind: str) -> str:
    return f"units_{kind}_train_mix.jsonl"


def _model_name(kind: str, seed: int) -> str:
    return f"model_{kind}_seed{seed}.txt"


def _eval_name(kind: str, seed: int) -> str:
    return f"eval_{kind}_seed{seed}.json"


class _SplitStage(_Stage):
    def outputs(self) -> list[str]:
        return [_split_name(p) for p in ("train", "valid", "test")]

    def execute(self) -> None:
        run = self.run
        records = parse_corpus_file(run.corpus_path)
        split = build_split(
            records,
            run.config.test_pairs,
            run.config.valid_fraction,
            run.config.split_seed,
        )
        for part, chunk in (
            ("train", split.train),
            ("valid", split.valid),
            ("test", split.test),
        ):
            write_corpus(chunk, run.out_dir / _split_name(part))
        append_log(
            run.out_dir,
            "stage split: train={} valid={} test={}".format(
                len(split.train), len(split.valid), len(split.test)
            ),
        )


class _UnitsStage(_Stage):
    def outputs(self) -> list[str]:
        names = []
        for kind in self.run.config.subsets:
            for part in ("train", "valid", "test"):
                names.append(_units_name(kind, part))
            if self.run.config.ood_corpora:
                names.append(_units_name(kind, "ood"))
        return names

    def execute(self) -> None:
        run = self.run
        parts = {
            part: parse_corpus_file(run.out_dir / _split_name(part))
            for part in ("train", "valid", "test")
        }
        ood_records: list[Record] = []
        for rel in run.config.ood_corpora:
            ood_records.extend(parse_corpus_file(run.resolve(rel)))
        for kind in run.config.subsets:
            skipped = 0
            for part, records in parts.items():
                build = build_units(records, kind)
                skipped += build.skipped_empty
                write_units(build.units, run.out_dir / _units_name(kind, part))
            if run.config.ood_corpora:
                build = build_units(ood_records, kind)
                skipped += build.skipped_empty
                write_units(build.units, run.out_dir / _units_name(kind, "ood"))
            if skipped:
                append_log(
                    run.out_dir, f"stage units: {kind}: skipped {skipped} empty answers"
                )


class _MixStage(_Stage):
    def outputs(self) -> list[str]:
        return [_mix_name(kind) for kind in self.run.config.subsets]

    def execute(self) -> None:
        run = self.run
        for kind in run.config.subsets:
            units = read_units(run.out_dir / _units_name(kind, "train"))
            mixed = build_training_mix(
                units,
                run.config.mix_seed,
                misspell_rate=run.config.attack_rate,
                homoglyph_rate=run.config.attack_rate,
            )
            write_units(mixed, run.out_dir / _mix_name(kind))


class _TrainStage(_Stage):
    def outputs(self) -> list[str]:
        return [
            _model_name(kind, seed)
            for kind in self.run.config.subsets
            for seed in self.run.config.seeds
        ]

    def execute(self) -> None:
        run = self.run
        for kind in run.config.subsets:
            if run.config.train_mix:
                train_units = read_units(run.out_dir / _mix_name(kind))
            else:
                train_units = read_units(run.out_dir / _units_name(kind, "train"))
            valid_units = read_units(run.out_dir / _units_name(kind, "valid"))
            for seed in run.config.seeds:
                hyper = replace(run.config.hyper, seed=seed)
                if run.config.grid:
                    hyper, table = grid_search(
                        train_units, valid_units, run.config.features, hyper
                    )
                    append_log(
                        run.out_dir,
                        "stage train: {} seed {}: grid pick lr={} ({})".format(
                            kind,
                            seed,
                            hyper.learning_rate,
                            " ".join(f"{lr}:{f1:.4f}" for lr, f1 in sorted(table.items())),
                        ),
                    )
                params = train(train_units, run.config.features, hyper)
                save_model(params, run.out_dir / _model_name(kind, seed))


class _EvalStage(_Stage):
    def outputs(self) -> list[str]:
        return [
            _eval_name(kind, seed)
            for kind in self.run.config.subsets
            for seed in self.run.config.seeds
        ]

    def execute(self) -> None:
        run = self.run
        tags_by_record = {
            rec.id: rec.source_tag or "untagged"
            for rec in parse_corpus_file(run.out_dir / _split_name("test"))
        }
        if run.config.ood_corpora:
            for rel in run.config.ood_corpora:
                for rec in parse_corpus_file(run.resolve(rel)):
                    tags_by_record[rec.id] = rec.source_tag or "untagged"
        attacks = [
            PerturbationSpec("misspelling", run.config.attack_rate, run.config.attack_seed),
            PerturbationSpec("homoglyph", run.config.attack_rate, run.config.attack_seed),
        ]
        for kind in run.config.subsets:
            units = read_units(run.out_dir / _units_name(kind, "test"))
            if run.config.ood_corpora:
                units = units + read_units(run.out_dir / _units_name(kind, "ood"))
            test_sets: dict[str, list[ExampleUnit]] = {}
            for unit in units:
                test_sets.setdefault(tags_by_record[unit.record_id], []).append(unit)
            for seed in run.config.seeds:
                params = load_model(run.out_dir / _model_name(kind, seed))
                report = robustness_table(params, run.config.features, test_sets, attacks)
                payload = {"rows": list(report.rows)}
                (run.out_dir / _eval_name(kind, seed)).write_text(
                    json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8",
                )


class _ReportStage(_Stage):
    def outputs(self) -> list[str]:
        return ["report.json", "report.md"]

    def execute(self) -> None:
        run = self.run
        subsets = {}
        sections = ["# Detection robustness report", ""]
        for kind in run.config.subsets:
            reports = []
            for seed in run.config.seeds:
                payload = json.loads(
                    (run.out_dir / _eval_name(kind, seed)).read_text(encoding="utf-8")
                )
                reports.append(EvalReport(rows=tuple(payload["rows"])))
            rows = aggregate_reports(reports)
            subsets[kind] = rows
            sections.append(f"## Subset: {kind}")
            sections.append("")
            sections.append(render_rows_markdown(rows))
            sections.append("")
        payload = {
            "format": REPORT_FORMAT,
            "attack_rate": run.config.attack_rate,
            "attack_seed": run.config.attack_seed,
            "seeds": list(run.config.seeds),
            "train_mix": run.config.train_mix,
            "subsets": subsets,
        }
        (run.out_dir / "report.json").write_text(
            render_report_json(payload), encoding="utf-8"
        )
        sections.append(
            "Cells are percentages; `mean ± sample std` when several seeds ran. "
            "Flags mark metrics whose denominator was zero (reported as 0)."
        )
        (run.out_dir / "report.md").write_text(
            "\n".join(sections) + "\n", encoding="utf-8"
        )


class _PipelineRun:
    def __init__(self, config_path: str | Path, out_dir: str | Path, force: bool):
        self.config_path = Path(config_path)
        self.out_dir = Path(out_dir)
        self.config_text = self.config_path.read_text(encoding="utf-8")
        self.config = parse_config(self.config_text)
        self.base_dir = self.config_path.parent
        self.corpus_path = self.resolve(self.config.corpus)
        self.force = force
        self.completed: list[str] = []
        self.skipped: list[str] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

        inputs = {self.config.corpus: sha256_file(self.corpus_path)}
        for rel in self.config.ood_corpora:
            inputs[rel] = sha256_file(self.resolve(rel))
        config_digest = sha256_text(self.config_text)
        self.resume = False
        self.manifest = RunManifest(
            toolkit_version=__version__,
            config_digest=config_digest,
            inputs=inputs,
            seeds=list(self.config.seeds),
        )
        if not force and (self.out_dir / MANIFEST_NAME).is_file():
            try:
                previous = RunManifest.load(self.out_dir)
            except ConfigError:
                previous = None
            if (
                previous is not None
                and previous.toolkit_version == __version__
                and previous.config_digest == config_digest
                and previous.inputs == inputs
            ):
                self.manifest = previous
                self.resume = True

    def resolve(self, rel: str) -> Path:
        path = Path(rel)
        return path if path.is_absolute() else self.base_dir / path


def run_pipeline(
    config_path: str | Path, out_dir: str | Path, force: bool = False
) -> dict:
    """Run (or resume) the full pipeline; returns a run summary."""
    run = _PipelineRun(config_path, out_dir, force)
    append_log(run.out_dir, f"pipeline start (resume={run.resume})")
    stages: list[_Stage] = [_SplitStage(run, "split"), _UnitsStage(run, "units")]
    if run.config.train_mix:
        stages.append(_MixStage(run, "mix"))
    stages.extend(
        [_TrainStage(run, "train"), _EvalStage(run, "eval"), _ReportStage(run, "report")]
    )
    for stage in stages:
        stage.ensure()
    append_log(run.out_dir, "pipeline done")
    return {
        "out_dir": str(run.out_dir),
        "completed": run.completed,
        "skipped": run.skipped,
        "report_json": str(run.out_dir / "report.json"),
        "report_md": str(run.out_dir / "report.md"),
    }
