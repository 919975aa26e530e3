"""Deterministic run manifests.

A manifest pins everything that determines a pipeline run: toolkit
version, config digest, input digests, seeds, and the digest of every
stage output. Reruns with identical inputs produce byte-identical
manifests, which is what makes runs comparable; wall-clock timestamps go
to run.log instead (they would break that comparison).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .errors import ConfigError

MANIFEST_FORMAT = "mgdetect-manifest v1"
MANIFEST_NAME = "manifest.json"
RUN_LOG_NAME = "run.log"


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    toolkit_version: str
    config_digest: str
    inputs: dict[str, str]
    seeds: list[int]
    stages: dict[str, dict[str, str]] = field(default_factory=dict)

    def record_stage(self, name: str, out_dir: Path, filenames: list[str]) -> None:
        self.stages[name] = {fn: sha256_file(out_dir / fn) for fn in sorted(filenames)}

    def stage_fresh(self, name: str, out_dir: Path) -> bool:
        """True when every recorded output of the stage exists unchanged."""
        entries = self.stages.get(name)
        if not entries:
            return False
        for filename, digest in entries.items():
            path = out_dir / filename
            if not path.is_file() or sha256_file(path) != digest:
                return False
        return True

    def to_json(self) -> str:
        payload = {
            "format": MANIFEST_FORMAT,
            "toolkit_version": self.toolkit_version,
            "config_digest": self.config_digest,
            "inputs": self.inputs,
            "seeds": list(self.seeds),
            "stages": self.stages,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"manifest is not valid JSON: {exc.msg}") from exc
        if payload.get("format") != MANIFEST_FORMAT:
            raise ConfigError(
                f"unsupported manifest format: {payload.get('format')!r}"
            )
        try:
            return cls(
                toolkit_version=payload["toolkit_version"],
                config_digest=payload["config_digest"],
                inputs=dict(payload["inputs"]),
                seeds=[int(s) for s in payload["seeds"]],
                stages={k: dict(v) for k, v in payload["stages"].items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"manifest missing or bad field: {exc}") from exc

    def save(self, out_dir: Path) -> None:
        (out_dir / MANIFEST_NAME).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, out_dir: Path) -> "RunManifest":
        return cls.from_json((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))


def append_log(out_dir: Path, message: str) -> None:
    """Timestamped progress line in run.log (kept out of the manifest)."""
    stamp = datetime.now().isoformat(timespec="seconds")
    with open(out_dir / RUN_LOG_NAME, "a", encoding="utf-8") as fh:
        fh.write(f"{stamp} {message}\n")
