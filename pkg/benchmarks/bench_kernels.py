"""Benchmark the compiled kernel lane against the pure-Python fallback.

Runs the two hot paths (feature extraction, detector training) on a
synthetic corpus with each lane and prints a timing table plus a
bit-identity check of the trained weights. Usage:

    python benchmarks/bench_kernels.py [--records 300] [--epochs 5] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

from mgdetect import _kernels
from mgdetect.corpus import build_units
from mgdetect.detector import Hyperparams, train
from mgdetect.features import FeatureConfig, extract
from mgdetect.synth import generate_corpus

_KERNEL_NAMES = ("ngram_bucket_counts", "batch_margins", "sgd_epoch")


def _available_lanes() -> dict[str, object]:
    lanes: dict[str, object] = {"pure": _kernels.pure}
    try:
        from mgdetect._kernels import _ckernels

        lanes["compiled"] = _ckernels
    except ImportError:
        pass
    return lanes


def _bind(lane_module) -> None:
    for name in _KERNEL_NAMES:
        setattr(_kernels, name, getattr(lane_module, name))


def _best_of(repeats: int, fn) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run(records: int, epochs: int, repeats: int) -> int:
    units = build_units(generate_corpus(records, seed=5), "full").units
    config = FeatureConfig()
    hyper = Hyperparams(epochs=epochs, seed=1)
    lanes = _available_lanes()

    print(f"workload: {len(units)} units, dim {config.hash_dimension}, "
          f"{epochs} epochs, best of {repeats}")
    if "compiled" not in lanes:
        print("note: compiled extension not importable; pure lane only")

    timings: dict[str, dict[str, float]] = {}
    weight_bytes: dict[str, bytes] = {}
    for name, module in lanes.items():
        _bind(module)
        extract_s = _best_of(
            repeats, lambda: [extract(u.text, config) for u in units]
        )
        train_s = _best_of(repeats, lambda: train(units, config, hyper))
        weight_bytes[name] = train(units, config, hyper).weights.tobytes()
        timings[name] = {
            "extract_s": extract_s,
            "extract_units_per_s": len(units) / extract_s,
            "train_s": train_s,
        }
    _bind(_kernels._impl)

    header = f"{'lane':<10} {'extract':>12} {'units/s':>10} {'train':>12}"
    print()
    print(header)
    print("-" * len(header))
    for name, row in timings.items():
        print(
            f"{name:<10} {row['extract_s']:>10.3f} s {row['extract_units_per_s']:>10.0f} "
            f"{row['train_s']:>10.3f} s"
        )
    if len(timings) == 2:
        speedup_extract = timings["pure"]["extract_s"] / timings["compiled"]["extract_s"]
        speedup_train = timings["pure"]["train_s"] / timings["compiled"]["train_s"]
        identical = weight_bytes["pure"] == weight_bytes["compiled"]
        print()
        print(f"compiled speedup: extract {speedup_extract:.1f}x, train {speedup_train:.1f}x")
        print(f"trained weights bit-identical across lanes: {identical}")
        if not identical:
            return 1
    return 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", type=int, default=300)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    return run(args.records, args.epochs, args.repeats)


if __name__ == "__main__":
    raise SystemExit(main())
