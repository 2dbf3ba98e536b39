"""Seeded Gaussian score generator for multi-demographic verification systems.

Every (enroll, probe, kind) cell draws from its own numpy stream keyed by the
seed and CRC32 hashes of the two labels, so adding or removing a demographic
never perturbs the draws of the others. Within a cell the first
``round(dev_fraction * n)`` draws go to dev, the rest to test.

Cross-demographic impostor cells hold ``cross_fraction * n_impostor`` draws
of the probe demographic's impostor distribution shifted by
``cross_offset * impostor_std`` (negative: cross-group false matches are
rarer than homogeneous ones).
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .scores import ScoreSet, SplitDataset

_KIND_KEY = {"impostor": 0, "genuine": 1}


class InvalidSpec(ValueError):
    pass


class UnknownPreset(KeyError):
    pass


@dataclass(frozen=True)
class DemographicScoreParams:
    impostor_mean: float
    impostor_std: float
    genuine_mean: float
    genuine_std: float
    n_impostor: int
    n_genuine: int

    def __post_init__(self) -> None:
        for name in ("impostor_mean", "impostor_std", "genuine_mean", "genuine_std"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpec(f"{name} must be finite")
        if self.impostor_std <= 0 or self.genuine_std <= 0:
            raise InvalidSpec("standard deviations must be positive")
        if self.n_impostor < 1 or self.n_genuine < 1:
            raise InvalidSpec("sample counts must be positive")
        if self.genuine_mean <= self.impostor_mean:
            raise InvalidSpec(
                f"genuine_mean {self.genuine_mean} must exceed impostor_mean {self.impostor_mean}"
            )


@dataclass(frozen=True)
class SyntheticSpec:
    per_demo: Mapping[str, DemographicScoreParams]
    seed: int = 42
    dev_fraction: float = 0.5
    cross_offset: float = -0.5
    cross_fraction: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_demo", dict(sorted(self.per_demo.items())))
        if not self.per_demo:
            raise InvalidSpec("spec needs at least one demographic")
        if any(not isinstance(k, str) or not k for k in self.per_demo):
            raise InvalidSpec("demographic labels must be non-empty strings")
        if not 0.0 < self.dev_fraction < 1.0:
            raise InvalidSpec(f"dev_fraction must lie in (0, 1), got {self.dev_fraction}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpec("seed must be a 64-bit unsigned integer")
        if not math.isfinite(self.cross_offset):
            raise InvalidSpec("cross_offset must be finite")
        if not 0.0 <= self.cross_fraction:
            raise InvalidSpec("cross_fraction must be >= 0")

    def with_seed(self, seed: int) -> "SyntheticSpec":
        return SyntheticSpec(self.per_demo, seed, self.dev_fraction, self.cross_offset, self.cross_fraction)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_demo"] = {k: asdict(v) for k, v in self.per_demo.items()}
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "SyntheticSpec":
        try:
            per_demo = {str(k): DemographicScoreParams(**v) for k, v in data["per_demo"].items()}
            rest = {k: data[k] for k in ("seed", "dev_fraction", "cross_offset", "cross_fraction") if k in data}
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidSpec(f"malformed spec: {exc}") from None
        return cls(per_demo, **rest)


def load_spec(path) -> SyntheticSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"{path}: not valid JSON ({exc})") from None
    return SyntheticSpec.from_dict(data)


def dump_spec(spec: SyntheticSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _stream(seed: int, enroll: str, probe: str, kind: str) -> np.random.Generator:
    key = [int(seed), zlib.crc32(enroll.encode()), zlib.crc32(probe.encode()), _KIND_KEY[kind]]
    return np.random.default_rng(np.random.SeedSequence(key))


def _cells(spec: SyntheticSpec):
    """Yield ``(enroll, probe, genuine, mean, std, n)`` in canonical order."""
    labels = list(spec.per_demo)
    for e in labels:
        for p in labels:
            q = spec.per_demo[p]
            if e == p:
                yield e, p, False, q.impostor_mean, q.impostor_std, q.n_impostor
                yield e, p, True, q.genuine_mean, q.genuine_std, q.n_genuine
            else:
                n = int(round(spec.cross_fraction * q.n_impostor))
                if n:
                    mean = q.impostor_mean + spec.cross_offset * q.impostor_std
                    yield e, p, False, mean, q.impostor_std, n


def generate(spec: SyntheticSpec) -> SplitDataset:
    """Draw dev and test partitions. Identical spec gives identical output."""
    labels = tuple(spec.per_demo)
    code = {label: i for i, label in enumerate(labels)}
    parts = {"dev": [], "test": []}
    for e, p, genuine, mean, std, n in _cells(spec):
        rng = _stream(spec.seed, e, p, "genuine" if genuine else "impostor")
        draws = rng.normal(mean, std, n)
        n_dev = min(max(int(round(spec.dev_fraction * n)), 0), n)
        for name, chunk in (("dev", draws[:n_dev]), ("test", draws[n_dev:])):
            if len(chunk):
                parts[name].append((code[e], code[p], genuine, chunk))

    def build(chunks) -> ScoreSet:
        if not chunks:
            raise InvalidSpec("spec yields an empty partition; raise sample counts")
        used = sorted({c for e, p, _, _ in chunks for c in (e, p)})
        remap = np.full(len(labels), -1, dtype=np.int32)
        remap[used] = np.arange(len(used), dtype=np.int32)
        return ScoreSet(
            labels=tuple(labels[i] for i in used),
            enroll=np.concatenate([np.full(len(s), remap[e], np.int32) for e, _, _, s in chunks]),
            probe=np.concatenate([np.full(len(s), remap[p], np.int32) for _, p, _, s in chunks]),
            scores=np.concatenate([s for *_, s in chunks]),
            genuine=np.concatenate([np.full(len(s), g, bool) for _, _, g, s in chunks]),
        )

    return SplitDataset(build(parts["dev"]), build(parts["test"]))


_FAIR = DemographicScoreParams(0.0, 1.0, 6.0, 1.0, 1_000_000, 10_000)

PRESETS: dict[str, dict[str, DemographicScoreParams]] = {
    "fair3": {"0": _FAIR, "1": _FAIR, "2": _FAIR},
    "unfair3": {
        "0": _FAIR,
        "1": DemographicScoreParams(0.0, 1.0, 5.6, 1.0, 1_000_000, 10_000),
        "2": DemographicScoreParams(0.3, 1.1, 4.9, 0.6, 1_000_000, 10_000),
    },
}


def preset(name: str, seed: int = 42, scale: float = 1.0) -> SyntheticSpec:
    """Named spec; ``scale`` multiplies every sample count (for quick runs)."""
    try:
        params = PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if scale != 1.0:
        if not scale > 0:
            raise InvalidSpec("scale must be positive")
        params = {k: DemographicScoreParams(v.impostor_mean, v.impostor_std, v.genuine_mean, v.genuine_std,
                                            max(1, int(round(v.n_impostor * scale))),
                                            max(1, int(round(v.n_genuine * scale))))
                  for k, v in params.items()}
    return SyntheticSpec(params, seed=seed)
