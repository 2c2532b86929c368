"""GSR record and dataset containers plus on-disk CSV format.

A record is one skin-conductance time series for one subject under one
emotion label. Datasets are flat lists of records addressed by a manifest
file (one record filename per line, relative to the manifest's directory).
"""

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

MIN_SAMPLES = 64

CSV_HEADER = "t_seconds,conductance_us"


class EmotionLabel(Enum):
    HAPPINESS = "happiness"
    GRIEF = "grief"
    FEAR = "fear"
    ANGER = "anger"
    CALM = "calm"


# Canonical label ordering used for stratification, pairwise machine layout
# and report rows.
LABEL_ORDER = (
    EmotionLabel.HAPPINESS,
    EmotionLabel.GRIEF,
    EmotionLabel.FEAR,
    EmotionLabel.ANGER,
    EmotionLabel.CALM,
)


def parse_label(text: str) -> EmotionLabel:
    """Parse a label name, case-insensitively."""
    try:
        return EmotionLabel(text.strip().lower())
    except ValueError:
        names = ", ".join(lab.value for lab in LABEL_ORDER)
        raise ValueError(f"unknown emotion label {text!r} (expected one of: {names})")


@dataclass
class GsrRecord:
    """One conductance time series with identity and acquisition metadata."""

    record_id: str
    subject_id: str
    label: EmotionLabel
    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.record_id:
            raise ValueError("record_id must be non-empty")
        if not self.subject_id:
            raise ValueError("subject_id must be non-empty")
        if not isinstance(self.label, EmotionLabel):
            raise ValueError(f"label must be an EmotionLabel, got {type(self.label).__name__}")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {self.samples.shape}")
        if self.samples.size < MIN_SAMPLES:
            raise ValueError(
                f"record {self.record_id!r} has {self.samples.size} samples, "
                f"need at least {MIN_SAMPLES}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValueError(f"record {self.record_id!r} contains non-finite samples")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def with_samples(self, samples: np.ndarray) -> "GsrRecord":
        """Copy of this record carrying a new sample array."""
        return GsrRecord(
            record_id=self.record_id,
            subject_id=self.subject_id,
            label=self.label,
            sample_rate_hz=self.sample_rate_hz,
            samples=samples,
        )


@dataclass
class Dataset:
    """Ordered collection of records with unique ids.

    May be empty (an empty manifest loads fine); operations that need rows
    reject empty datasets themselves.
    """

    records: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.record_id in seen:
                raise ValueError(f"duplicate record_id {rec.record_id!r}")
            seen.add(rec.record_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def label_counts(self) -> dict:
        counts = {}
        for rec in self.records:
            counts[rec.label] = counts.get(rec.label, 0) + 1
        return counts

    def subjects(self) -> list:
        out = []
        for rec in self.records:
            if rec.subject_id not in out:
                out.append(rec.subject_id)
        return out


def _format_number(value: float) -> str:
    """Integral floats print without the trailing .0 (cosmetic only)."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def save_record(record: GsrRecord, path: str) -> None:
    """Write one record as CSV with `# key: value` metadata lines on top."""
    lines = [
        f"# record_id: {record.record_id}",
        f"# subject: {record.subject_id}",
        f"# label: {record.label.value}",
        f"# sample_rate_hz: {_format_number(record.sample_rate_hz)}",
        CSV_HEADER,
    ]
    for i, v in enumerate(record.samples):
        t = i / record.sample_rate_hz
        lines.append(f"{repr(float(t))},{repr(float(v))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_record(path: str) -> GsrRecord:
    """Read one record CSV written by save_record."""
    meta = {}
    samples = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    idx = 0
    while idx < len(lines) and lines[idx].startswith("#"):
        body = lines[idx][1:].strip()
        if ":" not in body:
            raise ValueError(f"{path}: malformed metadata line {idx + 1}: {lines[idx]!r}")
        key, value = body.split(":", 1)
        meta[key.strip()] = value.strip()
        idx += 1
    if idx >= len(lines) or lines[idx] != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r} after metadata")
    idx += 1
    for lineno, line in enumerate(lines[idx:], start=idx + 1):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}: line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            samples.append(float(parts[1]))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: bad conductance value {parts[1]!r}")
    missing = [k for k in ("record_id", "subject", "label", "sample_rate_hz") if k not in meta]
    if missing:
        raise ValueError(f"{path}: missing metadata keys: {', '.join(missing)}")
    try:
        rate = float(meta["sample_rate_hz"])
    except ValueError:
        raise ValueError(f"{path}: bad sample_rate_hz {meta['sample_rate_hz']!r}")
    return GsrRecord(
        record_id=meta["record_id"],
        subject_id=meta["subject"],
        label=parse_label(meta["label"]),
        sample_rate_hz=rate,
        samples=np.asarray(samples, dtype=np.float64),
    )


def save_dataset(dataset: Dataset, out_dir: str, manifest_name: str = "manifest.txt") -> str:
    """Write every record plus a manifest listing them; returns manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for rec in dataset.records:
        name = f"{rec.record_id}.csv"
        save_record(rec, os.path.join(out_dir, name))
        names.append(name)
    manifest_path = os.path.join(out_dir, manifest_name)
    with open(manifest_path, "w") as fh:
        fh.write("\n".join(names) + "\n")
    return manifest_path


def load_dataset(manifest_path: str) -> Dataset:
    """Load all records named by a manifest file, preserving its order.

    Blank lines and `#` comment lines are ignored.
    """
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path) as fh:
        names = [
            line.strip() for line in fh
            if line.strip() and not line.strip().startswith("#")
        ]
    records = [load_record(os.path.join(base, name)) for name in names]
    return Dataset(records=records)


def stratified_split_indices(labels, test_fraction: float, seed: int):
    """Split row indices into (train, test) stratified by label.

    Per label the test side receives round(test_fraction * n) rows, rounding
    half away from zero, clamped so neither side loses the label entirely.
    Both returned index lists preserve the original row order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = list(labels)
    if not labels:
        raise ValueError("cannot split zero rows")
    by_label = {}
    for i, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(i)
    for lab, rows in by_label.items():
        if len(rows) < 2:
            raise ValueError(
                f"label {lab.value!r} has {len(rows)} record(s), need at least 2 to split"
            )
    rng = np.random.default_rng(seed)
    test_idx = set()
    for lab in LABEL_ORDER:
        rows = by_label.get(lab)
        if rows is None:
            continue
        n = len(rows)
        # floor(x + 0.5) rounds half up; round() would round half to even
        n_test = int(np.floor(test_fraction * n + 0.5))
        n_test = min(max(n_test, 0), n - 1)
        order = rng.permutation(n)
        test_idx.update(rows[j] for j in order[:n_test])
    train = [i for i in range(len(labels)) if i not in test_idx]
    test = [i for i in range(len(labels)) if i in test_idx]
    return train, test


def split_dataset(dataset: Dataset, test_fraction: float, seed: int):
    """Stratified train/test split of a dataset; returns (train, test)."""
    labels = [rec.label for rec in dataset.records]
    train_idx, test_idx = stratified_split_indices(labels, test_fraction, seed)
    train = Dataset(records=[dataset.records[i] for i in train_idx])
    test = Dataset(records=[dataset.records[i] for i in test_idx])
    return train, test
