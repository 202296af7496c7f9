"""Binary datasets and their text format (``p n`` header, one sample per line)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise ValueError(f"samples must be a non-empty (n, p) array, got shape {s.shape}")
        if not np.isin(s, (0, 1)).all():
            raise ValueError("samples must be binary")
        s = s.astype(np.uint8)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def p(self) -> int:
        return self.samples.shape[1]


def sufficient_statistic(dataset: Dataset) -> np.ndarray:
    """Empirical mean of the samples, coordinatewise."""
    return dataset.samples.mean(axis=0)


def format_dataset(dataset: Dataset) -> str:
    lines = [f"{dataset.p} {dataset.n}"]
    lines += [" ".join(map(str, row)) for row in dataset.samples.tolist()]
    return "\n".join(lines) + "\n"


def parse_dataset(text: str) -> Dataset:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError("first line must be 'p n'")
    p, n = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != n:
        raise ValueError(f"header says n={n} but found {len(body)} samples")
    if any(len(r) != p for r in body):
        raise ValueError(f"every sample must have {p} bits")
    return Dataset(np.array(body, dtype=np.int64), {"source": "file"})


def read_dataset(path) -> Dataset:
    return parse_dataset(Path(path).read_text())


def write_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(format_dataset(dataset))
