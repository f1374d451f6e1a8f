"""Datasets with disjoint demographic groups: CSV loading and Gaussian-mixture synthesis."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus one demographic group id per row.

    ``group_of[p]`` indexes into ``group_names``; ids are dense in ``[0, J)``.
    """

    points: np.ndarray
    group_of: np.ndarray
    group_names: tuple[str, ...]

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        group_of = np.ascontiguousarray(self.group_of, dtype=np.int64)
        if points.ndim != 2 or points.shape[0] == 0:
            raise DataError("points must be a non-empty N x d matrix")
        if group_of.shape != (points.shape[0],):
            raise DataError("group_of must have one entry per point")
        J = len(self.group_names)
        if J == 0 or group_of.min() < 0 or group_of.max() >= J:
            raise DataError("group ids must lie in [0, J)")
        if np.any(np.bincount(group_of, minlength=J) == 0):
            raise DataError("every demographic group must be nonempty")
        points.setflags(write=False)
        group_of.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "group_names", tuple(self.group_names))

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def J(self) -> int:
        return len(self.group_names)

    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.group_of, minlength=self.J)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.points.shape, dtype=np.int64).tobytes())
        h.update(self.points.tobytes())
        h.update(self.group_of.tobytes())
        h.update("\x1f".join(self.group_names).encode("utf-8"))
        return h.hexdigest()

    def subsample(self, n: int, rng: np.random.Generator) -> "Dataset":
        if n >= self.N:
            return self
        idx = np.sort(rng.choice(self.N, size=n, replace=False))
        return _relabel(self.points[idx], self.group_of[idx], self.group_names)

    def zscored(self) -> "Dataset":
        mu = self.points.mean(axis=0)
        sd = self.points.std(axis=0)
        sd[sd == 0] = 1.0
        return Dataset((self.points - mu) / sd, self.group_of, self.group_names)


def _relabel(points, group_of, names) -> Dataset:
    # drops groups that vanished after subsampling, keeping first-appearance order
    _, first = np.unique(group_of, return_index=True)
    order = group_of[np.sort(first)]
    remap = {int(g): i for i, g in enumerate(order)}
    new = np.array([remap[int(g)] for g in group_of], dtype=np.int64)
    return Dataset(points, new, tuple(names[int(g)] for g in order))


def load_csv(path, feature_columns: Sequence[str] | None = None,
             group_column: str = "group") -> Dataset:
    """Read a header-row CSV into a :class:`Dataset`.

    When ``feature_columns`` is None every column other than ``group_column``
    is used as a feature. Group ids follow first-appearance order.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, header row expected") from None
        if group_column not in header:
            raise ConfigError(f"missing column {group_column!r} in {path}")
        if feature_columns is None:
            feature_columns = [h for h in header if h != group_column]
        for name in feature_columns:
            if name not in header:
                raise ConfigError(f"missing column {name!r} in {path}")
        if not feature_columns:
            raise ConfigError("no feature columns selected")
        fidx = [header.index(c) for c in feature_columns]
        gidx = header.index(group_column)

        rows: list[list[float]] = []
        groups: list[int] = []
        names: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            values = []
            for i, col in zip(fidx, feature_columns):
                try:
                    values.append(float(row[i]))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: column {col!r}: cannot parse {row[i]!r} as a number"
                    ) from None
            g = row[gidx].strip()
            if not g:
                raise DataError(f"{path}:{lineno}: empty group cell in column {group_column!r}")
            rows.append(values)
            groups.append(names.setdefault(g, len(names)))

    if not rows:
        raise DataError(f"{path}: no data rows")
    if len(names) < 2:
        raise DataError(f"{path}: J must be >= 2 (found a single demographic group)")
    return Dataset(np.array(rows, dtype=np.float64), np.array(groups), tuple(names))


def write_csv(ds: Dataset, path) -> None:
    """Write ``f0..f{d-1},group``; ``repr`` floats round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(ds.d)] + ["group"])
        for x, g in zip(ds.points, ds.group_of):
            w.writerow([repr(float(v)) for v in x] + [ds.group_names[g]])


@dataclass(frozen=True)
class Component:
    mean: tuple[float, ...]
    var: tuple[float, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class SyntheticSpec:
    components: tuple[Component, ...]
    seed: int = 0
    group_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.components:
            raise ConfigError("synthetic spec needs at least one component")
        d = len(self.components[0].mean)
        J = len(self.components[0].counts)
        for c in self.components:
            if len(c.mean) != d or len(c.var) != d:
                raise ConfigError("all components need mean/var of the same dimension")
            if len(c.counts) != J:
                raise ConfigError("all components need one count per group")
            if any(v <= 0 for v in c.var):
                raise ConfigError("variances must be > 0")
            if any(n < 0 for n in c.counts):
                raise ConfigError("counts must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")

    @property
    def J(self) -> int:
        return len(self.components[0].counts)

    @classmethod
    def from_dict(cls, data: dict, seed: int = 0) -> "SyntheticSpec":
        comps = tuple(
            Component(tuple(map(float, c["mean"])), tuple(map(float, c["var"])),
                      tuple(int(n) for n in c["counts"]))
            for c in data["components"]
        )
        names = data.get("group_names")
        return cls(comps, int(data.get("seed", seed)), tuple(names) if names else None)


def generate_gaussian_mixture(spec: SyntheticSpec) -> Dataset:
    """Sample the mixture; component c / group j gets exactly ``counts[j]`` points.

    One PCG64 stream seeded by ``SeedSequence(seed)``; blocks are drawn
    component by component, group by group, so output is bit-stable.
    """
    total = sum(sum(c.counts) for c in spec.components)
    if total == 0:
        raise DataError("synthetic spec has zero total points")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    blocks, groups = [], []
    for comp in spec.components:
        mean = np.asarray(comp.mean)
        sd = np.sqrt(np.asarray(comp.var))
        for j, n in enumerate(comp.counts):
            if n:
                blocks.append(mean + sd * rng.standard_normal((n, mean.size)))
                groups.append(np.full(n, j))
    names = spec.group_names or tuple(f"g{j}" for j in range(spec.J))
    return Dataset(np.vstack(blocks), np.concatenate(groups), names)


def load_presets() -> dict[str, dict]:
    text = resources.files("fairkm").joinpath("presets.json").read_text(encoding="utf-8")
    return {k: v for k, v in json.loads(text).items() if not k.startswith("_")}


def preset_spec(name: str, seed: int = 0) -> SyntheticSpec:
    presets = load_presets()
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(sorted(presets))}")
    return SyntheticSpec.from_dict(presets[name], seed=seed)


def dataset_balance(ds_or_sizes) -> float:
    """Best balance any clustering can reach: smallest group over largest group."""
    sizes = ds_or_sizes.group_sizes() if isinstance(ds_or_sizes, Dataset) else np.asarray(ds_or_sizes, dtype=float)
    if sizes.size < 2:
        raise DataError("J must be >= 2 for balance to be defined")
    if np.any(sizes <= 0):
        raise DataError("group sizes must be positive")
    return float(sizes.min() / sizes.max())
