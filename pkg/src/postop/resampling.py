"""Minority-class rebalancing: synthetic oversampling and random resampling.

Synthetic instances are built per minority original from its k nearest
minority neighbours, interpolating numeric fields between the pair and
keeping the original's nominal fields, which keeps every synthetic point
inside the minority region instead of duplicating rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DataError, Dataset, Instance, class_counts
from .seeds import derive_seed


class ResampleError(DataError):
    """Resampling preconditions or configuration violated."""


@dataclass(frozen=True)
class SmoteConfig:
    """Knobs for synthetic oversampling.

    percent is the amount of new minority mass in percent of the current
    minority size and must be a multiple of 100: each original spawns
    percent/100 synthetics. k_neighbors is the neighbourhood size used to
    pick interpolation partners.
    """

    seed: int
    k_neighbors: int = 5
    percent: int = 700

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ResampleError("k_neighbors must be at least 1")
        if self.percent < 0 or self.percent % 100 != 0:
            raise ResampleError("percent must be a non-negative multiple of 100")


@dataclass(frozen=True)
class ResampleRecord:
    """What a resampling step did, for the run manifest.

    provenance maps each output row to its source: ("original", index) or
    ("synthetic", parent_index, neighbor_index) with indexes into the input
    dataset. It is None when per-row lineage is not tracked (repeat mode).
    """

    method: str
    minority_class: str
    original_counts: dict[str, int]
    final_counts: dict[str, int]
    synthetic_created: int
    config: dict
    provenance: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grown = (
            self.final_counts[self.minority_class]
            - self.original_counts[self.minority_class]
        )
        if grown != self.synthetic_created:
            raise ResampleError(
                f"bookkeeping mismatch: minority grew by {grown}, "
                f"created {self.synthetic_created}"
            )

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "minority_class": self.minority_class,
            "original_counts": dict(self.original_counts),
            "final_counts": dict(self.final_counts),
            "synthetic_created": self.synthetic_created,
            "config": dict(self.config),
        }


def _minority_indices(d: Dataset, minority_class: str) -> tuple[int, list[int]]:
    if minority_class not in d.class_labels:
        raise ResampleError(
            f"{minority_class!r} is not a value of the class attribute "
            f"{d.class_attribute.name!r}"
        )
    code = d.class_labels.index(minority_class)
    ci = d.class_index
    idx = [i for i, inst in enumerate(d.instances) if inst.values[ci] == code]
    return code, idx


def _neighbor_table(d: Dataset, min_idx: list[int], k: int) -> np.ndarray:
    """k nearest minority neighbours of each minority instance.

    Distance is Euclidean over min-max normalized numerics (ranges taken
    over the whole dataset) plus a 0/1 mismatch term per nominal attribute.
    Returns positions into min_idx, shape (len(min_idx), k).
    """
    rows = np.asarray(min_idx)
    num = d.numeric_matrix()
    nom = d.codes_matrix()
    if np.isnan(num[rows]).any() or (nom[rows] < 0).any():
        raise ResampleError("minority instances must have no missing values")
    lo = np.nanmin(num, axis=0) if num.size else np.zeros(0)
    hi = np.nanmax(num, axis=0) if num.size else np.zeros(0)
    span = hi - lo
    span[span == 0] = 1.0  # constant column: no contribution either way
    xn = (num[rows] - lo) / span
    xc = nom[rows]

    m = len(rows)
    d2 = np.zeros((m, m))
    if xn.size:
        diff = xn[:, None, :] - xn[None, :, :]
        d2 += (diff * diff).sum(axis=2)
    if xc.size:
        d2 += (xc[:, None, :] != xc[None, :, :]).sum(axis=2)

    order = np.argsort(d2, axis=1, kind="stable")  # ties toward earlier rows
    table = np.empty((m, k), dtype=np.int64)
    for i in range(m):
        neigh = order[i][order[i] != i]
        table[i] = neigh[:k]
    return table


def _interpolate(d: Dataset, xi: Instance, xj: Instance, lam: float,
                 minority_code: int) -> Instance:
    vals = []
    ci = d.class_index
    for a, attr in enumerate(d.schema):
        if a == ci:
            vals.append(minority_code)
        elif attr.kind == "numeric":
            x = xi.values[a]
            vals.append(x + lam * (xj.values[a] - x))
        else:
            # majority vote between the two parents; a tie keeps the
            # original's value, so with two voters the original always wins
            vals.append(xi.values[a])
    return Instance(tuple(vals))


def smote(d: Dataset, minority_class: str, cfg: SmoteConfig) -> tuple[Dataset, ResampleRecord]:
    """Grow the minority class with synthetic interpolated instances.

    Parameters
    ----------
    d : Dataset
        Input table; minority instances must be free of missing values.
    minority_class : str
        Class value to oversample.
    cfg : SmoteConfig
        Amount (percent, multiple of 100), neighbourhood size, and seed.

    Returns
    -------
    (Dataset, ResampleRecord)
        The rebalanced table, shuffled, and a record of what happened.

    Notes
    -----
    For each minority original, in dataset order, percent/100 synthetics
    are created; per synthetic the RNG draws the neighbour choice first
    and one interpolation factor lambda second, and lambda is shared by
    all numeric fields of that synthetic. The combined originals plus
    synthetics are then shuffled by the same RNG. percent=0 returns the
    input unchanged.
    """
    _, min_idx = _minority_indices(d, minority_class)
    m = len(min_idx)
    if m == 0:
        raise ResampleError(f"minority class {minority_class!r} has no instances")
    if m < 2:
        raise ResampleError("oversampling needs at least two minority instances")
    if cfg.k_neighbors >= m:
        raise ResampleError(
            f"k_neighbors={cfg.k_neighbors} needs more than {m} minority instances"
        )
    counts_before = class_counts(d)
    if cfg.percent == 0:
        record = ResampleRecord(
            method="smote",
            minority_class=minority_class,
            original_counts=counts_before,
            final_counts=counts_before,
            synthetic_created=0,
            config={"seed": cfg.seed, "k_neighbors": cfg.k_neighbors, "percent": 0},
            provenance=tuple(("original", i) for i in range(len(d))),
        )
        return d, record

    rng = np.random.default_rng(cfg.seed)
    table = _neighbor_table(d, min_idx, cfg.k_neighbors)
    minority_code = d.class_labels.index(minority_class)
    rounds = cfg.percent // 100

    synthetics: list[Instance] = []
    sources: list[tuple] = [("original", i) for i in range(len(d))]
    for pos, i in enumerate(min_idx):
        for _ in range(rounds):
            choice = int(rng.integers(0, cfg.k_neighbors))
            lam = float(rng.random())
            j = min_idx[table[pos, choice]]
            synthetics.append(
                _interpolate(d, d.instances[i], d.instances[j], lam, minority_code)
            )
            sources.append(("synthetic", i, j))

    combined = list(d.instances) + synthetics
    perm = rng.permutation(len(combined))
    shuffled = [combined[p] for p in perm]
    provenance = tuple(sources[p] for p in perm)
    out = d.replace_instances(shuffled)
    record = ResampleRecord(
        method="smote",
        minority_class=minority_class,
        original_counts=counts_before,
        final_counts=class_counts(out),
        synthetic_created=len(synthetics),
        config={"seed": cfg.seed, "k_neighbors": cfg.k_neighbors, "percent": cfg.percent},
        provenance=provenance,
    )
    return out, record


def smote_repeated(d: Dataset, minority_class: str, times: int,
                   cfg: SmoteConfig) -> tuple[Dataset, ResampleRecord]:
    """Apply 100% oversampling `times` times, doubling the minority each round.

    Each round draws a fresh sub-seed from cfg.seed, runs at percent=100
    with cfg.k_neighbors, and feeds its output to the next round, so later
    rounds interpolate among earlier synthetics as well.
    """
    if times < 1:
        raise ResampleError("times must be at least 1")
    counts_before = class_counts(d)
    current = d
    created = 0
    for r in range(times):
        round_cfg = SmoteConfig(
            seed=derive_seed(cfg.seed, "round", r),
            k_neighbors=cfg.k_neighbors,
            percent=100,
        )
        current, rec = smote(current, minority_class, round_cfg)
        created += rec.synthetic_created
    record = ResampleRecord(
        method="smote-repeat",
        minority_class=minority_class,
        original_counts=counts_before,
        final_counts=class_counts(current),
        synthetic_created=created,
        config={"seed": cfg.seed, "k_neighbors": cfg.k_neighbors, "times": times},
        provenance=None,
    )
    return current, record


def random_oversample(d: Dataset, minority_class: str, target_count: int,
                      seed: int) -> Dataset:
    """Grow the minority class to target_count by copying rows at random.

    All originals are kept; the extra rows are drawn with replacement and
    appended after the existing instances.
    """
    _, min_idx = _minority_indices(d, minority_class)
    if not min_idx:
        raise ResampleError(f"minority class {minority_class!r} has no instances")
    current = len(min_idx)
    if target_count < current:
        raise ResampleError(
            f"target_count {target_count} is below the current count {current}"
        )
    extra = target_count - current
    if extra == 0:
        return d
    rng = np.random.default_rng(seed)
    picks = rng.choice(np.asarray(min_idx), size=extra, replace=True)
    new_rows = list(d.instances) + [d.instances[i] for i in picks]
    return d.replace_instances(new_rows)


def random_undersample(d: Dataset, majority_class: str, target_count: int,
                       seed: int) -> Dataset:
    """Shrink the majority class to target_count rows chosen at random.

    The retained rows keep their original relative order; other classes
    are untouched.
    """
    _, maj_idx = _minority_indices(d, majority_class)
    current = len(maj_idx)
    if target_count > current:
        raise ResampleError(
            f"target_count {target_count} exceeds the current count {current}"
        )
    rng = np.random.default_rng(seed)
    keep = set(rng.choice(np.asarray(maj_idx), size=target_count, replace=False).tolist())
    maj_set = set(maj_idx)
    retained = [i for i in range(len(d)) if i not in maj_set or i in keep]
    return d.subset(retained)
