"""Naive Bayes over mixed nominal/numeric attributes.

Nominal likelihoods and class priors use add-one smoothing; numeric
likelihoods are Gaussian densities fit per class with the population
variance, floored to keep degenerate columns from producing infinities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CLASS, NOMINAL, DataError, Dataset, Instance

VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class NaiveBayesModel:
    """Fitted tables: priors, nominal likelihoods, Gaussian parameters.

    nominal_tables maps attribute index -> array (classes, domain size) of
    smoothed conditional probabilities. gaussian_params maps attribute
    index -> array (classes, 2) of (mean, variance).
    """

    class_labels: tuple[str, ...]
    priors: np.ndarray
    nominal_tables: dict[int, np.ndarray]
    gaussian_params: dict[int, np.ndarray]
    attribute_names: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "class_labels": list(self.class_labels),
            "priors": self.priors.tolist(),
            "nominal_tables": {
                self.attribute_names[i]: t.tolist() for i, t in self.nominal_tables.items()
            },
            "gaussian_params": {
                self.attribute_names[i]: p.tolist() for i, p in self.gaussian_params.items()
            },
        }


def train_nb(d: Dataset) -> NaiveBayesModel:
    """Fit priors and per-attribute class-conditional distributions.

    Priors are smoothed as (count+1)/(n+classes); nominal conditionals as
    (count+1)/(class count+domain size). A class with no instances falls
    back to the whole-data mean and variance for numeric attributes, and its
    smoothed nominal tables are uniform by construction.
    """
    if len(d) == 0:
        raise DataError("cannot train on an empty dataset")
    y = d.class_codes()
    n_classes = len(d.class_labels)
    class_n = np.bincount(y, minlength=n_classes).astype(float)
    priors = (class_n + 1.0) / (len(d) + n_classes)

    nominal_tables: dict[int, np.ndarray] = {}
    gaussian_params: dict[int, np.ndarray] = {}
    for ai in d.predictor_indices:
        attr = d.schema[ai]
        col = [inst.values[ai] for inst in d.instances]
        if attr.kind == NOMINAL:
            size = len(attr.values)
            counts = np.zeros((n_classes, size))
            for v, c in zip(col, y):
                if v is not None:
                    counts[c, v] += 1
            observed = counts.sum(axis=1, keepdims=True)
            nominal_tables[ai] = (counts + 1.0) / (observed + size)
        else:
            vals = np.array([np.nan if v is None else float(v) for v in col])
            seen = ~np.isnan(vals)
            if not seen.any():
                raise DataError(f"attribute {attr.name!r} has no observed values")
            global_mean = vals[seen].mean()
            global_var = max(vals[seen].var(), VARIANCE_FLOOR)
            params = np.empty((n_classes, 2))
            for c in range(n_classes):
                mask = seen & (y == c)
                if mask.any():
                    params[c, 0] = vals[mask].mean()
                    params[c, 1] = max(vals[mask].var(), VARIANCE_FLOOR)
                else:
                    params[c] = (global_mean, global_var)
            gaussian_params[ai] = params
    return NaiveBayesModel(
        class_labels=d.class_labels,
        priors=priors,
        nominal_tables=nominal_tables,
        gaussian_params=gaussian_params,
        attribute_names=tuple(a.name for a in d.schema),
    )


def nb_predict(model: NaiveBayesModel, instance: Instance) -> np.ndarray:
    """Posterior probabilities per class, in class declaration order.

    Computed in log space and normalized to sum to 1. Missing attribute
    values contribute nothing. Ties resolve toward the earlier class when
    the caller takes an argmax, since numpy returns the first maximum.
    """
    log_post = np.log(model.priors).copy()
    for ai, table in model.nominal_tables.items():
        v = instance.values[ai]
        if v is not None:
            log_post += np.log(table[:, v])
    for ai, params in model.gaussian_params.items():
        v = instance.values[ai]
        if v is None:
            continue
        mean, var = params[:, 0], params[:, 1]
        log_post += -0.5 * (np.log(2.0 * math.pi * var) + (v - mean) ** 2 / var)
    log_post -= log_post.max()
    p = np.exp(log_post)
    return p / p.sum()
