"""Error metrics over repeated releases of one query."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Metrics:
    re: float
    mse: float
    al_mean: float
    al_q1: float
    al_median: float
    al_q3: float
    al_max: float
    al_outliers: int
    bias_rate: float
    # True when the raw answer is 0 and AL / bias fall back to absolute error
    al_absolute: bool


def compute_metrics(raw, perturbed) -> Metrics:
    """RE, MSE, accuracy-loss distribution and bias rate.

    ``raw`` is a scalar or an array matching ``perturbed``. Bias rate is
    reported in percent. Outliers follow the 1.5 IQR box-plot rule.
    """
    r = np.broadcast_to(np.asarray(raw, dtype=float), np.shape(perturbed))
    rp = np.asarray(perturbed, dtype=float)
    if rp.size == 0:
        raise ValueError("need at least one repetition")
    err = r - rp
    absolute = bool(np.any(r == 0))
    denom = np.where(r == 0, 1.0, np.abs(r))
    al = np.abs(err) / denom
    q1, med, q3 = np.percentile(al, [25, 50, 75])
    iqr = q3 - q1
    outliers = int(np.count_nonzero((al > q3 + 1.5 * iqr) | (al < q1 - 1.5 * iqr)))
    r_mean = float(np.mean(r))
    bias = abs(float(np.mean(rp)) - r_mean) / (abs(r_mean) if r_mean != 0 else 1.0)
    return Metrics(
        re=float(np.mean(np.abs(err))),
        mse=float(np.mean(err * err)),
        al_mean=float(np.mean(al)),
        al_q1=float(q1), al_median=float(med), al_q3=float(q3),
        al_max=float(np.max(al)),
        al_outliers=outliers,
        bias_rate=100.0 * bias,
        al_absolute=absolute,
    )
