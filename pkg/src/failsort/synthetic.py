"""Synthetic panel generator standing in for proprietary financial data.

Six criteria matching the retained ratio schema, class-conditional Gaussian
clusters with a configurable mean gap per criterion (sign following the
preference direction), and four year offsets whose noise grows for older
years so that model accuracy decays with distance from the event.
"""

from __future__ import annotations

import numpy as np

from ._seeds import rng_for
from .dataset import (
    ACTIVE,
    DECREASING,
    INACTIVE,
    RATIO_CATALOG,
    RETAINED_SIX,
    CompanyRecord,
    PanelDataset,
)

# within-class couplings mirroring the real ratio structure: the two
# profitability ratios co-move, and the leverage ratio opposes equity share
_RHO_PROFIT = 0.7
_RHO_LEVERAGE = -0.8

# base scale and location per criterion, purely cosmetic
_BASE = {
    "ROA": (0.05, 0.08), "EBITDA_TA": (0.10, 0.10), "EQ_RATIO": (0.45, 0.20),
    "TD_TA": (0.50, 0.20), "CA_TA": (0.45, 0.18), "CA_TS": (0.60, 0.25),
}

_YEAR_NOISE_GROWTH = 0.45     # extra noise per year step away from the event

_STRATUM_WEIGHTS = (0.50, 0.38, 0.09, 0.03)


def gen_synthetic(n_per_class: int, separation: float, seed: int = 0) -> PanelDataset:
    """Balanced two-class panel over the six retained criteria.

    The class mean gap equals separation times the pooled within-class sigma
    on every criterion at year offset 1; older offsets keep the gap but
    inflate the noise, shrinking effective separation.
    """
    if n_per_class < 10:
        raise ValueError("need at least 10 companies per class")
    criteria = [RATIO_CATALOG[c] for c in RETAINED_SIX]
    n = 2 * n_per_class
    labels = [ACTIVE] * n_per_class + [INACTIVE] * n_per_class
    rng = rng_for(seed, "synthetic", n_per_class, separation)

    strata = rng.choice(("large", "medium", "small", "micro"), size=n,
                        p=_STRATUM_WEIGHTS)
    records = []
    for i in range(n):
        prefix = "A" if labels[i] == ACTIVE else "I"
        idx = i if i < n_per_class else i - n_per_class
        records.append(CompanyRecord(f"{prefix}{idx:03d}", labels[i], str(strata[i])))

    cls = np.where(np.array(labels) == ACTIVE, 0.5, -0.5)
    for year in (1, 2, 3, 4):
        noise_scale = 1.0 + _YEAR_NOISE_GROWTH * (year - 1)
        z_profit = rng.normal(size=n)
        z_equity = rng.normal(size=n)
        shared = {
            "ROA": np.sqrt(_RHO_PROFIT) * z_profit,
            "EBITDA_TA": np.sqrt(_RHO_PROFIT) * z_profit,
            "EQ_RATIO": np.sqrt(abs(_RHO_LEVERAGE)) * z_equity,
            "TD_TA": -np.sqrt(abs(_RHO_LEVERAGE)) * z_equity,
            "CA_TA": np.zeros(n),
            "CA_TS": np.zeros(n),
        }
        for spec in criteria:
            mu, sigma = _BASE[spec.id]
            rho = {"ROA": _RHO_PROFIT, "EBITDA_TA": _RHO_PROFIT,
                   "EQ_RATIO": abs(_RHO_LEVERAGE), "TD_TA": abs(_RHO_LEVERAGE)}.get(spec.id, 0.0)
            own = np.sqrt(1.0 - rho) * rng.normal(size=n)
            z = (shared[spec.id] + own) * noise_scale
            sign = -1.0 if spec.direction == DECREASING else 1.0
            vals = mu + sigma * (z + sign * cls * separation)
            for i, rec in enumerate(records):
                rec.values[(spec.id, year)] = float(vals[i])

    return PanelDataset(criteria, records)
