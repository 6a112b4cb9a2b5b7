"""Shared synthetic fixtures for the test suite."""

from __future__ import annotations

import numpy as np

from failsort.dataset import (
    ACTIVE,
    INACTIVE,
    RATIO_CATALOG,
    RETAINED_SIX,
    CompanyRecord,
    PanelDataset,
)

STAGE1_VICTIMS = ("TD_EQ", "CL_TA", "FE_TA")
STAGE3_VICTIMS = ("CF_TA", "DR")
STAGE2_SURVIVORS = RETAINED_SIX + STAGE3_VICTIMS


def screening_panel(seed: int = 20240301, n_per_class: int = 57) -> PanelDataset:
    """A 37-ratio panel whose screening outcome is pinned by construction.

    Three ratios are near-constant in most years (weak information value),
    twenty-six have equal class means but unequal spread (high IV, flat
    t-test), and eight carry a real class gap. Within the eight, CF_TA tracks
    ROA and EBITDA_TA and DR tracks EQ_RATIO and TD_TA in every year, so the
    correlation stage eliminates exactly those two.
    """
    rng = np.random.default_rng(seed)
    criteria = list(RATIO_CATALOG.values())
    order = [c.id for c in criteria]
    n = 2 * n_per_class
    labels = [ACTIVE] * n_per_class + [INACTIVE] * n_per_class

    records = [
        CompanyRecord(f"co{i:03d}", labels[i],
                      ("large", "medium", "small", "micro")[i % 4])
        for i in range(n)
    ]

    gap = 0.8  # class mean gap in sigma units for the eight real predictors
    shift = np.where(np.array(labels) == ACTIVE, gap / 2, -gap / 2)

    others = [c for c in order
              if c not in STAGE2_SURVIVORS and c not in STAGE1_VICTIMS]
    assert len(others) == 26

    for year in (1, 2, 3, 4):
        z_r = rng.normal(size=n)   # ROA driver
        z_e = rng.normal(size=n)   # EBITDA_TA driver
        z_q = rng.normal(size=n)   # EQ_RATIO driver
        z_t = rng.normal(size=n)   # TD_TA extra driver
        cols = {
            "ROA": z_r + shift,
            "EBITDA_TA": z_e + shift,
            "CF_TA": 0.6 * z_r + 0.6 * z_e + 0.35 * rng.normal(size=n) + shift,
            "EQ_RATIO": z_q + shift,
            "TD_TA": -0.25 * z_q + 0.9682 * z_t - shift,
            "DR": -0.85 * z_q + 0.5035 * z_t + 0.155 * rng.normal(size=n) - shift,
            "CA_TA": rng.normal(size=n) + shift,
            "CA_TS": rng.normal(size=n) - shift,
        }
        for cid in others:
            spread = np.where(np.array(labels) == ACTIVE, 1.0, 2.5)
            v = rng.normal(size=n) * spread
            # equalize class sample means so the t statistic vanishes exactly
            v[:n_per_class] -= v[:n_per_class].mean()
            v[n_per_class:] -= v[n_per_class:].mean()
            cols[cid] = v
        for cid in STAGE1_VICTIMS:
            if year == 1:
                cols[cid] = rng.normal(size=n) + shift
            else:
                cols[cid] = np.full(n, 0.5)
        for i, rec in enumerate(records):
            for cid in order:
                rec.values[(cid, year)] = float(cols[cid][i])

    return PanelDataset(criteria, records)
