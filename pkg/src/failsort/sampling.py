"""Balanced-sample construction, stratified k-fold splitting and uniform
simplex weight sampling. Deterministic functions of (inputs, seed)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._seeds import rng_for

FOLD_PARTITION = "partition"
FOLD_LITERAL = "paper_literal"

WEIGHTS_HIT_AND_RUN = "hit_and_run"
WEIGHTS_EXACT = "exact_uniform"

HIT_AND_RUN_BURN_IN = 100


class SamplingError(ValueError):
    pass


@dataclass
class StratifiedPlan:
    counts: tuple[int, ...]          # per-stratum population n_j
    total_inactive: int
    quotas: tuple[float, ...]
    allocations: tuple[int, ...]


@dataclass
class FoldPlan:
    k: int
    folds: list[tuple[tuple[str, ...], tuple[str, ...]]]   # (train, test) ids
    seed: int
    mode: str

    def to_json(self) -> str:
        return json.dumps({
            "k": self.k, "seed": self.seed, "mode": self.mode,
            "folds": [{"fold": i, "train": list(tr), "test": list(te)}
                      for i, (tr, te) in enumerate(self.folds)],
        }, indent=2)


def stratified_allocation(counts, total_inactive: int) -> StratifiedPlan:
    """Quota per stratum is total_inactive * n_j / sum(n); allocations round
    to nearest with a floor of one for nonempty strata, then a largest
    remainder pass restores the exact total."""
    counts = tuple(int(c) for c in counts)
    total_active = sum(counts)
    if total_active <= 0:
        raise SamplingError("total active count must be positive")
    nonempty = [j for j, c in enumerate(counts) if c > 0]
    if total_inactive < len(nonempty):
        raise SamplingError("total below the floor of one per nonempty stratum")

    quotas = tuple(total_inactive * c / total_active for c in counts)
    alloc = [0] * len(counts)
    rem = [0.0] * len(counts)
    for j, q in enumerate(quotas):
        base = math.floor(q)
        rem[j] = q - base
        alloc[j] = base + (1 if rem[j] >= 0.5 else 0)
        if counts[j] > 0:
            alloc[j] = max(alloc[j], 1)

    diff = total_inactive - sum(alloc)
    if diff > 0:
        # grant extra units by largest remainder, lower index first on ties
        order = sorted(nonempty, key=lambda j: (-rem[j], j))
        i = 0
        while diff > 0:
            alloc[order[i % len(order)]] += 1
            diff -= 1
            i += 1
    elif diff < 0:
        # withdraw by smallest remainder, higher index first on ties,
        # never below the floor
        order = sorted(nonempty, key=lambda j: (rem[j], -j))
        i = 0
        while diff < 0 and i < 10 * len(order):
            j = order[i % len(order)]
            if alloc[j] > 1:
                alloc[j] -= 1
                diff += 1
            i += 1
        if diff < 0:
            raise SamplingError("cannot satisfy floor-of-one with this total")
    return StratifiedPlan(counts, int(total_inactive), quotas, tuple(alloc))


def stratified_resample(ids_by_stratum: dict[str, list[str]], total_inactive: int,
                        seed: int) -> tuple[StratifiedPlan, list[str]]:
    """Allocate per stratum and draw ids uniformly without replacement."""
    strata = list(ids_by_stratum)
    counts = [len(ids_by_stratum[s]) for s in strata]
    plan = stratified_allocation(counts, total_inactive)
    sampled: list[str] = []
    for s, a in zip(strata, plan.allocations):
        pool = ids_by_stratum[s]
        if a > len(pool):
            raise SamplingError(f"allocation {a} exceeds population of stratum {s!r}")
        rng = rng_for(seed, "stratified", s)
        take = rng.choice(len(pool), size=a, replace=False)
        sampled.extend(pool[i] for i in sorted(take))
    return plan, sampled


def _class_pools(ids, labels):
    pools: dict[str, list[str]] = {}
    for i, lab in zip(ids, labels):
        pools.setdefault(lab, []).append(i)
    return pools


def kfold_split(ids, labels, k: int, mode: str = FOLD_PARTITION,
                seed: int = 0) -> FoldPlan:
    """Class-stratified five-fold style splitting.

    partition: test folds partition the sample, sizes differ by at most one.
    paper_literal: k pairwise-disjoint test sets of exactly floor(m/k) ids;
    the remainder never appears in any test set.
    """
    ids = list(ids)
    labels = list(labels)
    if k < 2:
        raise SamplingError("k must be at least 2")
    pools = _class_pools(ids, labels)
    for lab, pool in pools.items():
        if len(pool) < k:
            raise SamplingError(f"class {lab!r} smaller than k")
    shuffled: dict[str, list[str]] = {}
    for lab in sorted(pools):
        pool = list(pools[lab])
        rng = rng_for(seed, "kfold", lab)
        perm = rng.permutation(len(pool))
        shuffled[lab] = [pool[i] for i in perm]

    test_sets: list[list[str]] = [[] for _ in range(k)]
    if mode == FOLD_PARTITION:
        for lab in sorted(shuffled):
            for i, cid in enumerate(shuffled[lab]):
                test_sets[i % k].append(cid)
    elif mode == FOLD_LITERAL:
        m = len(ids)
        t = m // k
        per_class = {lab: len(pool) // k for lab, pool in shuffled.items()}
        short = t - sum(per_class.values())
        if short > 0:
            # top up by largest remainder of m_c / k, stable class order
            order = sorted(shuffled, key=lambda lab: (-(len(shuffled[lab]) % k), lab))
            for lab in order[:short]:
                per_class[lab] += 1
        for f in range(k):
            for lab in sorted(shuffled):
                c = per_class[lab]
                test_sets[f].extend(shuffled[lab][f * c:(f + 1) * c])
    else:
        raise SamplingError(f"unknown fold mode {mode!r}")

    id_set = set(ids)
    folds = []
    for f in range(k):
        test = tuple(test_sets[f])
        train = tuple(i for i in ids if i not in set(test))
        assert set(train) | set(test) <= id_set
        folds.append((train, test))
    return FoldPlan(k, folds, seed, mode)


def sample_weights(n: int, scenarios: int, seed: int = 0,
                   method: str = WEIGHTS_HIT_AND_RUN) -> np.ndarray:
    """scenarios x n weight vectors uniform on the unit simplex.

    hit_and_run walks along random chords of the simplex with a fixed
    burn-in, emitting one vector per step; exact_uniform normalizes
    independent unit-rate exponentials (same target law, used as oracle).
    """
    if n < 1 or scenarios < 1:
        raise SamplingError("need n >= 1 and scenarios >= 1")
    if n == 1:
        return np.ones((scenarios, 1))
    rng = rng_for(seed, "weights", method, n)
    if method == WEIGHTS_EXACT:
        e = rng.exponential(size=(scenarios, n))
        return e / e.sum(axis=1, keepdims=True)
    if method != WEIGHTS_HIT_AND_RUN:
        raise SamplingError(f"unknown weight sampling method {method!r}")

    out = np.empty((scenarios, n))
    x = np.full(n, 1.0 / n)
    emitted = 0
    step = 0
    while emitted < scenarios:
        d = rng.normal(size=n)
        d -= d.mean()                      # stay inside the sum-to-one plane
        norm = np.linalg.norm(d)
        if norm < 1e-12:
            continue
        d /= norm
        # chord limits from x + t*d >= 0
        with np.errstate(divide="ignore"):
            ratios = -x / d
        t_max = np.min(ratios[d < 0]) if np.any(d < 0) else 0.0
        t_min = np.max(ratios[d > 0]) if np.any(d > 0) else 0.0
        x = x + rng.uniform(t_min, t_max) * d
        np.clip(x, 0.0, None, out=x)
        x /= x.sum()
        step += 1
        if step > HIT_AND_RUN_BURN_IN:
            out[emitted] = x
            emitted += 1
    return out
