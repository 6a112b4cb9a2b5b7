"""Disjoint 3-vs-3 criterion splits driving the experiment grid.

From six retained criteria, every size-3 subset F and its complement form a
candidate pair; a pair is kept only when neither side contains a highly
correlated couple or two criteria from the same company dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .dataset import CriterionSpec


class PairsError(ValueError):
    pass


@dataclass(frozen=True)
class PairCombination:
    index: int
    front: tuple[str, ...]        # criteria driving the benchmark labeling
    complement: tuple[str, ...]   # criteria driving model development

    def as_dict(self) -> dict:
        return {"index": self.index, "front": list(self.front),
                "complement": list(self.complement)}


def _normalize_pairs(correlated_pairs) -> set[frozenset[str]]:
    out = set()
    for a, b in correlated_pairs:
        out.add(frozenset((a, b)))
    return out


def _side_ok(side, specs_by_id, correlated) -> bool:
    for a, b in combinations(side, 2):
        if frozenset((a, b)) in correlated:
            return False
        if specs_by_id[a].dimension == specs_by_id[b].dimension:
            return False
    return True


def generate_pairs(criteria: list[CriterionSpec],
                   correlated_pairs) -> list[PairCombination]:
    """All admissible (F, complement) splits in lexicographic order of F."""
    if len(criteria) != 6:
        raise PairsError("pair generation expects exactly six criteria")
    specs_by_id = {c.id: c for c in criteria}
    ids = sorted(specs_by_id)
    correlated = _normalize_pairs(correlated_pairs)
    out = []
    for front in combinations(ids, 3):
        complement = tuple(c for c in ids if c not in front)
        if _side_ok(front, specs_by_id, correlated) and \
           _side_ok(complement, specs_by_id, correlated):
            out.append(PairCombination(len(out) + 1, front, complement))
    return out
