"""Class-subset selection from a confusion matrix.

Given per-class confusion rates, find the k classes most confused among
each other: the subset whose off-diagonal confusion block, renormalized,
has maximal Shannon entropy. Small problems are solved exhaustively;
large ones fall back to a greedy seed-grow-swap search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import NotEnoughEligibleClasses, SubsetTooSmall

EXHAUSTIVE_LIMIT = 10**6

# block orderings are brute-forced up to this size, chained greedily beyond
_ORDER_BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple[str, ...]
    rates: np.ndarray  # (k, k) row-normalized, row = true class

    @property
    def k(self) -> int:
        return len(self.labels)

    @classmethod
    def from_entries(cls, entries: np.ndarray, labels: list[str] | tuple[str, ...]) -> "ConfusionMatrix":
        entries = np.asarray(entries, dtype=np.float64)
        labels = tuple(labels)
        k = len(labels)
        if entries.shape != (k, k):
            raise ValueError(f"entries shape {entries.shape} does not match {k} labels")
        if len(set(labels)) != k:
            raise ValueError("labels must be distinct")
        if (entries < 0).any():
            raise ValueError("confusion entries must be nonnegative")
        row_sums = entries.sum(axis=1)
        if (row_sums <= 0).any():
            bad = labels[int(np.argmin(row_sums))]
            raise ValueError(f"row for class {bad!r} sums to zero")
        return cls(labels=labels, rates=entries / row_sums[:, None])

    @classmethod
    def from_csv_text(cls, text: str) -> "ConfusionMatrix":
        """Parse 'label,label,...' header followed by k rows of k values."""
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines:
            raise ValueError("empty confusion matrix text")
        labels = [cell.strip() for cell in lines[0].split(",")]
        k = len(labels)
        if len(lines) != k + 1:
            raise ValueError(f"expected {k} data rows after the header, got {len(lines) - 1}")
        rows = []
        for line in lines[1:]:
            cells = [cell.strip() for cell in line.split(",")]
            if len(cells) != k:
                raise ValueError(f"row has {len(cells)} cells, expected {k}: {line!r}")
            rows.append([float(cell) for cell in cells])
        return cls.from_entries(np.array(rows), labels)

    def to_csv_text(self) -> str:
        lines = [",".join(self.labels)]
        for row in self.rates:
            lines.append(",".join(f"{value:.10g}" for value in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SubsetResult:
    selected: tuple[int, ...]  # block order, size k_sub
    score: float
    permutation: tuple[int, ...]  # full reordering, selected block first


def interclass_entropy(matrix: ConfusionMatrix, subset) -> float:
    """Shannon entropy of the renormalized off-diagonal block of `subset`.

    Zero entries contribute nothing; an all-zero off-diagonal block scores
    0. Accumulation is sequential in row-major block order so repeated
    evaluations are bit-reproducible.
    """
    indices = list(subset)
    if len(indices) < 2:
        raise SubsetTooSmall(f"subset must have at least 2 classes, got {len(indices)}")
    if len(set(indices)) != len(indices):
        raise ValueError("subset indices must be distinct")
    rates = matrix.rates
    total = 0.0
    for i in indices:
        for j in indices:
            if i != j:
                total += float(rates[i, j])
    if total == 0.0:
        return 0.0
    entropy = 0.0
    for i in indices:
        for j in indices:
            if i != j:
                p = float(rates[i, j]) / total
                if p > 0.0:
                    entropy -= p * math.log(p)
    return entropy


def _label_key(matrix: ConfusionMatrix, indices) -> tuple[str, ...]:
    return tuple(sorted(matrix.labels[i] for i in indices))


def _best_subset_exhaustive(matrix: ConfusionMatrix, eligible: list[int], k_sub: int) -> tuple[list[int], float]:
    best_indices: list[int] | None = None
    best_score = -1.0
    best_key: tuple[str, ...] | None = None
    for combo in itertools.combinations(eligible, k_sub):
        score = interclass_entropy(matrix, combo)
        key = _label_key(matrix, combo)
        if score > best_score or (score == best_score and (best_key is None or key < best_key)):
            best_indices = list(combo)
            best_score = score
            best_key = key
    assert best_indices is not None
    return best_indices, best_score


def _best_subset_greedy(matrix: ConfusionMatrix, eligible: list[int], k_sub: int) -> tuple[list[int], float]:
    rates = matrix.rates
    labels = matrix.labels

    # seed: eligible pair with maximal symmetrized confusion
    best_pair = None
    best_mass = -1.0
    for a, b in itertools.combinations(eligible, 2):
        mass = float(rates[a, b] + rates[b, a])
        key = tuple(sorted((labels[a], labels[b])))
        if mass > best_mass or (mass == best_mass and key < tuple(sorted((labels[best_pair[0]], labels[best_pair[1]])))):
            best_pair = (a, b)
            best_mass = mass
    current = list(best_pair)

    while len(current) < k_sub:
        best_candidate = None
        best_score = -1.0
        for candidate in eligible:
            if candidate in current:
                continue
            score = interclass_entropy(matrix, current + [candidate])
            if (
                best_candidate is None
                or score > best_score
                or (score == best_score and labels[candidate] < labels[best_candidate])
            ):
                best_candidate = candidate
                best_score = score
        current.append(best_candidate)

    # single-swap hill climbing to a local optimum
    current_score = interclass_entropy(matrix, current)
    improved = True
    while improved:
        improved = False
        for inside in list(current):
            for outside in eligible:
                if outside in current:
                    continue
                trial = [outside if c == inside else c for c in current]
                score = interclass_entropy(matrix, trial)
                if score > current_score:
                    current = trial
                    current_score = score
                    improved = True
    return current, current_score


def _order_block(matrix: ConfusionMatrix, selected: list[int]) -> list[int]:
    """Order the selected classes to maximize adjacent symmetrized confusion."""
    rates = matrix.rates
    labels = matrix.labels

    def adjacency(order) -> float:
        return sum(float(rates[a, b] + rates[b, a]) for a, b in zip(order, order[1:]))

    by_label = sorted(selected, key=lambda i: labels[i])
    if len(selected) <= _ORDER_BRUTE_FORCE_LIMIT:
        best = None
        best_mass = -1.0
        for perm in itertools.permutations(by_label):
            mass = adjacency(perm)
            if mass > best_mass:
                best = list(perm)
                best_mass = mass
        return best

    # greedy chain: start at the strongest pair, extend at whichever end gains most
    remaining = set(by_label)
    a, b = max(
        itertools.combinations(by_label, 2),
        key=lambda p: (float(rates[p[0], p[1]] + rates[p[1], p[0]]), tuple(sorted((labels[p[0]], labels[p[1]])))),
    )
    chain = [a, b]
    remaining -= {a, b}
    while remaining:
        def gain(candidate, end):
            return float(rates[candidate, end] + rates[end, candidate])
        front = max(remaining, key=lambda c: (gain(c, chain[0]), labels[c]))
        back = max(remaining, key=lambda c: (gain(c, chain[-1]), labels[c]))
        if gain(front, chain[0]) > gain(back, chain[-1]):
            chain.insert(0, front)
            remaining.discard(front)
        else:
            chain.append(back)
            remaining.discard(back)
    return chain


def select_subset(matrix: ConfusionMatrix, k_sub: int, min_accuracy: float = 0.5) -> SubsetResult:
    """Pick the k_sub eligible classes with maximal interclass entropy.

    Classes whose diagonal rate falls below min_accuracy are excluded up
    front. Search is exhaustive while the number of candidate subsets stays
    within EXHAUSTIVE_LIMIT, greedy seed-grow-swap beyond that. The result
    carries the selected block (ordered so neighbouring classes confuse
    each other most) and a full permutation placing that block first.
    """
    if k_sub < 2:
        raise SubsetTooSmall(f"k_sub must be at least 2, got {k_sub}")
    diag = np.diagonal(matrix.rates)
    eligible = [i for i in range(matrix.k) if diag[i] >= min_accuracy]
    if len(eligible) < k_sub:
        raise NotEnoughEligibleClasses(
            f"{len(eligible)} classes have diagonal >= {min_accuracy}, need {k_sub}"
        )
    eligible.sort(key=lambda i: matrix.labels[i])

    if comb(len(eligible), k_sub) <= EXHAUSTIVE_LIMIT:
        chosen, score = _best_subset_exhaustive(matrix, eligible, k_sub)
    else:
        chosen, score = _best_subset_greedy(matrix, eligible, k_sub)

    block = _order_block(matrix, chosen)
    rest = sorted((i for i in range(matrix.k) if i not in set(block)), key=lambda i: matrix.labels[i])
    return SubsetResult(selected=tuple(block), score=score, permutation=tuple(block + rest))
