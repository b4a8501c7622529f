import itertools
import math

import numpy as np
import pytest

from flownoise.errors import NotEnoughEligibleClasses, SubsetTooSmall
from flownoise.subset import ConfusionMatrix, interclass_entropy, select_subset


def naive_entropy(rates, subset):
    """Independent recomputation: collect the off-diagonal block row-major,
    normalize, accumulate -p*log(p) sequentially.
    """
    total = 0.0
    for i in subset:
        for j in subset:
            if i != j:
                total += float(rates[i][j])
    if total == 0.0:
        return 0.0
    h = 0.0
    for i in subset:
        for j in subset:
            if i != j and rates[i][j] > 0:
                p = float(rates[i][j]) / total
                h -= p * math.log(p)
    return h


def brute_force_best(matrix, k_sub, min_accuracy=0.5):
    eligible = [i for i in range(matrix.k) if matrix.rates[i, i] >= min_accuracy]
    best = None
    for combo in itertools.combinations(eligible, k_sub):
        score = naive_entropy(matrix.rates, combo)
        if best is None or score > best[0]:
            best = (score, combo)
    return best


def random_confusion(rng, k=12, eligible_diag=(0.5, 0.85), ineligible=0):
    """Rates built directly: diagonal drawn above (or below) the cutoff,
    remaining mass spread over the off-diagonal.
    """
    rates = np.zeros((k, k))
    low_rows = rng.choice(k, size=ineligible, replace=False) if ineligible else []
    for i in range(k):
        diag = rng.uniform(0.1, 0.45) if i in low_rows else rng.uniform(*eligible_diag)
        off = rng.uniform(0, 1, k - 1)
        zeros = rng.random(k - 1) < 0.3  # sprinkle structural zeros
        off[zeros] = 0.0
        if off.sum() == 0:
            off[rng.integers(0, k - 1)] = 1.0
        off = off / off.sum() * (1.0 - diag)
        row = np.insert(off, i, diag)
        rates[i] = row
    labels = [f"class{i:02d}" for i in range(k)]
    return ConfusionMatrix.from_entries(rates, labels)


def test_identity_matrix_has_zero_entropy():
    matrix = ConfusionMatrix.from_entries(np.eye(6), [f"c{i}" for i in range(6)])
    assert interclass_entropy(matrix, [0, 1, 2]) == 0.0


def test_two_equal_atoms_give_ln2():
    entries = np.array([
        [0.8, 0.2, 0.0],
        [0.2, 0.8, 0.0],
        [0.0, 0.0, 1.0],
    ])
    matrix = ConfusionMatrix.from_entries(entries, ["a", "b", "c"])
    assert interclass_entropy(matrix, [0, 1]) == pytest.approx(math.log(2), abs=1e-12)


def test_entropy_matches_oracle_on_random_matrices():
    rng = np.random.default_rng(5)
    for _ in range(50):
        matrix = random_confusion(rng, k=8)
        subset = list(rng.choice(8, size=5, replace=False))
        assert interclass_entropy(matrix, subset) == naive_entropy(matrix.rates, subset)


def test_subset_too_small_rejected():
    matrix = ConfusionMatrix.from_entries(np.eye(4), list("abcd"))
    with pytest.raises(SubsetTooSmall):
        interclass_entropy(matrix, [0])
    with pytest.raises(SubsetTooSmall):
        select_subset(matrix, k_sub=1)


def test_exhaustive_selection_matches_oracle_score():
    rng = np.random.default_rng(123)
    for _ in range(100):
        matrix = random_confusion(rng, k=12)
        result = select_subset(matrix, k_sub=5)
        oracle_score, _ = brute_force_best(matrix, 5)
        assert result.score == oracle_score


def test_block_diagonal_selects_one_block():
    k = 10
    rates = np.zeros((k, k))
    for block in (range(0, 5), range(5, 10)):
        for i in block:
            for j in block:
                rates[i, j] = 0.6 if i == j else 0.1
    matrix = ConfusionMatrix.from_entries(rates, [f"c{i}" for i in range(k)])
    result = select_subset(matrix, k_sub=5)
    blocks = (set(range(0, 5)), set(range(5, 10)))
    assert set(result.selected) in blocks


def test_identity_ties_break_lexicographically():
    labels = ["delta", "alpha", "echo", "charlie", "bravo", "foxtrot", "golf"]
    matrix = ConfusionMatrix.from_entries(np.eye(7), labels)
    result = select_subset(matrix, k_sub=5)
    chosen = sorted(matrix.labels[i] for i in result.selected)
    assert chosen == ["alpha", "bravo", "charlie", "delta", "echo"]
    assert result.score == 0.0


def test_low_accuracy_classes_excluded():
    entries = np.array([
        [0.9, 0.05, 0.05, 0.0],
        [0.1, 0.3, 0.3, 0.3],   # diagonal 0.3: ineligible
        [0.2, 0.1, 0.6, 0.1],
        [0.1, 0.1, 0.1, 0.7],
    ])
    matrix = ConfusionMatrix.from_entries(entries, list("abcd"))
    result = select_subset(matrix, k_sub=3)
    assert 1 not in result.selected
    with pytest.raises(NotEnoughEligibleClasses):
        select_subset(matrix, k_sub=4)


def test_permutation_is_a_bijection_with_selected_first():
    rng = np.random.default_rng(9)
    matrix = random_confusion(rng, k=12, ineligible=3)
    result = select_subset(matrix, k_sub=5)
    assert sorted(result.permutation) == list(range(12))
    assert list(result.permutation[:5]) == list(result.selected)
    for i in result.selected:
        assert matrix.rates[i, i] >= 0.5


def test_row_scaling_before_normalization_changes_nothing():
    rng = np.random.default_rng(21)
    matrix = random_confusion(rng, k=10)
    entries = matrix.rates.copy()
    scaled = entries * rng.uniform(1, 50, size=(10, 1))
    rescaled = ConfusionMatrix.from_entries(scaled, matrix.labels)
    a = select_subset(matrix, k_sub=4)
    b = select_subset(rescaled, k_sub=4)
    assert a.selected == b.selected
    assert a.score == pytest.approx(b.score, rel=1e-12)


def test_greedy_path_stays_close_to_oracle():
    # force the greedy branch with a tiny exhaustive limit
    import flownoise.subset as subset_module
    rng = np.random.default_rng(77)
    matrix = random_confusion(rng, k=12)
    oracle_score, _ = brute_force_best(matrix, 5)
    original = subset_module.EXHAUSTIVE_LIMIT
    subset_module.EXHAUSTIVE_LIMIT = 1
    try:
        result = select_subset(matrix, k_sub=5)
    finally:
        subset_module.EXHAUSTIVE_LIMIT = original
    assert result.score <= oracle_score
    assert result.score >= 0.9 * oracle_score
    assert len(set(result.selected)) == 5


def test_csv_round_trip():
    rng = np.random.default_rng(31)
    matrix = random_confusion(rng, k=6)
    back = ConfusionMatrix.from_csv_text(matrix.to_csv_text())
    assert back.labels == matrix.labels
    assert np.allclose(back.rates, matrix.rates, atol=1e-9)


def test_csv_validation():
    with pytest.raises(ValueError):
        ConfusionMatrix.from_csv_text("a,b\n1,0\n")
    with pytest.raises(ValueError):
        ConfusionMatrix.from_csv_text("a,b\n1,0\n0\n")
    with pytest.raises(ValueError):
        ConfusionMatrix.from_csv_text("a,b\n1,-2\n0,1\n")
    with pytest.raises(ValueError):
        ConfusionMatrix.from_csv_text("a,b\n0,0\n0,1\n")
