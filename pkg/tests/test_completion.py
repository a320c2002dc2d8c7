"""Preference completion tests: recovery, sample bound, intent lifting."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamfuse import InvalidArgumentError, KernelSpec, TimeGrid
from teamfuse.completion import (
    PreferenceMatrix,
    complete_matrix,
    complete_operator_intent,
    format_preference_matrix,
    parse_preference_matrix,
    sample_complexity,
)


def matrix_from_dense(dense, mask, rank_hint):
    rows, cols = np.nonzero(mask)
    return PreferenceMatrix(
        dense.shape[0], dense.shape[1], rank_hint, rows, cols, dense[rows, cols]
    )


def rank_one_dense(rng, n1=5, n_cols=8):
    u = rng.uniform(0.5, 2.0, size=n1)
    v = rng.uniform(0.5, 2.0, size=n_cols)
    return np.outer(u, v)


def identifiable_mask(rng, shape, fraction):
    """Uniform mask over exactly round(fraction * size) cells, redrawn until
    every row and column holds at least one observation.  A row or column
    with no data is unrecoverable by any method, so such masks test nothing.
    """
    n_obs = round(fraction * shape[0] * shape[1])
    while True:
        flat = rng.choice(shape[0] * shape[1], size=n_obs, replace=False)
        mask = np.zeros(shape, dtype=bool)
        mask[np.unravel_index(flat, shape)] = True
        if mask.any(axis=1).all() and mask.any(axis=0).all():
            return mask


def test_rank_one_recovery_from_sixty_percent():
    rng = np.random.default_rng(0)
    successes = 0
    for trial in range(100):
        dense = rank_one_dense(rng)
        mask = identifiable_mask(rng, dense.shape, 0.6)
        matrix = matrix_from_dense(dense, mask, rank_hint=1)
        completed = complete_matrix(matrix, seed=trial)
        hidden = ~mask
        rel = np.abs(completed[hidden] - dense[hidden]) / np.abs(dense[hidden])
        if rel.max() < 1e-6:
            successes += 1
    assert successes >= 95


def test_rank_two_recovery_dense_mask():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(6, 2))
    v = rng.normal(size=(9, 2))
    dense = u @ v.T
    mask = rng.random(dense.shape) < 0.85
    matrix = matrix_from_dense(dense, mask, rank_hint=2)
    completed = complete_matrix(matrix, seed=3)
    hidden = ~mask
    assert np.abs(completed[hidden] - dense[hidden]).max() < 1e-4


def test_observed_entries_reproduced():
    rng = np.random.default_rng(2)
    dense = rank_one_dense(rng)
    mask = rng.random(dense.shape) < 0.7
    matrix = matrix_from_dense(dense, mask, rank_hint=1)
    completed = complete_matrix(matrix, seed=0)
    assert np.abs(completed[mask] - dense[mask]).max() < 1e-6


def test_empty_row_completes_to_zero():
    dense = np.outer([1.0, 2.0, 3.0], [1.0, 1.5])
    mask = np.ones_like(dense, dtype=bool)
    mask[1, :] = False
    matrix = matrix_from_dense(dense, mask, rank_hint=1)
    completed = complete_matrix(matrix, seed=0)
    assert np.allclose(completed[1], 0.0)


def test_completion_deterministic_in_seed():
    rng = np.random.default_rng(5)
    dense = rank_one_dense(rng)
    mask = rng.random(dense.shape) < 0.5
    matrix = matrix_from_dense(dense, mask, rank_hint=1)
    a = complete_matrix(matrix, seed=11)
    b = complete_matrix(matrix, seed=11)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# sample-count bound


def test_sample_complexity_hand_value():
    # 0.1 * 10^1.2 * 1 * ln(100) = 7.2987... -> ceil -> 8
    report = sample_complexity(10, 100, 1, 0, constant=0.1)
    assert report.required_n == 8
    assert not report.feasible
    by_hand = math.ceil(0.1 * 10**1.2 * 1 * math.log(100) - 0)
    assert report.required_n == by_hand


def test_sample_complexity_offsets_by_observed():
    base = sample_complexity(10, 100, 1, 0, constant=0.1).required_n
    assert sample_complexity(10, 100, 1, 3, constant=0.1).required_n == base - 3
    saturated = sample_complexity(10, 100, 1, 1000, constant=0.1)
    assert saturated.required_n == 0
    assert saturated.feasible


def test_sample_complexity_validation():
    with pytest.raises(InvalidArgumentError):
        sample_complexity(0, 10, 1, 0)
    with pytest.raises(InvalidArgumentError):
        sample_complexity(10, 10, 1, -1)
    with pytest.raises(InvalidArgumentError):
        sample_complexity(10, 10, 1, 0, constant=0.0)


@settings(max_examples=50, deadline=None)
@given(
    n1=st.integers(1, 40),
    n_cols=st.integers(2, 200),
    rank=st.integers(1, 5),
    k=st.integers(0, 500),
    c=st.floats(0.05, 3.0),
)
def test_sample_complexity_monotonicity(n1, n_cols, rank, k, c):
    rank = min(rank, n1, n_cols)
    r = sample_complexity(n1, n_cols, rank, k, constant=c)
    r_more_obs = sample_complexity(n1, n_cols, rank, k + 7, constant=c)
    assert r_more_obs.required_n <= r.required_n
    r_wider = sample_complexity(n1, n_cols + 50, rank, k, constant=c)
    assert r_wider.required_n >= r.required_n
    assert r.required_n >= 0


# ---------------------------------------------------------------------------
# text format


def test_text_format_round_trip():
    rng = np.random.default_rng(7)
    dense = rank_one_dense(rng)
    mask = rng.random(dense.shape) < 0.6
    matrix = matrix_from_dense(dense, mask, rank_hint=1)
    text = format_preference_matrix(matrix)
    parsed = parse_preference_matrix(text)
    assert parsed.n1 == matrix.n1
    assert parsed.n_cols == matrix.n_cols
    assert parsed.rank_hint == matrix.rank_hint
    assert np.array_equal(parsed.rows, matrix.rows)
    assert np.array_equal(parsed.cols, matrix.cols)
    assert np.array_equal(parsed.values, matrix.values)


def test_parse_accepts_comments_and_blanks():
    text = """
    # population preferences
    2 3 1

    0 0 1.5   # strong
    1 2 0.25
    """
    m = parse_preference_matrix(text)
    assert m.observed_count == 2
    assert m.row_entries(1) == {2: 0.25}


def test_parse_rejects_malformed_input():
    with pytest.raises(InvalidArgumentError):
        parse_preference_matrix("")
    with pytest.raises(InvalidArgumentError):
        parse_preference_matrix("2 3\n0 0 1.0\n")
    with pytest.raises(InvalidArgumentError):
        parse_preference_matrix("2 3 1\n0 0\n")
    with pytest.raises(InvalidArgumentError):
        parse_preference_matrix("2 3 1\n0 0 x\n")
    with pytest.raises(InvalidArgumentError):
        parse_preference_matrix("2 3 1\n5 0 1.0\n")
    with pytest.raises(InvalidArgumentError):
        parse_preference_matrix("2 3 1\n0 0 1.0\n0 0 2.0\n")


def test_matrix_validation():
    with pytest.raises(InvalidArgumentError):
        PreferenceMatrix(2, 3, 4, np.array([0]), np.array([0]), np.array([1.0]))
    with pytest.raises(InvalidArgumentError):
        PreferenceMatrix(2, 3, 1, np.array([0]), np.array([9]), np.array([1.0]))


# ---------------------------------------------------------------------------
# intent lifting


def intent_setup(rng, observe_new=(), n1=6, n_cols=4, fully_observe_rest=True):
    """Rank-1 population with a shared taste profile over goals."""
    taste = np.array([0.2, 1.5, 0.6, 1.0])[:n_cols]
    scale = rng.uniform(0.8, 1.2, size=n1)
    dense = np.outer(scale, taste)
    mask = np.zeros_like(dense, dtype=bool)
    if fully_observe_rest:
        mask[:-1, :] = True
    mask[-1, :] = False
    for j in observe_new:
        mask[-1, j] = True
    matrix = matrix_from_dense(dense, mask, rank_hint=1)
    goals = np.array([[-3.0, 4.0], [-1.0, 4.0], [1.0, 4.0], [3.0, 4.0]])[:n_cols]
    grid = TimeGrid(0.0, 0.25, 12)
    return dense, matrix, goals, grid


def test_intent_recovers_population_taste():
    rng = np.random.default_rng(9)
    dense, matrix, goals, grid = intent_setup(rng, observe_new=(0,))
    intent = complete_operator_intent(
        matrix, goals, grid, kernel=KernelSpec(), start=np.array([0.0, -4.0])
    )
    assert len(intent.particles) == 4
    # the population's favorite goal (column 1) dominates the lifted weights
    assert int(np.argmax(intent.weights)) == 1
    expected = np.clip(dense[-1], 0.0, None)
    expected /= expected.sum()
    assert np.abs(intent.weights - expected).max() < 1e-4
    assert intent.feasible  # 21 observed entries >= bound for this size
    # particles head toward their goals
    for j, p in enumerate(intent.particles):
        assert np.linalg.norm(p.points[-1] - goals[j]) < 0.2
        assert np.linalg.norm(p.points[0] - np.array([0.0, -4.0])) < 0.1


def test_fully_observed_row_passes_through_exactly():
    rng = np.random.default_rng(10)
    dense, matrix, goals, grid = intent_setup(rng, observe_new=(0, 1, 2, 3))
    intent = complete_operator_intent(matrix, goals, grid)
    expected = np.clip(dense[-1], 0.0, None)
    expected /= expected.sum()
    assert np.array_equal(intent.weights, expected)


def test_observed_new_row_entries_override_completion():
    rng = np.random.default_rng(11)
    dense, matrix, goals, grid = intent_setup(rng)
    # observe only column 0 of the new row, with a value the completion
    # cannot reproduce exactly; the lifted weights must use it verbatim
    rows = np.concatenate([matrix.rows, [matrix.n1 - 1]])
    cols = np.concatenate([matrix.cols, [0]])
    values = np.concatenate([matrix.values, [50.0]])
    spiked = PreferenceMatrix(matrix.n1, matrix.n_cols, 1, rows, cols, values)
    intent = complete_operator_intent(spiked, goals, grid)

    completed_row = complete_matrix(spiked, seed=0)[matrix.n1 - 1].copy()
    assert completed_row[0] != 50.0  # completion alone lands nearby, not on it
    completed_row[0] = 50.0
    expected = np.clip(completed_row, 0.0, None)
    expected /= expected.sum()
    assert np.array_equal(intent.weights, expected)


def test_infeasible_flag_carries_report():
    rng = np.random.default_rng(12)
    taste = np.array([0.5, 1.0])
    dense = np.outer(rng.uniform(0.8, 1.2, size=30), taste)
    mask = np.zeros_like(dense, dtype=bool)
    mask[0, 0] = True
    mask[1, 1] = True
    matrix = matrix_from_dense(dense, mask, rank_hint=1)
    goals = np.array([[-1.0, 3.0], [1.0, 3.0]])
    intent = complete_operator_intent(matrix, goals, grid=TimeGrid(0.0, 0.25, 8))
    assert not intent.feasible
    assert intent.sample_report is not None
    assert intent.sample_report.required_n > 0
    assert len(intent.particles) == 2


def test_all_nonpositive_preferences_fall_back_to_uniform():
    matrix = PreferenceMatrix(
        2, 2, 1,
        np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1]),
        np.array([-1.0, -2.0, -1.5, -0.5]),
    )
    goals = np.array([[0.0, 1.0], [1.0, 0.0]])
    intent = complete_operator_intent(matrix, goals, TimeGrid(0.0, 0.5, 4))
    assert np.allclose(intent.weights, [0.5, 0.5])
