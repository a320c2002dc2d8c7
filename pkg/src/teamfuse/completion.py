"""Completing a new operator's sparse preferences from a population matrix.

Rows of the preference matrix are operators, columns are candidate goals,
entries are scalar preference scores, and most of the matrix is missing.
A low-rank alternating ridge regression fills in the blanks; the bottom
row is the operator currently being assisted, whose completed preference
profile is lifted into weighted goal-conditioned trajectory particles
that plug straight into particle fusion.

A crude sample-count bound decides whether completion is trustworthy for
the given rank and matrix size; when it is not, the lifted intent is still
produced but flagged infeasible, carrying the accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beliefs import KernelSpec, ObservationSet, TimeGrid, gp_posterior
from .errors import InvalidArgumentError
from .fusion import ParticleIntent

RIDGE_LAMBDA = 1e-6


@dataclass(frozen=True)
class PreferenceMatrix:
    """Partially observed n1 x n_cols preference matrix as index triples."""

    n1: int
    n_cols: int
    rank_hint: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.n1 < 1 or self.n_cols < 1:
            raise InvalidArgumentError("matrix dimensions must be positive")
        if not (1 <= self.rank_hint <= min(self.n1, self.n_cols)):
            raise InvalidArgumentError(
                "rank_hint must lie in [1, min(n1, n_cols)]"
            )
        rows = np.asarray(self.rows, dtype=int)
        cols = np.asarray(self.cols, dtype=int)
        values = np.asarray(self.values, dtype=float)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise InvalidArgumentError("rows, cols, values must be equal-length vectors")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n1:
                raise InvalidArgumentError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.n_cols:
                raise InvalidArgumentError("column index out of range")
            if not np.all(np.isfinite(values)):
                raise InvalidArgumentError("preference values must be finite")
            flat = rows * self.n_cols + cols
            if np.unique(flat).size != flat.size:
                raise InvalidArgumentError("duplicate (row, col) entry")
        for name, arr in (("rows", rows), ("cols", cols), ("values", values)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def observed_count(self) -> int:
        return int(self.rows.size)

    def observed_mask(self) -> np.ndarray:
        mask = np.zeros((self.n1, self.n_cols), dtype=bool)
        mask[self.rows, self.cols] = True
        return mask

    def dense(self, fill: float = 0.0) -> np.ndarray:
        out = np.full((self.n1, self.n_cols), fill)
        out[self.rows, self.cols] = self.values
        return out

    def row_entries(self, row: int) -> dict[int, float]:
        sel = self.rows == row
        return {int(c): float(v) for c, v in zip(self.cols[sel], self.values[sel])}


def parse_preference_matrix(text: str) -> PreferenceMatrix:
    """Parse the plain-text exchange format.

    First non-blank line: ``n1 n_cols rank_hint``; every following
    non-blank line: ``row col value``.  ``#`` starts a comment.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body))
    if not lines:
        raise InvalidArgumentError("empty preference matrix text")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3:
        raise InvalidArgumentError(
            f"line {lineno}: header must be 'n1 n_cols rank_hint', got {header!r}"
        )
    try:
        n1, n_cols, rank_hint = (int(p) for p in parts)
    except ValueError as exc:
        raise InvalidArgumentError(f"line {lineno}: non-integer header field") from exc
    rows, cols, values = [], [], []
    for lineno, body in lines[1:]:
        parts = body.split()
        if len(parts) != 3:
            raise InvalidArgumentError(
                f"line {lineno}: entry must be 'row col value', got {body!r}"
            )
        try:
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            values.append(float(parts[2]))
        except ValueError as exc:
            raise InvalidArgumentError(f"line {lineno}: malformed entry {body!r}") from exc
    return PreferenceMatrix(
        n1, n_cols, rank_hint, np.array(rows, dtype=int),
        np.array(cols, dtype=int), np.array(values, dtype=float),
    )


def format_preference_matrix(matrix: PreferenceMatrix) -> str:
    """Inverse of :func:`parse_preference_matrix` (entries in stored order)."""
    out = [f"{matrix.n1} {matrix.n_cols} {matrix.rank_hint}"]
    for r, c, v in zip(matrix.rows, matrix.cols, matrix.values):
        out.append(f"{int(r)} {int(c)} {float(v)!r}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# completion


def _spectral_init(matrix: PreferenceMatrix, r: int) -> np.ndarray:
    """Right factor from the SVD of the zero-filled, rate-rescaled matrix.

    Scaling by the inverse sampling rate makes the zero-filled matrix an
    unbiased estimate of the full one, so its top singular directions are
    a sound starting subspace and carry the right sign pattern.
    """
    rate = matrix.observed_count / (matrix.n1 * matrix.n_cols)
    filled = matrix.dense(fill=0.0) / max(rate, 1e-12)
    _, s, vt = np.linalg.svd(filled, full_matrices=False)
    return (vt[:r] * np.sqrt(np.maximum(s[:r], 1e-12))[:, None]).T


def _als_sweeps(matrix, v, lam, max_iters, tol):
    """Alternate ridge refits of U and V; returns the reconstruction.

    After the ridge iteration settles, two unregularized least-squares
    sweep pairs remove the uniform shrinkage the penalty leaves on the
    factors (relative bias of order lam over the Gram scale, which matters
    when exact recovery is expected).
    """
    r = v.shape[1]
    u = np.zeros((matrix.n1, r))
    by_row = [np.flatnonzero(matrix.rows == i) for i in range(matrix.n1)]
    by_col = [np.flatnonzero(matrix.cols == j) for j in range(matrix.n_cols)]
    eye = lam * np.eye(r)

    def sweep_pair(regularized: bool):
        for i, sel in enumerate(by_row):
            if sel.size == 0:
                u[i] = 0.0
                continue
            vv = v[matrix.cols[sel]]
            y = matrix.values[sel]
            if regularized:
                u[i] = np.linalg.solve(vv.T @ vv + eye, vv.T @ y)
            else:
                u[i] = np.linalg.lstsq(vv, y, rcond=None)[0]
        for j, sel in enumerate(by_col):
            if sel.size == 0:
                v[j] = 0.0
                continue
            uu = u[matrix.rows[sel]]
            y = matrix.values[sel]
            if regularized:
                v[j] = np.linalg.solve(uu.T @ uu + eye, uu.T @ y)
            else:
                v[j] = np.linalg.lstsq(uu, y, rcond=None)[0]

    prev = None
    for _ in range(max_iters):
        sweep_pair(regularized=True)
        current = u @ v.T
        if prev is not None and np.abs(current - prev).max() < tol:
            break
        prev = current
    for _ in range(2):
        sweep_pair(regularized=False)
    return u @ v.T


def complete_matrix(
    matrix: PreferenceMatrix,
    lam: float = RIDGE_LAMBDA,
    max_iters: int = 200,
    tol: float = 1e-10,
    seed: int = 0,
) -> np.ndarray:
    """Fill the matrix by rank-``rank_hint`` alternating ridge least squares.

    Factors U (n1 x r) and V (n_cols x r) are refit alternately against the
    observed entries with an L2 penalty ``lam``, starting from a spectral
    initialization; iteration stops when the reconstruction moves less than
    ``tol`` or after ``max_iters`` rounds.  A bad local basin (observed
    entries left poorly fit) triggers seeded random restarts, keeping the
    best observed fit.  Rows or columns with no observations stay at zero.
    """
    if lam < 0:
        raise InvalidArgumentError("lam must be nonnegative")
    if matrix.observed_count == 0:
        return np.zeros((matrix.n1, matrix.n_cols))
    r = matrix.rank_hint
    scale = np.abs(matrix.values).max() or 1.0

    def observed_misfit(completed):
        return np.abs(completed[matrix.rows, matrix.cols] - matrix.values).max()

    best = _als_sweeps(matrix, _spectral_init(matrix, r), lam, max_iters, tol)
    best_misfit = observed_misfit(best)
    rng = np.random.default_rng(seed)
    restarts = 0
    while best_misfit > 1e-6 * scale and restarts < 4:
        v = rng.standard_normal((matrix.n_cols, r)) / math.sqrt(r)
        candidate = _als_sweeps(matrix, v, lam, max_iters, tol)
        misfit = observed_misfit(candidate)
        if misfit < best_misfit:
            best, best_misfit = candidate, misfit
        restarts += 1
    return best


@dataclass(frozen=True)
class SampleComplexityReport:
    """Whether the observed entry count supports completion at this size.

    ``required_n`` counts how many more observations the bound asks for on
    top of the ``observed_count`` already in hand; zero means feasible.
    """

    n1: int
    n_cols: int
    rank: int
    observed_count: int
    constant: float
    required_n: int

    @property
    def feasible(self) -> bool:
        return self.required_n == 0


def sample_complexity(
    n1: int,
    n_cols: int,
    rank: int,
    observed_count: int,
    constant: float = 1.0,
) -> SampleComplexityReport:
    """Additional observations needed: max(0, ceil(C * n1^1.2 * r * ln(n_cols) - k)).

    The bound grows a bit faster than linearly in the row count, linearly
    in rank, and logarithmically in the column count; ``observed_count``
    (k) offsets it one for one.
    """
    if n1 < 1 or n_cols < 1 or rank < 1:
        raise InvalidArgumentError("n1, n_cols, rank must be positive")
    if observed_count < 0:
        raise InvalidArgumentError("observed_count must be nonnegative")
    if constant <= 0:
        raise InvalidArgumentError("constant must be positive")
    need = constant * n1**1.2 * rank * math.log(n_cols) - observed_count
    required = max(0, math.ceil(need))
    return SampleComplexityReport(n1, n_cols, rank, observed_count, constant, required)


# ---------------------------------------------------------------------------
# lifting completed preferences into trajectory particles


def complete_operator_intent(
    matrix: PreferenceMatrix,
    goals: np.ndarray,
    grid: TimeGrid,
    kernel: KernelSpec | None = None,
    start: np.ndarray | None = None,
    constant: float = 1.0,
    seed: int = 0,
) -> ParticleIntent:
    """Lift the bottom row's completed preferences into trajectory particles.

    The bottom row of ``matrix`` is the operator being assisted; ``goals``
    assigns one candidate goal position per column.  The row is completed
    by :func:`complete_matrix` with any directly observed entries passing
    through verbatim, preferences are clipped at zero and normalized into
    particle weights, and each goal becomes the mean of a goal-conditioned
    GP (anchored at ``start`` when given).

    When the sample-count bound is not met the intent is still produced,
    with ``feasible`` cleared and the report attached.
    """
    goals = np.asarray(goals, dtype=float)
    if goals.shape != (matrix.n_cols, 2):
        raise InvalidArgumentError(
            f"goals must have shape ({matrix.n_cols}, 2), got {goals.shape}"
        )
    report = sample_complexity(
        matrix.n1, matrix.n_cols, matrix.rank_hint, matrix.observed_count, constant
    )
    new_row = matrix.n1 - 1
    observed = matrix.row_entries(new_row)
    if len(observed) == matrix.n_cols:
        row = np.array([observed[j] for j in range(matrix.n_cols)])
    else:
        completed = complete_matrix(matrix, seed=seed)
        row = completed[new_row]
        for j, val in observed.items():
            row[j] = val

    weights = np.clip(row, 0.0, None)
    total = weights.sum()
    if total <= 0:
        weights = np.full(matrix.n_cols, 1.0 / matrix.n_cols)
    else:
        weights = weights / total

    kernel = kernel or KernelSpec()
    if start is not None:
        start = np.asarray(start, dtype=float)
        anchor = ObservationSet(
            np.array([grid.t0]), start[None, :], np.array([0.05])
        )
    else:
        anchor = ObservationSet.empty()
    particles = tuple(
        gp_posterior(kernel, anchor, grid, goal=goals[j]).mean
        for j in range(matrix.n_cols)
    )
    return ParticleIntent(particles, weights, feasible=report.feasible, sample_report=report)
