"""Probabilistic beliefs over planar agent trajectories.

A trajectory is a sequence of 2-D positions on a shared, uniformly spaced
time grid.  Beliefs are Gaussian processes regressed independently per
coordinate axis, optionally collected into finite mixtures to express
multimodal intent (e.g. "pass left" vs "pass right").  Goals enter as
pseudo-observations pinned to the end of the grid.

All distributions live on the grid: a Gaussian belief stores its mean
trajectory and one covariance matrix per axis, so sampling and density
evaluation are plain multivariate-normal operations.  Degenerate
covariances (static obstacles, point-mass components) are supported via
eigenvalue pseudo-inverses; densities are then taken with respect to the
support of the covariance, which keeps mixture log-densities of weighted
point masses equal to the log-weights.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logsumexp

from .errors import (
    InvalidArgumentError,
    RankDeficiencyWarning,
    SingularModelError,
    WeightRenormalizationWarning,
)

# Jitter added to kernel diagonals before factorization.
KERNEL_JITTER = 1e-9
# Relative eigenvalue threshold below which a covariance direction is
# treated as exactly degenerate.
_RANK_TOL = 1e-12
# Residual mass allowed outside the support of a degenerate covariance
# before a point is declared off-support (density zero).
_NULL_SPACE_ATOL = 1e-6

_LOG_2PI = math.log(2.0 * math.pi)


def _as_float_array(x, name: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if shape is not None and arr.shape != shape:
        raise InvalidArgumentError(f"{name} must have shape {shape}, got {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    return arr


# ---------------------------------------------------------------------------
# time grids and trajectories


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: ``horizon_steps + 1`` points starting at ``t0``."""

    t0: float
    dt: float
    horizon_steps: int

    def __post_init__(self):
        if not math.isfinite(self.t0):
            raise InvalidArgumentError("t0 must be finite")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgumentError("dt must be positive and finite")
        if self.horizon_steps < 1:
            raise InvalidArgumentError("horizon_steps must be >= 1")

    @property
    def n_points(self) -> int:
        return self.horizon_steps + 1

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.horizon_steps

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_points)


@dataclass(frozen=True)
class Trajectory:
    """Positions indexed by a time grid; ``points`` has shape (n_points, 2)."""

    grid: TimeGrid
    points: np.ndarray

    def __post_init__(self):
        pts = _as_float_array(self.points, "points")
        if pts.shape != (self.grid.n_points, 2):
            raise InvalidArgumentError(
                f"points must have shape ({self.grid.n_points}, 2), got {pts.shape}"
            )
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def step_displacements(self) -> np.ndarray:
        """Euclidean length of each grid step, shape (horizon_steps,)."""
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)


@dataclass(frozen=True)
class ObservationSet:
    """Timestamped 2-D position observations with per-point noise levels.

    Times must be strictly increasing and noise levels strictly positive.
    """

    times: np.ndarray
    values: np.ndarray
    noise_std: np.ndarray

    def __post_init__(self):
        t = _as_float_array(self.times, "times")
        if t.ndim != 1:
            raise InvalidArgumentError("times must be one-dimensional")
        v = _as_float_array(self.values, "values", (t.shape[0], 2))
        s = np.asarray(self.noise_std, dtype=float)
        if s.ndim == 0:
            s = np.full(t.shape[0], float(s))
        s = _as_float_array(s, "noise_std", (t.shape[0],))
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise InvalidArgumentError("times must be strictly increasing")
        if np.any(s <= 0):
            raise InvalidArgumentError("noise_std must be strictly positive")
        for name, arr in (("times", t), ("values", v), ("noise_std", s)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.times.shape[0]

    @staticmethod
    def empty() -> "ObservationSet":
        return ObservationSet(np.empty(0), np.empty((0, 2)), np.empty(0))

    def merged_with(self, other: "ObservationSet") -> "ObservationSet":
        """Concatenate two observation sets; times must interleave increasingly."""
        t = np.concatenate([self.times, other.times])
        order = np.argsort(t, kind="stable")
        return ObservationSet(
            t[order],
            np.concatenate([self.values, other.values])[order],
            np.concatenate([self.noise_std, other.noise_std])[order],
        )


@dataclass(frozen=True)
class KernelSpec:
    """Stationary covariance kernel for one coordinate axis.

    Only the squared-exponential family is implemented; it is smooth,
    which matches holonomic platforms and walking people well enough at
    the horizons used here.
    """

    length_scale: float = 2.0
    signal_variance: float = 1.0

    def __post_init__(self):
        if not (self.length_scale > 0 and math.isfinite(self.length_scale)):
            raise InvalidArgumentError("length_scale must be positive")
        if not (self.signal_variance > 0 and math.isfinite(self.signal_variance)):
            raise InvalidArgumentError("signal_variance must be positive")

    def matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Gram matrix k(a_i, b_j), shape (len(a), len(b))."""
        a = np.asarray(a, dtype=float)[:, None]
        b = np.asarray(b, dtype=float)[None, :]
        sq = (a - b) ** 2
        return self.signal_variance * np.exp(-0.5 * sq / self.length_scale**2)


# ---------------------------------------------------------------------------
# beliefs


def _check_psd(cov: np.ndarray):
    """Covariance must be symmetric with eigenvalues >= -1e-9 (numerical PSD)."""
    if not np.allclose(cov, np.swapaxes(cov, -1, -2), atol=1e-8):
        raise InvalidArgumentError("covariance must be symmetric")
    for ax in range(cov.shape[0]):
        w = np.linalg.eigvalsh(cov[ax])
        if w.size and w.min() < -1e-9 * max(1.0, abs(w.max())):
            raise InvalidArgumentError(
                f"covariance for axis {ax} has eigenvalue {w.min():.3e} < -1e-9"
            )


@dataclass(frozen=True)
class GaussianTrajectoryBelief:
    """Gaussian belief over a trajectory: per-axis mean and covariance.

    ``covariance`` has shape (2, n_points, n_points); axes are modelled as
    independent.  When the belief came out of :func:`gp_posterior` it also
    remembers its generating kernel, absorbed observations, and goal, so it
    can be re-conditioned on further data.
    """

    grid: TimeGrid
    mean: Trajectory
    covariance: np.ndarray
    kernel: KernelSpec | None = None
    observations: ObservationSet | None = None
    goal: np.ndarray | None = None
    goal_noise_std: float = 0.1

    def __post_init__(self):
        if self.mean.grid != self.grid:
            raise InvalidArgumentError("mean trajectory must live on the belief grid")
        n = self.grid.n_points
        cov = _as_float_array(self.covariance, "covariance", (2, n, n))
        _check_psd(cov)
        cov = cov.copy()
        cov.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        if self.goal is not None:
            object.__setattr__(self, "goal", _as_float_array(self.goal, "goal", (2,)))
        if not (self.goal_noise_std > 0):
            raise InvalidArgumentError("goal_noise_std must be positive")


@dataclass(frozen=True)
class MixtureTrajectoryBelief:
    """Finite Gaussian mixture over trajectories on one shared grid."""

    weights: np.ndarray
    components: tuple[GaussianTrajectoryBelief, ...]
    weight_underflow: bool = False

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InvalidArgumentError("mixture needs at least one component")
        w = _as_float_array(self.weights, "weights", (len(comps),))
        if np.any(w < 0):
            raise InvalidArgumentError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError(f"weights must sum to 1, got {w.sum()!r}")
        g = comps[0].grid
        if any(c.grid != g for c in comps[1:]):
            raise InvalidArgumentError("mixture components must share one grid")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def grid(self) -> TimeGrid:
        return self.components[0].grid


TrajectoryBelief = GaussianTrajectoryBelief | MixtureTrajectoryBelief


@dataclass(frozen=True)
class AgentSet:
    """The machine-controlled agents plus environment agents, on one grid.

    ``machines[0]`` is the platform whose next action is being fused.
    """

    machines: tuple[TrajectoryBelief, ...]
    environment: tuple[TrajectoryBelief, ...] = ()

    def __post_init__(self):
        machines = tuple(self.machines)
        environment = tuple(self.environment)
        if not machines:
            raise InvalidArgumentError("at least one machine belief is required")
        g = machines[0].grid
        for b in machines + environment:
            if b.grid != g:
                raise InvalidArgumentError("all agent beliefs must share one grid")
        object.__setattr__(self, "machines", machines)
        object.__setattr__(self, "environment", environment)

    @property
    def grid(self) -> TimeGrid:
        return self.machines[0].grid


# ---------------------------------------------------------------------------
# GP regression


def _training_set(
    obs: ObservationSet,
    grid: TimeGrid,
    goal: np.ndarray | None,
    goal_noise_std: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Observations plus the optional goal pseudo-observation at the grid end."""
    t = obs.times
    y = obs.values
    s = obs.noise_std
    if goal is not None:
        goal = _as_float_array(goal, "goal", (2,))
        t = np.concatenate([t, [grid.t_end]])
        y = np.concatenate([y, goal[None, :]])
        s = np.concatenate([s, [goal_noise_std]])
    return t, y, s


def gp_posterior(
    kernel: KernelSpec,
    obs: ObservationSet,
    grid: TimeGrid,
    goal: np.ndarray | None = None,
    goal_noise_std: float = 0.1,
) -> GaussianTrajectoryBelief:
    """Posterior Gaussian belief on ``grid`` given observations and a goal.

    Each coordinate axis is regressed independently under ``kernel`` with a
    zero prior mean.  The goal, when given, acts as one extra observation
    pinned to the final grid time with noise ``goal_noise_std``.  With no
    observations and no goal the prior itself is returned (zero mean,
    kernel covariance).
    """
    if not (goal_noise_std > 0 and math.isfinite(goal_noise_std)):
        raise InvalidArgumentError("goal_noise_std must be positive")
    if len(obs) and obs.times[-1] > grid.t_end:
        raise InvalidArgumentError("observation times must not exceed the grid end")

    times = grid.times()
    t_train, y_train, s_train = _training_set(obs, grid, goal, goal_noise_std)

    if t_train.shape[0] == 0:
        k_grid = kernel.matrix(times, times)
        mean = Trajectory(grid, np.zeros((grid.n_points, 2)))
        cov = np.stack([k_grid, k_grid])
        return GaussianTrajectoryBelief(
            grid, mean, cov, kernel=kernel, observations=obs,
            goal=goal, goal_noise_std=goal_noise_std,
        )

    k_train = kernel.matrix(t_train, t_train)
    k_train[np.diag_indices_from(k_train)] += KERNEL_JITTER + s_train**2
    try:
        factor = cho_factor(k_train, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - jitter makes this rare
        raise SingularModelError(f"training kernel factorization failed: {exc}") from exc

    k_cross = kernel.matrix(t_train, times)
    k_grid = kernel.matrix(times, times)
    k_grid[np.diag_indices_from(k_grid)] += KERNEL_JITTER

    alpha = cho_solve(factor, y_train)
    mean_pts = k_cross.T @ alpha
    v = cho_solve(factor, k_cross)
    cov_axis = k_grid - k_cross.T @ v
    cov_axis = 0.5 * (cov_axis + cov_axis.T)
    cov = np.stack([cov_axis, cov_axis])

    return GaussianTrajectoryBelief(
        grid, Trajectory(grid, mean_pts), cov, kernel=kernel, observations=obs,
        goal=goal, goal_noise_std=goal_noise_std,
    )


def _predictive_at(
    belief: GaussianTrajectoryBelief, query_times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean (n, 2) and per-axis covariance (n, n) at arbitrary times.

    Uses the belief's generating kernel and absorbed data, so it is exact
    for beliefs produced by :func:`gp_posterior`.
    """
    if belief.kernel is None:
        raise InvalidArgumentError(
            "belief has no generating kernel; cannot form a predictive"
        )
    obs = belief.observations if belief.observations is not None else ObservationSet.empty()
    t_train, y_train, s_train = _training_set(
        obs, belief.grid, belief.goal, belief.goal_noise_std
    )
    query_times = np.asarray(query_times, dtype=float)
    kernel = belief.kernel
    k_query = kernel.matrix(query_times, query_times)
    if t_train.shape[0] == 0:
        return np.zeros((query_times.shape[0], 2)), k_query
    k_train = kernel.matrix(t_train, t_train)
    k_train[np.diag_indices_from(k_train)] += KERNEL_JITTER + s_train**2
    try:
        factor = cho_factor(k_train, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SingularModelError(f"training kernel factorization failed: {exc}") from exc
    k_cross = kernel.matrix(t_train, query_times)
    mean = k_cross.T @ cho_solve(factor, y_train)
    cov = k_query - k_cross.T @ cho_solve(factor, k_cross)
    return mean, 0.5 * (cov + cov.T)


def mixture_posterior(
    prior: MixtureTrajectoryBelief, obs: ObservationSet
) -> MixtureTrajectoryBelief:
    """Condition every component on ``obs`` and reweight by marginal likelihood.

    Each component weight is multiplied by the predictive likelihood of the
    new observations under that component, then the weights are normalized
    in log space.  If every weight underflows the result falls back to
    uniform weights, flags itself, and emits a warning.  With an empty
    observation set the prior is returned unchanged.
    """
    if len(obs) == 0:
        return prior

    log_w = np.empty(len(prior.components))
    new_components = []
    for i, comp in enumerate(prior.components):
        if comp.kernel is None:
            raise InvalidArgumentError(
                "mixture components must carry a generating kernel to be conditioned"
            )
        pred_mean, pred_cov = _predictive_at(comp, obs.times)
        noisy = pred_cov + np.diag(obs.noise_std**2)
        ll = 0.0
        for ax in range(2):
            resid = obs.values[:, ax] - pred_mean[:, ax]
            ll += _dense_gaussian_logpdf(resid, noisy)
        with np.errstate(divide="ignore"):
            log_prior_w = np.log(prior.weights[i]) if prior.weights[i] > 0 else -np.inf
        log_w[i] = log_prior_w + ll
        prev = comp.observations if comp.observations is not None else ObservationSet.empty()
        new_components.append(
            gp_posterior(
                comp.kernel,
                prev.merged_with(obs),
                comp.grid,
                goal=comp.goal,
                goal_noise_std=comp.goal_noise_std,
            )
        )

    top = log_w.max()
    underflow = not np.isfinite(top)
    if underflow:
        warnings.warn(
            "all mixture component likelihoods underflowed; weights reset to uniform",
            WeightRenormalizationWarning,
            stacklevel=2,
        )
        weights = np.full(len(new_components), 1.0 / len(new_components))
    else:
        w = np.exp(log_w - top)
        weights = w / w.sum()
    return MixtureTrajectoryBelief(weights, tuple(new_components), weight_underflow=underflow)


# ---------------------------------------------------------------------------
# density evaluation

def _dense_gaussian_logpdf(resid: np.ndarray, cov: np.ndarray) -> float:
    """Log N(resid; 0, cov) for a single residual, full-rank path with
    eigenvalue fallback.  Used for small predictive matrices."""
    try:
        factor = cho_factor(cov, lower=True)
        half = solve_triangular(factor[0], resid, lower=True)
        logdet = 2.0 * np.log(np.diag(factor[0])).sum()
        return -0.5 * (resid.size * _LOG_2PI + logdet + half @ half)
    except np.linalg.LinAlgError:
        return _AxisDensity(np.zeros_like(resid), cov).logpdf(resid[None, :])[0]


class _AxisDensity:
    """Factorized per-axis Gaussian density supporting batched evaluation.

    Degenerate covariances use an eigenvalue pseudo-inverse: density is
    taken on the support, and residual mass in the null space beyond an
    absolute tolerance sends the log-density to -inf.  A warning is issued
    once per factorization when this path is taken.
    """

    def __init__(self, mean: np.ndarray, cov: np.ndarray):
        self.mean = mean
        n = cov.shape[0]
        if not cov.any():
            # exact point mass: a deliberate degenerate belief, no warning
            self._chol = None
            self._eigvals = np.empty(0)
            self._eigvecs = np.empty((n, 0))
            self._null_vecs = np.eye(n)
            self._rank = 0
            self._logdet = 0.0
            return
        try:
            chol = np.linalg.cholesky(cov)
            self._chol = chol
            self._logdet = 2.0 * np.log(np.diag(chol)).sum()
            self._rank = n
            self._eigvecs = None
            self._eigvals = None
        except np.linalg.LinAlgError:
            warnings.warn(
                "covariance is rank deficient; using eigenvalue pseudo-inverse",
                RankDeficiencyWarning,
                stacklevel=2,
            )
            w, v = np.linalg.eigh(cov)
            scale = max(w[-1], 0.0)
            keep = w > _RANK_TOL * max(scale, 1.0)
            self._chol = None
            self._eigvals = w[keep]
            self._eigvecs = v[:, keep]
            self._null_vecs = v[:, ~keep]
            self._rank = int(keep.sum())
            self._logdet = float(np.log(self._eigvals).sum()) if self._rank else 0.0

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        """Batched log-density; ``x`` has shape (batch, n)."""
        resid = x - self.mean[None, :]
        if self._chol is not None:
            half = solve_triangular(self._chol, resid.T, lower=True)
            quad = np.einsum("ib,ib->b", half, half)
            return -0.5 * (self._rank * _LOG_2PI + self._logdet + quad)
        out = np.full(resid.shape[0], -0.5 * (self._rank * _LOG_2PI + self._logdet))
        if self._rank:
            proj = resid @ self._eigvecs
            out -= 0.5 * np.einsum("bi,bi->b", proj / self._eigvals[None, :], proj)
        if self._null_vecs.shape[1]:
            null_mass = np.linalg.norm(resid @ self._null_vecs, axis=1)
            out[null_mass > _NULL_SPACE_ATOL] = -np.inf
        return out

    def sample_transform(self) -> np.ndarray:
        """Matrix L with L L^T = cov, for drawing samples mean + L z."""
        if self._chol is not None:
            return self._chol
        n = self.mean.shape[0]
        L = np.zeros((n, n))
        if self._rank:
            L[:, : self._rank] = self._eigvecs * np.sqrt(self._eigvals)[None, :]
        return L


class _BeliefDensity:
    """Batched log-density evaluator for a Gaussian or mixture belief.

    Factorizations are done once at construction; evaluation is then a
    couple of triangular solves per axis.  This is the single code path
    behind :func:`log_density`, so point and batch evaluations agree
    exactly.
    """

    def __init__(self, belief: TrajectoryBelief):
        self.grid = belief.grid
        if isinstance(belief, GaussianTrajectoryBelief):
            self._log_weights = np.zeros(1)
            comps = [belief]
        else:
            with np.errstate(divide="ignore"):
                self._log_weights = np.log(belief.weights)
            comps = list(belief.components)
        self._axes = [
            [ _AxisDensity(c.mean.points[:, ax], c.covariance[ax]) for ax in range(2) ]
            for c in comps
        ]

    def logpdf(self, paths: np.ndarray) -> np.ndarray:
        """``paths`` has shape (batch, n_points, 2); returns (batch,)."""
        per_comp = np.empty((len(self._axes), paths.shape[0]))
        for ci, axes in enumerate(self._axes):
            per_comp[ci] = axes[0].logpdf(paths[:, :, 0]) + axes[1].logpdf(paths[:, :, 1])
        if per_comp.shape[0] == 1:
            return per_comp[0] + self._log_weights[0]
        with np.errstate(divide="ignore"):
            return logsumexp(per_comp + self._log_weights[:, None], axis=0)


def log_density(belief: TrajectoryBelief, traj: Trajectory) -> float:
    """Exact log-density of ``traj`` under ``belief``.

    For mixtures this is the log-sum-exp over components.  Degenerate
    covariance directions contribute no volume term; a trajectory off the
    support of a degenerate belief gets ``-inf``.
    """
    if traj.grid != belief.grid:
        raise InvalidArgumentError("trajectory and belief must share one grid")
    return float(_BeliefDensity(belief).logpdf(traj.points[None, :, :])[0])


# ---------------------------------------------------------------------------
# sampling


def _sample_transforms(belief: GaussianTrajectoryBelief) -> list[np.ndarray]:
    return [_AxisDensity(belief.mean.points[:, ax], belief.covariance[ax]).sample_transform()
            for ax in range(2)]


def _sample_gaussian_paths(
    belief: GaussianTrajectoryBelief, count: int, rng: np.random.Generator
) -> np.ndarray:
    n = belief.grid.n_points
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        transforms = _sample_transforms(belief)
    z = rng.standard_normal((2, count, n))
    out = np.empty((count, n, 2))
    for ax in range(2):
        out[:, :, ax] = belief.mean.points[None, :, ax] + z[ax] @ transforms[ax].T
    return out


def _sample_paths(
    belief: TrajectoryBelief, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``count`` trajectories as an array of shape (count, n_points, 2)."""
    if count < 1:
        raise InvalidArgumentError("count must be >= 1")
    if isinstance(belief, GaussianTrajectoryBelief):
        return _sample_gaussian_paths(belief, count, rng)
    comp_idx = rng.choice(len(belief.components), size=count, p=belief.weights)
    n = belief.grid.n_points
    z = rng.standard_normal((2, count, n))
    out = np.empty((count, n, 2))
    for ci, comp in enumerate(belief.components):
        mask = comp_idx == ci
        if not mask.any():
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankDeficiencyWarning)
            transforms = _sample_transforms(comp)
        for ax in range(2):
            out[mask, :, ax] = comp.mean.points[None, :, ax] + z[ax][mask] @ transforms[ax].T
    return out


def sample_trajectories(
    belief: TrajectoryBelief, count: int, seed: int
) -> list[Trajectory]:
    """Draw ``count`` independent trajectories, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    paths = _sample_paths(belief, count, rng)
    grid = belief.grid
    return [Trajectory(grid, paths[i]) for i in range(count)]


# ---------------------------------------------------------------------------
# convenience constructors used by scenarios and tests


def static_belief(grid: TimeGrid, position: np.ndarray) -> GaussianTrajectoryBelief:
    """Point-mass belief: an agent pinned at one position for the whole grid."""
    position = _as_float_array(position, "position", (2,))
    n = grid.n_points
    mean = Trajectory(grid, np.tile(position, (n, 1)))
    return GaussianTrajectoryBelief(grid, mean, np.zeros((2, n, n)))


def point_mass_belief(traj: Trajectory) -> GaussianTrajectoryBelief:
    """Point-mass belief concentrated on one trajectory."""
    n = traj.grid.n_points
    return GaussianTrajectoryBelief(traj.grid, traj, np.zeros((2, n, n)))


def as_mixture(belief: TrajectoryBelief) -> MixtureTrajectoryBelief:
    """View any belief as a mixture (single component when Gaussian)."""
    if isinstance(belief, MixtureTrajectoryBelief):
        return belief
    return MixtureTrajectoryBelief(np.ones(1), (belief,))
