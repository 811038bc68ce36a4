"""Deterministic quadrature, small symmetric-matrix algebra, and reproducible Monte Carlo.

Everything here is plumbing shared by the statistical modules: expectations are
evaluated on the quantile-transformed domain so endpoint-singular integrands such
as 1/(F(1-F)) become 1/(u(1-u)), and Monte Carlo means are bit-reproducible for a
fixed seed regardless of how replicates are scheduled across workers.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import math
import typing as tp

import numpy as np
import scipy.integrate

DEFAULT_SEED = 20240101

# Fixed batch granularity of the Monte Carlo reduction.  Results depend on this
# value, so it is a constant, not a knob.
CHUNK_SIZE = 4096


class NumericsError(Exception):
    """Base class for numerical failures (quadrature or Monte Carlo)."""


class QuadratureNonConvergence(NumericsError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (best estimate {estimate!r}, error bound {error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class IntegrandEvaluationError(NumericsError):
    """The integrand returned a non-finite value at a known quantile u."""

    def __init__(self, message: str, u: float):
        super().__init__(f"{message} at u={u!r}")
        self.u = u


class ReplicateError(NumericsError):
    """A Monte Carlo replicate produced a non-finite value."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (replicate {index})")
        self.index = index


@dataclasses.dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for adaptive quadrature on the unit quantile interval.

    :param rtol: Relative tolerance of the adaptive rule.
    :param atol: Absolute tolerance of the adaptive rule.
    :param max_subdivisions: Subdivision budget before giving up.
    :param endpoint_clip: Half-width epsilon of the clipped domain (eps, 1-eps).
    """

    rtol: float = 1e-8
    atol: float = 1e-12
    max_subdivisions: int = 200
    endpoint_clip: float = 1e-12

    def __post_init__(self) -> None:
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")
        if not (0.0 < self.endpoint_clip <= 1e-6):
            raise ValueError("endpoint_clip must lie in (0, 1e-6]")


class InfoMatrix:
    """Symmetric p x p Fisher-information matrix, p in {1, 2, 3}.

    The constructor symmetrizes the input after checking it is symmetric to
    within 1e-12 relative and that diagonal entries are non-negative.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: tp.Any):
        a = np.atleast_2d(np.asarray(entries, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"InfoMatrix needs a square array, got shape {a.shape}")
        p = a.shape[0]
        if not 1 <= p <= 3:
            raise ValueError(f"InfoMatrix dimension must be 1..3, got {p}")
        if not np.all(np.isfinite(a)):
            raise ValueError("InfoMatrix entries must be finite")
        scale = max(float(np.max(np.abs(a))), 1.0)
        if np.max(np.abs(a - a.T)) > 1e-12 * scale:
            raise ValueError("InfoMatrix entries are not symmetric")
        if np.min(np.diag(a)) < -1e-12 * scale:
            raise ValueError("InfoMatrix diagonal entries must be non-negative")
        sym = (a + a.T) / 2.0
        sym.flags.writeable = False
        self._entries = sym

    @property
    def p(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def as_array(self) -> np.ndarray:
        return np.array(self._entries)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.array(self._entries, dtype=dtype)

    def __getitem__(self, idx):
        return self._entries[idx]

    def __add__(self, other: "InfoMatrix") -> "InfoMatrix":
        return InfoMatrix(self._entries + np.asarray(other))

    def __sub__(self, other: "InfoMatrix") -> "InfoMatrix":
        return InfoMatrix(self._entries - np.asarray(other))

    def scaled(self, c: float) -> "InfoMatrix":
        return InfoMatrix(self._entries * float(c))

    def __repr__(self) -> str:
        return f"InfoMatrix({self._entries.tolist()!r})"


@dataclasses.dataclass(frozen=True)
class MCEstimate:
    """Point estimate with its Monte Carlo standard error.

    std_error is the ddof=1 sample standard deviation over replications divided
    by sqrt(replications).
    """

    value: float
    std_error: float
    replications: int

    def __post_init__(self) -> None:
        if self.replications < 2:
            raise ValueError("MCEstimate needs at least 2 replications")
        if not self.std_error >= 0.0:
            raise ValueError("std_error must be non-negative")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the splittable stream (seed, *key).

    Streams with distinct keys are statistically independent and do not depend
    on creation order, which is what makes scheduling-invariant Monte Carlo
    possible.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def integrate_unit_interval(fn: tp.Callable[[float], float], spec: QuadratureSpec | None = None) -> float:
    """Integrate fn over the clipped unit interval (eps, 1-eps).

    :raises QuadratureNonConvergence: tolerance not reached within the budget.
    :raises IntegrandEvaluationError: fn returned NaN/inf at some u.
    """
    spec = spec or QuadratureSpec()

    def checked(u: float) -> float:
        v = fn(u)
        if not math.isfinite(v):
            raise IntegrandEvaluationError("integrand is not finite", u=float(u))
        return v

    out = scipy.integrate.quad(
        checked,
        spec.endpoint_clip,
        1.0 - spec.endpoint_clip,
        epsabs=spec.atol,
        epsrel=spec.rtol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    if len(out) > 3:
        value, abserr = float(out[0]), float(out[1])
        # scipy's roundoff heuristics can flag piecewise-smooth integrands whose
        # reported error bound already meets the requested tolerance
        if abserr <= max(spec.atol, spec.rtol * abs(value)):
            return value
        raise QuadratureNonConvergence(f"quadrature did not converge: {out[3]}", value, abserr)
    return float(out[0])


def integrate_expectation(
    model: tp.Any,
    integrand: tp.Callable[[float], float],
    spec: QuadratureSpec | None = None,
) -> float:
    """E[integrand(X)] for X ~ model, as the quantile-domain integral of integrand(F^{-1}(u)).

    The u-substitution makes endpoint singularities of terms like 1/(F(1-F))
    explicit as 1/(u(1-u)) and keeps all evaluation points inside the open
    support.
    """
    return integrate_unit_interval(lambda u: integrand(float(model.quantile(u))), spec)


def det_small(m: tp.Any) -> float:
    """Closed-form determinant for p in {1, 2, 3}."""
    a = np.asarray(m, dtype=float)
    a = np.atleast_2d(a)
    p = a.shape[0]
    if a.shape != (p, p) or p not in (1, 2, 3):
        raise ValueError(f"det_small handles square matrices of dimension 1..3, got shape {a.shape}")
    if p == 1:
        return float(a[0, 0])
    if p == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _chunk_ranges(reps: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + CHUNK_SIZE, reps)) for lo in range(0, reps, CHUNK_SIZE)]


def _merge_moments(
    a: tuple[int, np.ndarray, np.ndarray], b: tuple[int, np.ndarray, np.ndarray]
) -> tuple[int, np.ndarray, np.ndarray]:
    # Chan et al. pairwise update of (count, mean, sum of squared deviations).
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    m2 = sa + sb + delta * delta * (na * nb / n)
    return n, mean, m2


def _moments_of(values: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    n = values.shape[0]
    mean = values.mean(axis=0)
    m2 = ((values - mean) ** 2).sum(axis=0)
    return n, mean, m2


def _reduce_chunks(
    chunk_fn: tp.Callable[[int, int, int], np.ndarray],
    reps: int,
    workers: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Run chunk_fn(chunk_index, lo, hi) -> (hi-lo, d) arrays and merge in chunk order."""
    ranges = _chunk_ranges(reps)
    results: list[tuple[int, np.ndarray, np.ndarray] | None] = [None] * len(ranges)
    if workers > 1 and len(ranges) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(chunk_fn, idx, lo, hi): idx for idx, (lo, hi) in enumerate(ranges)
            }
            raw: dict[int, np.ndarray] = {}
            for fut in concurrent.futures.as_completed(futures):
                raw[futures[fut]] = fut.result()
        for idx in range(len(ranges)):
            results[idx] = _moments_of(raw[idx])
    else:
        for idx, (lo, hi) in enumerate(ranges):
            results[idx] = _moments_of(chunk_fn(idx, lo, hi))
    total = results[0]
    for part in results[1:]:
        total = _merge_moments(total, part)  # type: ignore[arg-type]
    n, mean, m2 = total  # type: ignore[misc]
    var = m2 / (n - 1)
    return mean, np.sqrt(var / n)


def mc_mean(
    replicate_fn: tp.Callable[[int, np.random.Generator], float],
    reps: int,
    seed: int,
    workers: int = 1,
) -> MCEstimate:
    """Mean and standard error of replicate_fn over reps replicates.

    Each replicate i receives its own generator derived from (seed, i), so the
    result is bit-identical for a fixed seed no matter how replicates are
    scheduled.

    :raises ReplicateError: a replicate returned a non-finite value.
    """
    if reps < 2:
        raise ValueError("mc_mean needs reps >= 2")

    def chunk(_idx: int, lo: int, hi: int) -> np.ndarray:
        out = np.empty(hi - lo)
        for i in range(lo, hi):
            v = float(replicate_fn(i, substream(seed, i)))
            if not math.isfinite(v):
                raise ReplicateError("replicate returned a non-finite value", index=i)
            out[i - lo] = v
        return out[:, None]

    mean, se = _reduce_chunks(chunk, reps, workers)
    return MCEstimate(value=float(mean[0]), std_error=float(se[0]), replications=reps)


def mc_mean_batches(
    batch_fn: tp.Callable[[np.random.Generator, int], np.ndarray],
    reps: int,
    seed: int,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Vectorized sibling of mc_mean for batch_fn(rng, count) -> (count, d) arrays.

    One substream per fixed-size chunk keyed by (seed, chunk index); chunks are
    merged in index order, so results are identical for any worker count.
    Returns (means, standard errors, reps) with shape (d,).
    """
    if reps < 2:
        raise ValueError("mc_mean_batches needs reps >= 2")

    def chunk(idx: int, lo: int, hi: int) -> np.ndarray:
        values = np.asarray(batch_fn(substream(seed, idx), hi - lo), dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != hi - lo:
            raise ValueError("batch_fn returned a wrong-length batch")
        bad = ~np.all(np.isfinite(values), axis=1)
        if np.any(bad):
            raise ReplicateError(
                "batch replicate returned a non-finite value", index=lo + int(np.argmax(bad))
            )
        return values

    mean, se = _reduce_chunks(chunk, reps, workers)
    return mean, se, reps
