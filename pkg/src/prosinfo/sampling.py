"""Random generation of ranked-set style samples and ranking-error estimation.

draw_pros follows the field procedure literally: every judgment set draws S
independent values, sorts them, and measures the unit occupying a (possibly
misplaced) randomly chosen position of the target rank block.  The true rank of
every measured unit is recorded, which is what the complete-data information
estimators and the latent-rank diagnostics consume.

Ranking quality is modeled on the Dell and Clutter concomitant scheme: the
ranker perceives W = rho * Z + sqrt(1 - rho^2) * eps instead of the
standardized response Z, and the induced block-confusion probabilities are
tallied by simulation.
"""

from __future__ import annotations

import dataclasses
import io
import typing as tp

import numpy as np

from . import numerics
from .designs import (
    Design,
    DesignError,
    MisplacementMatrix,
    UnbalancedDesign,
    identity_alpha,
)
from .models import Model


class SamplingError(ValueError):
    """Inconsistent sampling request."""


@dataclasses.dataclass(frozen=True)
class ProsSample:
    """Measured units of a PROS sample with their latent rank bookkeeping.

    :param values: measured responses, one per judgment set.
    :param cycle: 1-based cycle number of each measurement.
    :param set_index: 1-based set number within its cycle.
    :param target_subset: block the measurement was judged to come from.
    :param source_subset: block it actually came from (differs under misplacement).
    :param true_rank: latent position u in the set's sorted order, 1..S.
    """

    values: np.ndarray
    cycle: np.ndarray
    set_index: np.ndarray
    target_subset: np.ndarray
    source_subset: np.ndarray
    true_rank: np.ndarray
    design_label: str = ""

    def __post_init__(self) -> None:
        n = len(self.values)
        for field in ("cycle", "set_index", "target_subset", "source_subset", "true_rank"):
            if len(getattr(self, field)) != n:
                raise SamplingError(f"field {field} has length != {n}")

    def __len__(self) -> int:
        return len(self.values)


def draw_srs(model: Model, n: int, seed: int = numerics.DEFAULT_SEED) -> np.ndarray:
    """n i.i.d. draws via the quantile transform."""
    if n < 1:
        raise SamplingError(f"sample size must be >= 1, got {n}")
    rng = numerics.substream(seed)
    return np.asarray(model.quantile(rng.random(n)))


def _alpha_or_identity(alpha: MisplacementMatrix | None, n: int) -> MisplacementMatrix:
    if alpha is None:
        return identity_alpha(n)
    if alpha.n != n:
        raise DesignError(f"misplacement matrix is {alpha.n}x{alpha.n}, design needs {n}x{n}")
    return alpha


def draw_pros(
    model: Model,
    design: Design,
    alpha: MisplacementMatrix | None = None,
    seed: int = numerics.DEFAULT_SEED,
) -> ProsSample:
    """One PROS sample: N cycles of n judgment sets, one measurement per set.

    Each set draws S i.i.d. values and sorts them.  Set r targets block r; under
    misplacement the measured unit is drawn from block h with probability
    alpha[r, h], uniformly among that block's positions.
    """
    alpha = _alpha_or_identity(alpha, design.n)
    rng = numerics.substream(seed)
    n, S, N = design.n, design.set_size, design.cycles
    starts = np.array([b[0] for b in design.subsets])
    sizes = np.array(design.block_sizes)

    total = N * n
    sorted_sets = np.sort(np.asarray(model.quantile(rng.random((total, S)))), axis=1)
    target = np.tile(np.arange(1, n + 1), N)
    # invert alpha rows by cdf lookup, one uniform per set
    cum = np.cumsum(alpha.entries, axis=1)
    source = 1 + (rng.random(total)[:, None] > cum[target - 1]).sum(axis=1)
    source = np.minimum(source, n)
    rank = starts[source - 1] + rng.integers(0, sizes[source - 1])
    values = sorted_sets[np.arange(total), rank - 1]
    return ProsSample(
        values=values,
        cycle=np.repeat(np.arange(1, N + 1), n),
        set_index=target.copy(),
        target_subset=target,
        source_subset=source,
        true_rank=rank,
        design_label=design.label(),
    )


def draw_unbalanced_pros(
    model: Model,
    ud: UnbalancedDesign,
    alphas: tp.Mapping[int, MisplacementMatrix] | None = None,
    seed: int = numerics.DEFAULT_SEED,
) -> ProsSample:
    """K measurements per replication following each set's own partition and target block."""
    rng = numerics.substream(seed)
    S = ud.set_size
    n_cycles = len(ud.cycle_ids)
    per_cycle_alpha: dict[int, MisplacementMatrix] = {}
    for i in ud.cycle_ids:
        a = alphas.get(i) if alphas is not None else None
        per_cycle_alpha[i] = _alpha_or_identity(a, ud.n_subsets(i))

    rows: list[tuple[float, int, int, int, int, int]] = []
    for rep in range(ud.replications):
        for i in ud.cycle_ids:
            plans = ud.sets_in_cycle(i)
            alpha = per_cycle_alpha[i]
            for r, sp in enumerate(plans, start=1):
                sorted_set = np.sort(np.asarray(model.quantile(rng.random(S))))
                row = alpha.row(sp.measured)
                h = 1 + int((rng.random() > np.cumsum(row)).sum())
                h = min(h, len(sp.partition))
                block = sp.partition[h - 1]
                u = int(block[rng.integers(0, len(block))])
                rows.append((float(sorted_set[u - 1]), rep * n_cycles + i, r, sp.measured, h, u))

    arr = np.array(rows, dtype=float)
    return ProsSample(
        values=arr[:, 0],
        cycle=arr[:, 1].astype(int),
        set_index=arr[:, 2].astype(int),
        target_subset=arr[:, 3].astype(int),
        source_subset=arr[:, 4].astype(int),
        true_rank=arr[:, 5].astype(int),
        design_label=ud.label(),
    )


def sample_to_csv(sample: ProsSample) -> str:
    """CSV rendering: cycle,set,subset,value,true_position."""
    buf = io.StringIO()
    buf.write("cycle,set,subset,value,true_position\n")
    for k in range(len(sample)):
        buf.write(
            f"{sample.cycle[k]},{sample.set_index[k]},{sample.target_subset[k]},"
            f"{sample.values[k]:.17g},{sample.true_rank[k]}\n"
        )
    return buf.getvalue()


# -- bulk engines for Monte Carlo information estimates -----------------------


def block_draws(
    model: Model,
    set_size: int,
    blocks: tp.Sequence[tp.Sequence[int]],
    alpha_row: np.ndarray,
    rng: np.random.Generator,
    count: int,
) -> tuple[np.ndarray, np.ndarray]:
    """count draws of (value, true rank) for one judged block under alpha_row.

    Uses the order-statistic shortcut X_(u:S) = F^{-1}(Beta(u, S+1-u)), whose
    joint law of (value, rank) matches the literal sort-based procedure.
    """
    cum = np.cumsum(np.asarray(alpha_row, dtype=float))
    h = (rng.random(count)[:, None] > cum).sum(axis=1)
    h = np.minimum(h, len(blocks) - 1)
    starts = np.array([b[0] for b in blocks])
    sizes = np.array([len(b) for b in blocks])
    u = starts[h] + rng.integers(0, sizes[h])
    x = np.asarray(model.quantile(rng.beta(u, set_size + 1 - u)))
    return x, u


@dataclasses.dataclass(frozen=True)
class DellClutterConfig:
    """Stage-1 settings for estimating the misplacement matrix by simulation.

    :param rho: correlation between the standardized response and the ranker's
        perception; 1 is exact ranking, 0 is random ranking.
    :param reps: number of simulated judgment sets.
    :param seed: stream seed for the stage-1 draws.
    """

    rho: float
    reps: int = 5000
    seed: int = numerics.DEFAULT_SEED

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho <= 1.0:
            raise SamplingError(f"rho must lie in [0, 1], got {self.rho!r}")
        if self.reps < 1:
            raise SamplingError(f"reps must be >= 1, got {self.reps}")


def _sinkhorn(a: np.ndarray, iterations: int = 100, tol: float = 1e-10) -> np.ndarray:
    """Project a nonnegative matrix onto the doubly stochastic set by row/column scaling."""
    a = np.array(a, dtype=float)
    for _ in range(iterations):
        a /= a.sum(axis=1, keepdims=True)
        a /= a.sum(axis=0, keepdims=True)
        if (
            np.max(np.abs(a.sum(axis=1) - 1.0)) < tol
            and np.max(np.abs(a.sum(axis=0) - 1.0)) < tol
        ):
            break
    # final row normalization keeps row sums exactly 1 within float error
    a /= a.sum(axis=1, keepdims=True)
    return a


def estimate_alpha_for_partition(
    model: Model,
    set_size: int,
    blocks: tp.Sequence[tp.Sequence[int]],
    cfg: DellClutterConfig,
) -> MisplacementMatrix:
    """Tally Dell-Clutter block confusion for an arbitrary consecutive partition."""
    n = len(blocks)
    if n == 1:
        return identity_alpha(1)
    rng = numerics.substream(cfg.seed)

    block_of = np.empty(set_size, dtype=int)
    for idx, b in enumerate(blocks):
        for u in b:
            block_of[u - 1] = idx

    x = np.asarray(model.quantile(rng.random((cfg.reps, set_size))))
    # each set is standardized by its own sample moments; the per-set scale
    # modulates the effective perception noise and is what reproduces the
    # published efficiency curves (analytic moments run systematically low)
    z = (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, ddof=1, keepdims=True)
    if cfg.rho == 1.0:
        w = z
    else:
        w = cfg.rho * z + np.sqrt(1.0 - cfg.rho**2) * rng.standard_normal(x.shape)
    # rank of each unit within its own set, 0-based
    rank_x = np.argsort(np.argsort(x, axis=1), axis=1)
    rank_w = np.argsort(np.argsort(w, axis=1), axis=1)

    counts = np.zeros((n, n))
    np.add.at(counts, (block_of[rank_w.ravel()], block_of[rank_x.ravel()]), 1.0)
    sizes = np.array([len(b) for b in blocks], dtype=float)
    a = counts / (cfg.reps * sizes[:, None])
    a = _sinkhorn((a + a.T) / 2.0)
    return MisplacementMatrix(a)


def estimate_dell_clutter_alpha(
    model: Model, design: Design, cfg: DellClutterConfig
) -> MisplacementMatrix:
    """Misplacement matrix induced by rho-quality ranking on the design's partition.

    Every simulated unit contributes one (perceived block, true block) tally;
    the count matrix is row-normalized, symmetrized with its transpose, and
    projected to doubly stochastic form.  rho = 1 returns the exact identity.
    """
    return estimate_alpha_for_partition(model, design.set_size, design.subsets, cfg)


def estimate_unbalanced_alphas(
    model: Model, ud: UnbalancedDesign, cfg: DellClutterConfig
) -> dict[int, MisplacementMatrix]:
    """Per-cycle misplacement matrices; sets of a cycle must share their partition."""
    out: dict[int, MisplacementMatrix] = {}
    for i in ud.cycle_ids:
        plans = ud.sets_in_cycle(i)
        first = plans[0].partition
        for sp in plans[1:]:
            if sp.partition != first:
                raise SamplingError(
                    f"cycle {i} mixes partitions; per-cycle ranking-error estimation "
                    "needs one shared partition"
                )
        out[i] = estimate_alpha_for_partition(
            model, ud.set_size, first, dataclasses.replace(cfg, seed=cfg.seed + i)
        )
    return out
