"""Fisher information of rank-ordered designs and relative efficiencies.

Two computation routes are provided for every design.  The quadrature route
integrates the analytic expressions on the quantile domain: complete-data PROS
information is I_srs + K with

    K = n (S-1) E[ (dF/dtheta)(dF/dtheta)^T / (F (1-F)) ],

the marginal (measurements-only) information of a balanced design with
misplacement weights g_r adds sum_r E[(dg_r)(dg_r)^T / g_r] to I_srs, and
unbalanced designs integrate the per-observation score outer product of each
set's marginal density directly.  The Monte Carlo route estimates
-E[d^2 log L / dtheta^2] by central finite-difference Hessians at simulated
draws and reports a standard error per matrix entry; it is the ground truth the
quadrature identities are checked against.

Relative efficiencies are determinant ratios: RE1 compares against SRS of the
same size, RE2 against an RSS benchmark.
"""

from __future__ import annotations

import dataclasses
import math
import typing as tp

import numpy as np

from . import densities, numerics, sampling
from .designs import (
    Design,
    DesignError,
    MisplacementMatrix,
    UnbalancedDesign,
    identity_alpha,
    make_balanced_design,
)
from .models import Model

DEFAULT_REPS = 50_000


class InformationError(ValueError):
    """Inconsistent information-matrix request."""


@dataclasses.dataclass(frozen=True)
class FIResult:
    """Fisher information matrix with its provenance.

    :param matrix: the information matrix over the model's active parameters.
    :param method: "quadrature" or "mc".
    :param std_errors: per-entry Monte Carlo standard errors (mc method only).
    :param replications: Monte Carlo replication count (mc method only).
    """

    matrix: numerics.InfoMatrix
    method: str
    std_errors: np.ndarray | None = None
    replications: int | None = None
    design_label: str = ""
    model_label: str = ""

    @property
    def p(self) -> int:
        return self.matrix.p

    def det(self) -> float:
        return numerics.det_small(self.matrix)


def _entries(obj: tp.Any) -> np.ndarray:
    if isinstance(obj, FIResult):
        return obj.matrix.as_array()
    return np.atleast_2d(np.asarray(obj, dtype=float))


def _tri_pairs(p: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(p) for k in range(j, p)]


def _matrix_from_tri(p: int, tri: np.ndarray) -> np.ndarray:
    out = np.zeros((p, p))
    for idx, (j, k) in enumerate(_tri_pairs(p)):
        out[j, k] = out[k, j] = tri[idx]
    return out


# -- quadrature route ----------------------------------------------------------


def fisher_srs(model: Model, count: int, spec: numerics.QuadratureSpec | None = None) -> numerics.InfoMatrix:
    """Information of `count` i.i.d. observations."""
    if count < 1:
        raise InformationError(f"count must be >= 1, got {count}")
    return model.fisher_srs_unit(spec).scaled(count)


def k_matrix(
    model: Model, n: int, set_size: int, spec: numerics.QuadratureSpec | None = None
) -> numerics.InfoMatrix:
    """Information gain of one perfect PROS cycle over n i.i.d. observations.

    n (S-1) E[(dF)(dF)^T / (F(1-F))], evaluated entrywise on the quantile
    domain where the weight becomes 1/(t(1-t)).
    """
    if set_size < 1 or n < 1:
        raise InformationError("n and set_size must be >= 1")
    p = model.p
    if set_size == 1:
        return numerics.InfoMatrix(np.zeros((p, p)))
    out = np.zeros((p, p))

    def entry(j: int, k: int) -> float:
        def integrand(u: float) -> float:
            sc = model.score_cdf(model.quantile(u))
            return float(sc[..., j] * sc[..., k]) / (u * (1.0 - u))

        return numerics.integrate_unit_interval(integrand, spec)

    for j, k in _tri_pairs(p):
        out[j, k] = out[k, j] = entry(j, k)
    return numerics.InfoMatrix(n * (set_size - 1) * out)


def h_matrix(
    model: Model, n: int, set_size: int, spec: numerics.QuadratureSpec | None = None
) -> numerics.InfoMatrix:
    """Information gain of one PROS cycle over one RSS cycle with n measurements.

    Equals k_matrix scaled by (S-n)/(S-1); zero when S = n.
    """
    if set_size < n:
        raise InformationError(f"set_size={set_size} must be >= n={n}")
    p = model.p
    if set_size == n:
        return numerics.InfoMatrix(np.zeros((p, p)))
    return k_matrix(model, n, set_size, spec).scaled((set_size - n) / (set_size - 1))


def fi_pros_complete(
    model: Model,
    n: int,
    set_size: int,
    cycles: int = 1,
    method: str = "quadrature",
    reps: int = DEFAULT_REPS,
    seed: int = numerics.DEFAULT_SEED,
    workers: int = 1,
    spec: numerics.QuadratureSpec | None = None,
) -> FIResult:
    """Complete-data information of PROS(n, S) with N cycles: N (n I_srs + K).

    Complete data includes the latent rank of every measured unit.  The mc
    method simulates draws with their true ranks and takes finite-difference
    Hessians of the complete-data log likelihood.
    """
    if cycles < 1:
        raise InformationError(f"cycles must be >= 1, got {cycles}")
    label = f"PROS(n={n}, S={set_size}, N={cycles}) complete"
    if method == "quadrature":
        per_cycle = model.fisher_srs_unit(spec).scaled(n) + k_matrix(model, n, set_size, spec)
        return FIResult(
            matrix=per_cycle.scaled(cycles),
            method="quadrature",
            design_label=label,
            model_label=model.label(),
        )
    if method != "mc":
        raise InformationError(f"method must be 'quadrature' or 'mc', got {method!r}")
    design = _balanced_design(n, set_size, cycles)
    blocks = design.subsets
    alpha = identity_alpha(n)

    def batch(rng: np.random.Generator, count: int) -> np.ndarray:
        total = None
        for r in range(1, n + 1):
            x, u = sampling.block_draws(model, set_size, blocks, alpha.row(r), rng, count)
            extra = _complete_logw(set_size, u)
            tri = _neg_hessian_tri(model, x, extra)
            total = tri if total is None else total + tri
        return total

    return _mc_fi(model, batch, reps, seed, workers, cycles, label)


def _balanced_design(n: int, set_size: int, cycles: int) -> Design:
    try:
        return make_balanced_design(set_size, n, cycles)
    except DesignError as e:
        raise InformationError(str(e)) from e


def fi_pros_marginal(
    model: Model,
    design: Design,
    alpha: MisplacementMatrix | None = None,
    method: str = "quadrature",
    reps: int = DEFAULT_REPS,
    seed: int = numerics.DEFAULT_SEED,
    workers: int = 1,
    spec: numerics.QuadratureSpec | None = None,
) -> FIResult:
    """Measurements-only information of a balanced design under misplacement alpha.

    Per cycle this is n I_srs + sum_r E[(d g_r)(d g_r)^T / g_r]; perfect
    subsetting is the identity alpha.  The decomposition requires the balanced
    property sum_r g_r = n; unbalanced partitions go through fi_unbalanced.
    """
    if not design.is_balanced:
        raise InformationError("design is unbalanced; use fi_unbalanced")
    alpha = alpha if alpha is not None else identity_alpha(design.n)
    if alpha.n != design.n:
        raise DesignError(f"misplacement matrix is {alpha.n}x{alpha.n}, design has {design.n} subsets")
    n, S, N = design.n, design.set_size, design.cycles
    label = f"{design.label()} marginal"
    p = model.p

    if method == "quadrature":
        gain = np.zeros((p, p))
        for r in range(1, n + 1):
            row = alpha.row(r)

            def entry(j: int, k: int) -> float:
                def integrand(u: float) -> float:
                    g = densities.alpha_weight(S, design.subsets, row, u)
                    if not g > 0.0:
                        return 0.0
                    gd = densities.alpha_weight_dt(S, design.subsets, row, u)
                    sc = model.score_cdf(model.quantile(u))
                    return float(sc[..., j] * sc[..., k]) * gd * gd / g

                return numerics.integrate_unit_interval(integrand, spec)

            for j, k in _tri_pairs(p):
                gain[j, k] += entry(j, k)
                if j != k:
                    gain[k, j] = gain[j, k]
        per_cycle = model.fisher_srs_unit(spec).scaled(n) + numerics.InfoMatrix(gain)
        return FIResult(
            matrix=per_cycle.scaled(N),
            method="quadrature",
            design_label=label,
            model_label=model.label(),
        )
    if method != "mc":
        raise InformationError(f"method must be 'quadrature' or 'mc', got {method!r}")

    rows = [alpha.row(r) for r in range(1, n + 1)]

    def batch(rng: np.random.Generator, count: int) -> np.ndarray:
        total = None
        for r in range(n):
            x, _u = sampling.block_draws(model, S, design.subsets, rows[r], rng, count)
            extra = _mixture_logw(S, design.subsets, rows[r])
            tri = _neg_hessian_tri(model, x, extra)
            total = tri if total is None else total + tri
        return total

    return _mc_fi(model, batch, reps, seed, workers, N, label)


def fi_unbalanced(
    model: Model,
    ud: UnbalancedDesign,
    alphas: tp.Mapping[int, MisplacementMatrix] | None = None,
    method: str = "quadrature",
    reps: int = DEFAULT_REPS,
    seed: int = numerics.DEFAULT_SEED,
    workers: int = 1,
    spec: numerics.QuadratureSpec | None = None,
) -> FIResult:
    """Measurements-only information of an unbalanced design.

    Each measurement's marginal density is f(x) gamma(F(x)) with gamma the
    alpha-mixed block weight of its judgment set, so its information is the
    integral of the score outer product

        int_0^1 s(t) s(t)^T gamma(t) dt,
        s(t) = d log f + (gamma'(t) / gamma(t)) dF,

    summed over all sets and cycles.  This is exact for any partition; for
    balanced partitions it coincides with the fi_pros_marginal decomposition.
    """
    label = f"{ud.label()} marginal"
    p = model.p
    resolved: list[tuple[tuple[tuple[int, ...], ...], np.ndarray]] = []
    for i in ud.cycle_ids:
        a = alphas.get(i) if alphas is not None else None
        alpha = a if a is not None else identity_alpha(ud.n_subsets(i))
        if alpha.n != ud.n_subsets(i):
            raise DesignError(
                f"cycle {i} needs a {ud.n_subsets(i)}x{ud.n_subsets(i)} misplacement matrix, "
                f"got {alpha.n}x{alpha.n}"
            )
        for sp in ud.sets_in_cycle(i):
            resolved.append((sp.partition, alpha.row(sp.measured)))

    if method == "quadrature":
        total = np.zeros((p, p))
        for blocks, row in resolved:

            def entry(j: int, k: int) -> float:
                def integrand(u: float) -> float:
                    g = densities.alpha_weight(ud.set_size, blocks, row, u)
                    if not g > 0.0:
                        return 0.0
                    gd = densities.alpha_weight_dt(ud.set_size, blocks, row, u)
                    x = model.quantile(u)
                    s = model.score_logpdf(x) + (gd / g) * model.score_cdf(x)
                    return float(s[..., j] * s[..., k]) * g

                return numerics.integrate_unit_interval(integrand, spec)

            for j, k in _tri_pairs(p):
                v = entry(j, k)
                total[j, k] += v
                if j != k:
                    total[k, j] = total[j, k]
        return FIResult(
            matrix=numerics.InfoMatrix(total * ud.replications),
            method="quadrature",
            design_label=label,
            model_label=model.label(),
        )
    if method != "mc":
        raise InformationError(f"method must be 'quadrature' or 'mc', got {method!r}")

    def batch(rng: np.random.Generator, count: int) -> np.ndarray:
        total = None
        for blocks, row in resolved:
            x, _u = sampling.block_draws(model, ud.set_size, blocks, row, rng, count)
            extra = _mixture_logw(ud.set_size, blocks, row)
            tri = _neg_hessian_tri(model, x, extra)
            total = tri if total is None else total + tri
        return total

    return _mc_fi(model, batch, reps, seed, workers, ud.replications, label)


# -- Monte Carlo machinery ------------------------------------------------------


def _complete_logw(set_size: int, u: np.ndarray) -> tp.Callable[[Model, np.ndarray], np.ndarray]:
    def logw(m: Model, y: np.ndarray) -> np.ndarray:
        b = densities.bernstein_many(set_size, u, np.asarray(m.cdf(y)))
        return np.log(np.maximum(b, np.finfo(float).tiny))

    return logw


def _mixture_logw(
    set_size: int, blocks: tp.Sequence[tp.Sequence[int]], row: np.ndarray
) -> tp.Callable[[Model, np.ndarray], np.ndarray]:
    def logw(m: Model, y: np.ndarray) -> np.ndarray:
        g = densities.alpha_weight(set_size, blocks, row, np.asarray(m.cdf(y)))
        return np.log(np.maximum(g, np.finfo(float).tiny))

    return logw


def _neg_hessian_tri(
    model: Model,
    y: np.ndarray,
    extra_logw: tp.Callable[[Model, np.ndarray], np.ndarray] | None,
) -> np.ndarray:
    """-(d^2/dtheta^2) of log f(y; theta) + extra log weight, by central differences.

    Returns the upper-triangle entries, shape (len(y), p(p+1)/2).
    """
    names = model.active
    p = len(names)
    steps = [1e-4 * max(abs(model.value(nm)), 1.0) for nm in names]

    def L(shift: dict[str, float]) -> np.ndarray:
        m = model.with_params(**{nm: model.value(nm) + d for nm, d in shift.items()})
        out = np.asarray(m.logpdf(y), dtype=float)
        if extra_logw is not None:
            out = out + extra_logw(m, y)
        return out

    L0 = L({})
    cols: list[np.ndarray] = []
    plus = [L({names[j]: steps[j]}) for j in range(p)]
    minus = [L({names[j]: -steps[j]}) for j in range(p)]
    for j, k in _tri_pairs(p):
        if j == k:
            h = steps[j]
            cols.append(-(plus[j] - 2.0 * L0 + minus[j]) / (h * h))
        else:
            hj, hk = steps[j], steps[k]
            pp = L({names[j]: hj, names[k]: hk})
            pm = L({names[j]: hj, names[k]: -hk})
            mp = L({names[j]: -hj, names[k]: hk})
            mm = L({names[j]: -hj, names[k]: -hk})
            cols.append(-(pp - pm - mp + mm) / (4.0 * hj * hk))
    return np.stack(cols, axis=1)


def _mc_fi(
    model: Model,
    batch: tp.Callable[[np.random.Generator, int], np.ndarray],
    reps: int,
    seed: int,
    workers: int,
    multiplier: int,
    label: str,
) -> FIResult:
    means, ses, n_done = numerics.mc_mean_batches(batch, reps, seed, workers)
    p = model.p
    matrix = numerics.InfoMatrix(_matrix_from_tri(p, means) * multiplier)
    std_errors = _matrix_from_tri(p, ses) * multiplier
    return FIResult(
        matrix=matrix,
        method="mc",
        std_errors=std_errors,
        replications=n_done,
        design_label=label,
        model_label=model.label(),
    )


# -- efficiency and special designs ---------------------------------------------


def relative_efficiencies(fi_a: tp.Any, fi_b: tp.Any) -> float:
    """Determinant ratio det(fi_a) / det(fi_b).

    :raises InformationError: dimension mismatch or a singular denominator.
    """
    a, b = _entries(fi_a), _entries(fi_b)
    if a.shape != b.shape:
        raise InformationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    det_b = numerics.det_small(b)
    if not abs(det_b) > 1e-300:
        raise InformationError("denominator information matrix is singular")
    return numerics.det_small(a) / det_b


def regression_fi(
    noise_model: Model,
    covariates: tp.Sequence[float],
    n: int,
    set_size: int,
    spec: numerics.QuadratureSpec | None = None,
) -> tuple[numerics.InfoMatrix, numerics.InfoMatrix]:
    """SRS information and rank-design gain for straight-line regression.

    Responses follow y_i = b0 + b1 x_i + sigma Z with symmetric standardized
    noise Z; theta = (b0, b1, sigma).  Returns (I_srs, K); both are diagonal
    when the covariates are centered, which is required.

    :raises InformationError: uncentered covariates or an unsupported noise family.
    """
    x = np.asarray(list(covariates), dtype=float)
    if x.size < 1:
        raise InformationError("at least one covariate is needed")
    if abs(x.mean()) > 1e-9 * (1.0 + float(np.max(np.abs(x)))):
        raise InformationError("covariates must be centered: subtract the mean so that x-bar = 0")
    if noise_model.param_names != ("mu", "sigma"):
        raise InformationError(
            f"noise family {noise_model.family!r} is not location-scale; "
            "regression supports symmetric location-scale noise"
        )
    std = Model(noise_model.family, (0.0, 1.0), ("mu", "sigma"))
    zs = np.linspace(0.1, 4.0, 14)
    if np.max(np.abs(np.asarray(std.pdf(zs)) - np.asarray(std.pdf(-zs)))) > 1e-10:
        raise InformationError(f"noise family {noise_model.family!r} is not symmetric about 0")

    unit = std.fisher_srs_unit(spec)
    a_const = float(unit[0, 0])
    b_const = float(unit[1, 1])

    def c_integrand(u: float) -> float:
        f = float(std.pdf(std.quantile(u)))
        return f * f / u

    def d_integrand(u: float) -> float:
        z = float(std.quantile(u))
        f = float(std.pdf(z))
        return z * z * f * f / u

    c_const = numerics.integrate_unit_interval(c_integrand, spec)
    d_const = numerics.integrate_unit_interval(d_integrand, spec)

    sigma = noise_model.value("sigma")
    k = x.size
    sx2 = float(np.mean(x * x))
    srs = numerics.InfoMatrix(np.diag([a_const, sx2 * a_const, b_const]) * (n * k / sigma**2))
    gain = numerics.InfoMatrix(
        np.diag([c_const, sx2 * c_const, d_const]) * (2.0 * k * n * (set_size - 1) / sigma**2)
    )
    return srs, gain


@dataclasses.dataclass(frozen=True)
class LemmaCheck:
    """Monte Carlo sides of the rank-sum expectation identity, with its analytic value."""

    lambda0: numerics.MCEstimate
    lambda1: numerics.MCEstimate
    reference: float


def verify_lemma_identity(
    model: Model,
    design: Design,
    G: tp.Callable[[np.ndarray], np.ndarray],
    reps: int = DEFAULT_REPS,
    seed: int = numerics.DEFAULT_SEED,
    workers: int = 1,
    spec: numerics.QuadratureSpec | None = None,
) -> LemmaCheck:
    """Estimate E[sum_r phi_{u_r}(lambda) G(Y_r) / (lambda + (1-2 lambda) F(Y_r))].

    One replicate is one perfect cycle; phi_u(0) = u - 1 and phi_u(1) = S - u.
    Both sides equal n (S-1) E[G(X)], returned as `reference` via quadrature.
    """
    n, S = design.n, design.set_size
    alpha = identity_alpha(n)
    reference = n * (S - 1) * numerics.integrate_expectation(
        model, lambda v: float(np.asarray(G(np.asarray(v)))), spec
    )

    def batch(rng: np.random.Generator, count: int) -> np.ndarray:
        t0 = np.zeros(count)
        t1 = np.zeros(count)
        for r in range(1, n + 1):
            x, u = sampling.block_draws(model, S, design.subsets, alpha.row(r), rng, count)
            F = np.asarray(model.cdf(x), dtype=float)
            gx = np.asarray(G(x), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                t0 += np.where(u > 1, (u - 1) * gx / F, 0.0)
                t1 += np.where(u < S, (S - u) * gx / (1.0 - F), 0.0)
        return np.stack([t0, t1], axis=1)

    means, ses, done = numerics.mc_mean_batches(batch, reps, seed, workers)
    return LemmaCheck(
        lambda0=numerics.MCEstimate(float(means[0]), float(ses[0]), done),
        lambda1=numerics.MCEstimate(float(means[1]), float(ses[1]), done),
        reference=reference,
    )
