"""Shannon/Renyi entropy and KL information of SRS, RSS, and PROS samples.

All quantities are computed on the quantile scale: a subset density factors
as f(x)·w_r(F(x)), so with t = F(x) every integral below runs over (0, 1)
with the block weight w_r(t) and the parent log-density log f(Q(t)).
Entropies are reported in nats.  Subsetting is assumed perfect here.
"""

from __future__ import annotations

import dataclasses
import typing as tp

import numpy as np

from . import numerics
from .densities import block_weight
from .designs import Design, make_balanced_design
from .numerics import QuadratureSpec
from .models import Model

__all__ = [
    "EntropyError",
    "EntropyReport",
    "shannon",
    "renyi",
    "kl_pros_srs",
    "kl_likelihood_chain",
]

_KINDS = ("srs", "rss", "pros")

# f^{alpha-1}(Q(t)) carries an integrable power singularity at each endpoint
# whenever alpha < 1 (with a slowly varying log factor for the normal family),
# so the error bound cannot be certified to the default 1e-8; 1e-5 relative is
# attainable on the whole family grid and ample for entropies in nats
_RENYI_SPEC = QuadratureSpec(rtol=1e-5, atol=1e-9, max_subdivisions=400)


class EntropyError(Exception):
    """Raised for invalid entropy arguments or divergent integrals."""


@dataclasses.dataclass(frozen=True)
class EntropyReport:
    """Total entropy of a sample design plus its per-subset decomposition.

    :param kind: one of ``srs``, ``rss``, ``pros``.
    :param total: entropy of the whole sample, in nats.
    :param per_subset: one contribution per measured subset (per draw for SRS).
    :param lower_bound: (1/m)·H of an RSS that measures all S ranks.
    :param upper_bound: entropy of an SRS of the same size.
    """

    kind: str
    total: float
    per_subset: tuple[float, ...]
    lower_bound: float
    upper_bound: float
    model_label: str
    design_label: str

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise EntropyError(f"kind must be one of {_KINDS}, got {self.kind!r}")


def _resolve(kind: str, n: int, set_size: int | None) -> tuple[int, tuple[tuple[int, ...], ...]]:
    """Return (set size, subsets) for the requested design kind."""
    if kind not in _KINDS:
        raise EntropyError(f"kind must be one of {_KINDS}, got {kind!r}")
    if n < 1:
        raise EntropyError(f"n must be >= 1, got {n}")
    if kind == "srs":
        return 1, tuple((1,) for _ in range(n))
    if kind == "rss":
        set_size = n if set_size is None else set_size
        if set_size != n:
            raise EntropyError("rss measures every rank once; set_size must equal n")
        return n, tuple((v,) for v in range(1, n + 1))
    if set_size is None:
        raise EntropyError("pros needs an explicit set_size")
    design = make_balanced_design(set_size, n)
    return set_size, design.subsets


def _neg_log_pdf(model: Model, t: np.ndarray | float) -> np.ndarray | float:
    return -model.logpdf(model.quantile(t))


def _subset_shannon(
    model: Model, set_size: int, ranks: tp.Sequence[int], spec: QuadratureSpec | None
) -> float:
    """-∫ w_r(t)·[log f(Q(t)) + log w_r(t)] dt for one subset."""

    def integrand(t: float) -> float:
        w = block_weight(set_size, ranks, t)
        if not w > 0.0:
            return 0.0
        return -w * (float(model.logpdf(model.quantile(t))) + np.log(w))

    return numerics.integrate_unit_interval(integrand, spec)


def _label(kind: str, n: int, set_size: int) -> str:
    if kind == "srs":
        return f"srs(n={n})"
    if kind == "rss":
        return f"rss(n={n})"
    return f"pros(n={n}, S={set_size})"


def _bounds_shannon(
    model: Model, n: int, set_size: int, h_parent: float, spec: QuadratureSpec | None
) -> tuple[float, float]:
    """Sandwich: (1/m)·H_S(rss with all S ranks) <= total <= n·H(f)."""
    m = set_size // n
    rss_all = sum(
        _subset_shannon(model, set_size, (v,), spec) for v in range(1, set_size + 1)
    )
    return rss_all / m, n * h_parent


def shannon(
    model: Model,
    kind: str = "pros",
    n: int = 1,
    set_size: int | None = None,
    spec: QuadratureSpec | None = None,
) -> EntropyReport:
    """Shannon entropy of an SRS/RSS/PROS sample of n measurements.

    SRS returns n·H(f).  RSS (set size n, every rank measured once) and
    PROS (balanced subsets of a size-``set_size`` set) sum the entropies of
    their subset densities f·w_r.
    """
    set_size, subsets = _resolve(kind, n, set_size)
    h_parent = numerics.integrate_unit_interval(lambda t: float(_neg_log_pdf(model, t)), spec)
    if kind == "srs":
        per = tuple(h_parent for _ in range(n))
        total = float(np.sum(per))
        return EntropyReport(kind, total, per, total, total, model.label(), _label(kind, n, 1))
    per = tuple(_subset_shannon(model, set_size, ranks, spec) for ranks in subsets)
    total = float(np.sum(per))
    lower, upper = _bounds_shannon(model, n, set_size, h_parent, spec)
    return EntropyReport(
        kind, total, per, lower, upper, model.label(), _label(kind, n, set_size)
    )


def _subset_renyi(
    model: Model,
    set_size: int,
    ranks: tp.Sequence[int],
    alpha: float,
    spec: QuadratureSpec | None,
) -> float:
    """(1/(1-α))·log ∫ f^{α-1}(Q(t))·w_r(t)^α dt for one subset."""

    def integrand(t: float) -> float:
        w = block_weight(set_size, ranks, t)
        if not w > 0.0:
            return 0.0
        return float(np.exp((alpha - 1.0) * model.logpdf(model.quantile(t)))) * w**alpha

    value = numerics.integrate_unit_interval(integrand, spec)
    if not value > 0.0:
        raise EntropyError(f"Renyi integral is not positive for subset {tuple(ranks)}")
    return np.log(value) / (1.0 - alpha)


def renyi(
    model: Model,
    alpha: float,
    kind: str = "pros",
    n: int = 1,
    set_size: int | None = None,
    spec: QuadratureSpec | None = None,
) -> EntropyReport:
    """Renyi entropy of order alpha; only 0 < alpha < 1 is defined here.

    Orders above 1 are outside the supported range for subset densities and
    are rejected.
    """
    if not 0.0 < alpha < 1.0:
        raise EntropyError(
            f"Renyi order must satisfy 0 < alpha < 1 (alpha > 1 unsupported), got {alpha!r}"
        )
    if spec is None:
        spec = _RENYI_SPEC
    set_size, subsets = _resolve(kind, n, set_size)

    def parent(t: float) -> float:
        return float(np.exp((alpha - 1.0) * model.logpdf(model.quantile(t))))

    h_parent = np.log(numerics.integrate_unit_interval(parent, spec)) / (1.0 - alpha)
    if kind == "srs":
        per = tuple(h_parent for _ in range(n))
        total = float(np.sum(per))
        return EntropyReport(kind, total, per, total, total, model.label(), _label(kind, n, 1))
    per = tuple(_subset_renyi(model, set_size, ranks, alpha, spec) for ranks in subsets)
    total = float(np.sum(per))
    m = set_size // n
    rss_all = sum(
        _subset_renyi(model, set_size, (v,), alpha, spec) for v in range(1, set_size + 1)
    )
    return EntropyReport(
        kind, total, per, rss_all / m, n * h_parent, model.label(), _label(kind, n, set_size)
    )


def kl_pros_srs(model: Model, design: Design, spec: QuadratureSpec | None = None) -> float:
    """KL information K(L_pros, L_srs) = Σ_r ∫ w_r(t)·log w_r(t) dt.

    The parent density cancels from the log ratio, so the value depends on
    the design alone; it is zero exactly when S = 1.
    """
    if not design.is_balanced:
        raise EntropyError("KL information is defined here for balanced designs")
    total = 0.0
    for ranks in design.subsets:

        def integrand(t: float, ranks: tp.Sequence[int] = ranks) -> float:
            w = block_weight(design.set_size, ranks, t)
            if not w > 0.0:
                return 0.0
            return w * np.log(w)

        total += numerics.integrate_unit_interval(integrand, spec)
    return float(total)


def kl_likelihood_chain(
    model: Model,
    design: Design,
    shift: float = 0.5,
    spec: QuadratureSpec | None = None,
) -> tuple[float, float, float]:
    """KL of SRS/PROS/RSS* likelihoods against a shifted parent density.

    The second density is g(x) = f(x + shift·σ), whose support contains the
    parent's for left-bounded families.  Returns the ordered triple
    (K_srs, K_pros, K_rss*/m) of Lemma-style lower, middle, upper values for
    a sample of n measurements.  Raises if the KL integral diverges because
    the shifted support no longer covers the parent's.
    """
    if not design.is_balanced:
        raise EntropyError("the likelihood chain is defined for balanced designs")
    delta = shift * model.std()
    S, n = design.set_size, design.n
    m = design.m

    probe = np.linspace(1e-6, 1.0 - 1e-6, 257)
    if np.any(np.asarray(model.pdf(np.asarray(model.quantile(probe)) + delta)) <= 0.0):
        raise EntropyError(
            "KL divergence is infinite: the shifted density vanishes on the parent support"
        )

    def log_ratio(t: float) -> float:
        x = model.quantile(t)
        return float(model.logpdf(x) - model.logpdf(x + delta))

    k1 = numerics.integrate_unit_interval(log_ratio, spec)

    def subset_term(ranks: tp.Sequence[int]) -> float:
        def integrand(t: float) -> float:
            w = block_weight(S, ranks, t)
            if not w > 0.0:
                return 0.0
            return w * (np.log(w) + log_ratio(t))

        return numerics.integrate_unit_interval(integrand, spec)

    k_pros = sum(subset_term(ranks) for ranks in design.subsets)
    k_rss = sum(subset_term((v,)) for v in range(1, S + 1))
    return float(n * k1), float(k_pros), float(k_rss / m)
