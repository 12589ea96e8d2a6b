"""Analytic benchmarks: AWGN SEP, the Genie Bound, and the pairwise-error
statistics that show the trellis receiver converging to the PCSI receiver
as the observation window grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .channel import (
    ChannelModel,
    PointingModel,
    gain_moment,
    gain_support,
    sample_gain,
    turbulence_pdf,
)
from .modem import min_distance

__all__ = [
    "q_function",
    "sep_pam_awgn",
    "genie_sep",
    "genie_bep",
    "genie_sep_mc",
    "PairwiseScenario",
    "PairwiseStats",
    "pairwise_stats",
    "pairwise_error_prob",
    "pairwise_limit",
    "effective_snr",
    "expect_over_gain",
]


def q_function(x):
    """Upper-tail probability of the standard normal."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(x / math.sqrt(2.0))
    return out if out.ndim else float(out)


def sep_pam_awgn(two_d, n0: float, m_order: int):
    """SEP of M-PAM over AWGN: (2(M-1)/M) Q(sqrt(2 d^2 / N0))."""
    if n0 <= 0:
        raise ValueError("N0 must be positive")
    two_d = np.asarray(two_d, dtype=float)
    d = two_d / 2.0
    out = (2.0 * (m_order - 1) / m_order) * q_function(np.sqrt(2.0 * d * d / n0))
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# Expectation over the channel gain
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _gl_grid(lo: float, hi: float, n_panels: int):
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return t, w


def expect_over_gain(
    f: Callable[[np.ndarray], np.ndarray],
    model: ChannelModel,
    rtol: float = 1e-4,
) -> float:
    """E[f(h)] by adaptive quadrature over the factored gain distribution.

    Integrates over the turbulence factor on a log grid and over the
    pointing factor via its uniform inverse-CDF parametrization; panel
    counts double until the result is stable to rtol.  f must accept
    arrays.
    """
    turb, point = model.turbulence, model.pointing

    def inner_over_pointing(a: np.ndarray, n_panels: int) -> np.ndarray:
        # log grid over h_p resolves the deep-fade tail; the mass below the
        # lower cutoff is ~1e-13 and bounds the truncation error for any
        # |f| <= 1.
        eps = 1e-13
        u_lo = math.log(point.a0) + math.log(eps) / point.gamma_sq
        u, wu = _gl_grid(u_lo, math.log(point.a0), n_panels)
        hp = np.exp(u)
        dens = point.gamma_sq / point.a0**point.gamma_sq * hp**point.gamma_sq
        vals = f(np.outer(a, hp))
        return vals.dot(wu * dens)

    prev = None
    n = 8
    for _ in range(9):
        if turb.kind == "unity":
            if point.enabled:
                val = float(inner_over_pointing(np.array([1.0]), 4 * n)[0])
            else:
                val = float(np.asarray(f(np.array([1.0])))[0])
        else:
            lo, hi = gain_support(ChannelModel(turb, PointingModel.off()), 1e-9)
            u, wu = _gl_grid(math.log(lo), math.log(hi), n)
            a = np.exp(u)
            dens = turbulence_pdf(a, turb) * a  # log substitution Jacobian
            if point.enabled:
                fa = inner_over_pointing(a, max(8, n // 2))
            else:
                fa = np.asarray(f(a), dtype=float)
            val = float(np.dot(wu, dens * fa))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
        n *= 2
    raise ArithmeticError(
        f"gain-expectation quadrature did not reach rtol={rtol}; last={prev}"
    )


def genie_sep(model: ChannelModel, eb_over_n0: float, m_order: int, eb: float = 1.0) -> float:
    """Average SEP of the PCSI receiver over the fading distribution.

    eb_over_n0 is the linear Eb/N0 (not scaled by E[h^2]).
    """
    n0 = eb / eb_over_n0
    two_d = min_distance(eb, m_order)
    return expect_over_gain(
        lambda h: sep_pam_awgn(two_d * h, n0, m_order), model, rtol=1e-5
    )


def genie_bep(model: ChannelModel, eb_over_n0: float, m_order: int, eb: float = 1.0) -> float:
    """The Genie Bound: PCSI SEP / log2 M (adjacent-error approximation)."""
    return genie_sep(model, eb_over_n0, m_order, eb) / math.log2(m_order)


def genie_sep_mc(
    model: ChannelModel,
    eb_over_n0: float,
    m_order: int,
    n_samples: int,
    rng: np.random.Generator,
    eb: float = 1.0,
):
    """Monte-Carlo cross-check of genie_sep: (estimate, standard error)."""
    n0 = eb / eb_over_n0
    two_d = min_distance(eb, m_order)
    h = sample_gain(model, rng, n_samples)
    vals = sep_pam_awgn(two_d * np.asarray(h), n0, m_order)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n_samples))


# ---------------------------------------------------------------------------
# Pairwise-error analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairwiseScenario:
    """Two sequences differing only at one time slot, sharing window energy S."""

    s_energy: float  # S = sum of squared common symbols (incl. trailing one)
    m0k: int
    m1k: int
    h: float
    d: float
    n0: float
    window_len: int | None = None

    def __post_init__(self):
        if self.m0k == self.m1k:
            raise ValueError("scenario requires m0(k) != m1(k)")
        if self.s_energy <= 0:
            raise ValueError("S must be positive")
        if self.window_len is not None:
            m_max = max(self.m0k, self.m1k)
            lo = self.window_len
            hi = m_max**2 * (self.window_len + 1) if m_max > 0 else None
            if self.s_energy < lo:
                raise ValueError(f"S={self.s_energy} below window floor {lo}")


class PairwiseStats(NamedTuple):
    mu: float
    mean_plus: float
    var_plus: float
    mean_minus: float
    var_minus: float


def pairwise_stats(sc: PairwiseScenario) -> PairwiseStats:
    """Moments of X+ = m+.r and X- = m-.r under m = m0, where
    m+- = ||m0|| m1 +- ||m1|| m0."""
    s = sc.s_energy
    e0 = s + sc.m0k**2
    e1 = s + sc.m1k**2
    root = math.sqrt(e0 * e1)
    mu = s + sc.m0k * sc.m1k + root
    delta_sq = (sc.m1k - sc.m0k) ** 2
    tdh = 2.0 * sc.d * sc.h
    mean_plus = mu * tdh * math.sqrt(e0)
    var_plus = mu * sc.n0 * root
    mean_minus = -tdh * s * math.sqrt(e0) * delta_sq / mu
    var_minus = sc.n0 * s * root * delta_sq / mu
    return PairwiseStats(mu, mean_plus, var_plus, mean_minus, var_minus)


def pairwise_error_prob(sc: PairwiseScenario) -> float:
    """Exact probability of deciding m1 over the transmitted m0.

    X+ and X- are jointly Gaussian with m+.m- = 0, hence independent, so
    P(X+ X- > 0) = P+ P- + (1-P+)(1-P-) with P+- = P(X+- > 0).
    """
    st = pairwise_stats(sc)
    p_plus = float(q_function(-st.mean_plus / math.sqrt(st.var_plus)))
    p_minus = float(q_function(-st.mean_minus / math.sqrt(st.var_minus)))
    return p_plus * p_minus + (1.0 - p_plus) * (1.0 - p_minus)


def pairwise_limit(d: float, h: float, n0: float, delta_m: int) -> float:
    """Large-window limit Q(2 d h |dm| / sqrt(2 N0)); equals the PCSI
    pairwise error probability."""
    if delta_m < 1:
        raise ValueError("delta_m must be >= 1")
    return float(q_function(2.0 * d * h * delta_m / math.sqrt(2.0 * n0)))


def effective_snr(
    n_pilots: int, n_data: int, model: ChannelModel, eb: float, n0: float
) -> float:
    """Pilot-overhead-adjusted average SNR: ((P+D)/D) E[h^2] Eb / N0."""
    if n_data < 1:
        raise ValueError("D must be >= 1")
    if n_pilots < 0:
        raise ValueError("P must be >= 0")
    return (n_pilots + n_data) / n_data * gain_moment(model, 2) * eb / n0
