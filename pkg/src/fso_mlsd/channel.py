"""Channel gain models for the FSO link: turbulence, pointing error, composite.

The overall gain is h = h_a * h_p (path loss folded in, i.e. h_l = 1).
Turbulence h_a is log-normal (weak), Gamma-Gamma (strong), or unity;
pointing h_p has a power-law density on (0, A0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import stats as sp_stats

__all__ = [
    "TurbulenceModel",
    "PointingModel",
    "ChannelModel",
    "bessel_k",
    "lognormal_pdf",
    "gammagamma_pdf",
    "pointing_pdf",
    "composite_pdf",
    "sample_gain",
    "scintillation_index",
    "gain_moment",
    "turbulence_pdf",
    "turbulence_moment",
    "gain_support",
]


@dataclass(frozen=True)
class TurbulenceModel:
    """Atmospheric turbulence family for the gain factor h_a."""

    kind: str  # "lognormal" | "gamma_gamma" | "unity"
    sigma_x: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lognormal", "gamma_gamma", "unity"):
            raise ValueError(f"unknown turbulence kind: {self.kind!r}")
        if self.kind == "lognormal" and not self.sigma_x > 0:
            raise ValueError("sigma_x must be positive")
        if self.kind == "gamma_gamma" and not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    @classmethod
    def lognormal(cls, sigma_x: float) -> "TurbulenceModel":
        return cls(kind="lognormal", sigma_x=sigma_x)

    @classmethod
    def gamma_gamma(cls, alpha: float, beta: float) -> "TurbulenceModel":
        return cls(kind="gamma_gamma", alpha=alpha, beta=beta)

    @classmethod
    def unity(cls) -> "TurbulenceModel":
        return cls(kind="unity")


@dataclass(frozen=True)
class PointingModel:
    """Pointing-error gain factor h_p; density gamma_sq/A0^gamma_sq * h^(gamma_sq-1) on (0, A0)."""

    a0: float = 1.0
    gamma_sq: float = 1.0
    enabled: bool = False

    def __post_init__(self):
        if self.enabled:
            if not (0.0 < self.a0 <= 1.0):
                raise ValueError("A0 must lie in (0, 1]")
            if not self.gamma_sq > 0:
                raise ValueError("gamma_sq must be positive")

    @classmethod
    def off(cls) -> "PointingModel":
        return cls(enabled=False)


@dataclass(frozen=True)
class ChannelModel:
    turbulence: TurbulenceModel
    pointing: PointingModel

    @classmethod
    def weak(cls) -> "ChannelModel":
        """Weak-turbulence preset (SI = 0.0941) with pointing errors."""
        return cls(
            TurbulenceModel.lognormal(0.15),
            PointingModel(a0=0.0198, gamma_sq=2.8071, enabled=True),
        )

    @classmethod
    def strong(cls) -> "ChannelModel":
        """Strong-turbulence preset (SI = 1.3890) with pointing errors."""
        return cls(
            TurbulenceModel.gamma_gamma(2.23, 1.54),
            PointingModel(a0=0.0198, gamma_sq=2.8071, enabled=True),
        )

    @classmethod
    def unity(cls) -> "ChannelModel":
        """Degenerate h = 1 channel (AWGN sanity checks)."""
        return cls(TurbulenceModel.unity(), PointingModel.off())

    @property
    def is_degenerate(self) -> bool:
        return self.turbulence.kind == "unity" and not self.pointing.enabled


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _bessel_k_scalar(nu: float, x: float) -> float:
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, evaluated in log
    # space so large-order/small-argument cases neither overflow nor lose
    # the peak.  Panelled 32-node Gauss-Legendre after adaptive truncation.
    nu = abs(nu)

    def log_integrand(t):
        # log[exp(-x cosh t) cosh(nu t)]
        y = nu * t
        return -x * np.cosh(t) + y + np.log1p(np.exp(-2.0 * y)) - math.log(2.0)

    # peak location: nu*tanh(nu t) = x sinh t  ->  roughly asinh(nu/x)
    t_peak = math.asinh(nu / x) if nu > 0 else 0.0
    lg_peak = max(log_integrand(np.array(t_peak)), log_integrand(np.array(0.0)))
    # truncate where the integrand drops 45 nats below its peak
    t_hi = t_peak + 5.0
    while log_integrand(np.array(t_hi)) > lg_peak - 45.0:
        t_hi += 5.0
        if t_hi > 500.0:  # pragma: no cover - defensive
            break
    n_panels = max(8, int(math.ceil(t_hi)))
    edges = np.linspace(0.0, t_hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    vals = np.exp(log_integrand(t) - lg_peak)
    return float(np.exp(lg_peak) * np.dot(w, vals))


def _bessel_k_array(nu: float, x: np.ndarray) -> np.ndarray:
    # Shared t-grid over the whole batch: truncation is driven by the
    # smallest x (slowest decay); rows that decay earlier just underflow.
    nu = abs(nu)
    x_min = float(np.min(x))

    def log_integrand(t, xv):
        y = nu * t
        return -xv * np.cosh(t) + y + np.log1p(np.exp(-2.0 * y)) - math.log(2.0)

    t_peak = math.asinh(nu / x_min) if nu > 0 else 0.0
    lg_peak = max(log_integrand(t_peak, x_min), log_integrand(0.0, x_min))
    t_hi = t_peak + 5.0
    while log_integrand(t_hi, x_min) > lg_peak - 45.0:
        t_hi += 5.0
        if t_hi > 500.0:  # pragma: no cover - defensive
            break
    n_panels = max(8, int(math.ceil(t_hi)))
    edges = np.linspace(0.0, t_hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    y = nu * t
    log_cosh = y + np.log1p(np.exp(-2.0 * y)) - math.log(2.0)
    lg = -np.outer(x, np.cosh(t)) + log_cosh[None, :]
    row_max = lg.max(axis=1)
    vals = np.exp(lg - row_max[:, None])
    return np.exp(row_max) * vals.dot(w)


def bessel_k(nu: float, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Accepts scalar or array x.  Relative accuracy better than 1e-10 over
    0 <= |nu| <= 5, 1e-3 <= x <= 50.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ValueError("bessel_k requires x > 0")
    if x_arr.ndim == 0:
        return _bessel_k_scalar(float(nu), float(x_arr))
    out = _bessel_k_array(float(nu), x_arr.ravel())
    return out.reshape(x_arr.shape)


# ---------------------------------------------------------------------------
# Factor pdfs
# ---------------------------------------------------------------------------

def lognormal_pdf(h, sigma_x: float):
    """Log-normal turbulence density: ln h ~ N(0, (2 sigma_x)^2)."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("lognormal_pdf requires h > 0")
    out = (1.0 / (2.0 * h * sigma_x * math.sqrt(2.0 * math.pi))) * np.exp(
        -np.log(h) ** 2 / (8.0 * sigma_x**2)
    )
    return out if out.ndim else float(out)


def gammagamma_pdf(h, alpha: float, beta: float):
    """Gamma-Gamma turbulence density (unit mean)."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("gammagamma_pdf requires h > 0")
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    ab = alpha * beta
    coef = (
        2.0
        * ab ** ((alpha + beta) / 2.0)
        / (math.gamma(alpha) * math.gamma(beta))
    )
    k = bessel_k(alpha - beta, 2.0 * np.sqrt(ab * h))
    out = coef * h ** ((alpha + beta) / 2.0 - 1.0) * k
    return out if np.ndim(out) else float(out)


def pointing_pdf(h, a0: float, gamma_sq: float):
    """Pointing-error density on (0, A0); zero outside the support."""
    h = np.asarray(h, dtype=float)
    out = np.where(
        (h > 0) & (h < a0) | np.isclose(h, a0),
        gamma_sq / a0**gamma_sq * np.clip(h, 1e-300, None) ** (gamma_sq - 1.0),
        0.0,
    )
    return out if out.ndim else float(out)


def turbulence_pdf(h, turb: TurbulenceModel):
    if turb.kind == "lognormal":
        return lognormal_pdf(h, turb.sigma_x)
    if turb.kind == "gamma_gamma":
        return gammagamma_pdf(h, turb.alpha, turb.beta)
    raise ValueError("unity turbulence has no density")


def composite_pdf(h: float, model: ChannelModel) -> float:
    """Density of h = h_a * h_p by numerical integration over the factors.

    With pointing disabled this is the turbulence pdf; with unity turbulence
    it is the pointing pdf.  A fully degenerate channel has no density.
    """
    if h <= 0:
        raise ValueError("composite_pdf requires h > 0")
    turb, point = model.turbulence, model.pointing
    if model.is_degenerate:
        raise ValueError("degenerate channel h=1 has no density")
    if not point.enabled:
        return float(turbulence_pdf(h, turb))
    if turb.kind == "unity":
        return float(pointing_pdf(h, point.a0, point.gamma_sq))

    # p_h(h) = int_{h/A0}^inf p_a(a) p_p(h/a) / a da; substitute a = (h/A0) e^u
    # so p_p(h/a) = (gamma_sq/A0) exp(-u (gamma_sq - 1)) and the measure
    # becomes du on [0, inf).
    a_lo = h / point.a0
    g2 = point.gamma_sq

    def integrand(u):
        a = a_lo * np.exp(u)
        return turbulence_pdf(a, turb) * (g2 / point.a0) * np.exp(-u * (g2 - 1.0))

    # truncate where the turbulence factor is negligible
    hi_a = _turbulence_quantile_bounds(turb, 1e-12)[1]
    u_max = max(math.log(hi_a / a_lo), 1e-6) if hi_a > a_lo else 1e-6
    val, err = _adaptive_gl(integrand, 0.0, u_max, rtol=1e-7)
    return float(val)


def _adaptive_gl(f, lo: float, hi: float, rtol: float, max_iter: int = 9):
    """Panelled Gauss-Legendre with panel doubling until relative change < rtol."""
    prev = None
    n_panels = 8
    for _ in range(max_iter):
        edges = np.linspace(lo, hi, n_panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        val = float(np.dot(w, np.asarray(f(t), dtype=float)))
        if prev is not None:
            err = abs(val - prev)
            if err <= rtol * max(abs(val), 1e-300):
                return val, err
        prev = val
        n_panels *= 2
    return prev, float("inf")


def _turbulence_quantile_bounds(turb: TurbulenceModel, eps: float):
    """(lo, hi) bracketing all but ~eps of the turbulence mass."""
    if turb.kind == "lognormal":
        s = 2.0 * turb.sigma_x
        dist = sp_stats.lognorm(s)
        return float(dist.ppf(eps)), float(dist.ppf(1.0 - eps))
    if turb.kind == "gamma_gamma":
        gx = sp_stats.gamma(turb.alpha, scale=1.0 / turb.alpha)
        gy = sp_stats.gamma(turb.beta, scale=1.0 / turb.beta)
        e = eps / 2.0
        lo = float(gx.ppf(e) * gy.ppf(e))
        hi = float(gx.ppf(1.0 - e) * gy.ppf(1.0 - e))
        return lo, hi
    return 1.0, 1.0


def gain_support(model: ChannelModel, eps: float = 1e-8):
    """(lo, hi) bracketing essentially all of the composite-gain mass."""
    lo, hi = _turbulence_quantile_bounds(model.turbulence, eps)
    if model.pointing.enabled:
        p = model.pointing
        # h_p = A0 U^(1/gamma_sq): eps-quantile is A0 eps^(1/gamma_sq)
        lo *= p.a0 * eps ** (1.0 / p.gamma_sq)
        hi *= p.a0
    return lo, hi


# ---------------------------------------------------------------------------
# Sampling and moments
# ---------------------------------------------------------------------------

def sample_gain(model: ChannelModel, rng: np.random.Generator, size=None):
    """Draw h = h_a * h_p.  One rng per worker; never share across threads."""
    turb, point = model.turbulence, model.pointing
    if turb.kind == "lognormal":
        h = np.exp(2.0 * turb.sigma_x * rng.standard_normal(size))
    elif turb.kind == "gamma_gamma":
        x = rng.gamma(turb.alpha, 1.0 / turb.alpha, size)
        y = rng.gamma(turb.beta, 1.0 / turb.beta, size)
        h = x * y
    else:
        h = np.ones(size) if size is not None else 1.0
    if point.enabled:
        u = rng.random(size)
        h = h * point.a0 * u ** (1.0 / point.gamma_sq)
    return h


def scintillation_index(model: ChannelModel) -> float:
    """SI = E[h_a^2]/E[h_a]^2 - 1, from the turbulence factor only."""
    turb = model.turbulence
    if turb.kind == "lognormal":
        return math.exp(4.0 * turb.sigma_x**2) - 1.0
    if turb.kind == "gamma_gamma":
        return 1.0 / turb.alpha + 1.0 / turb.beta + 1.0 / (turb.alpha * turb.beta)
    return 0.0


def turbulence_moment(turb: TurbulenceModel, n: int) -> float:
    if turb.kind == "lognormal":
        return math.exp(2.0 * n**2 * turb.sigma_x**2)
    if turb.kind == "gamma_gamma":
        if n == 1:
            return 1.0
        return (1.0 + 1.0 / turb.alpha) * (1.0 + 1.0 / turb.beta)
    return 1.0


def gain_moment(model: ChannelModel, n: int) -> float:
    """E[h^n] for n in {1, 2}, from the closed-form factor moments."""
    if n not in (1, 2):
        raise ValueError("gain_moment supports n in {1, 2}")
    m = turbulence_moment(model.turbulence, n)
    if model.pointing.enabled:
        p = model.pointing
        m *= p.gamma_sq * p.a0**n / (p.gamma_sq + n)
    return m
