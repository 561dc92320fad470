"""Data-generating distributions with log-density, CDF, quantile, and sampling.

Four families cover every model in this package: ``normal``, ``student_t``
(location-scale), ``bernoulli``, and ``truncated_normal``.  Truncated
densities are renormalized by the in-bounds probability mass, and truncated
sampling uses the inverse CDF of the renormalized distribution, so draw
count and determinism never depend on rejection loops.

Vectorized kernels (``normal_logpdf`` etc.) are exposed alongside the
:class:`DistributionSpec` surface because the likelihood evaluations in
:mod:`ppmkit.inference` need per-observation locations and scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

FAMILIES = ("normal", "student_t", "bernoulli", "truncated_normal")

_LOG_2PI = math.log(2.0 * math.pi)
_NEG_INF = float("-inf")


# --------------------------------------------------------------------- #
# Vectorized density kernels
# --------------------------------------------------------------------- #


def normal_logpdf(y, mu, sigma):
    """Elementwise Normal(mu, sigma) log-density; broadcasts all arguments."""
    z = (np.asarray(y, dtype=float) - mu) / sigma
    return -0.5 * z * z - np.log(sigma) - 0.5 * _LOG_2PI


def student_t_logpdf(y, mu, sigma, df):
    """Elementwise location-scale Student-t log-density."""
    z = (np.asarray(y, dtype=float) - mu) / sigma
    c = (
        special.gammaln((df + 1.0) / 2.0)
        - special.gammaln(df / 2.0)
        - 0.5 * np.log(df * np.pi)
    )
    return c - np.log(sigma) - 0.5 * (df + 1.0) * np.log1p(z * z / df)


def bernoulli_logpmf(y, p):
    """Elementwise Bernoulli log-mass; -inf off the {0, 1} support."""
    y = np.asarray(y, dtype=float)
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
        log_q = np.log1p(-p)
    out = np.where(y == 1.0, log_p, np.where(y == 0.0, log_q, _NEG_INF))
    return out if out.ndim else float(out)


def truncated_normal_logpdf(y, mu, sigma, lower, upper):
    """Normal log-density renormalized to [lower, upper]; -inf outside."""
    y = np.asarray(y, dtype=float)
    lo = -np.inf if lower is None else lower
    hi = np.inf if upper is None else upper
    log_mass = _normal_interval_logmass(mu, sigma, lo, hi)
    out = normal_logpdf(y, mu, sigma) - log_mass
    out = np.where((y < lo) | (y > hi), _NEG_INF, out)
    return out if out.ndim else float(out)


def _normal_interval_logmass(mu, sigma, lo, hi):
    """log P(lo <= Y <= hi) for Y ~ Normal(mu, sigma)."""
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    mass = special.ndtr(b) - special.ndtr(a)
    if np.any(mass <= 0.0):
        raise ValueError("truncation interval carries no probability mass")
    return np.log(mass)


# --------------------------------------------------------------------- #
# Vectorized samplers (shared with the prediction layer)
# --------------------------------------------------------------------- #


def sample_values(family, mu, sigma, df, rng, size):
    """Draw ``size`` values from an untruncated family; mu/sigma broadcast."""
    if family == "normal":
        return mu + sigma * rng.standard_normal(size)
    if family == "student_t":
        return mu + sigma * rng.standard_t(df, size=size)
    if family == "bernoulli":
        return (rng.random(size) < mu).astype(float)
    raise ValueError(f"unknown family {family!r}")


def sample_truncated(family, mu, sigma, df, lower, upper, rng, size):
    """Inverse-CDF draws from a truncated normal or Student-t.

    The uniform variate is mapped through the parent CDF restricted to
    [lower, upper], so every draw lands in bounds and the cost per draw is
    constant.
    """
    lo = -np.inf if lower is None else lower
    hi = np.inf if upper is None else upper
    u = rng.random(size)
    if family == "normal":
        f_lo = special.ndtr((lo - mu) / sigma)
        f_hi = special.ndtr((hi - mu) / sigma)
        mass = f_hi - f_lo
        if np.any(mass <= 0.0):
            raise ValueError("truncation interval carries no probability mass")
        out = mu + sigma * special.ndtri(f_lo + u * mass)
    elif family == "student_t":
        f_lo = stats.t.cdf(lo, df, loc=mu, scale=sigma)
        f_hi = stats.t.cdf(hi, df, loc=mu, scale=sigma)
        mass = f_hi - f_lo
        if np.any(mass <= 0.0):
            raise ValueError("truncation interval carries no probability mass")
        out = stats.t.ppf(f_lo + u * mass, df, loc=mu, scale=sigma)
    else:
        raise ValueError(f"family {family!r} does not support truncation")
    return np.clip(out, lo, hi)


# --------------------------------------------------------------------- #
# Spec surface
# --------------------------------------------------------------------- #


@dataclass(frozen=True)
class DistributionSpec:
    """A fully parameterized distribution from one of the four families.

    ``mu`` is the location (the success probability for ``bernoulli``),
    ``sigma`` the scale (absent for ``bernoulli``), ``df`` the Student-t
    degrees of freedom, and ``lower``/``upper`` the optional truncation
    bounds of a ``truncated_normal``.
    """

    family: str
    mu: float
    sigma: float | None = None
    df: float | None = None
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "bernoulli":
            if not 0.0 <= self.mu <= 1.0:
                raise ValueError("bernoulli mu must lie in [0, 1]")
            if self.sigma is not None:
                raise ValueError("bernoulli takes no scale parameter")
        else:
            if self.sigma is None or not self.sigma > 0.0:
                raise ValueError("sigma must be a positive real")
        if self.family == "student_t":
            if self.df is None or not self.df > 0.0:
                raise ValueError("student_t requires df > 0")
        elif self.df is not None:
            raise ValueError("df only applies to student_t")
        if self.family == "truncated_normal":
            lo = -np.inf if self.lower is None else self.lower
            hi = np.inf if self.upper is None else self.upper
            if not lo < hi:
                raise ValueError("require lower < upper")
        elif self.lower is not None or self.upper is not None:
            raise ValueError("bounds only apply to truncated_normal")

    # ---------- densities ----------

    def log_density(self, y):
        """Natural-log density (or mass) at ``y``; -inf off the support."""
        if self.family == "normal":
            out = normal_logpdf(y, self.mu, self.sigma)
        elif self.family == "student_t":
            out = student_t_logpdf(y, self.mu, self.sigma, self.df)
        elif self.family == "bernoulli":
            out = bernoulli_logpmf(y, self.mu)
        else:
            out = truncated_normal_logpdf(y, self.mu, self.sigma, self.lower, self.upper)
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, y):
        """P(Y <= y)."""
        y = np.asarray(y, dtype=float)
        if self.family == "normal":
            out = special.ndtr((y - self.mu) / self.sigma)
        elif self.family == "student_t":
            out = stats.t.cdf(y, self.df, loc=self.mu, scale=self.sigma)
        elif self.family == "bernoulli":
            out = np.where(y < 0.0, 0.0, np.where(y < 1.0, 1.0 - self.mu, 1.0))
        else:
            a, b = self._std_bounds()
            out = stats.truncnorm.cdf(y, a, b, loc=self.mu, scale=self.sigma)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, p):
        """Inverse CDF at ``p`` in the open interval (0, 1)."""
        p_arr = np.asarray(p, dtype=float)
        if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
            raise ValueError("quantile requires p in (0, 1)")
        if self.family == "normal":
            out = self.mu + self.sigma * special.ndtri(p_arr)
        elif self.family == "student_t":
            out = stats.t.ppf(p_arr, self.df, loc=self.mu, scale=self.sigma)
        elif self.family == "bernoulli":
            out = np.where(p_arr <= 1.0 - self.mu, 0.0, 1.0)
        else:
            a, b = self._std_bounds()
            out = stats.truncnorm.ppf(p_arr, a, b, loc=self.mu, scale=self.sigma)
        return float(out) if np.ndim(out) == 0 else out

    def sample(self, rng, n):
        """``n`` independent draws using ``rng`` (numpy Generator)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if self.family == "truncated_normal":
            return sample_truncated(
                "normal", self.mu, self.sigma, None, self.lower, self.upper, rng, n
            )
        return sample_values(self.family, self.mu, self.sigma, self.df, rng, n)

    def _std_bounds(self):
        a = -np.inf if self.lower is None else (self.lower - self.mu) / self.sigma
        b = np.inf if self.upper is None else (self.upper - self.mu) / self.sigma
        return a, b

    # ---------- serialization ----------

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "mu": self.mu,
            "sigma": self.sigma,
            "df": self.df,
            "lower": self.lower,
            "upper": self.upper,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DistributionSpec":
        return cls(
            family=obj["family"],
            mu=obj["mu"],
            sigma=obj.get("sigma"),
            df=obj.get("df"),
            lower=obj.get("lower"),
            upper=obj.get("upper"),
        )


def normal(mu: float, sigma: float) -> DistributionSpec:
    return DistributionSpec("normal", mu, sigma)


def student_t(mu: float, sigma: float, df: float) -> DistributionSpec:
    return DistributionSpec("student_t", mu, sigma, df=df)


def bernoulli(mu: float) -> DistributionSpec:
    return DistributionSpec("bernoulli", mu)


def truncated_normal(
    mu: float, sigma: float, lower: float | None = None, upper: float | None = None
) -> DistributionSpec:
    return DistributionSpec("truncated_normal", mu, sigma, lower=lower, upper=upper)
