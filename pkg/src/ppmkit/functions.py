"""Mean functions, link functions, and variance functions.

The mean forms are the saturating dose-response shapes used across the
regression demos plus polynomial baselines; all evaluate with numpy
broadcasting so a single call can cover one parameter vector over a grid
of inputs or a matrix of posterior draws at a single input.

Links map the unconstrained mean-function output into an allowable range:
the 0-1 links (``logit``, ``probit``, ``cauchit``, ``cloglog`` -- named by
convention, applied as inverse links) squash onto (0, 1) and ``softplus``
onto (0, inf).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

LINKS = ("identity", "logit", "probit", "cauchit", "cloglog", "softplus")
ZERO_ONE_LINKS = ("logit", "probit", "cauchit", "cloglog")

MEAN_FORMS = ("linear", "quadratic", "exp2", "exp3", "michaelis_menten", "true_model")
VARIANCE_FORMS = ("constant", "linear_in_mu")

_SOFTPLUS_CUTOFF = 30.0  # ln(1 + e^u) - u < 1e-13 beyond this


def softplus(u):
    u = np.asarray(u, dtype=float)
    out = np.where(u > _SOFTPLUS_CUTOFF, u, np.log1p(np.exp(np.minimum(u, _SOFTPLUS_CUTOFF))))
    return float(out) if out.ndim == 0 else out


def apply_link(link: str, u):
    """Evaluate a link at ``u`` (scalar or array)."""
    u = np.asarray(u, dtype=float)
    if link == "identity":
        out = u
    elif link == "logit":
        out = special.expit(u)
    elif link == "probit":
        out = special.ndtr(u)
    elif link == "cauchit":
        out = 0.5 + np.arctan(u) / np.pi
    elif link == "cloglog":
        with np.errstate(over="ignore"):
            out = -np.expm1(-np.exp(u))
    elif link == "softplus":
        return softplus(u)
    else:
        raise ValueError(f"unknown link {link!r}")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MeanFunctionSpec:
    """Structural form of the mean, with its trailing feature count.

    Parameter vector layout per form (feature count 1 unless noted):

    * ``linear``            (theta0, theta1): theta0 + theta1*x; with d
      features (theta0, ..., thetad): theta0 + sum_j thetaj*xj
    * ``quadratic``         (theta0, theta1, theta2): theta0 + theta1*x + theta2*x^2
    * ``exp2``              (theta1, theta2): theta2*(1 - exp(-theta1*x))
    * ``exp3``              (theta1, theta2, theta3): theta3 + theta2*(1 - exp(-theta1*x))
    * ``michaelis_menten``  (theta1, theta2): theta1*x / (theta2 + x)
    * ``true_model``        (theta1, theta2): theta2 + (1 - e^(-theta1*x)) / (1 + e^(-theta1*x))
    """

    form: str
    n_features: int = 1

    def __post_init__(self):
        if self.form not in MEAN_FORMS:
            raise ValueError(f"unknown mean form {self.form!r}")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.n_features > 1 and self.form != "linear":
            raise ValueError(f"{self.form!r} only supports a single feature")

    @property
    def parameter_count(self) -> int:
        if self.form == "linear":
            return 1 + self.n_features
        return {"quadratic": 3, "exp2": 2, "exp3": 3, "michaelis_menten": 2, "true_model": 2}[
            self.form
        ]

    @property
    def parameter_names(self) -> tuple[str, ...]:
        if self.form == "linear":
            return tuple(f"theta{j}" for j in range(self.n_features + 1))
        return {
            "quadratic": ("theta0", "theta1", "theta2"),
            "exp2": ("theta1", "theta2"),
            "exp3": ("theta1", "theta2", "theta3"),
            "michaelis_menten": ("theta1", "theta2"),
            "true_model": ("theta1", "theta2"),
        }[self.form]

    def to_json(self) -> dict:
        return {"form": self.form, "n_features": self.n_features}


def mean_values(spec: MeanFunctionSpec, theta, x):
    """Evaluate the mean form without domain checks; broadcasts freely.

    ``theta`` is a vector (k,) or draw matrix (m, k); ``x`` is a scalar or
    an array that broadcasts against the leading theta axes.  Division by
    zero propagates as inf/nan for the caller to handle.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    form = spec.form
    if form == "linear":
        if spec.n_features == 1:
            return theta[..., 0] + theta[..., 1] * x
        # inner product over the feature axis covers both a (n, d) data
        # matrix with one theta and a (m, k) draw matrix with one query
        return theta[..., 0] + np.inner(theta[..., 1:], x)
    if form == "quadratic":
        return theta[..., 0] + theta[..., 1] * x + theta[..., 2] * x * x
    if form == "exp2":
        return theta[..., 1] * -np.expm1(-theta[..., 0] * x)
    if form == "exp3":
        return theta[..., 2] + theta[..., 1] * -np.expm1(-theta[..., 0] * x)
    if form == "michaelis_menten":
        with np.errstate(divide="ignore", invalid="ignore"):
            return theta[..., 0] * x / (theta[..., 1] + x)
    # true_model: bounded between theta2 and theta2 + 1 for theta1 > 0, x >= 0
    return theta[..., 1] + np.tanh(theta[..., 0] * x / 2.0)


def eval_mean(spec: MeanFunctionSpec, theta, x):
    """Checked mean evaluation: validates parameter count and poles."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != spec.parameter_count:
        raise ValueError(
            f"{spec.form} expects {spec.parameter_count} parameters, got {theta.shape[-1]}"
        )
    if spec.form == "michaelis_menten":
        denom = np.asarray(theta[..., 1] + np.asarray(x, dtype=float))
        if np.any(denom == 0.0):
            raise ValueError("michaelis_menten evaluated at its pole x = -theta2")
    out = mean_values(spec, theta, x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class VarianceFunctionSpec:
    """Outcome-scale model: a constant scale or a linear trend in the mean.

    ``constant`` holds (sigma,) with an identity link and a positivity
    check; ``linear_in_mu`` holds (sigma0, sigma1) and passes
    sigma0 + sigma1*mu through softplus so the scale stays positive.
    """

    form: str
    link: str = ""

    def __post_init__(self):
        if self.form not in VARIANCE_FORMS:
            raise ValueError(f"unknown variance form {self.form!r}")
        expected = "identity" if self.form == "constant" else "softplus"
        if self.link == "":
            object.__setattr__(self, "link", expected)
        elif self.link != expected:
            raise ValueError(f"{self.form} variance requires the {expected} link")

    @property
    def parameter_count(self) -> int:
        return 1 if self.form == "constant" else 2

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return ("sigma",) if self.form == "constant" else ("sigma0", "sigma1")

    def to_json(self) -> dict:
        return {"form": self.form, "link": self.link}


def sigma_values(spec: VarianceFunctionSpec, theta_sigma, mu):
    """Evaluate the scale without domain checks; broadcasts like the mean."""
    theta_sigma = np.asarray(theta_sigma, dtype=float)
    if spec.form == "constant":
        return theta_sigma[..., 0] * np.ones_like(np.asarray(mu, dtype=float))
    return softplus(theta_sigma[..., 0] + theta_sigma[..., 1] * np.asarray(mu, dtype=float))


def eval_sigma(spec: VarianceFunctionSpec, theta_sigma, mu):
    """Checked scale evaluation; a non-positive constant scale is a domain error."""
    theta_sigma = np.asarray(theta_sigma, dtype=float)
    if theta_sigma.shape[-1] != spec.parameter_count:
        raise ValueError(
            f"{spec.form} expects {spec.parameter_count} parameters, got {theta_sigma.shape[-1]}"
        )
    if spec.form == "constant" and np.any(theta_sigma[..., 0] <= 0.0):
        raise ValueError("constant scale must be > 0")
    out = sigma_values(spec, theta_sigma, mu)
    return float(out) if np.ndim(out) == 0 else out
