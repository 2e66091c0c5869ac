"""Prior densities and samplers used by the Gibbs sampler."""
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import check_simplex

LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class DirichletPrior:
    """Symmetric Dirichlet; ``eta < 1`` puts mass near the simplex boundary."""

    eta: float = 0.2

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"Dirichlet concentration must be positive, got {self.eta}")

    def log_pdf(self, a):
        return dirichlet_log_pdf(a, self.eta)

    def sample(self, R, rng):
        return sample_dirichlet(self.eta, R, rng)


@dataclass(frozen=True)
class InverseGammaParams:
    shape: float = 1.0
    scale: float = 0.01

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError(f"inverse-gamma parameters must be positive, got {self.shape}, {self.scale}")


def dirichlet_log_norm(eta, R):
    """log Gamma(eta R) - R log Gamma(eta)."""
    return gammaln(eta * R) - R * gammaln(eta)


def dirichlet_log_pdf(a, eta, check=True):
    """Log density of the symmetric Dirichlet at ``a``.

    Components below 1e-12 are floored there before the log so that boundary
    points give a finite (very large, for eta < 1) value.
    """
    if not eta > 0:
        raise ValueError(f"Dirichlet concentration must be positive, got {eta}")
    a = check_simplex(a) if check else np.asarray(a, dtype=np.float64)
    R = a.shape[0]
    return dirichlet_log_norm(eta, R) + (eta - 1.0) * np.log(np.maximum(a, LOG_FLOOR)).sum()


def sample_dirichlet(eta, R, rng):
    """Draw from the symmetric Dirichlet by normalizing R Gamma(eta, 1) variates."""
    if not eta > 0:
        raise ValueError(f"Dirichlet concentration must be positive, got {eta}")
    if R < 2:
        raise ValueError("Dirichlet dimension must be at least 2")
    g = rng.standard_gamma(eta, size=R)
    while g.sum() == 0.0:  # pragma: no cover - probability ~1e-60 for eta=0.2
        g = rng.standard_gamma(eta, size=R)
    return g / g.sum()


def sample_inverse_gamma(shape, scale, rng, size=None):
    """Draw ``1 / Gamma(shape, rate=scale)``; mean is ``scale / (shape - 1)`` for shape > 1."""
    if not (shape > 0 and scale > 0):
        raise ValueError(f"inverse-gamma parameters must be positive, got {shape}, {scale}")
    return 1.0 / rng.gamma(shape, 1.0 / scale, size=size)
