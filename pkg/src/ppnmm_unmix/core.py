"""
Forward mixing models and the basic containers they operate on.

A pixel spectrum ``y`` (L bands) is modelled from an endmember library ``M``
(L x R, one pure spectrum per column) and an abundance vector ``a`` on the
(R-1)-simplex. Three forward models are provided:

    linear (LMM)   : y = M a
    PPNMM          : y = M a + b (M a) * (M a)
    GBM            : y = M a + sum_{i<j} gamma_ij a_i a_j (m_i * m_j)

followed by additive white Gaussian noise. Everything is float64.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

SIMPLEX_TOL = 1e-9


@dataclass
class SpectralLibrary:
    """Endmember matrix with one pure spectrum per column.

    Attributes:
        values: (L, R) reflectance matrix.
        names: optional endmember names, one per column.
    """

    values: np.ndarray
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("library must be a 2-D (bands x endmembers) matrix")
        L, R = self.values.shape
        if L < 2 or R < 2:
            raise ValueError(f"library needs at least 2 bands and 2 endmembers, got {L}x{R}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("library contains non-finite values")
        if np.any(self.values < 0):
            raise ValueError("library contains negative reflectance")
        if not self.names:
            self.names = [f"em{r + 1}" for r in range(R)]
        elif len(self.names) != R:
            raise ValueError(f"{len(self.names)} names for {R} endmembers")

    @property
    def bands(self):
        return self.values.shape[0]

    @property
    def n_endmembers(self):
        return self.values.shape[1]


@dataclass
class HyperCube:
    """A width x height grid of L-band pixels stored pixel-major.

    Pixel ``p`` sits at column ``p % width`` and row ``p // width``; row ``p``
    of ``data`` holds its spectrum.
    """

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.width < 1 or self.height < 1:
            raise ValueError("cube dimensions must be positive")
        if self.data.ndim != 2 or self.data.shape[0] != self.width * self.height:
            raise ValueError(
                f"data shape {self.data.shape} does not match "
                f"{self.width}x{self.height} pixels"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("cube contains non-finite values")

    @property
    def n_pixels(self):
        return self.data.shape[0]

    @property
    def bands(self):
        return self.data.shape[1]

    def image(self):
        """View the data as a (height, width, bands) array."""
        return self.data.reshape(self.height, self.width, self.bands)


def _as_matrix(lib):
    return lib.values if isinstance(lib, SpectralLibrary) else np.asarray(lib, dtype=np.float64)


def check_simplex(a, tol=SIMPLEX_TOL):
    """Raise ValueError unless ``a`` is nonnegative and sums to one within ``tol``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("abundance vector must be 1-D")
    if np.any(a < -tol) or abs(a.sum() - 1.0) > tol:
        raise ValueError(f"abundance vector is off the simplex (sum={a.sum():.12g}, min={a.min():.3g})")
    return a


def linear_mix(lib, a):
    """Return ``M @ a``."""
    M = _as_matrix(lib)
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] != M.shape[1]:
        raise ValueError(f"abundance length {a.shape[-1]} does not match {M.shape[1]} endmembers")
    return a @ M.T


def quadratic_term(lib, a):
    """Return the Hadamard square ``(M a) * (M a)``."""
    x = linear_mix(lib, a)
    return x * x


def ppnm_forward(lib, a, b):
    """Polynomial post-nonlinear mixture ``M a + b (M a) * (M a)``."""
    x = linear_mix(lib, a)
    return x + float(b) * (x * x)


def active_pairs(active):
    """Lexicographically ordered pairs ``(i, j)``, ``i < j``, over ``active``."""
    return list(combinations(sorted(int(i) for i in active), 2))


def gbm_forward(lib, a, gamma, active=None):
    """Generalized bilinear mixture.

    Args:
        lib: library or (L, R) matrix.
        a: abundance vector, length R.
        gamma: interaction coefficients, one per pair i<j of ``active``,
            in lexicographic order.
        active: endmember indices allowed to interact. Defaults to the
            indices with nonzero abundance.

    Returns:
        ``M a + sum_{i<j} gamma_ij a_i a_j (m_i * m_j)``.
    """
    M = _as_matrix(lib)
    a = np.asarray(a, dtype=np.float64)
    if active is None:
        active = np.flatnonzero(a)
    pairs = active_pairs(active)
    gamma = np.atleast_1d(np.asarray(gamma, dtype=np.float64))
    if gamma.size != len(pairs):
        raise ValueError(
            f"gamma has {gamma.size} entries but {len(active)} active endmembers "
            f"give {len(pairs)} pairs"
        )
    y = linear_mix(M, a)
    for g, (i, j) in zip(gamma, pairs):
        if i >= M.shape[1] or j >= M.shape[1]:
            raise ValueError(f"active endmember index out of range for {M.shape[1]} endmembers")
        y = y + g * a[i] * a[j] * (M[:, i] * M[:, j])
    return y


def add_noise(spectrum, sigma2, rng):
    """Add i.i.d. zero-mean Gaussian noise of variance ``sigma2`` to every band."""
    if not sigma2 > 0:
        raise ValueError(f"noise variance must be positive, got {sigma2}")
    spectrum = np.asarray(spectrum, dtype=np.float64)
    return spectrum + np.sqrt(sigma2) * rng.standard_normal(spectrum.shape)
