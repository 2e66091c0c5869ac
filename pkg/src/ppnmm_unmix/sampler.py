"""
Metropolis-within-Gibbs sampler for spatially regularized PPNMM unmixing.

Unknowns: one abundance vector per class (rows of ``A``), the pixel labels
``c``, the global nonlinearity ``b``, the noise variance ``sigma2`` and the
hyperparameter ``sigma_b2``. One iteration updates, in order,

1. each class abundance by Gaussian random-walk Metropolis on the simplex,
2. every label by a Gibbs sweep over the Potts-weighted likelihood,
3. ``b`` from its Gaussian conditional,
4. ``sigma2`` from its inverse-gamma conditional (Jeffreys prior),
5. ``sigma_b2`` from its inverse-gamma conditional.

Labels are 0-based internally. Class likelihood sums use the sufficient
statistics ``n_k``, ``sum_p y_p`` and ``sum_p |y_p|^2`` of each class, which
makes an abundance update independent of the class size.
"""
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.cluster.vq import kmeans2

from .core import HyperCube, SpectralLibrary, check_simplex, linear_mix, ppnm_forward
from .mrf import PottsParams, gibbs_label_sweep, neighbor_counts, same_label_pairs, sample_potts_field, scan_order
from .metrics import fcls_baseline
from .priors import InverseGammaParams, dirichlet_log_pdf, sample_dirichlet, sample_inverse_gamma

LOG_2PI = np.log(2.0 * np.pi)
MIN_SCALE = 1e-300


@dataclass
class SamplerConfig:
    """Sampler settings. Defaults match the reference synthetic experiments.

    ``mh_steps`` random-walk proposals are made for every class in each
    iteration. The proposal scale of each class is tuned during burn-in
    only: every ``adapt_interval`` iterations it is multiplied by 1.1 when
    the windowed acceptance exceeds ``adapt_target + 0.05`` and by 0.9 when
    it falls below ``adapt_target - 0.05``.
    """

    n_classes: int = 3
    n_mc: int = 5000
    burn_in: int = 500
    eta: float = 0.2
    beta: float = 1.1
    ig_prior: InverseGammaParams = field(default_factory=InverseGammaParams)
    proposal: str = "block"
    proposal_scale: float = None
    adapt_target: float = 0.3
    adapt_interval: int = 50
    mh_steps: int = 10
    collapse_b: bool = False
    schedule: str = "raster"
    init: str = "kmeans"
    init_sweeps: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 1:
            raise ValueError("n_classes must be at least 1")
        if not 0 <= self.burn_in < self.n_mc:
            raise ValueError(f"need 0 <= burn_in < n_mc, got {self.burn_in}, {self.n_mc}")
        if self.proposal not in ("block", "curvature", "isotropic"):
            raise ValueError(f"unknown proposal {self.proposal!r}")
        if self.proposal_scale is None:
            self.proposal_scale = 0.01 if self.proposal == "isotropic" else 1.0
        if not self.proposal_scale > 0:
            raise ValueError("proposal_scale must be positive")
        if not 0 < self.adapt_target < 1:
            raise ValueError("adapt_target must lie in (0, 1)")
        if self.eta <= 0 or self.beta < 0:
            raise ValueError("eta must be positive and beta nonnegative")
        if self.mh_steps < 1 or self.adapt_interval < 1 or self.init_sweeps < 1:
            raise ValueError("mh_steps, adapt_interval and init_sweeps must be positive")
        if isinstance(self.ig_prior, (tuple, list)):
            self.ig_prior = InverseGammaParams(*self.ig_prior)
        if self.schedule not in ("raster", "checkerboard"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.init not in ("kmeans", "prior"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class ChainState:
    abundances: np.ndarray  # (K, R), rows on the simplex
    labels: np.ndarray  # (P,) int, 0-based
    b: float
    sigma2: float
    sigma_b2: float

    def copy(self):
        return replace(self, abundances=self.abundances.copy(), labels=self.labels.copy())

    @property
    def n_classes(self):
        return self.abundances.shape[0]


@dataclass
class PosteriorChain:
    """Post-burn-in samples plus per-iteration diagnostics."""

    abundances: np.ndarray  # (S, K, R)
    b: np.ndarray  # (S,)
    sigma2: np.ndarray
    sigma_b2: np.ndarray
    label_counts: np.ndarray  # (P, K)
    acceptance: np.ndarray  # (n_mc, K) fraction of accepted proposals per iteration
    proposal_scales: np.ndarray  # (n_mc, K) scale used in each iteration
    log_posterior: np.ndarray  # (n_mc,) up to an additive constant
    width: int
    height: int
    burn_in: int

    @property
    def n_samples(self):
        return self.b.shape[0]

    def trace_matrix(self):
        """One row per stored iteration: flattened A (class-major), b, sigma2, sigma_b2."""
        S = self.n_samples
        return np.column_stack([self.abundances.reshape(S, -1), self.b, self.sigma2, self.sigma_b2])

    def trace_header(self):
        K, R = self.abundances.shape[1:]
        cols = [f"a_{k + 1}_{r + 1}" for k in range(K) for r in range(R)]
        return cols + ["b", "sigma2", "sigma_b2"]

    def acceptance_rates(self):
        """Mean post-burn-in acceptance fraction per class."""
        return self.acceptance[self.burn_in:].mean(axis=0)


class Estimates(NamedTuple):
    abundances: np.ndarray
    b: float
    sigma2: float
    labels: np.ndarray


# -- likelihood pieces -------------------------------------------------------


def pixel_log_likelihood(y, a, b, sigma2, lib):
    """Gaussian log density of pixel ``y`` given abundance ``a`` under the PPNMM."""
    y = np.asarray(y, dtype=np.float64)
    g = ppnm_forward(lib, a, b)
    if g.shape != y.shape:
        raise ValueError(f"pixel has {y.shape[-1]} bands, library {g.shape[-1]}")
    r = y - g
    return -0.5 * y.size * (LOG_2PI + np.log(sigma2)) - (r @ r) / (2.0 * sigma2)


def _matrix(lib):
    return lib.values if isinstance(lib, SpectralLibrary) else np.asarray(lib, dtype=np.float64)


def _data(cube):
    return cube.data if isinstance(cube, HyperCube) else np.asarray(cube, dtype=np.float64)


class ClassStats(NamedTuple):
    counts: np.ndarray  # (K,)
    sums: np.ndarray  # (K, L)
    sq_norms: np.ndarray  # (K,)


def class_stats(Y, labels, K):
    P = Y.shape[0]
    onehot = np.zeros((P, K))
    onehot[np.arange(P), labels] = 1.0
    return ClassStats(onehot.sum(axis=0), onehot.T @ Y, onehot.T @ np.einsum("pl,pl->p", Y, Y))


def _class_log_lik(M, a, b, sigma2, n, s, q):
    x = M @ a
    g = x + b * (x * x)
    rss = q - 2.0 * (g @ s) + n * (g @ g)
    return -0.5 * n * M.shape[0] * (LOG_2PI + np.log(sigma2)) - rss / (2.0 * sigma2)


def class_abundance_log_target(k, state, cube, lib, eta, likelihood=True):
    """Log conditional density of class ``k``'s abundance, up to a constant.

    Returns a function of a candidate abundance vector: the summed pixel
    log-likelihood over pixels currently labelled ``k`` plus the Dirichlet
    log prior. ``likelihood=False`` drops the data term, which is the
    ``sigma2 -> inf`` limit.
    """
    Y = _data(cube)
    M = _matrix(lib)
    mask = state.labels == k
    n = float(mask.sum())
    s = Y[mask].sum(axis=0)
    q = float(np.einsum("pl,pl->", Y[mask], Y[mask]))
    return _make_target(M, n, s, q, state.b, state.sigma2, eta, likelihood)


def _make_target(M, n, s, q, b, sigma2, eta, likelihood=True):
    if not likelihood or n == 0:
        return lambda a: dirichlet_log_pdf(a, eta, check=False)
    return lambda a: _class_log_lik(M, a, b, sigma2, n, s, q) + dirichlet_log_pdf(a, eta, check=False)


def _class_b_terms(M, a, n, s, q):
    """Per-class pieces of the likelihood as a quadratic in ``b``.

    Returns ``(rss0, u, v)`` with ``sum_p |y_p - M a - b h|^2 = rss0 - 2 b u + b^2 v``.
    """
    x = M @ a
    h = x * x
    rss0 = q - 2.0 * (x @ s) + n * (x @ x)
    return rss0, h @ (s - n * x), n * (h @ h)


def _make_collapsed_target(M, k, stats, A, sigma2, sigma_b2, eta):
    """Class-``k`` abundance target with ``b`` integrated out under its N(0, sigma_b2) prior."""
    others = np.zeros(3)
    for j in range(A.shape[0]):
        if j != k and stats.counts[j] > 0:
            others += _class_b_terms(M, A[j], stats.counts[j], stats.sums[j], stats.sq_norms[j])
    n, s, q = stats.counts[k], stats.sums[k], stats.sq_norms[k]

    def target(a):
        rss0, u, v = np.add(others, _class_b_terms(M, a, n, s, q))
        lam = 1.0 / sigma_b2 + v / sigma2
        return (
            -rss0 / (2.0 * sigma2)
            + (u / sigma2) ** 2 / (2.0 * lam)
            - 0.5 * np.log(lam)
            + dirichlet_log_pdf(a, eta, check=False)
        )

    return target


def random_walk_steps(a, log_target, scale, n_steps, rng, shape_factor=None):
    """Run ``n_steps`` random-walk Metropolis moves on the simplex.

    The first R-1 components get N(0, scale^2 S S^T) increments, where ``S``
    is ``shape_factor`` (identity when omitted), and the last component
    absorbs the remainder. Proposals with a negative component are rejected
    outright. The proposal is symmetric so acceptance uses only the target
    ratio.

    Returns:
        (final vector, number of accepted moves)
    """
    a = np.array(a, dtype=np.float64)
    R = a.size
    current = log_target(a)
    steps = scale * rng.standard_normal((n_steps, R - 1))
    if shape_factor is not None:
        steps = steps @ shape_factor.T
    log_u = np.log(rng.random(n_steps))
    accepted = 0
    prop = np.empty(R)
    for i in range(n_steps):
        prop[:-1] = a[:-1] + steps[i]
        prop[-1] = 1.0 - prop[:-1].sum()
        if prop.min() < 0.0:
            continue
        new = log_target(prop)
        if log_u[i] < new - current:
            a[:] = prop
            current = new
            accepted += 1
    return a, accepted


def curvature_shape(M, n, sigma2, ridge=100.0):
    """Cholesky factor of the inverse curvature of a class's linear log-likelihood.

    In the free coordinates ``a[:-1]`` the linear-model log-likelihood of
    ``n`` pixels has Hessian ``-(n / sigma2) J^T M^T M J`` with
    ``J = [I; -1^T]``. ``ridge`` caps the step length where the data carry
    little information (empty or tiny classes, rank-deficient libraries).
    """
    R = M.shape[1]
    J = np.vstack([np.eye(R - 1), -np.ones((1, R - 1))])
    MJ = M @ J
    precision = (n / sigma2) * (MJ.T @ MJ) + ridge * np.eye(R - 1)
    return np.linalg.cholesky(np.linalg.inv(precision))


def _block_log_prob(a, block, threshold, p_off):
    """log P(block | a) when every component >= threshold is always included
    and each smaller one independently with probability ``p_off``."""
    small = a < threshold
    if np.any(~small & ~block):
        return -np.inf
    n_in = np.count_nonzero(small & block)
    n_out = np.count_nonzero(small & ~block)
    return n_in * np.log(p_off) + n_out * np.log1p(-p_off)


def block_walk_steps(a, log_target, scale, n_steps, rng, gram, info, threshold=1e-3, ridge=100.0):
    """Random-walk Metropolis on a randomly selected face of the simplex.

    Each proposal picks a block ``B`` of components: all components at or
    above ``threshold`` plus each smaller one with probability ``1/R``. The
    block moves by a zero-sum Gaussian step whose covariance is ``scale^2``
    times the inverse of the linear-model curvature ``info * J^T gram_B J +
    ridge I`` restricted to ``B``; the other components stay put. Near-zero
    components are thus perturbed only occasionally, so proposals rarely
    leave the simplex. The block-selection probabilities enter the
    acceptance ratio; the step itself is symmetric.

    Returns:
        (final vector, number of accepted moves)
    """
    a = np.array(a, dtype=np.float64)
    R = a.size
    p_off = 1.0 / R
    current = log_target(a)
    accepted = 0
    for _ in range(n_steps):
        small = a < threshold
        block = ~small | (rng.random(R) < p_off)
        idx = np.flatnonzero(block)
        m = idx.size
        if m < 2:
            continue
        J = np.vstack([np.eye(m - 1), -np.ones((1, m - 1))])
        precision = info * (J.T @ gram[np.ix_(idx, idx)] @ J) + ridge * np.eye(m - 1)
        chol = np.linalg.cholesky(precision)
        # step ~ N(0, scale^2 precision^-1) via a triangular solve
        z = np.linalg.solve(chol.T, rng.standard_normal(m - 1))
        prop = a.copy()
        prop[idx] += J @ (scale * z)
        log_u = np.log(rng.random())
        if prop.min() < 0.0:
            continue
        log_q = _block_log_prob(prop, block, threshold, p_off) - _block_log_prob(a, block, threshold, p_off)
        if not np.isfinite(log_q):
            continue
        new = log_target(prop)
        if log_u < new - current + log_q:
            a = prop
            current = new
            accepted += 1
    return a, accepted


def mh_update_abundance(k, state, cube, lib, proposal_scale, rng, eta=0.2, likelihood=True):
    """One random-walk Metropolis update of class ``k``'s abundance.

    Returns:
        (new abundance vector, accepted flag)
    """
    target = class_abundance_log_target(k, state, cube, lib, eta, likelihood)
    a, n_acc = random_walk_steps(state.abundances[k], target, proposal_scale, 1, rng)
    return a, bool(n_acc)


# -- labels ------------------------------------------------------------------


def _label_log_lik(Y, G, sigma2):
    """Per-pixel, per-class log-likelihood with the class-independent terms dropped."""
    return (2.0 * (Y @ G.T) - np.einsum("kl,kl->k", G, G)) / (2.0 * sigma2)


def label_weights(p, state, cube, lib, beta, width, height):
    """Normalized conditional probabilities of each class for pixel ``p``."""
    Y = _data(cube)
    K = state.n_classes
    log_w = np.array([pixel_log_likelihood(Y[p], state.abundances[k], state.b, state.sigma2, lib) for k in range(K)])
    log_w += beta * neighbor_counts(state.labels.reshape(height, width), p, K)
    w = np.exp(log_w - log_w.max())
    total = w.sum()
    assert total > 0, "label weights underflowed"
    return w / total


def sample_label(p, state, cube, lib, beta, rng, width=None, height=None):
    """Draw a new class for pixel ``p`` from its Potts-weighted conditional."""
    if width is None:
        width, height = cube.width, cube.height
    w = label_weights(p, state, cube, lib, beta, width, height)
    return int(rng.choice(w.size, p=w))


# -- scalar conditionals ------------------------------------------------------


def _b_moments(M, A, stats, sigma2, sigma_b2):
    X = A @ M.T
    H = X * X
    n = stats.counts
    info = (n * np.einsum("kl,kl->k", H, H)).sum() / sigma2
    proj = np.einsum("kl,kl->", H, stats.sums - n[:, None] * X) / sigma2
    var = 1.0 / (1.0 / sigma_b2 + info)
    return var * proj, var


def b_conditional(state, cube, lib):
    """Mean and variance of the Gaussian conditional of ``b``.

    Precision is ``1/sigma_b2 + sum_p |h_p|^2 / sigma2`` and the mean is
    ``var * sum_p h_p . (y_p - M a_p) / sigma2`` with ``h_p = (M a_p)^2``.
    """
    Y = _data(cube)
    stats = class_stats(Y, state.labels, state.n_classes)
    return _b_moments(_matrix(lib), state.abundances, stats, state.sigma2, state.sigma_b2)


def sample_b(state, cube, lib, rng):
    mean, var = b_conditional(state, cube, lib)
    return mean + np.sqrt(var) * rng.standard_normal()


def _residual_ss(Y, M, A, b, labels):
    G = ppnm_forward(M, A, b)
    r = Y - G[labels]
    return float(np.einsum("pl,pl->", r, r))


def sigma2_conditional(state, cube, lib):
    """(shape, scale) of the inverse-gamma conditional of the noise variance."""
    Y = _data(cube)
    rss = _residual_ss(Y, _matrix(lib), state.abundances, state.b, state.labels)
    return _sigma2_params(Y.size, rss)


def _sigma2_params(n_values, rss):
    scale = rss / 2.0
    if not scale > 0:
        warnings.warn("zero residual sum of squares; clamping the noise-variance scale", RuntimeWarning)
        scale = MIN_SCALE
    return n_values / 2.0, scale


def sample_sigma2(state, cube, lib, rng):
    shape, scale = sigma2_conditional(state, cube, lib)
    return float(sample_inverse_gamma(shape, scale, rng))


def sigma_b2_conditional(state, params):
    return 0.5 + params.shape, 0.5 * state.b**2 + params.scale


def sample_sigma_b2(state, params, rng):
    shape, scale = sigma_b2_conditional(state, params)
    return float(sample_inverse_gamma(shape, scale, rng))


def log_posterior(state, Y, M, width, height, config, rss=None):
    """Joint log posterior of ``state`` up to an additive constant."""
    if rss is None:
        rss = _residual_ss(Y, M, state.abundances, state.b, state.labels)
    gamma, rho = config.ig_prior.shape, config.ig_prior.scale
    log_lik = -0.5 * Y.size * (LOG_2PI + np.log(state.sigma2)) - rss / (2.0 * state.sigma2)
    return (
        log_lik
        - np.log(state.sigma2)
        - (1.5 + gamma) * np.log(state.sigma_b2)
        - (state.b**2 + 2.0 * rho) / (2.0 * state.sigma_b2)
        + config.beta * same_label_pairs(state.labels.reshape(height, width))
        + (config.eta - 1.0) * np.log(np.maximum(state.abundances, 1e-12)).sum()
    )


# -- driver ------------------------------------------------------------------


def initial_state(cube, lib, config, rng):
    """Draw the starting state.

    ``b`` and ``sigma_b2`` come from their priors. With ``init="prior"`` the
    labels come from a short Potts prior simulation and the abundances from
    the Dirichlet prior. With ``init="kmeans"`` (the default) the labels are
    k-means++ clusters of the pixel spectra and each class starts at the
    FCLS abundances of its cluster mean; this avoids starting two classes on
    the same material, a local mode the label sweep rarely leaves. The
    Jeffreys prior on ``sigma2`` is improper, so the noise variance starts at
    the mean per-band sample variance of the image.
    """
    Y = _data(cube)
    M = _matrix(lib)
    L, R = M.shape
    K = config.n_classes
    sigma_b2 = float(sample_inverse_gamma(config.ig_prior.shape, config.ig_prior.scale, rng))
    b = float(np.sqrt(sigma_b2) * rng.standard_normal())
    if config.init == "kmeans" and K > 1 and R <= L:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # empty clusters are handled below
            centroids, labels = kmeans2(Y, K, minit="++", rng=rng)
        A = fcls_baseline(centroids, M).abundances
        for k in range(K):
            if not np.any(labels == k):
                A[k] = sample_dirichlet(config.eta, R, rng)
    else:
        labels = sample_potts_field(cube.width, cube.height, PottsParams(config.beta, K), config.init_sweeps, rng)
        A = np.array([sample_dirichlet(config.eta, R, rng) for _ in range(K)])
    sigma2 = float(Y.var(axis=0).mean()) if Y.shape[0] > 1 else 0.0
    if not sigma2 > 0:
        sigma2 = 1e-2
    return ChainState(A, labels.ravel().astype(np.int64), b, sigma2, sigma_b2)


def run_chain(cube, lib, config, state=None):
    """Run the full Metropolis-within-Gibbs sampler.

    Args:
        cube: observed HyperCube.
        lib: SpectralLibrary whose band count matches the cube.
        config: SamplerConfig.
        state: optional starting ChainState; drawn from the priors if omitted.

    Returns:
        PosteriorChain holding the ``n_mc - burn_in`` post-burn-in samples.
    """
    M = _matrix(lib)
    Y = cube.data
    P, L = Y.shape
    R = M.shape[1]
    K = config.n_classes
    if M.shape[0] != L:
        raise ValueError(f"library has {M.shape[0]} bands but cube has {L}")
    if K > P:
        raise ValueError(f"{K} classes for {P} pixels")

    rng = np.random.default_rng(config.seed)
    if state is None:
        state = initial_state(cube, lib, config, rng)
    else:
        state = state.copy()
        for row in state.abundances:
            check_simplex(row)

    W, H = cube.width, cube.height
    order = scan_order(W, H, config.schedule)
    S = config.n_mc - config.burn_in
    out_A = np.empty((S, K, R))
    out_b = np.empty(S)
    out_s2 = np.empty(S)
    out_sb2 = np.empty(S)
    label_counts = np.zeros((P, K), dtype=np.int64)
    acceptance = np.zeros((config.n_mc, K))
    scales_trace = np.empty((config.n_mc, K))
    log_post = np.empty(config.n_mc)

    gram = M.T @ M
    scales = np.full(K, float(config.proposal_scale))
    window_acc = np.zeros(K)

    for t in range(config.n_mc):
        scales_trace[t] = scales
        stats = class_stats(Y, state.labels, K)
        for k in range(K):
            n_k = stats.counts[k]
            if n_k == 0:
                state.abundances[k] = sample_dirichlet(config.eta, R, rng)
                continue
            if config.collapse_b:
                target = _make_collapsed_target(M, k, stats, state.abundances, state.sigma2, state.sigma_b2, config.eta)
            else:
                target = _make_target(M, n_k, stats.sums[k], stats.sq_norms[k], state.b, state.sigma2, config.eta)
            if config.proposal == "block":
                a, n_acc = block_walk_steps(
                    state.abundances[k], target, scales[k], config.mh_steps, rng, gram, n_k / state.sigma2
                )
            else:
                shape = curvature_shape(M, n_k, state.sigma2) if config.proposal == "curvature" else None
                a, n_acc = random_walk_steps(state.abundances[k], target, scales[k], config.mh_steps, rng, shape)
            state.abundances[k] = a
            acceptance[t, k] = n_acc / config.mh_steps
        window_acc += acceptance[t]

        if config.collapse_b:
            mean, var = _b_moments(M, state.abundances, stats, state.sigma2, state.sigma_b2)
            state.b = float(mean + np.sqrt(var) * rng.standard_normal())

        G = ppnm_forward(M, state.abundances, state.b)
        log_lik = _label_log_lik(Y, G, state.sigma2)
        gibbs_label_sweep(state.labels, log_lik, W, H, float(config.beta), order, rng.random(P))

        stats = class_stats(Y, state.labels, K)
        mean, var = _b_moments(M, state.abundances, stats, state.sigma2, state.sigma_b2)
        state.b = float(mean + np.sqrt(var) * rng.standard_normal())

        rss = _residual_ss(Y, M, state.abundances, state.b, state.labels)
        shape, scale = _sigma2_params(Y.size, rss)
        state.sigma2 = float(sample_inverse_gamma(shape, scale, rng))

        shape, scale = sigma_b2_conditional(state, config.ig_prior)
        state.sigma_b2 = float(sample_inverse_gamma(shape, scale, rng))

        log_post[t] = log_posterior(state, Y, M, W, H, config, rss=rss)

        if t < config.burn_in and (t + 1) % config.adapt_interval == 0:
            rate = window_acc / config.adapt_interval
            scales = np.where(rate > config.adapt_target + 0.05, scales * 1.1, scales)
            scales = np.where(rate < config.adapt_target - 0.05, scales * 0.9, scales)
            window_acc[:] = 0.0
        if t >= config.burn_in:
            i = t - config.burn_in
            out_A[i] = state.abundances
            out_b[i] = state.b
            out_s2[i] = state.sigma2
            out_sb2[i] = state.sigma_b2
            label_counts[np.arange(P), state.labels] += 1

    return PosteriorChain(
        out_A, out_b, out_s2, out_sb2, label_counts, acceptance, scales_trace, log_post, W, H, config.burn_in
    )


def posterior_estimates(chain):
    """MMSE estimates of the continuous parameters and per-pixel label modes."""
    if chain.n_samples == 0:
        raise ValueError("chain holds no samples")
    A = chain.abundances.mean(axis=0)
    A = A / A.sum(axis=1, keepdims=True)
    labels = chain.label_counts.argmax(axis=1).reshape(chain.height, chain.width)
    return Estimates(A, float(chain.b.mean()), float(chain.sigma2.mean()), labels)
