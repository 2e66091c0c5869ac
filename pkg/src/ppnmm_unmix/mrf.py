"""
Potts-Markov random field on a pixel grid with first-order (4-pixel)
neighborhoods.

Label maps are (height, width) integer arrays with 0-based classes
``0..K-1``; pixel ``p`` is ``labels.flat[p]``, i.e. row ``p // width`` and
column ``p % width``. Neighborhoods are truncated at the image border.

The joint prior is ``exp(beta * #{unordered neighbor pairs with equal
labels}) / G(beta)``, so the conditional of one pixel is proportional to
``exp(beta * #{neighbors carrying label k})``. The partition function is
never needed.
"""
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class PottsParams:
    beta: float = 1.1
    n_classes: int = 3
    neighborhood: int = 4

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.n_classes < 1:
            raise ValueError(f"need at least one class, got {self.n_classes}")
        if self.neighborhood == 8:
            raise NotImplementedError("8-pixel neighborhoods are reserved but not implemented")
        if self.neighborhood != 4:
            raise ValueError(f"unknown neighborhood {self.neighborhood}")


def neighbors4(p, width, height):
    """In-bounds left, right, up and down neighbors of pixel ``p``."""
    if not 0 <= p < width * height:
        raise ValueError(f"pixel {p} outside a {width}x{height} grid")
    x, y = p % width, p // width
    out = []
    if x > 0:
        out.append(p - 1)
    if x < width - 1:
        out.append(p + 1)
    if y > 0:
        out.append(p - width)
    if y < height - 1:
        out.append(p + width)
    return out


def neighbor_counts(labels, p, n_classes):
    """Number of 4-neighbors of ``p`` carrying each class."""
    labels = np.asarray(labels)
    H, W = labels.shape
    flat = labels.ravel()
    counts = np.zeros(n_classes)
    for q in neighbors4(p, W, H):
        counts[flat[q]] += 1
    return counts


def potts_conditional_weights(labels, p, params):
    """Unnormalized conditional ``exp(beta * n_k)`` of pixel ``p`` for each class k."""
    return np.exp(params.beta * neighbor_counts(labels, p, params.n_classes))


def same_label_pairs(labels):
    """Number of unordered horizontal/vertical neighbor pairs with equal labels."""
    labels = np.asarray(labels)
    return int((labels[:, 1:] == labels[:, :-1]).sum() + (labels[1:, :] == labels[:-1, :]).sum())


def same_label_fraction(labels):
    """Fraction of neighbor pairs that share a label."""
    labels = np.asarray(labels)
    H, W = labels.shape
    n_pairs = H * (W - 1) + W * (H - 1)
    return same_label_pairs(labels) / n_pairs if n_pairs else 1.0


def potts_log_prior(labels, beta):
    """Unnormalized log joint ``beta * same_label_pairs``."""
    return beta * same_label_pairs(labels)


def scan_order(width, height, schedule="raster"):
    """Pixel visiting order for one sweep.

    ``"checkerboard"`` visits all pixels with even ``x + y`` and then all odd
    ones. Pixels of one color share no edge, so this sequential order gives
    the same transition as updating each color in parallel.
    """
    P = width * height
    if schedule == "raster":
        return np.arange(P, dtype=np.int64)
    if schedule == "checkerboard":
        p = np.arange(P, dtype=np.int64)
        parity = (p % width + p // width) % 2
        return np.concatenate([p[parity == 0], p[parity == 1]])
    raise ValueError(f"unknown scan schedule {schedule!r}")


@njit(cache=True)
def gibbs_label_sweep(labels, log_lik, width, height, beta, order, uniforms):
    """One Gibbs sweep over ``order``, updating ``labels`` (flat, 0-based) in place.

    Pixel ``p`` draws class k with probability proportional to
    ``exp(log_lik[p, k] + beta * #{neighbors with label k})``; log weights are
    max-shifted before exponentiation and ``uniforms[i]`` drives the draw of
    the i-th visited pixel by inverse CDF.
    """
    K = log_lik.shape[1]
    w = np.empty(K)
    for i in range(order.shape[0]):
        p = order[i]
        x = p % width
        y = p // width
        for k in range(K):
            w[k] = log_lik[p, k]
        if x > 0:
            w[labels[p - 1]] += beta
        if x < width - 1:
            w[labels[p + 1]] += beta
        if y > 0:
            w[labels[p - width]] += beta
        if y < height - 1:
            w[labels[p + width]] += beta
        m = w[0]
        for k in range(1, K):
            if w[k] > m:
                m = w[k]
        total = 0.0
        for k in range(K):
            w[k] = np.exp(w[k] - m)
            total += w[k]
        u = uniforms[i] * total
        cum = 0.0
        choice = K - 1
        for k in range(K):
            cum += w[k]
            if u < cum:
                choice = k
                break
        labels[p] = choice


def sample_potts_field(width, height, params, n_sweeps, rng, schedule="raster"):
    """Simulate a label map from the Potts prior.

    Starts from i.i.d. uniform labels and runs ``n_sweeps`` Gibbs sweeps.
    """
    if n_sweeps < 1:
        raise ValueError("n_sweeps must be at least 1")
    P = width * height
    K = params.n_classes
    labels = rng.integers(0, K, size=P).astype(np.int64)
    order = scan_order(width, height, schedule)
    flat_lik = np.zeros((P, K))
    for _ in range(n_sweeps):
        gibbs_label_sweep(labels, flat_lik, width, height, float(params.beta), order, rng.random(P))
    return labels.reshape(height, width)
