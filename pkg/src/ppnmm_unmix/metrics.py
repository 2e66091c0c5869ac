"""Evaluation metrics and the fully constrained least-squares baseline."""
import json
from dataclasses import asdict, dataclass, field
from itertools import permutations
from typing import NamedTuple

import numpy as np

from .core import HyperCube


def _array(x):
    return x.data if isinstance(x, HyperCube) else np.asarray(x, dtype=np.float64)


def rmse(estimated, truth):
    """Abundance RMSE: sqrt of the per-pixel squared error norm averaged over pixels."""
    est, tru = np.atleast_2d(estimated), np.atleast_2d(truth)
    if est.shape != tru.shape:
        raise ValueError(f"shape mismatch {est.shape} vs {tru.shape}")
    return float(np.sqrt(np.mean(np.sum((est - tru) ** 2, axis=1))))


def reconstruction_error(reconstructed, reference):
    """Image RE: root mean squared difference over all pixels and bands."""
    rec, ref = np.atleast_2d(_array(reconstructed)), np.atleast_2d(_array(reference))
    if rec.shape != ref.shape:
        raise ValueError(f"shape mismatch {rec.shape} vs {ref.shape}")
    return float(np.sqrt(np.mean((rec - ref) ** 2)))


def label_accuracy(estimated, truth, n_classes):
    """Best fraction of matching pixels over all relabelings of ``estimated``."""
    if n_classes > 8:
        raise ValueError("label_accuracy enumerates K! permutations and supports K <= 8")
    est = np.asarray(estimated).ravel()
    tru = np.asarray(truth).ravel()
    if est.shape != tru.shape:
        raise ValueError("label maps differ in size")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (est, tru), 1)
    rows = np.arange(n_classes)
    best = max(confusion[rows, list(perm)].sum() for perm in permutations(range(n_classes)))
    return best / est.size


# -- FCLS ----------------------------------------------------------------------


def project_simplex(V):
    """Euclidean projection of each row of ``V`` onto the probability simplex."""
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    n = V.shape[1]
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    k = np.arange(1, n + 1)
    rho = np.count_nonzero(U - css / k > 0, axis=1)
    theta = css[np.arange(V.shape[0]), rho - 1] / rho
    return np.maximum(V - theta[:, None], 0.0)


class FCLSResult(NamedTuple):
    abundances: np.ndarray  # (P, R)
    converged: bool
    n_iter: int


def fcls_baseline(cube, lib, tol=1e-8, max_iter=10_000, step_tol=1e-7):
    """Fully constrained least squares for every pixel.

    Minimizes ``0.5 |y - M a|^2`` over the simplex by accelerated projected
    gradient with a fixed 1/Lipschitz step, restarting the momentum whenever
    the objective goes up. Stops once no pixel's objective changes by more
    than ``tol`` and no abundance by more than ``step_tol`` between
    iterations; the objective test alone can fire while an ill-conditioned
    pixel is still creeping toward its optimum. If ``max_iter`` is reached
    first the last iterate is returned with ``converged=False``.
    """
    Y = np.atleast_2d(_array(cube))
    M = lib.values if hasattr(lib, "values") else np.asarray(lib, dtype=np.float64)
    L, R = M.shape
    if R > L:
        raise ValueError(f"FCLS needs at least as many bands ({L}) as endmembers ({R})")
    if Y.shape[1] != L:
        raise ValueError(f"cube has {Y.shape[1]} bands, library {L}")
    gram = M.T @ M
    MtY = Y @ M
    step = 1.0 / np.linalg.eigvalsh(gram)[-1]

    def objective(A):
        return 0.5 * np.einsum("pl,pl->p", Y - A @ M.T, Y - A @ M.T)

    A = np.full((Y.shape[0], R), 1.0 / R)
    Z = A.copy()
    t = np.ones(Y.shape[0])
    f = objective(A)
    for it in range(1, max_iter + 1):
        A_new = project_simplex(Z - step * (Z @ gram - MtY))
        f_new = objective(A_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Z = A_new + ((t - 1.0) / t_new)[:, None] * (A_new - A)
        # momentum restart for pixels whose objective increased
        up = f_new > f
        Z[up] = A_new[up]
        t_new[up] = 1.0
        t = t_new
        change = np.abs(f_new - f).max()
        moved = np.abs(A_new - A).max()
        A, f = A_new, f_new
        if change < tol and moved < step_tol:
            return FCLSResult(A, True, it)
    return FCLSResult(A, False, max_iter)


# -- reports -------------------------------------------------------------------


@dataclass
class EvalReport:
    rmse: float
    re: float
    label_accuracy: float
    per_class_abundance_error: list = field(default_factory=list)
    method: str = "ppnmm-mrf"

    def to_json(self):
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def per_class_errors(estimated, truth, true_labels, n_classes):
    """RMSE restricted to the pixels of each true class (NaN for absent classes)."""
    est, tru = np.atleast_2d(estimated), np.atleast_2d(truth)
    lab = np.asarray(true_labels).ravel()
    out = []
    for k in range(n_classes):
        mask = lab == k
        out.append(rmse(est[mask], tru[mask]) if mask.any() else float("nan"))
    return out


def format_table(reports):
    """Plain-text table with one row per method."""
    name_w = max([len("Method")] + [len(r.method) for r in reports])
    lines = [f"{'Method':<{name_w}}  {'RMSE':>8}  {'RE':>8}  {'LabelAcc':>8}"]
    lines.append("-" * len(lines[0]))
    for r in reports:
        acc = "-" if r.label_accuracy is None else f"{r.label_accuracy:.4f}"
        lines.append(f"{r.method:<{name_w}}  {r.rmse:>8.4f}  {r.re:>8.4f}  {acc:>8}")
    return "\n".join(lines) + "\n"
