"""Dataset-specific projection to a shared width and smoothness-ordered columns.

Every dataset is projected independently (PCA, preceded by a Gaussian random
upscale when it has fewer raw features than the target width), standardized
column by column, and then its columns are reordered so the least smooth,
highest-frequency feature comes first. Because the ordering rule is the same
everywhere, column ``j`` means "the j-th least smooth direction" on every
graph, which is what lets one model consume all of them.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, ValidationError
from .graph import smoothness

DEFAULT_DIM = 64
# above this width the covariance is not formed; randomized subspace iteration instead
EXACT_PCA_MAX_DIM = 2048
RANK_TOL = 1e-10
STD_FLOOR = 1e-12


@dataclass
class ProjectionModel:
    kind: str
    mean: np.ndarray
    components: np.ndarray
    upscale: np.ndarray = None
    seed: int = 0
    rank_deficient: bool = False
    explained_variance: np.ndarray = field(default=None, repr=False)

    @property
    def d_in(self):
        return self.mean.shape[0]

    @property
    def d_out(self):
        return self.components.shape[1]


@dataclass
class AlignmentResult:
    features: np.ndarray
    permutation: np.ndarray
    smoothness: np.ndarray
    projection: ProjectionModel = field(default=None, repr=False)


def _fix_signs(v):
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def _exact_top(work, k):
    n = work.shape[0]
    cov = work.T @ work / (n - 1)
    w, v = kernels.sym_eigh(cov)
    order = np.argsort(-w, kind="stable")[:k]
    return np.maximum(w[order], 0.0), v[:, order]


def _randomized_top(work, k, rng, oversample=10, n_iter=6):
    n, dim = work.shape
    width = min(dim, k + oversample)
    q, _ = np.linalg.qr(work @ rng.standard_normal((dim, width)))
    for _ in range(n_iter):
        q, _ = np.linalg.qr(work.T @ q)
        q, _ = np.linalg.qr(work @ q)
    _, s, vt = np.linalg.svd(q.T @ work, full_matrices=False)
    return s[:k] ** 2 / (n - 1), vt[:k].T


def fit_projection(x, d_u=DEFAULT_DIM, seed=0):
    """Fit the linear map that takes raw features to ``d_u`` columns.

    With at least ``d_u`` raw features this is plain PCA. Narrower inputs are
    first pushed through a seeded Gaussian matrix to ``max(2 * d_u, d_in)``
    dimensions. When the data has rank below ``d_u`` the trailing components
    are an orthonormal completion and ``rank_deficient`` is set.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"features must be 2-D, got shape {x.shape}")
    n, d_in = x.shape
    if d_u < 1:
        raise ValidationError(f"d_u must be >= 1, got {d_u}")
    if n < 2:
        raise ValidationError(f"need at least 2 rows to fit a projection, got {n}")
    rng = np.random.default_rng(seed)
    mean = x.mean(axis=0)
    work = x - mean
    upscale = None
    kind = "pca"
    if d_in < d_u:
        kind = "random_then_pca"
        d_up = max(2 * d_u, d_in)
        upscale = rng.normal(0.0, np.sqrt(1.0 / d_in), size=(d_in, d_up))
        work = work @ upscale

    dim = work.shape[1]
    if dim <= EXACT_PCA_MAX_DIM:
        variances, comps = _exact_top(work, d_u)
    else:
        variances, comps = _randomized_top(work, d_u, rng)

    rank_deficient = False
    top = variances[0] if variances.size else 0.0
    tiny = variances <= RANK_TOL * max(top, np.finfo(float).tiny)
    if tiny.any():
        rank_deficient = True
        comps = comps.copy()
        keep = ~tiny
        # re-orthonormalize the null-space part against the kept directions
        q, _ = np.linalg.qr(np.hstack([comps[:, keep], comps[:, tiny]]))
        comps[:, tiny] = q[:, keep.sum():]
        warnings.warn(
            f"feature matrix has rank {int(keep.sum())} < d_u={d_u}; "
            "trailing components span the null space",
            RuntimeWarning,
            stacklevel=2,
        )
    comps = _fix_signs(comps)
    return ProjectionModel(kind, mean, comps, upscale, seed, rank_deficient, variances)


def apply_projection(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.d_in:
        raise DimensionError(f"projection expects {model.d_in} columns, got shape {x.shape}")
    out = x - model.mean
    if model.upscale is not None:
        out = out @ model.upscale
    return out @ model.components


def standardize_columns(x):
    """Zero-mean, unit (population) variance columns; flat columns become zeros."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValidationError("standardize_columns needs at least 2 rows")
    centered = x - x.mean(axis=0)
    std = centered.std(axis=0)
    flat = std < STD_FLOOR
    out = centered / np.where(flat, 1.0, std)
    out[:, flat] = 0.0
    return out


def sort_by_smoothness(x, edges):
    """Reorder columns by ascending smoothness (least smooth first, stable)."""
    x = np.asarray(x, dtype=np.float64)
    s = smoothness(x, edges)
    perm = np.argsort(s, kind="stable")
    return AlignmentResult(np.ascontiguousarray(x[:, perm]), perm, s[perm])


def align_dataset(x, edges, d_u=DEFAULT_DIM, seed=0):
    """Project, standardize and smoothness-sort one dataset's features."""
    model = fit_projection(x, d_u, seed)
    projected = standardize_columns(apply_projection(model, x))
    result = sort_by_smoothness(projected, edges)
    result.projection = model
    return result
