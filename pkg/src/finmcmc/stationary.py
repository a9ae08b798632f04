"""Invariant distribution of an irreducible kernel, plus the sign check on
left 1-eigenvectors that underlies its uniqueness."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import Distribution, TransitionKernel, invariance_residual
from .errors import NotAnEigenvector, NotIrreducible, SingularSystem
from .structure import check_irreducible

#: entries in [-CLAMP, 0) are treated as solver noise and set to zero
CLAMP = 1e-12
#: largest acceptable max-norm of pi K - pi
MAX_RESIDUAL = 1e-10


@dataclass(frozen=True)
class StationaryResult:
    pi: Distribution
    residual: float
    unique: bool


def stationary_system(k: TransitionKernel) -> tuple[np.ndarray, np.ndarray]:
    """``(A, b)`` with ``A = K^T - I`` and its last row replaced by ones, ``b = e_k``."""
    n = k.k
    a = k.rows.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return a, b


def solve_stationary(k: TransitionKernel) -> StationaryResult:
    """Unique invariant distribution of an irreducible kernel.

    Works for periodic kernels too (power iteration would not), since only
    irreducibility is needed for existence and uniqueness.
    """
    if not check_irreducible(k):
        raise NotIrreducible("kernel is reducible; its invariant distribution need not be unique")
    a, b = stationary_system(k)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(x)) or x.min() < -CLAMP:
        raise SingularSystem(f"solution has entries below -{CLAMP}: min = {x.min()!r}")
    x = np.where(x < 0, 0.0, x)
    x = x / x.sum()
    pi = Distribution(k.space, x)
    res = invariance_residual(pi, k)
    if res > MAX_RESIDUAL:
        raise SingularSystem(f"residual {res!r} exceeds {MAX_RESIDUAL}")
    return StationaryResult(pi=pi, residual=res, unique=True)


def nullity(k: TransitionKernel, tol: float | None = None) -> int:
    """Dimension of the left 1-eigenspace, from the singular values of ``K^T - I``."""
    sv = np.linalg.svd(k.rows.T - np.eye(k.k), compute_uv=False)
    if tol is None:
        tol = sv.max(initial=1.0) * k.k * np.finfo(float).eps * 10
    return int(np.sum(sv <= tol))


def left_unit_eigenvectors(k: TransitionKernel) -> np.ndarray:
    """Real left eigenvectors for the eigenvalue nearest 1, one per column, unit 2-norm."""
    vals, vecs = np.linalg.eig(k.rows.T)
    dist = np.abs(vals - 1.0)
    keep = dist <= dist.min() + 1e-9
    out = np.real(vecs[:, keep])
    return out / np.linalg.norm(out, axis=0)


def left_eigenvector_sign_check(k: TransitionKernel, x, tol: float = 1e-9) -> bool:
    """True iff all entries of ``x`` above ``tol`` in magnitude share one sign."""
    x = np.asarray(x, dtype=float)
    if x.shape != (k.k,):
        raise NotAnEigenvector(f"vector has shape {x.shape}, expected ({k.k},)")
    if np.max(np.abs(x)) <= tol:
        raise NotAnEigenvector("vector is numerically zero")
    res = float(np.max(np.abs(x @ k.rows - x)))
    if res > tol:
        raise NotAnEigenvector(f"|x K - x| = {res!r} exceeds tol {tol!r}")
    big = x[np.abs(x) > tol]
    return bool(np.all(big > 0) or np.all(big < 0))
