"""Distance to equilibrium of ``K**n`` and the coupling certificate bounding it."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import Distribution, TransitionKernel
from .errors import InvalidInput, NotAperiodic
from .stationary import solve_stationary
from .structure import check_aperiodic, positivity_certificate


@dataclass(frozen=True)
class CouplingCertificate:
    """``(N, epsilon)`` from the first all-positive power of a kernel.

    Two independent copies of the chain meet within each block of ``N`` steps
    with probability at least ``epsilon``, so the probability they have not
    met by step ``n`` is at most ``(1 - epsilon) ** (n // N)``.
    """

    positivity_index: int
    epsilon: float

    def __post_init__(self):
        if self.positivity_index < 1:
            raise InvalidInput("positivity_index must be >= 1")
        if not 0 < self.epsilon <= 1:
            raise InvalidInput("epsilon must lie in (0, 1]")

    @classmethod
    def for_kernel(cls, k: TransitionKernel) -> CouplingCertificate:
        if not check_aperiodic(k):
            raise NotAperiodic("the coupling certificate needs an aperiodic kernel")
        return cls(*positivity_certificate(k))

    def bound(self, n: int) -> float:
        return coupling_bound(self, n)

    def horizon(self, tol: float) -> int:
        """Smallest ``n`` with ``bound(n) <= tol``."""
        if self.epsilon >= 1.0:
            return self.positivity_index
        blocks = max(0, math.ceil(math.log(tol) / math.log1p(-self.epsilon)))
        while blocks > 0 and (1.0 - self.epsilon) ** (blocks - 1) <= tol:
            blocks -= 1
        while (1.0 - self.epsilon) ** blocks > tol:
            blocks += 1
        return max(1, blocks * self.positivity_index)


@dataclass(frozen=True)
class ConvergenceCurve:
    steps: np.ndarray
    tv: np.ndarray
    bound: np.ndarray

    def __post_init__(self):
        if not len(self.steps) == len(self.tv) == len(self.bound):
            raise InvalidInput("steps, tv and bound must share one length")

    def rows(self):
        for n, tv, b in zip(self.steps.tolist(), self.tv.tolist(), self.bound.tolist()):
            yield n, tv, b


def _tv(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Total-variation distance, half the L1 distance."""
    p.space.join(q.space)
    return _tv(p.mass, q.mass)


def worst_case_tv(power: np.ndarray, pi: np.ndarray) -> float:
    """Largest TV distance from ``pi`` over all rows (start states) of ``power``."""
    return 0.5 * float(np.abs(power - pi).sum(axis=1).max())


def coupling_bound(cert: CouplingCertificate, n: int) -> float:
    if n < 0:
        raise InvalidInput("n must be non-negative")
    return (1.0 - cert.epsilon) ** (n // cert.positivity_index)


def convergence_curve(k: TransitionKernel, n_max: int) -> ConvergenceCurve:
    """Worst-case TV to equilibrium and the certificate bound for ``n = 1..n_max``."""
    if n_max < 1:
        raise InvalidInput("n_max must be >= 1")
    cert = CouplingCertificate.for_kernel(k)
    pi = solve_stationary(k).pi.mass
    tv = np.empty(n_max)
    power = k.rows
    for i in range(n_max):
        if i:
            power = power @ k.rows
        tv[i] = worst_case_tv(power, pi)
    steps = np.arange(1, n_max + 1)
    bound = np.array([coupling_bound(cert, int(n)) for n in steps])
    return ConvergenceCurve(steps, tv, bound)


def mixing_time(k: TransitionKernel, tol: float) -> int:
    """Smallest ``n >= 1`` whose worst-case TV to equilibrium is at most ``tol``.

    The search stops at the certificate horizon, where the coupling bound
    alone already guarantees ``tol``.
    """
    if not 0 < tol < 1:
        raise InvalidInput("tol must lie in (0, 1)")
    cert = CouplingCertificate.for_kernel(k)
    pi = solve_stationary(k).pi.mass
    cap = cert.horizon(tol)
    power = k.rows
    for n in range(1, cap + 1):
        if n > 1:
            power = power @ k.rows
        if worst_case_tv(power, pi) <= tol:
            return n
    return cap
