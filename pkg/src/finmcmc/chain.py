"""Distributions, transition kernels and their exact algebra.

States are indexed ``0 .. k-1``. Every value type validates itself on
construction and is immutable afterwards (the underlying arrays are marked
read-only), so operations may assume the invariants hold.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidInput, SpaceMismatch

#: absolute tolerance for "sums to one" checks
ATOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateSpace:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise InvalidInput(f"state space size must be a positive integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.size:
                raise InvalidInput(f"{len(labels)} labels given for {self.size} states")
            if len(set(labels)) != len(labels):
                raise InvalidInput("state labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def compatible(self, other: StateSpace) -> bool:
        """Same size, and same labels whenever both sides carry labels."""
        if self.size != other.size:
            return False
        if self.labels is None or other.labels is None:
            return True
        return self.labels == other.labels

    def join(self, other: StateSpace) -> StateSpace:
        if not self.compatible(other):
            raise SpaceMismatch(f"state spaces differ: {self} vs {other}")
        return self if self.labels is not None else other


def _check_vector(values, name: str, size: int | None = None) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise InvalidInput(f"{name} must be one-dimensional, got shape {v.shape}")
    if size is not None and v.shape[0] != size:
        raise InvalidInput(f"{name} has {v.shape[0]} entries, expected {size}")
    for i, x in enumerate(v):
        if not np.isfinite(x):
            raise InvalidInput(f"{name}[{i}] is not finite: {x!r}")
        if x < 0:
            raise InvalidInput(f"{name}[{i}] is negative: {x!r}")
    return v


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over a finite state space."""

    space: StateSpace
    mass: np.ndarray

    def __post_init__(self):
        v = _check_vector(self.mass, "mass", self.space.size)
        total = float(v.sum())
        if abs(total - 1.0) > ATOL:
            raise InvalidInput(f"mass sums to {total!r}, not 1")
        object.__setattr__(self, "mass", _frozen(v))

    @classmethod
    def from_mass(cls, mass: Sequence[float], labels: Sequence[str] | None = None) -> Distribution:
        mass = np.asarray(mass, dtype=float)
        return cls(StateSpace(len(mass), labels), mass)

    @classmethod
    def uniform(cls, k: int) -> Distribution:
        return cls(StateSpace(k), np.full(k, 1.0 / k))

    @classmethod
    def point_mass(cls, k: int, state: int) -> Distribution:
        mass = np.zeros(k)
        mass[state] = 1.0
        return cls(StateSpace(k), mass)

    @property
    def k(self) -> int:
        return self.space.size

    def __len__(self) -> int:
        return self.space.size

    def __repr__(self) -> str:
        return f"Distribution({self.mass.tolist()!r})"


@dataclass(frozen=True, eq=False)
class UnnormalizedWeights:
    """Non-negative vector proportional to a distribution.

    The normalising constant is never needed by the samplers; ``normalized``
    computes it only for oracles and diagnostics.
    """

    space: StateSpace
    weight: np.ndarray

    def __post_init__(self):
        v = _check_vector(self.weight, "weight", self.space.size)
        if not np.any(v > 0):
            raise InvalidInput("at least one weight must be positive")
        object.__setattr__(self, "weight", _frozen(v))

    @classmethod
    def from_weights(cls, weight: Sequence[float], labels: Sequence[str] | None = None) -> UnnormalizedWeights:
        weight = np.asarray(weight, dtype=float)
        return cls(StateSpace(len(weight), labels), weight)

    @property
    def k(self) -> int:
        return self.space.size

    def scaled(self, c: float) -> UnnormalizedWeights:
        return UnnormalizedWeights(self.space, c * self.weight)

    def normalized(self) -> Distribution:
        w = self.weight / self.weight.sum()
        return Distribution(self.space, w / w.sum())

    def __repr__(self) -> str:
        return f"UnnormalizedWeights({self.weight.tolist()!r})"


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Row-stochastic ``k x k`` matrix; row ``z`` is the law of the next state given ``z``."""

    space: StateSpace
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.rows, dtype=float)
        k = self.space.size
        if m.shape != (k, k):
            raise InvalidInput(f"matrix has shape {m.shape}, expected ({k}, {k})")
        bad = ~np.isfinite(m) | (m < 0)
        if bad.any():
            z, s = map(int, np.argwhere(bad)[0])
            raise InvalidInput(f"matrix[{z}][{s}] = {m[z, s]!r} is not a probability")
        sums = m.sum(axis=1)
        off = np.abs(sums - 1.0) > ATOL
        if off.any():
            z = int(np.argmax(off))
            raise InvalidInput(f"matrix[{z}] sums to {sums[z]!r}, not 1")
        object.__setattr__(self, "rows", _frozen(m))

    @classmethod
    def from_matrix(cls, matrix, labels: Sequence[str] | None = None) -> TransitionKernel:
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2:
            raise InvalidInput(f"matrix must be two-dimensional, got shape {m.shape}")
        return cls(StateSpace(m.shape[0], labels), m)

    @classmethod
    def identity(cls, k: int) -> TransitionKernel:
        return cls(StateSpace(k), np.eye(k))

    @property
    def k(self) -> int:
        return self.space.size

    @property
    def matrix(self) -> np.ndarray:
        return self.rows

    def __getitem__(self, idx):
        return self.rows[idx]

    def __repr__(self) -> str:
        return f"TransitionKernel({self.rows.tolist()!r})"

    @cached_property
    def _cdf(self) -> list[list[float]]:
        # the last positive entry of each row is pinned to 1.0 so that
        # floating shortfall in the cumulative sum is absorbed there
        out = []
        for row in self.rows:
            cum = np.cumsum(row)
            last = int(np.flatnonzero(row)[-1])
            cum[last:] = 1.0
            out.append(cum.tolist())
        return out

    def draw(self, z: int, u: float) -> int:
        """Inverse-CDF lookup: smallest positive-probability state with cumulative mass >= ``u``."""
        cum = self._cdf[z]
        s = bisect.bisect_left(cum, u)
        row = self.rows[z]
        while row[s] == 0.0:
            s += 1
        return s


def _same_space(a, b):
    return a.space.join(b.space)


def kernel_compose(a: TransitionKernel, b: TransitionKernel) -> TransitionKernel:
    """Matrix product ``a @ b``: one step of ``a`` followed by one step of ``b``."""
    space = _same_space(a, b)
    return TransitionKernel(space, a.rows @ b.rows)


def kernel_power(k: TransitionKernel, n: int) -> TransitionKernel:
    """``k`` to the ``n``-th power by repeated squaring; ``n = 0`` gives the identity."""
    if n < 0 or int(n) != n:
        raise InvalidInput(f"power must be a non-negative integer, got {n!r}")
    return TransitionKernel(k.space, np.linalg.matrix_power(k.rows, int(n)))


def push_forward(pi: Distribution, k: TransitionKernel) -> Distribution:
    """Law of the next state when the current one is distributed as ``pi``."""
    space = _same_space(pi, k)
    return Distribution(space, pi.mass @ k.rows)


def invariance_residual(pi: Distribution, k: TransitionKernel) -> float:
    _same_space(pi, k)
    return float(np.max(np.abs(pi.mass @ k.rows - pi.mass)))


def is_invariant(pi: Distribution, k: TransitionKernel, tol: float = ATOL) -> bool:
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    return invariance_residual(pi, k) <= tol


def detailed_balance_residual(pi: Distribution, k: TransitionKernel) -> float:
    """Largest ``|pi_s k_sz - pi_z k_zs|`` over all ordered pairs; 0 for a reversible pair."""
    _same_space(pi, k)
    flow = pi.mass[:, None] * k.rows
    return float(np.max(np.abs(flow - flow.T)))
