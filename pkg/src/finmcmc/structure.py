"""Irreducibility, period and primitivity of a transition kernel.

Everything here works on the positivity graph (edge ``z -> s`` iff
``k[z, s] > 0``), so the verdicts are exact: no threshold is applied to
floating-point entries, powered or otherwise.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .chain import TransitionKernel, kernel_power
from .errors import NotAperiodic, NotIrreducible


@dataclass(frozen=True)
class StructureReport:
    irreducible: bool
    aperiodic: bool
    period: int | None = None
    positivity_index: int | None = None
    epsilon: float | None = None

    def as_dict(self) -> dict:
        out = {"irreducible": self.irreducible, "aperiodic": self.aperiodic}
        if self.period is not None:
            out["period"] = self.period
        if self.positivity_index is not None:
            out["N"] = self.positivity_index
            out["epsilon"] = self.epsilon
        return out


def positivity_graph(k: TransitionKernel) -> np.ndarray:
    return k.rows > 0


def _reachable(adj: np.ndarray, source: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[source] = True
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in np.flatnonzero(adj[v] & ~seen):
            seen[w] = True
            queue.append(int(w))
    return seen


def check_irreducible(k: TransitionKernel) -> bool:
    """True iff every state reaches every other state (strong connectivity)."""
    adj = positivity_graph(k)
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def _bfs_levels(adj: np.ndarray, source: int = 0) -> np.ndarray:
    level = np.full(adj.shape[0], -1, dtype=int)
    level[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in np.flatnonzero(adj[v]):
            if level[w] < 0:
                level[w] = level[v] + 1
                queue.append(int(w))
    return level


def compute_period(k: TransitionKernel) -> int:
    """Gcd of the lengths of all closed walks through state 0.

    For a strongly connected graph with BFS levels ``d`` this equals the gcd
    of ``d[u] + 1 - d[v]`` over all edges ``u -> v``.
    """
    if not check_irreducible(k):
        raise NotIrreducible("period is only defined for irreducible kernels")
    adj = positivity_graph(k)
    level = _bfs_levels(adj)
    g = 0
    for u, v in np.argwhere(adj):
        g = math.gcd(g, int(level[u] + 1 - level[v]))
        if g == 1:
            break
    return g


def check_aperiodic(k: TransitionKernel) -> bool:
    return check_irreducible(k) and compute_period(k) == 1


def wielandt_bound(n_states: int) -> int:
    """Largest possible primitivity exponent of a primitive ``n x n`` matrix."""
    return n_states * n_states - 2 * n_states + 2


def positivity_index(k: TransitionKernel) -> int:
    """Smallest ``N`` with ``k**N`` entrywise positive, searched up to the Wielandt bound."""
    adj = positivity_graph(k).astype(np.int64)
    power = adj.copy()
    for n in range(1, wielandt_bound(k.k) + 1):
        if power.all():
            return n
        power = ((power @ adj) > 0).astype(np.int64)
    raise NotAperiodic(f"no power up to {wielandt_bound(k.k)} is entrywise positive")


def positivity_certificate(k: TransitionKernel) -> tuple[int, float]:
    """``(N, epsilon)``: the first all-positive power and its smallest entry.

    These drive the geometric bound ``(1 - epsilon) ** (n // N)`` on the
    distance of ``k**n`` from equilibrium.
    """
    n = positivity_index(k)
    eps = float(kernel_power(k, n).rows.min())
    return n, eps


def analyze(k: TransitionKernel) -> StructureReport:
    if not check_irreducible(k):
        return StructureReport(irreducible=False, aperiodic=False)
    period = compute_period(k)
    if period != 1:
        return StructureReport(irreducible=True, aperiodic=False, period=period)
    n, eps = positivity_certificate(k)
    return StructureReport(True, True, 1, n, eps)
