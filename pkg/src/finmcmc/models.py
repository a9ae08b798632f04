"""Target distributions: the two-bit reducible Gibbs target
and small Ising grids that can be enumerated exactly."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .chain import Distribution, StateSpace, UnnormalizedWeights
from .errors import InvalidInput, SiteOutOfRange
from .samplers import ChainTrace, ProductSpaceCodec, RandomStream

MAX_SITES = 20


@dataclass(frozen=True)
class IsingModel:
    """Nearest-neighbour Ising model on a ``width x height`` grid with free boundary.

    Weight of a spin configuration ``s`` (spins in {-1, +1}) is
    ``exp(beta * sum_{<i,j>} s_i s_j)`` over horizontally and vertically
    adjacent pairs. Site ``(row, col)`` has index ``row * width + col``;
    its spin is coordinate ``index`` of the product-space codec, with value
    index 0 meaning -1 and 1 meaning +1.
    """

    width: int
    height: int
    beta: float = 0.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInput("grid dimensions must be positive")
        if self.width * self.height > MAX_SITES:
            raise InvalidInput(f"{self.width}x{self.height} grid exceeds the {MAX_SITES}-site enumeration cap")

    @property
    def sites(self) -> int:
        return self.width * self.height

    @property
    def codec(self) -> ProductSpaceCodec:
        return ProductSpaceCodec(self.sites, 2)

    def neighbors(self, site: int) -> list[int]:
        if not 0 <= site < self.sites:
            raise SiteOutOfRange(f"site {site} outside 0..{self.sites - 1}")
        r, c = divmod(site, self.width)
        out = []
        if r > 0:
            out.append(site - self.width)
        if r < self.height - 1:
            out.append(site + self.width)
        if c > 0:
            out.append(site - 1)
        if c < self.width - 1:
            out.append(site + 1)
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.sites) for j in self.neighbors(i) if i < j]


def spins_of(model: IsingModel, index: int) -> tuple[int, ...]:
    return tuple(2 * v - 1 for v in model.codec.decode(index))


def index_of(model: IsingModel, spins: Sequence[int]) -> int:
    return model.codec.encode([(s + 1) // 2 for s in spins])


def _spin_columns(model: IsingModel) -> Callable[[int], np.ndarray]:
    n = model.sites
    idx = np.arange(2**n, dtype=np.int64)

    def column(site: int) -> np.ndarray:
        return ((idx >> (n - 1 - site)) & 1).astype(np.int8) * 2 - 1

    return column


def ising_energy(model: IsingModel) -> np.ndarray:
    """``sum s_i s_j`` over adjacent pairs, for every configuration in codec order."""
    column = _spin_columns(model)
    total = np.zeros(2**model.sites, dtype=np.int64)
    cols = {}
    for i, j in model.edges():
        for site in (i, j):
            if site not in cols:
                cols[site] = column(site)
        total += cols[i] * cols[j]
    return total


def ising_weights(model: IsingModel) -> UnnormalizedWeights:
    w = np.exp(model.beta * ising_energy(model).astype(float))
    return UnnormalizedWeights(StateSpace(len(w)), w)


def magnetization(model: IsingModel) -> np.ndarray:
    """Mean spin of every configuration, in codec order."""
    column = _spin_columns(model)
    total = np.zeros(2**model.sites, dtype=np.int64)
    for site in range(model.sites):
        total += column(site)
    return total / model.sites


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def local_field(model: IsingModel, config: Sequence[int], site: int) -> int:
    if len(config) != model.sites:
        raise InvalidInput(f"configuration has {len(config)} spins, grid has {model.sites}")
    return sum(int(config[j]) for j in model.neighbors(site))


def ising_site_conditional(model: IsingModel, config: Sequence[int], site: int) -> float:
    """Probability that ``site`` is +1 given every other spin: ``logistic(2 beta h)``."""
    h = local_field(model, config, site)
    return _logistic(2.0 * model.beta * h)


def run_ising_gibbs(model: IsingModel, n_sweeps: int, rng: RandomStream, start: Sequence[int] | None = None) -> ChainTrace:
    """Systematic-scan single-site Gibbs sampler over sites ``0..n-1``.

    Each update consumes one uniform ``u`` and sets the spin to -1 when
    ``u <= P(-1)``, the same inverse-CDF rule the generic sampler uses on
    the two-state fiber ordered (-1, +1). Starts from all spins -1 unless
    ``start`` is given.
    """
    n = model.sites
    spins = [-1] * n if start is None else [int(s) for s in start]
    if len(spins) != n or any(s not in (-1, 1) for s in spins):
        raise InvalidInput("start must be a sequence of -1/+1 spins, one per site")
    nbrs = [model.neighbors(i) for i in range(n)]
    p_minus = {h: 1.0 - _logistic(2.0 * model.beta * h) for h in range(-4, 5)}
    weights = [1 << (n - 1 - i) for i in range(n)]

    def encode() -> int:
        return sum(wt for wt, s in zip(weights, spins) if s > 0)

    out = [encode()]
    uniform = rng.uniform
    for _ in range(n_sweeps):
        for i in range(n):
            h = 0
            for j in nbrs[i]:
                h += spins[j]
            pm = p_minus[h]
            u = uniform()
            spins[i] = -1 if (u <= pm and pm > 0.0) else 1
        out.append(encode())
    return ChainTrace(np.array(out), rng.seed, f"ising:{model.width}x{model.height}:beta={model.beta!r}")


Observable = Union[Callable[[int], float], Sequence[float], np.ndarray]


def enumerate_expectation(w: UnnormalizedWeights | Distribution, f: Observable) -> float:
    """Exact ``sum_s w_s f(s) / sum_s w_s`` by brute-force enumeration."""
    wv = w.weight if isinstance(w, UnnormalizedWeights) else w.mass
    if callable(f):
        vals = np.array([float(f(s)) for s in range(len(wv))])
    else:
        vals = np.asarray(f, dtype=float)
        if vals.shape != wv.shape:
            raise InvalidInput(f"observable has shape {vals.shape}, weights {wv.shape}")
    return float(np.dot(wv, vals) / wv.sum())


def reducible_gibbs_target() -> Distribution:
    """Mass 1/2 on (0,1) and (1,0), none on (0,0) and (1,1).

    The systematic Gibbs sampler for this target can never move between the
    two states that carry mass.
    """
    return Distribution(StateSpace(4), np.array([0.0, 0.5, 0.5, 0.0]))


TWO_BIT_CODEC = ProductSpaceCodec(2, 2)
