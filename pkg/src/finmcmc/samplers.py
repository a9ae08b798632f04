"""Seeded chain simulation, Gibbs and Metropolis-Hastings kernels and samplers.

Every sampler here has an explicit-kernel twin (``run_chain`` over
``mh_kernel`` / ``gibbs_sweep_kernel``) so the two routes can be checked
against each other.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .chain import (
    Distribution,
    StateSpace,
    TransitionKernel,
    UnnormalizedWeights,
    kernel_compose,
)
from .errors import CoordinateOutOfRange, EmptyAfterBurnIn, InvalidInput

ProposalKernel = TransitionKernel
Target = Union[Distribution, UnnormalizedWeights]

MAX_SEED = 2**64


class RandomStream:
    """Reproducible stream of uniforms on ``[0, 1)``.

    Backed by numpy's PCG64 bit generator seeded with ``seed``; variates are
    produced by ``Generator.random`` in blocks of ``BLOCK`` and handed out one
    at a time, so the sequence depends on the seed only.
    """

    BLOCK = 4096

    def __init__(self, seed: int):
        if int(seed) != seed or not 0 <= seed < MAX_SEED:
            raise InvalidInput(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self._buf: list[float] = []
        self._pos = 0

    def uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(self.BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def spawn(self, i: int) -> RandomStream:
        """Independent stream number ``i``, seeded with ``seed XOR i``."""
        return RandomStream(self.seed ^ int(i))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed})"


def kernel_fingerprint(*arrays: np.ndarray, tag: str = "kernel") -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return f"{tag}:{h.hexdigest()[:16]}"


@dataclass(frozen=True, eq=False)
class ChainTrace:
    states: np.ndarray
    seed: int
    kernel_id: str

    def __post_init__(self):
        s = np.array(self.states, dtype=np.int64)
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return len(self.states)

    def is_feasible(self, k: TransitionKernel) -> bool:
        """Every transition in the trace has positive probability under ``k``."""
        s = self.states
        return bool(np.all(k.rows[s[:-1], s[1:]] > 0))


def step(k: TransitionKernel, z: int, rng: RandomStream) -> int:
    return k.draw(z, rng.uniform())


def run_chain(k: TransitionKernel, start: int, n: int, rng: RandomStream) -> ChainTrace:
    """Simulate ``n`` transitions of ``k`` from ``start``; the trace has ``n + 1`` states."""
    if n < 0:
        raise InvalidInput("n must be non-negative")
    if not 0 <= start < k.k:
        raise InvalidInput(f"start state {start} outside 0..{k.k - 1}")
    out = [start]
    z = start
    draw, uniform = k.draw, rng.uniform
    for _ in range(n):
        z = draw(z, uniform())
        out.append(z)
    return ChainTrace(np.array(out), rng.seed, kernel_fingerprint(k.rows))


def ergodic_average(trace: ChainTrace, f: Callable[[int], object], burn_in: int = 0) -> np.ndarray:
    """Mean of ``f`` over the trace after dropping the first ``burn_in`` states."""
    if burn_in < 0:
        raise InvalidInput("burn_in must be non-negative")
    kept = trace.states[burn_in:]
    if len(kept) == 0:
        raise EmptyAfterBurnIn(f"burn_in={burn_in} leaves nothing of a trace of length {len(trace)}")
    states, counts = np.unique(kept, return_counts=True)
    values = np.array([np.atleast_1d(np.asarray(f(int(s)), dtype=float)) for s in states])
    return (counts[:, None] * values).sum(axis=0) / len(kept)


def _target_vector(target: Target) -> np.ndarray:
    if isinstance(target, Distribution):
        return target.mass
    if isinstance(target, UnnormalizedWeights):
        return target.weight
    raise TypeError(f"expected Distribution or UnnormalizedWeights, got {type(target).__name__}")


# ---------------------------------------------------------------- Gibbs


@dataclass(frozen=True)
class ProductSpaceCodec:
    """Bijection between flat indices and tuples in ``{0..values-1}^coords``.

    The last coordinate varies fastest, so for ``coords=2, values=2`` the
    order is ``(0,0), (0,1), (1,0), (1,1)``.
    """

    coords: int
    values_per_coord: int

    def __post_init__(self):
        if self.coords < 1 or self.values_per_coord < 1:
            raise InvalidInput("coords and values_per_coord must be positive")

    @property
    def total(self) -> int:
        return self.values_per_coord ** self.coords

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.values_per_coord,) * self.coords

    def stride(self, j: int) -> int:
        return self.values_per_coord ** (self.coords - 1 - j)

    def encode(self, values) -> int:
        values = tuple(int(v) for v in values)
        if len(values) != self.coords or not all(0 <= v < self.values_per_coord for v in values):
            raise InvalidInput(f"{values} is not a point of {self.shape}")
        return int(np.ravel_multi_index(values, self.shape))

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total:
            raise InvalidInput(f"index {index} outside 0..{self.total - 1}")
        return tuple(int(v) for v in np.unravel_index(index, self.shape))

    def all_tuples(self) -> np.ndarray:
        """``(total, coords)`` array whose row ``i`` is ``decode(i)``."""
        return np.array(np.unravel_index(np.arange(self.total), self.shape)).T

    def check_coordinate(self, j: int) -> None:
        if not 0 <= j < self.coords:
            raise CoordinateOutOfRange(f"coordinate {j} outside 0..{self.coords - 1}")

    def fiber(self, z: int, j: int) -> list[int]:
        """States that agree with ``z`` everywhere except possibly coordinate ``j``, ordered by that coordinate."""
        self.check_coordinate(j)
        st = self.stride(j)
        base = z - ((z // st) % self.values_per_coord) * st
        return [base + v * st for v in range(self.values_per_coord)]


def _check_codec(target: Target, codec: ProductSpaceCodec) -> np.ndarray:
    w = _target_vector(target)
    if len(w) != codec.total:
        raise InvalidInput(f"target has {len(w)} states but the codec describes {codec.total}")
    return w


def gibbs_conditional(target: Target, codec: ProductSpaceCodec, z: int, j: int) -> tuple[list[int], np.ndarray] | None:
    """Law of coordinate ``j`` given the others fixed at ``z``.

    Returns ``(fiber, probabilities)`` or ``None`` when the target puts no
    mass anywhere on the fiber.
    """
    w = _check_codec(target, codec)
    fib = codec.fiber(z, j)
    fw = w[fib]
    total = fw.sum()
    if total <= 0:
        return None
    return fib, fw / total


def gibbs_conditional_kernel(target: Target, codec: ProductSpaceCodec, j: int) -> TransitionKernel:
    """Kernel that resamples coordinate ``j`` from its conditional under ``target``.

    Rows whose whole fiber carries zero mass are set to the point mass at
    the current state.
    """
    w = _check_codec(target, codec)
    codec.check_coordinate(j)
    n = codec.total
    m = np.zeros((n, n))
    for z in range(n):
        cond = gibbs_conditional(target, codec, z, j)
        if cond is None:
            m[z, z] = 1.0
        else:
            fib, p = cond
            m[z, fib] = p
    return TransitionKernel(StateSpace(n), m)


def gibbs_sweep_kernel(target: Target, codec: ProductSpaceCodec) -> TransitionKernel:
    """One systematic sweep: coordinates ``0, 1, ..., m-1`` in turn."""
    out = gibbs_conditional_kernel(target, codec, 0)
    for j in range(1, codec.coords):
        out = kernel_compose(out, gibbs_conditional_kernel(target, codec, j))
    return out


def _pick(states: list[int], probs, u: float) -> int:
    cum = list(itertools.accumulate(probs))
    last = max(i for i, p in enumerate(probs) if p > 0)
    cum[last:] = [1.0] * (len(cum) - last)
    for i, c in enumerate(cum):
        if c >= u and probs[i] > 0:
            return states[i]
    return states[last]


def gibbs_step(target: Target, codec: ProductSpaceCodec, z: int, j: int, rng: RandomStream) -> int:
    cond = gibbs_conditional(target, codec, z, j)
    u = rng.uniform()
    if cond is None:
        return z
    fib, p = cond
    return _pick(fib, p.tolist(), u)


def run_gibbs(target: Target, codec: ProductSpaceCodec, start: int, n_sweeps: int, rng: RandomStream) -> ChainTrace:
    """Systematic-scan Gibbs sampler; the trace records the state after each full sweep."""
    if n_sweeps < 0:
        raise InvalidInput("n_sweeps must be non-negative")
    if not 0 <= start < codec.total:
        raise InvalidInput(f"start state {start} outside 0..{codec.total - 1}")
    cache: dict[tuple[int, int], tuple[list[int], list[float]] | None] = {}
    z = start
    out = [z]
    for _ in range(n_sweeps):
        for j in range(codec.coords):
            key = (z, j)
            if key not in cache:
                cond = gibbs_conditional(target, codec, z, j)
                cache[key] = None if cond is None else (cond[0], cond[1].tolist())
            cond = cache[key]
            u = rng.uniform()
            if cond is not None:
                z = _pick(cond[0], cond[1], u)
        out.append(z)
    w = _target_vector(target)
    return ChainTrace(np.array(out), rng.seed, kernel_fingerprint(w, tag="gibbs"))


# ---------------------------------------------------- Metropolis-Hastings


def _mh_spaces(w: UnnormalizedWeights, q: ProposalKernel) -> None:
    w.space.join(q.space)


def acceptance_probability(w: UnnormalizedWeights, q: ProposalKernel, z: int, s: int) -> float:
    """``min(1, (w_s q_sz) / (w_z q_zs))`` with division by zero read as infinity."""
    wz, ws = float(w.weight[z]), float(w.weight[s])
    qzs, qsz = float(q.rows[z, s]), float(q.rows[s, z])
    if wz == 0.0 or qzs == 0.0:
        return 1.0
    return min(1.0, (ws / wz) * (qsz / qzs))


def acceptance_matrix(w: UnnormalizedWeights, q: ProposalKernel) -> np.ndarray:
    """Matrix of ``acceptance_probability(w, q, z, s)`` over all pairs."""
    _mh_spaces(w, q)
    wv, qm = w.weight, q.rows
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (wv[None, :] / wv[:, None]) * (qm.T / qm)
    infinite = (wv[:, None] == 0) | (qm == 0)
    return np.where(infinite, 1.0, np.minimum(1.0, ratio))


def mh_kernel(w: UnnormalizedWeights, q: ProposalKernel) -> TransitionKernel:
    """Explicit Metropolis-Hastings kernel.

    Off-diagonal entries are ``q_zs * alpha_zs``; the diagonal collects the
    proposal's self-loop plus all rejected mass.
    """
    alpha = acceptance_matrix(w, q)
    np.fill_diagonal(alpha, 1.0)
    m = q.rows * alpha
    rejected = q.rows * (1.0 - alpha)
    m[np.diag_indices_from(m)] += rejected.sum(axis=1)
    return TransitionKernel(w.space.join(q.space), m)


def mh_step(w: UnnormalizedWeights, q: ProposalKernel, z: int, rng: RandomStream) -> int:
    """Propose ``s ~ q[z]``, then accept it with probability ``alpha_zs``."""
    s = q.draw(z, rng.uniform())
    u = rng.uniform()
    return s if u < acceptance_probability(w, q, z, s) else z


def run_mh(w: UnnormalizedWeights, q: ProposalKernel, start: int, n: int, rng: RandomStream) -> ChainTrace:
    _mh_spaces(w, q)
    if n < 0:
        raise InvalidInput("n must be non-negative")
    if not 0 <= start < w.k:
        raise InvalidInput(f"start state {start} outside 0..{w.k - 1}")
    alpha = acceptance_matrix(w, q).tolist()
    draw, uniform = q.draw, rng.uniform
    z = start
    out = [z]
    for _ in range(n):
        s = draw(z, uniform())
        if uniform() < alpha[z][s]:
            z = s
        out.append(z)
    return ChainTrace(np.array(out), rng.seed, kernel_fingerprint(w.weight, q.rows, tag="mh"))
