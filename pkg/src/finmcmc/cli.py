"""Command-line front end.

States are numbered from 1 on the command line and in every file the CLI
writes; the library itself indexes states from 0.

Exit codes: 0 success, 2 input error, 3 structural precondition failure.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import io
from .convergence import CouplingCertificate, convergence_curve, mixing_time
from .errors import InvalidInput, MarkovError, NotAperiodic, NotIrreducible
from .models import IsingModel, enumerate_expectation, ising_weights, magnetization, run_ising_gibbs
from .samplers import (
    ProductSpaceCodec,
    RandomStream,
    ergodic_average,
    gibbs_sweep_kernel,
    mh_kernel,
    run_gibbs,
    run_mh,
)
from .stationary import solve_stationary
from .structure import analyze

EXIT_OK, EXIT_INPUT, EXIT_STRUCTURE = 0, 2, 3

COMMANDS = ("analyze", "stationary", "converge", "mixing", "gibbs", "mh", "ising")


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    seed: int | None = None
    steps: int = 1
    burn_in: int = 0
    tolerance: float = 1e-6
    output: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if self.steps < 1:
            raise InvalidInput(f"--steps must be >= 1, got {self.steps}")
        if self.burn_in < 0:
            raise InvalidInput(f"--burn-in must be >= 0, got {self.burn_in}")
        if self.burn_in >= self.steps:
            raise InvalidInput(f"--burn-in ({self.burn_in}) must be smaller than --steps ({self.steps})")
        if not 0 < self.tolerance < 1:
            raise InvalidInput(f"tolerance must lie in (0, 1), got {self.tolerance}")


def parse_f_spec(spec: str, k: int) -> Callable[[int], float]:
    """``identity`` or ``indicator:<state>``, as a function of a 0-based state."""
    if spec == "identity":
        return lambda s: float(s + 1)
    kind, _, arg = spec.partition(":")
    if kind == "indicator" and arg:
        try:
            target = int(arg) - 1
        except ValueError:
            raise InvalidInput(f"bad state in f-spec {spec!r}") from None
        if not 0 <= target < k:
            raise InvalidInput(f"f-spec state {arg} outside 1..{k}")
        return lambda s: 1.0 if s == target else 0.0
    raise InvalidInput(f"unknown f-spec {spec!r}; use 'identity' or 'indicator:<state>'")


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise InvalidInput(f"--grid must look like WxH, got {text!r}") from None


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(obj, path: str | None) -> None:
    with _output(path) as fh:
        fh.write(json.dumps(obj) + "\n")


def _estimate_report(estimate: float, exact: float) -> dict:
    return {"estimate": estimate, "exact": exact, "abs_error": abs(estimate - exact)}


def _check_start(start: int, k: int) -> int:
    if not 1 <= start <= k:
        raise InvalidInput(f"--start {start} outside 1..{k}")
    return start - 1


def cmd_analyze(args) -> int:
    report = analyze(io.load_kernel(args.kernel))
    _emit_json(report.as_dict(), args.out)
    return EXIT_OK


def cmd_stationary(args) -> int:
    res = solve_stationary(io.load_kernel(args.kernel))
    out = io.distribution_to_dict(res.pi)
    out["residual"] = res.residual
    out["unique"] = res.unique
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    if args.n_max < 1:
        raise InvalidInput("--n-max must be >= 1")
    curve = convergence_curve(io.load_kernel(args.kernel), args.n_max)
    with _output(args.out) as fh:
        io.write_curve_csv(curve, fh)
    return EXIT_OK


def cmd_mixing(args) -> int:
    cfg = RunConfig("mixing", [args.kernel], tolerance=args.tol, output=args.out)
    k = io.load_kernel(args.kernel)
    cert = CouplingCertificate.for_kernel(k)
    n = mixing_time(k, cfg.tolerance)
    _emit_json(
        {"tol": cfg.tolerance, "mixing_time": n, "N": cert.positivity_index,
         "epsilon": cert.epsilon, "horizon": cert.horizon(cfg.tolerance)},
        cfg.output,
    )
    return EXIT_OK


def cmd_mh(args) -> int:
    cfg = RunConfig("mh", [args.weights, args.proposal], args.seed, args.steps, args.burn_in, output=args.out)
    w = io.load_weights(args.weights)
    q = io.load_kernel(args.proposal)
    w.space.join(q.space)
    f = parse_f_spec(args.f, w.k)
    start = _check_start(args.start, w.k)
    trace = run_mh(w, q, start, cfg.steps, RandomStream(cfg.seed))
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            io.write_trace_csv(trace, fh, offset=1)
    if args.kernel_out:
        io.save_kernel(mh_kernel(w, q), args.kernel_out)
    est = float(ergodic_average(trace, f, cfg.burn_in)[0])
    _emit_json(_estimate_report(est, enumerate_expectation(w, f)), cfg.output)
    return EXIT_OK


def cmd_gibbs(args) -> int:
    cfg = RunConfig("gibbs", [args.weights], args.seed, args.steps, args.burn_in, output=args.out)
    w = io.load_weights(args.weights)
    codec = ProductSpaceCodec(args.coords, args.values)
    if codec.total != w.k:
        raise InvalidInput(f"{args.values}^{args.coords} = {codec.total} states, weights file has {w.k}")
    f = parse_f_spec(args.f, w.k)
    start = _check_start(args.start, w.k)
    trace = run_gibbs(w, codec, start, cfg.steps, RandomStream(cfg.seed))
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            io.write_trace_csv(trace, fh, offset=1)
    if args.kernel_out:
        io.save_kernel(gibbs_sweep_kernel(w, codec), args.kernel_out)
    est = float(ergodic_average(trace, f, cfg.burn_in)[0])
    _emit_json(_estimate_report(est, enumerate_expectation(w, f)), cfg.output)
    return EXIT_OK


def cmd_ising(args) -> int:
    cfg = RunConfig("ising", [], args.seed, args.steps, args.burn_in, output=args.out)
    width, height = _parse_grid(args.grid)
    model = IsingModel(width, height, args.beta)
    trace = run_ising_gibbs(model, cfg.steps, RandomStream(cfg.seed))
    mag = magnetization(model)
    per_sweep = mag[trace.states]
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            fh.write(f"# seed={trace.seed}\n")
            fh.write("step,magnetization\n")
            for i, m in enumerate(per_sweep.tolist()):
                fh.write(f"{i},{m!r}\n")
    kept = per_sweep[cfg.burn_in:]

    def site_bits(states):
        # spin of site i is bit (n-1-i) of the flat index
        n = model.sites
        return [((states >> (n - 1 - i)) & 1) for i in range(n)]

    w = ising_weights(model)
    _emit_json(
        {
            "grid": f"{width}x{height}",
            "beta": model.beta,
            "sweeps": cfg.steps,
            "burn_in": cfg.burn_in,
            "magnetization": _estimate_report(float(kept.mean()), enumerate_expectation(w, mag)),
            "abs_magnetization": _estimate_report(float(np.abs(kept).mean()), enumerate_expectation(w, np.abs(mag))),
            "site_plus": {
                "estimate": [float(np.mean(b[cfg.burn_in:])) for b in site_bits(trace.states)],
                "exact": [enumerate_expectation(w, b.astype(float)) for b in site_bits(np.arange(w.k))],
            },
        },
        cfg.output,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finmcmc", description="Finite-state Markov chain analysis and MCMC sampling.")
    sub = p.add_subparsers(dest="command", required=True)

    def kernel_cmd(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("kernel", help="kernel JSON file")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    kernel_cmd("analyze", cmd_analyze, "irreducibility, period and positivity certificate")
    kernel_cmd("stationary", cmd_stationary, "unique invariant distribution of an irreducible kernel")
    sp = kernel_cmd("converge", cmd_converge, "worst-case TV to equilibrium and coupling bound, as CSV")
    sp.add_argument("--n-max", type=int, required=True)
    sp = kernel_cmd("mixing", cmd_mixing, "mixing time at a TV tolerance")
    sp.add_argument("--tol", type=float, default=1e-6)

    def sampler_opts(sp):
        sp.add_argument("--start", type=int, required=True, help="1-based start state")
        sp.add_argument("--steps", type=int, required=True)
        sp.add_argument("--burn-in", type=int, default=0)
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--f", default="identity", help="'identity' or 'indicator:<state>'")
        sp.add_argument("--trace", help="write the trace CSV here")
        sp.add_argument("--kernel-out", help="write the explicit transition kernel JSON here")
        sp.add_argument("--out", help="write the estimate JSON here instead of stdout")

    sp = sub.add_parser("mh", help="Metropolis-Hastings chain and ergodic average")
    sp.add_argument("--weights", required=True)
    sp.add_argument("--proposal", required=True)
    sampler_opts(sp)
    sp.set_defaults(func=cmd_mh)

    sp = sub.add_parser("gibbs", help="systematic-scan Gibbs chain over a product space")
    sp.add_argument("--weights", required=True)
    sp.add_argument("--coords", type=int, required=True)
    sp.add_argument("--values", type=int, required=True)
    sampler_opts(sp)
    sp.set_defaults(func=cmd_gibbs)

    sp = sub.add_parser("ising", help="Gibbs sampling of a small Ising grid")
    sp.add_argument("--grid", required=True, help="WxH")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True, help="number of sweeps")
    sp.add_argument("--burn-in", type=int, default=0)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--trace", help="write the per-sweep magnetization CSV here")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ising)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NotIrreducible, NotAperiodic) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except (MarkovError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
