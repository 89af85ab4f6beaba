"""Command-line front end.

Every value printed here comes from a library call; this module only parses
options, chooses the call and serializes the result.  Exit codes: 0 on success
(an aborted protocol run is a valid outcome), 1 on configuration errors, 2 on
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import distill as ds
from . import protocols as pr
from .codes import CODE_NAMES, r_matrix
from .states import BlochVector, is_physical

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

# Reference figures reported alongside computed values.
QUOTED = {
    "threshold": {("5qutrit", "Hplus"): 0.233, ("5qutrit", "phi"): [0.345, 0.344], ("5qubit", "H"): (3 - math.sqrt(6)) / 3,
                  ("5qubit", "Hplus"): (3 - math.sqrt(6)) / 3},
    "parity_total_error": 2.707e-8,
    "parity_c": {"Hplus": 0.2113, "phi": 0.0152},
    "equatorial_output": "(|0> + |1> - |2>)/sqrt(3)",
    "closure_order_0_pi": 4,
    "lambda": [math.atan(math.sqrt(2)) / math.pi, -math.atan(math.sqrt(2)) / math.pi, 0.5],
}


class ConfigError(ValueError):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as configuration errors instead of exiting with status 2."""

    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    code: str = "5qutrit"
    variant: str | None = None
    resolution: int = 201
    tol: float = ds.ITER_TOL
    threshold_tol: float = 1e-4
    physical_tol: float = 1e-9
    eps: float = 0.0
    eps_range: tuple[float, float] = (0.0, 0.5)
    output: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.code not in CODE_NAMES:
            raise ConfigError(f"unknown code {self.code!r}; expected one of {', '.join(CODE_NAMES)}")
        if self.variant is not None and self.variant not in ds.MAP_VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        for name in ("tol", "threshold_tol", "physical_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name.replace('_', '-')} must be positive")
        if self.resolution < 2:
            raise ConfigError("resolution must be at least 2")
        lo, hi = self.eps_range
        if not 0.0 <= lo < hi <= 1.0:
            raise ConfigError("eps range must satisfy 0 <= lo < hi <= 1")
        if not 0.0 <= self.eps <= 1.0:
            raise ConfigError("eps must lie in [0, 1]")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    values = {k: getattr(args, k) for k in fields if k != "command" and getattr(args, k, None) is not None}
    if "eps_range" in values:
        values["eps_range"] = parse_range(values["eps_range"])
    return RunConfig(command=args.command, **values)


def parse_range(text) -> tuple[float, float]:
    if isinstance(text, tuple):
        return text
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_bloch(text: str, dim: int) -> BlochVector:
    try:
        comps = [complex(p.replace(" ", "")) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse Bloch components {text!r}") from exc
    try:
        return BlochVector(dim, np.array(comps))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def complex_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def bloch_json(alpha: BlochVector) -> list[list[float]]:
    return [complex_pair(c) for c in alpha.components]


def matrix_json(mat: np.ndarray) -> list[list[list[float]]]:
    return [[complex_pair(z) for z in row] for row in mat]


# Commands ------------------------------------------------------------------------


def initial_state(args, cfg: RunConfig, dim: int) -> tuple[str, BlochVector]:
    if args.bloch:
        return "custom", parse_bloch(args.bloch, dim)
    try:
        return args.state, ds.named_state(args.state, dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def get_map(cfg: RunConfig, engine: str = "auto") -> ds.DistillationMap:
    try:
        return ds.get_map(cfg.code, cfg.variant, engine)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_distill(args, cfg: RunConfig) -> dict:
    m = get_map(cfg, args.engine)
    name, alpha = initial_state(args, cfg, m.dim)
    alpha = ds.depolarize(alpha, cfg.eps)
    if not is_physical(alpha, cfg.physical_tol):
        raise ConfigError("initial state is not physical")
    trace = ds.iterate_map(m, alpha, max_iters=args.max_iters, tol=cfg.tol)
    rounds = [
        {"round": r + 1, "bloch": bloch_json(trace.states[r + 1]) if r + 1 < len(trace.states) else None, "p_s": p}
        for r, p in enumerate(trace.success_probs)
    ]
    return {
        "command": "distill",
        "code": cfg.code,
        "variant": m.variant,
        "state": name,
        "eps": cfg.eps,
        "initial": bloch_json(alpha),
        "rounds": rounds,
        "iterations": trace.iterations,
        "verdict": trace.verdict.describe(),
        "final": bloch_json(trace.final),
    }


def cmd_threshold(args, cfg: RunConfig) -> dict:
    m = get_map(cfg)
    name, target = initial_state(args, cfg, m.dim)
    try:
        res = ds.threshold_search(target, m, tol_eps=cfg.threshold_tol, bracket=cfg.eps_range,
                                  probe_iters=args.probe_iters)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return {
        "command": "threshold",
        "code": cfg.code,
        "variant": m.variant,
        "state": name,
        "eps_star": res.eps_star,
        "lower": res.lower,
        "upper": res.upper,
        "steps": res.steps,
        "quoted": QUOTED["threshold"].get((cfg.code, name)),
    }


def cmd_scan(args, cfg: RunConfig):
    try:
        points = ds.scan_hadamard_plane(cfg.code, cfg.variant, cfg.resolution, max_iters=args.max_iters,
                                        tol=cfg.tol, record_paths=bool(args.paths), workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.paths:
        payload = [{"row": p.row, "col": p.col, "path": p.path} for p in points]
        Path(args.paths).write_text(json.dumps(payload, sort_keys=True) + "\n")
    return points


def parity_start(args, cfg: RunConfig) -> tuple[pr.ParityState, dict]:
    if args.eta0 is not None:
        try:
            return pr.ParityState(args.eta0, args.delta0 or 0.0), {"source": "weights"}
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    name, alpha = initial_state(args, cfg, 3)
    pre = r_matrix() if name in ("Hplus", "H+") else None
    start = pr.parity_prepare(alpha, cfg.eps, pre)
    info = {"source": "state", "state": name, "pre_rotation": "R" if pre is not None else None,
            "quoted_c": QUOTED["parity_c"].get(name)}
    return start, info


def cmd_parity(args, cfg: RunConfig) -> dict:
    start, info = parity_start(args, cfg)
    records, aborted = pr.parity_trajectory(start, args.rounds)
    return {
        "command": "parity",
        **info,
        "eps": cfg.eps,
        "eta0": start.eta,
        "delta0": start.delta,
        "rounds": [r.as_dict() for r in records],
        "aborted": aborted,
        "quoted_total_error_round4": QUOTED["parity_total_error"],
    }


def cmd_equatorialize(args, cfg: RunConfig) -> dict:
    try:
        plus = pr.ParityState(args.eta, args.delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = pr.equatorialize(plus.density(), plus.density())
    result = {"command": "equatorialize", "eta": args.eta, "delta": args.delta, "success_prob": out.success_prob,
              "aborted": out.aborted, "quoted_output": QUOTED["equatorial_output"]}
    if not out.aborted:
        target = pr.phi_0_pi()
        result["output"] = matrix_json(out.output)
        result["fidelity_phi_0_pi"] = float(np.real(target.conj() @ out.output @ target))
    return result


def cmd_inject(args, cfg: RunConfig) -> dict:
    phase = pr.PhaseState(args.theta, args.phi)
    target = parse_ket(args.target)
    single = pr.inject(phase, target, np.random.default_rng(cfg.seed))
    counts = pr.sample_outcomes(phase, target, args.trials, cfg.seed)
    closure = pr.injection_group_closure(phase, args.bound)
    return {
        "command": "inject",
        "theta": args.theta,
        "phi": args.phi,
        "seed": cfg.seed,
        "outcome": single.outcome,
        "unitary": single.label,
        "unitary_diagonal": [complex_pair(z) for z in np.diag(single.unitary)],
        "post_state": matrix_json(single.post_state),
        "probabilities": single.probabilities.tolist(),
        "trials": args.trials,
        "frequencies": (counts / args.trials).tolist(),
        "closure_order": closure.order,
        "closure_bound": args.bound,
        "quoted_closure_order_0_pi": QUOTED["closure_order_0_pi"],
    }


def parse_ket(text: str) -> np.ndarray:
    try:
        ket = np.array([complex(p.replace(" ", "")) for p in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse ket {text!r}") from exc
    if ket.shape != (3,) or np.linalg.norm(ket) == 0:
        raise ConfigError("target ket needs three amplitudes, not all zero")
    return ket / np.linalg.norm(ket)


def cmd_probe(args, cfg: RunConfig) -> dict:
    rep = pr.promoted_group_probe(args.nmax)
    return {"command": "probe", **rep.as_dict(), "quoted_lambda": QUOTED["lambda"]}


def cmd_oracle_check(args, cfg: RunConfig) -> dict:
    rep = ds.oracle_check(args.samples, cfg.seed, cfg.variant or "corrected")
    return {
        "command": "oracle-check",
        "samples": rep.samples,
        "seed": cfg.seed,
        "max_component_error": rep.max_component_error,
        "max_success_prob_error": rep.max_success_prob_error,
        "tolerance": args.tolerance,
        "passed": rep.max_component_error <= args.tolerance and rep.max_success_prob_error <= args.tolerance,
    }


COMMANDS = {
    "distill": cmd_distill,
    "scan": cmd_scan,
    "threshold": cmd_threshold,
    "parity": cmd_parity,
    "equatorialize": cmd_equatorialize,
    "inject": cmd_inject,
    "probe": cmd_probe,
    "oracle-check": cmd_oracle_check,
}


# Parsing -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--code", choices=CODE_NAMES, help="stabilizer code (default: 5qutrit)")
    common.add_argument("--variant", choices=ds.MAP_VARIANTS,
                        help="decoding variant (default: corrected; canonical for 7qutrit)")
    common.add_argument("--tol", type=float, help=f"iteration stop tolerance (default: {ds.ITER_TOL})")
    common.add_argument("--physical-tol", type=float, help="physicality tolerance (default: 1e-9)")
    common.add_argument("--seed", type=int, help="random seed (default: 0)")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--state", default="Hplus", help="Hplus, Hminus, Hi, phi, mixed or H for qubits (default: Hplus)")
    state.add_argument("--bloch", help="comma-separated complex components, overrides --state")
    state.add_argument("--eps", type=float, help="depolarizing weight (default: 0)")

    parser = ArgumentParser(prog="magicdistill", description="Qudit magic state distillation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distill", parents=[common, state], help="iterate a distillation map")
    p.add_argument("--engine", choices=ds.ENGINES, default="auto", help="evaluation engine (default: auto)")
    p.add_argument("--max-iters", type=int, default=ds.MAX_ITERS, help="iteration cap (default: 200)")

    p = sub.add_parser("scan", parents=[common], help="classify the Hadamard plane, CSV output")
    p.add_argument("--resolution", type=int, help="grid points per edge (default: 201)")
    p.add_argument("--max-iters", type=int, default=ds.MAX_ITERS, help="iteration cap (default: 200)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    p.add_argument("--paths", help="also write iteration paths as JSON to this file")

    p = sub.add_parser("threshold", parents=[common, state], help="bisect the depolarizing threshold")
    p.add_argument("--threshold-tol", type=float, help="bisection resolution (default: 1e-4)")
    p.add_argument("--eps-range", help="bisection bracket 'lo,hi' (default: 0,0.5)")
    p.add_argument("--probe-iters", type=int, default=60, help="iterations per convergence probe (default: 60)")

    p = sub.add_parser("parity", parents=[common, state], help="parity-checker trajectory")
    p.add_argument("--rounds", type=int, default=4, help="trajectory length including the prepared state (default: 4)")
    p.add_argument("--eta0", type=float, help="start from explicit weights instead of a prepared state")
    p.add_argument("--delta0", type=float, help="delta weight used with --eta0 (default: 0)")

    p = sub.add_parser("equatorialize", parents=[common], help="equatorialize two plus-states")
    p.add_argument("--eta", type=float, default=0.0, help="|2> weight of each input (default: 0)")
    p.add_argument("--delta", type=float, default=0.0, help="|Psi-> weight of each input (default: 0)")

    p = sub.add_parser("inject", parents=[common], help="gate injection with a phase state")
    p.add_argument("--theta", type=float, default=0.0, help="phase on |1> (default: 0)")
    p.add_argument("--phi", type=float, default=math.pi, help="phase on |2> (default: pi)")
    p.add_argument("--target", default="1,1,1", help="target ket amplitudes (default: 1,1,1)")
    p.add_argument("--trials", type=int, default=30000, help="sampled outcomes (default: 30000)")
    p.add_argument("--bound", type=int, default=1000, help="closure size bound (default: 1000)")

    p = sub.add_parser("probe", parents=[common], help="eigenphases of K = H N H N H")
    p.add_argument("--nmax", type=int, default=10_000, help="largest power searched (default: 10000)")

    p = sub.add_parser("oracle-check", parents=[common], help="closed form against the dense map")
    p.add_argument("--samples", type=int, default=1000, help="random states (default: 1000)")
    p.add_argument("--tolerance", type=float, default=1e-10, help="pass tolerance (default: 1e-10)")
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def subparser_for(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices[command]


def parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    sub = subparser_for(parser, args.command)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key not in actions or key in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        act = actions[key]
        try:
            conv = act.type(value) if act.type else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
        if act.choices is not None and conv not in act.choices:
            raise ConfigError(f"bad value for {key}: {value!r}")
        defaults[key] = conv
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


@contextmanager
def opened(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse(argv)
        cfg = config_from_args(args)
        result = COMMANDS[args.command](args, cfg)
        with opened(cfg.output) as fh:
            if args.command == "scan":
                ds.write_scan_csv(result, fh)
            else:
                fh.write(json.dumps(result, sort_keys=True, indent=2, allow_nan=True) + "\n")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "oracle-check" and not result["passed"]:
        print("numerical failure: closed form disagrees with the dense map", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
