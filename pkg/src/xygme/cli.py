"""Command-line entry point: prepare, sweep, gme, project, catalog.

Exit codes: 0 success, 1 usage, 2 data error, 3 solver failure.
"""
import argparse
import ast
import json
import logging
import math
import operator
import sys
from dataclasses import dataclass

import numpy as np

from . import circuits, dynamics, gme, measure, states
from .qstate import NORM_TOL, DensityMatrix, PureState, StateError, local_phase_match

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3
RANDOM_BISEPARABLE = {"random_biseparable3": 3, "random_biseparable4": 4}

log = logging.getLogger("xygme")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    name: str = None
    grid: tuple = (0.0, 3.2, 0.01)
    out: str = None
    fmt: str = "report"
    verbose: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.grid[2] <= 0:
            raise UsageError("grid step must be positive")
        if self.fmt not in ("csv", "report"):
            raise UsageError(f"unknown format {self.fmt!r}")


# --- expressions and specs -------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": np.sqrt, "cos": np.cos, "sin": np.sin, "exp": np.exp}
_NAMES = {"pi": math.pi, "e": math.e, "i": 1j, "j": 1j}


def evaluate(text):
    """Arithmetic on numbers, pi, i and a few functions; nothing else."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
            return complex(_FUNCS[node.func.id](ev(node.args[0])))
        raise DataError(f"unsupported expression element in {text!r}")

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise DataError(f"cannot evaluate {text!r}: {exc}") from None
    value = complex(value)
    return value.real if value.imag == 0 else value


def parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        vals = [evaluate(p) for p in parts]
    except DataError as exc:
        raise UsageError(str(exc)) from None
    if any(isinstance(v, complex) for v in vals):
        raise UsageError("grid values must be real")
    start, stop, step = (float(v) for v in vals)
    if step <= 0:
        raise UsageError("grid step must be positive")
    if stop < start:
        raise UsageError("grid stop precedes start")
    return start, stop, step


def parse_initial(tokens):
    """``["C0001=sqrt(2/3)", "C1111=1/sqrt(3)"]`` -> normalized-checked state."""
    terms = {}
    for tok in ",".join(tokens).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "=" not in tok:
            raise DataError(f"initial amplitude {tok!r} must look like C0101=value")
        key, expr = tok.split("=", 1)
        label = key.strip().lstrip("Cc")
        if not label or set(label) - {"0", "1"}:
            raise DataError(f"bad basis label {key!r}")
        if terms and len(label) != len(next(iter(terms))):
            raise DataError(f"basis label {key!r} has a different qubit count")
        terms[label] = terms.get(label, 0) + evaluate(expr)
    if not terms:
        raise DataError("no initial amplitudes given")
    n = len(next(iter(terms)))
    amps = np.zeros(2**n, dtype=np.complex128)
    for label, a in terms.items():
        amps[int(label, 2)] = a
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1) > NORM_TOL:
        raise DataError(f"initial state is not normalized: norm = {norm:.6f}")
    return PureState(amps)


def parse_hamiltonian(text, n, g=1.0):
    text = text.strip()
    if text == "complete":
        return dynamics.complete_graph(n, g)
    if text == "chain":
        return dynamics.XYHamiltonian(n, tuple((q, q + 1) for q in range(n - 1)), g)
    pairs = []
    for item in text.split(","):
        try:
            i, j = (int(v) for v in item.split("-"))
        except ValueError:
            raise DataError(f"bad coupling {item!r}; expected i-j") from None
        pairs.append((i, j))
    try:
        return dynamics.XYHamiltonian(n, tuple(pairs), g)
    except (ValueError, StateError) as exc:
        raise DataError(str(exc)) from None


# --- state files -------------------------------------------------------------


def _pair(v, where):
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise DataError(f"{where}: expected [re, im], got {json.dumps(v)}")
    return complex(v[0], v[1])


def parse_state(text, source="<state>"):
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(rec, dict):
        raise DataError(f"{source}: expected an object with fields n and amplitudes or matrix")
    n = rec.get("n")
    if not isinstance(n, int) or n < 1:
        raise DataError(f"{source}: field 'n' must be a positive integer")
    d = 2**n
    try:
        if "amplitudes" in rec:
            amps = rec["amplitudes"]
            if not isinstance(amps, list) or len(amps) != d:
                raise DataError(f"{source}: field 'amplitudes' must hold {d} entries")
            return PureState(np.array([_pair(a, f"{source}: field 'amplitudes'[{k}]") for k, a in enumerate(amps)]))
        if "matrix" in rec:
            rows = rec["matrix"]
            if not isinstance(rows, list) or len(rows) != d:
                raise DataError(f"{source}: field 'matrix' must hold {d} rows")
            m = np.zeros((d, d), dtype=np.complex128)
            for r, row in enumerate(rows):
                if not isinstance(row, list) or len(row) != d:
                    raise DataError(f"{source}: field 'matrix'[{r}] must hold {d} entries")
                for c, v in enumerate(row):
                    m[r, c] = _pair(v, f"{source}: field 'matrix'[{r}][{c}]")
            return DensityMatrix(m)
    except StateError as exc:
        raise DataError(f"{source}: {exc}") from None
    raise DataError(f"{source}: missing field 'amplitudes' or 'matrix'")


def format_state(s):
    if isinstance(s, PureState):
        body = ",\n".join(f"    [{float(a.real)!r}, {float(a.imag)!r}]" for a in s.amplitudes)
        return f'{{\n  "n": {s.n},\n  "amplitudes": [\n{body}\n  ]\n}}\n'
    rows = []
    for row in s.matrix:
        rows.append("    [" + ", ".join(f"[{float(a.real)!r}, {float(a.imag)!r}]" for a in row) + "]")
    return f'{{\n  "n": {s.n},\n  "matrix": [\n' + ",\n".join(rows) + "\n  ]\n}\n"


def read_state(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    return parse_state(text, path)


def write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _f(x):
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _amplitude_lines(s):
    lines = []
    for k, a in enumerate(s.amplitudes):
        if abs(a) > 1e-12:
            lines.append(f"  |{k:0{s.n}b}> {_f(a.real)} {_f(a.imag)}")
    return lines


def _gme_value(s, verbose=False):
    res = gme.genuine_negativity(s)
    if verbose:
        st = res.solver_stats
        log.info(
            "solver: %s after %d iterations, gap %.3e, residuals %.3e/%.3e",
            st["status"],
            st["iterations"],
            st["duality_gap"],
            st["primal_residual"],
            st["dual_residual"],
        )
    return res.value


# --- commands ----------------------------------------------------------------


def cmd_prepare(cfg):
    name = cfg.name
    if name in circuits.RECIPES:
        res = circuits.recipe(name)
        target = states.named(circuits.RECIPE_TARGETS[name])
        final, prob = res.final, res.success_probability
    elif name in states.CATALOG:
        final = target = states.named(name)
        prob = 1.0
    else:
        raise UsageError(f"unknown recipe or state {name!r}")
    fid, _ = local_phase_match(target, final)
    lines = [
        f"name {name}",
        f"success_probability {_f(prob)}",
        f"E {_f(_gme_value(final, cfg.verbose))}",
        f"fidelity {_f(fid)}",
        "amplitudes",
        *_amplitude_lines(final),
    ]
    if cfg.out:
        write_text(cfg.out, format_state(final))
    sys.stdout.write("\n".join(lines) + "\n")


def cmd_sweep(cfg, initial, hamiltonian="complete", g=1.0):
    s0 = parse_initial(initial)
    h = parse_hamiltonian(hamiltonian, s0.n, g)
    records = dynamics.sweep(h, s0, dynamics.grid(*cfg.grid), gme=lambda s: _gme_value(s, cfg.verbose))
    if cfg.fmt == "csv":
        text = dynamics.sweep_csv(records)
    else:
        text = "".join(f"gt {_f(r.gt)}  E {_f(r.gme_value)}\n" for r in records)
    write_text(cfg.out, text)


def cmd_gme(cfg, path):
    s = read_state(path)
    if s.n < 2:
        raise DataError(f"{path}: genuine negativity needs at least two qubits")
    value = _gme_value(s, cfg.verbose)
    write_text(cfg.out, f"E {_f(value)}\n")


def cmd_project(cfg, path, qubit, v_params, outcome):
    s = read_state(path)
    if not isinstance(s, PureState):
        raise DataError(f"{path}: project expects a pure state")
    try:
        m = measure.ProjectiveMeasurement(qubit, v_params, outcome)
        out, prob = measure.project(s, m)
    except StateError as exc:
        raise DataError(str(exc)) from None
    lines = [
        f"qubit {qubit}",
        "v_params " + " ".join(_f(x) for x in m.v_params),
        f"outcome {outcome}",
        f"probability {_f(prob)}",
    ]
    if out.n == 3:
        lines.append(f"class {measure.classify3(out)}")
    matches = []
    for name, fn in states.CATALOG.items():
        t = fn()
        if t.n == out.n and abs(np.vdot(t.amplitudes, out.amplitudes)) ** 2 > 1 - 1e-9:
            matches.append(name)
    lines.append("matches " + (" ".join(matches) if matches else "none"))
    lines += ["amplitudes", *_amplitude_lines(out)]
    if cfg.out:
        write_text(cfg.out, format_state(out))
    sys.stdout.write("\n".join(lines) + "\n")


def cmd_catalog(cfg):
    if cfg.name is None:
        names = [f"{k} {fn().n}" for k, fn in states.CATALOG.items()]
        names += [f"{k} {n}" for k, n in RANDOM_BISEPARABLE.items()]
        write_text(cfg.out, "\n".join(names) + "\n")
        return
    if cfg.name in RANDOM_BISEPARABLE:
        s = gme.random_biseparable(RANDOM_BISEPARABLE[cfg.name], cfg.seed)
    elif cfg.name in states.CATALOG:
        s = states.named(cfg.name)
    else:
        raise UsageError(f"unknown catalog entry {cfg.name!r}")
    write_text(cfg.out, format_state(s))


# --- argument handling -------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "report"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--verbose", action="store_true")

    p = _Parser(prog="xygme", description="Entangled-state preparation with XY couplings and genuine negativity.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("prepare", parents=[common], help="run a preparation recipe or load a catalog state")
    sp.add_argument("name")

    sp = sub.add_parser("sweep", parents=[common], help="E along XY evolution from an initial state")
    sp.add_argument("initial", nargs="+", help="amplitudes such as C0001=sqrt(2/3)")
    sp.add_argument("--grid", default="0:3.2:0.01", help="start:stop:step in units of gt")
    sp.add_argument("--hamiltonian", default="complete", help="complete, chain or i-j,k-l,...")
    sp.add_argument("--g", type=float, default=1.0)

    sp = sub.add_parser("gme", parents=[common], help="genuine negativity of a stored state")
    sp.add_argument("state")

    sp = sub.add_parser("project", parents=[common], help="measure one qubit of a stored pure state")
    sp.add_argument("state")
    sp.add_argument("--qubit", type=int, default=0)
    sp.add_argument("--v", default="1,0,0,0", help="t,y1,y2,y3 with unit norm")
    sp.add_argument("--outcome", type=int, default=0)

    sp = sub.add_parser("catalog", parents=[common], help="list or dump named states")
    sp.add_argument("name", nargs="?")
    return p


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        log.setLevel(logging.INFO if args.verbose else logging.WARNING)
        fmt = args.fmt or ("csv" if args.command == "sweep" else "report")
        grid = parse_grid(args.grid) if args.command == "sweep" else (0.0, 0.0, 1.0)
        cfg = RunConfig(args.command, getattr(args, "name", None), grid, args.out, fmt, args.verbose, args.seed)
        if args.command == "prepare":
            cmd_prepare(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.initial, args.hamiltonian, args.g)
        elif args.command == "gme":
            cmd_gme(cfg, args.state)
        elif args.command == "project":
            try:
                v = tuple(float(evaluate(x)) for x in args.v.split(","))
            except (DataError, TypeError) as exc:
                raise UsageError(f"--v: {exc}") from None
            cmd_project(cfg, args.state, args.qubit, v, args.outcome)
        else:
            cmd_catalog(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except gme.GmeSolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, StateError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
