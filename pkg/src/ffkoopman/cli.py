"""Command line front end: ``ffkoopman analyze|recover|observer|simulate FILE``.

Exit codes: 0 success, 2 bad input (parse errors, malformed arguments,
missing outputs), 3 a size cap was hit or no deadbeat gain exists,
4 an internal invariant failed.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from dataclasses import asdict, dataclass
from typing import Sequence

from .dynamics import DEFAULT_ENUM_CAP, analyze_structure
from .errors import (
    CapExceeded,
    DimensionMismatch,
    FssError,
    GainSearchExhausted,
    InvariantViolation,
    NoOutputs,
    NotDetectable,
    NotPrime,
    ParseError,
)
from .estimation import (
    observability,
    observer_rows_json,
    recover_initial,
    render_observer_table,
    run_observer,
    synthesize_deadbeat_gain,
)
from .ffla import MatrixFp
from .koopman import DEFAULT_BASIS_CAP, build_reduction
from .oracle import DEFAULT_ORACLE_CAP, brute_force_observability, brute_force_structure
from .polyfunc import render_poly
from .sysdef import FssSystem, load_system

EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_INVARIANT = 4


@dataclass
class AnalysisConfig:
    enum_cap: int = DEFAULT_ENUM_CAP
    oracle_cap: int = DEFAULT_ORACLE_CAP
    basis_cap: int = DEFAULT_BASIS_CAP
    seed: int = 0
    horizon: int | None = None
    json_path: str | None = None

    def __post_init__(self):
        for name in ("enum_cap", "oracle_cap", "basis_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not -(2**63) <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError("horizon must be positive")


class UsageError(Exception):
    pass


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t != ""]
    except ValueError:
        raise UsageError(f"expected comma separated integers, got {text!r}") from None


def _state(text: str, system: FssSystem) -> tuple:
    x = _csv_ints(text)
    if len(x) != system.n or any(not 0 <= v < system.p for v in x):
        raise UsageError(f"state must be {system.n} integers in 0..{system.p - 1}, got {text!r}")
    return tuple(x)


def _outputs(text: str, system: FssSystem) -> list:
    """``1,0,1,2`` for one output; ``1,0;0,1`` (one group per time step) for several."""
    if system.m == 1 and ";" not in text:
        return [[v] for v in _csv_ints(text)]
    rows = [_csv_ints(group) for group in text.split(";") if group.strip()]
    if any(len(r) != system.m for r in rows):
        raise UsageError(f"each output sample needs {system.m} values")
    return rows


def _fmt_point(x) -> str:
    return "(" + ", ".join(str(v) for v in x) + ")"


def _fmt_set(values) -> str:
    return "{" + ",".join(str(v) for v in sorted(values)) + "}"


def _system_json(system: FssSystem) -> dict:
    return {
        "field": system.p,
        "vars": list(system.vars),
        "updates": {v: render_poly(f, system.vars) for v, f in zip(system.vars, system.updates)},
        "outputs": {z: render_poly(g, system.vars) for z, g in zip(system.output_names, system.outputs)},
    }


def _matrix_lines(name: str, M: MatrixFp) -> list[str]:
    rows = M.tolist()
    if not rows:
        return [f"{name} = []"]
    width = max(len(str(v)) for row in rows for v in row) if rows[0] else 1
    out = []
    for i, row in enumerate(rows):
        label = f"{name} = " if i == 0 else " " * (len(name) + 3)
        out.append(label + "[" + " ".join(str(v).rjust(width) for v in row) + "]")
    return out


class Runner:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = AnalysisConfig(
            enum_cap=args.enum_cap,
            oracle_cap=args.oracle_cap,
            basis_cap=args.basis_cap,
            seed=args.seed,
            horizon=args.horizon,
            json_path=args.json,
        )
        self.out: list[str] = []
        self.report: dict = {}

    def emit(self, line: str = ""):
        self.out.append(line)

    def load(self) -> FssSystem:
        system = load_system(self.args.file)
        self.report["system"] = _system_json(system)
        return system

    def finish(self):
        self.report["config"] = asdict(self.config)
        print("\n".join(self.out))
        if self.config.json_path:
            text = json.dumps(self.report, indent=2) + "\n"
            with open(self.config.json_path, "w", encoding="utf-8") as fh:
                fh.write(text)

    # ------------------------------------------------------------ analyze
    def analyze(self):
        a, cfg = self.args, self.config
        system = self.load()
        red = build_reduction(system, cap=cfg.basis_cap)
        self.report["reduction"] = red.to_json()
        self.emit(f"N = {red.N}")
        for i, s in enumerate(red.basis_strings(), start=1):
            self.emit(f"  psi{i} = {s}")
        struct = analyze_structure(
            red,
            enum_cap=cfg.enum_cap,
            with_fixed_points=a.fixed_points,
            orbit_lengths=a.orbits or (),
            seed=cfg.seed,
        )
        self.report["structure"] = struct.to_json()
        self.emit(f"minimal polynomial: {struct.min_poly_string()}")
        self.emit("elementary divisors: " + ", ".join(str(d) for d in struct.elementary_divisors))
        self.emit(f"predicted orbit lengths: {_fmt_set(struct.predicted_orbit_lengths)}")
        self.emit(f"nilpotency index: {struct.nilpotency_index}")
        if struct.fixed_points is not None:
            self.emit("fixed points: " + (", ".join(_fmt_point(x) for x in struct.fixed_points) or "none"))
        for L, pts in sorted(struct.periodic.items()):
            self.emit(f"points with F^{L}(x) = x: {len(pts)}")
            for x, k in pts:
                self.emit(f"  {_fmt_point(x)} period {k}")

        obs = None
        self.report["observability"] = None
        self.report["observer"] = None
        if system.m:
            obs = observability(red)
            self.report["observability"] = {"rank": obs.rank, "observable": obs.observable}
            self.emit(f"observability: {obs.verdict()}")
            try:
                design = synthesize_deadbeat_gain(red, seed=cfg.seed)
            except (NotDetectable, GainSearchExhausted) as exc:
                self.emit(f"observer: {exc}")
            else:
                self.report["observer"] = design.to_json()
                self.emit(f"observer gain L = {design.L.tolist()} (nilpotency index {design.nilpotency_index})")

        self.report["oracle"] = None
        if a.oracle:
            self.oracle_section(system, red, struct, obs)
        self.finish()

    def oracle_section(self, system, red, struct, obs):
        cfg = self.config
        orc = brute_force_structure(system, cap=cfg.oracle_cap)
        section = orc.to_json()
        lines = [f"oracle: {system.p ** system.n} states, orbit lengths {orc.orbit_lengths}, max chain {orc.max_chain}"]
        contained = orc.distinct_orbit_lengths <= struct.predicted_orbit_lengths
        lines.append(f"oracle: orbit lengths within predicted set: {'yes' if contained else 'NO'}")
        bounded = orc.max_chain <= struct.nilpotency_index
        lines.append(f"oracle: max chain {orc.max_chain} <= nilpotency index {struct.nilpotency_index}: "
                     f"{'yes' if bounded else 'NO'}")
        agree = True
        if struct.fixed_points is not None:
            agree = sorted(orc.fixed_points) == struct.fixed_points
            lines.append(f"oracle: fixed points agree: {'yes' if agree else 'NO'}")
        section.update({"orbit_lengths_contained": contained, "chain_bounded": bounded})
        consistent = contained and bounded and agree
        if obs is not None:
            horizon = cfg.horizon or red.N
            injective, pair = brute_force_observability(system, horizon, cap=cfg.oracle_cap)
            section["observable"] = injective
            section["colliding_pair"] = [list(x) for x in pair] if pair else None
            verdict = "observable" if injective else f"not observable, {_fmt_point(pair[0])} ~ {_fmt_point(pair[1])}"
            lines.append(f"oracle: brute force over horizon {horizon}: {verdict}")
            if obs.observable and not injective:
                consistent = False
        self.report["oracle"] = section
        for line in lines:
            self.emit(line)
        if not consistent:
            raise InvariantViolation("oracle disagrees with the reduced system")

    # ------------------------------------------------------------ recover
    def recover(self):
        system = self.load()
        if not system.m:
            raise NoOutputs("system has no outputs")
        Z = _outputs(self.args.outputs, system)
        if not Z:
            raise UsageError("no output samples given")
        red = build_reduction(system, cap=self.config.basis_cap)
        self.report["reduction"] = red.to_json()
        found = recover_initial(red, Z, enum_cap=self.config.enum_cap)
        self.report["recovered"] = [list(x) for x in found]
        if not found:
            self.emit("no trajectory produces these outputs")
        elif len(found) == 1:
            self.emit(f"x(0) = {_fmt_point(found[0])}")
        else:
            self.emit(f"{len(found)} initial states produce these outputs:")
            for x in found:
                self.emit(f"  {_fmt_point(x)}")
        self.finish()

    # ------------------------------------------------------------ observer
    def observer(self):
        a = self.args
        system = self.load()
        if not system.m:
            raise NoOutputs("system has no outputs")
        red = build_reduction(system, cap=self.config.basis_cap)
        self.report["reduction"] = red.to_json()
        try:
            design = synthesize_deadbeat_gain(red, seed=self.config.seed)
        except NotDetectable:
            # an error exit: print the verdict but write no JSON
            self.emit("not detectable")
            print("\n".join(self.out))
            return EXIT_CAP
        self.report["observer"] = design.to_json()
        self.out.extend(_matrix_lines("L", design.L))
        self.emit(f"nilpotency index of K1 - L*Gamma: {design.nilpotency_index}")
        if a.simulate is not None:
            x0 = _state(a.simulate, system)
            yhat0 = _csv_ints(a.yhat0) if a.yhat0 else None
            if yhat0 is not None and len(yhat0) != red.N:
                raise UsageError(f"--yhat0 needs {red.N} values")
            rows = run_observer(red, design.L, x0=x0, steps=a.steps, y_hat0=yhat0)
            self.report["trace"] = observer_rows_json(rows)
            self.emit(render_observer_table(rows))
        self.finish()
        return 0

    # ------------------------------------------------------------ simulate
    def simulate(self):
        system = self.load()
        x0 = _state(self.args.x0, system)
        states, outs = system.simulate(x0, self.args.steps)
        self.report["trajectory"] = [{"k": k, "x": list(x), "z": list(z)} for k, (x, z) in enumerate(zip(states, outs))]
        for k, (x, z) in enumerate(zip(states, outs)):
            line = f"k={k}  x={_fmt_point(x)}"
            if system.m:
                line += "  z=" + (str(z[0]) if system.m == 1 else _fmt_point(z))
            self.emit(line)
        self.finish()


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="system definition (.fss)")
    common.add_argument("--json", metavar="PATH", help="write a JSON report")
    common.add_argument("--enum-cap", type=_positive, default=DEFAULT_ENUM_CAP)
    common.add_argument("--oracle-cap", type=_positive, default=DEFAULT_ORACLE_CAP)
    common.add_argument("--basis-cap", type=_positive, default=DEFAULT_BASIS_CAP)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--horizon", type=_positive, default=None, help="oracle observability horizon (default N)")

    parser = argparse.ArgumentParser(prog="ffkoopman", description="Koopman analysis of finite state systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="reduction, structure and observability")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    p.add_argument("--fixed-points", action="store_true")
    p.add_argument("--orbits", type=_positive, action="append", metavar="L", help="list points with F^L(x) = x")

    p = sub.add_parser("recover", parents=[common], help="initial state from an output sequence")
    p.add_argument("--outputs", required=True, metavar="CSV")

    p = sub.add_parser("observer", parents=[common], help="deadbeat observer gain and trace")
    p.add_argument("--simulate", metavar="X0")
    p.add_argument("--steps", type=_positive, default=10)
    p.add_argument("--yhat0", metavar="CSV")

    p = sub.add_parser("simulate", parents=[common], help="iterate the system")
    p.add_argument("--x0", required=True, metavar="CSV")
    p.add_argument("--steps", type=_nonneg, default=10)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        runner = Runner(args)
        code = getattr(runner, args.command)() or 0
    except (ParseError, NotPrime) as exc:
        msg = exc.message if isinstance(exc, ParseError) else str(exc)
        where = f"{args.file}:{exc.line}:{exc.col}" if exc.line is not None else args.file
        print(f"error: {where}: {msg}", file=_sys.stderr)
        return EXIT_INPUT
    except (UsageError, NoOutputs, DimensionMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except (CapExceeded, GainSearchExhausted) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_CAP
    except (InvariantViolation, FssError) as exc:
        print(f"internal error: {exc}", file=_sys.stderr)
        return EXIT_INVARIANT
    return code


if __name__ == "__main__":
    raise SystemExit(main())
