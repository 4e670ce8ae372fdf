"""Command-line front end.

Every command turns its flags into a scenario dict, computes a result
bundle and writes ``<out>.csv`` plus a ``<out>.json`` mirror.  The CSV
starts with ``#`` lines carrying the scenario, then the header
``m,value,series``.  Nothing time- or host-dependent is written, so equal
scenarios give byte-identical files.

Exit codes: 0 success, 1 invalid input, 2 infeasible search or failed
estimation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import fsm, i2c
from ._validation import check_width
from .distortion import distortion_pmf, monte_carlo_distortion
from .distributions import (ChannelModel, ConstraintTail, IndependentChannel,
                            InputDistribution)
from .exceptions import EstimationError, InfeasibleError, ValidationError
from .optimizer import (DEFAULT_RESOLUTION, adaptive_search_bit_level,
                        exhaustive_search_bit_independent, generate_random_constraint,
                        oracle_tail)

FLOAT_FORMAT = ".17g"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), FLOAT_FORMAT)


@dataclass
class Bundle:
    """Curves keyed by series label plus a JSON-able result summary."""

    scenario: dict
    curves: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    text_files: dict = field(default_factory=dict)


# ---------------------------------------------------------------- ingestion

def _parse_int(token: str) -> int:
    try:
        return int(token)
    except ValueError:
        value = float(token)
        if not value.is_integer():
            raise ValueError(token) from None
        return int(value)


def ingest_samples(path, width: int, offset: int = 0, header: bool = False):
    """Empirical input PMF from the first CSV column of ``path``.

    ``offset`` is added to every record before range checking (offset-binary
    mapping of signed sensor values).  Out-of-range records are dropped and
    counted; an unparsable record aborts with its line number.
    Returns ``(InputDistribution, report)``.
    """
    width = check_width(width)
    values, rejected, lineno = [], 0, 0
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if header and lineno == 1:
                continue
            if not row or not row[0].strip():
                continue
            try:
                v = _parse_int(row[0].strip()) + int(offset)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: unparsable record {row[0]!r}") from None
            if 0 <= v < 1 << width:
                values.append(v)
            else:
                rejected += 1
    if not values:
        raise ValidationError(f"{path}: no usable records ({rejected} out of range)")
    counts = np.bincount(np.asarray(values, dtype=np.int64), minlength=1 << width)
    f_x = InputDistribution(counts / counts.sum())
    return f_x, {"accepted": len(values), "rejected": rejected}


# ----------------------------------------------------------- scenario parts

def resolve_input(spec: str, width: int, offset: int = 0) -> tuple[InputDistribution, dict]:
    """``uniform``, ``point:<v>`` or ``samples:<path>``."""
    kind, _, arg = spec.partition(":")
    if kind == "uniform":
        return InputDistribution.uniform(width), {}
    if kind == "point":
        try:
            v = int(arg)
        except ValueError:
            raise ValidationError(f"bad point-mass value {arg!r}") from None
        return InputDistribution.point_mass(v, width), {}
    if kind == "samples":
        if not Path(arg).is_file():
            raise ValidationError(f"samples file {arg!r} not found")
        return ingest_samples(arg, width, offset)
    raise ValidationError(f"unknown input source {spec!r}")


def resolve_params(opts: dict) -> i2c.CircuitParams:
    params = i2c.PARAM_PRESETS[opts.get("preset") or "coarse"]
    overrides = {k: opts[k] for k in ("sigma_n", "c_bus", "v_supply", "t_clk", "r_ipu", "r_off")
                 if opts.get(k) is not None}
    if opts.get("dcp"):
        overrides["dcp_table"] = i2c.DCP_PRESETS[opts["dcp"]]
    return params.replace(**overrides) if overrides else params


def resolve_channel(opts: dict, width: int) -> ChannelModel:
    if opts.get("channel_file"):
        path = Path(opts["channel_file"])
        if not path.is_file():
            raise ValidationError(f"channel file {str(path)!r} not found")
        ch = ChannelModel.from_dict(json.loads(path.read_text()))
    elif opts.get("setting") is not None or opts.get("profile"):
        params = resolve_params(opts)
        if opts.get("profile"):
            profile = i2c.DcpProfile(tuple(opts["profile"]), opts.get("nominal") or 0)
        else:
            profile = i2c.DcpProfile.fixed(opts["setting"], opts.get("nominal") or 0)
        ch = i2c.channel_from_profile(profile.validate(params), params)
    else:
        down = opts.get("p_down") or [0.0]
        up = opts.get("p_up") or [0.0]
        down = down * width if len(down) == 1 else down
        up = up * width if len(up) == 1 else up
        ch = IndependentChannel(down, up)
    if ch.width != width:
        raise ValidationError(f"channel width {ch.width} differs from --width {width}")
    return ch


def resolve_constraint(opts: dict, width: int):
    if opts.get("constraint_file"):
        path = Path(opts["constraint_file"])
        if not path.is_file():
            raise ValidationError(f"constraint file {str(path)!r} not found")
        c = ConstraintTail.from_dict(json.loads(path.read_text()))
        p_rand = None
    elif opts.get("constraint_seed") is not None:
        c, p_rand = generate_random_constraint(width, opts["constraint_seed"])
    else:
        raise ValidationError("give --constraint or --constraint-seed")
    if c.width != width:
        raise ValidationError(f"constraint width {c.width} differs from --width {width}")
    return c, p_rand


# ----------------------------------------------------------------- commands

def cmd_distortion(opts: dict) -> Bundle:
    width = check_width(opts["width"])
    f_x, report = resolve_input(opts.get("input", "uniform"), width, opts.get("offset", 0))
    ch = resolve_channel(opts, width)
    dist = distortion_pmf(ch, f_x, opts.get("method", "fast"))
    bundle = Bundle(opts, {"pmf": dist.pmf, "tail": dist.tail}, {"ingest": report} if report else {})
    if opts.get("monte_carlo"):
        if opts.get("seed") is None:
            raise ValidationError("--seed is required with --monte-carlo")
        mc = monte_carlo_distortion(ch, f_x, opts["monte_carlo"], opts["seed"])
        bundle.curves["mc_pmf"] = mc.pmf
        bundle.curves["mc_tail"] = mc.tail
    return bundle


def cmd_optimize(opts: dict) -> Bundle:
    width = check_width(opts["width"])
    f_x, report = resolve_input(opts.get("input", "uniform"), width, opts.get("offset", 0))
    constraint, p_rand = resolve_constraint(opts, width)
    mode = opts.get("mode", "both")
    bundle = Bundle(opts, {"constraint": constraint.values})
    if report:
        bundle.results["ingest"] = report
    if p_rand is not None:
        bundle.results["p_rand"] = p_rand.tolist()
        bundle.curves["oracle"] = oracle_tail(p_rand, f_x).tail
    runs = []
    if mode in ("bit-independent", "both"):
        runs.append(("bit-independent", exhaustive_search_bit_independent(
            f_x, constraint, opts.get("resolution") or DEFAULT_RESOLUTION)))
    if mode in ("bit-level", "both"):
        runs.append(("bit-level", adaptive_search_bit_level(
            f_x, constraint, steps=opts.get("steps", 6), symmetric=opts.get("symmetric", False),
            schedule=opts.get("schedule", "refine"))))
    if not runs:
        raise ValidationError(f"unknown search mode {mode!r}")
    for label, result in runs:
        bundle.curves[label] = result.induced.tail
        bundle.results[label] = result.to_dict()
        if not result.feasible:
            raise InfeasibleError(f"{label} search found no constraint-satisfying channel")
    return bundle


def _estimated(opts: dict, params: i2c.CircuitParams, results: dict) -> i2c.CircuitParams:
    src = opts.get("measurements")
    if not src:
        return params
    if src == "reference":
        m = i2c.REFERENCE_MEASUREMENTS
    else:
        if not Path(src).is_file():
            raise ValidationError(f"measurements file {src!r} not found")
        m = i2c.BenchMeasurements.from_dict(json.loads(Path(src).read_text()))
    r_ipu, r_off = i2c.estimate_resistances(m, params.v_supply)
    results["estimated"] = {"ratio": i2c.measurement_ratio(m, params.v_supply),
                            "r_ipu": r_ipu, "r_off": r_off}
    return params.replace(r_ipu=r_ipu, r_off=r_off)


def cmd_i2c_sweep(opts: dict) -> Bundle:
    f_x, report = resolve_input(opts.get("input", "uniform"), i2c.BYTE, opts.get("offset", 0))
    results: dict = {"ingest": report} if report else {}
    params = _estimated(opts, resolve_params(opts), results)
    settings = opts.get("settings") or i2c.SWEEP_PRESETS.get(opts.get("preset") or "coarse")
    if not settings:
        raise ValidationError("give --settings for this preset")
    nominal = opts.get("nominal") or 0
    bundle = Bundle(opts, results=results)
    bundle.results["params"] = params.to_dict()
    bundle.results["settings"] = {}
    for s in settings:
        profile = i2c.DcpProfile.fixed(s, nominal).validate(params)
        ch = i2c.channel_from_profile(profile, params)
        dist = distortion_pmf(ch, f_x)
        bundle.curves[f"setting={s}"] = dist.tail
        bundle.results["settings"][str(s)] = {
            "r_dcp": params.r_dcp(s), "r_pu_eq": params.r_pu_eq(s), "tau": params.tau(s),
            "v0": i2c.steady_state_levels(params, s)[0],
            "v1": i2c.steady_state_levels(params, s)[1]}
    m = np.arange(1 << i2c.BYTE)
    bundle.curves["worst-case"] = (255 - m) / 256.0
    return bundle


def cmd_power_sweep(opts: dict) -> Bundle:
    params = resolve_params(opts)
    settings = opts.get("settings") or sorted(params.dcp_table)
    duties = opts.get("duty0") or [0.5]
    freqs = opts.get("f_switch") or [2e5]
    bundle = Bundle(opts)
    bundle.results["params"] = params.to_dict()
    bundle.results["r_dcp"] = [params.r_dcp(s) for s in settings]
    for d in duties:
        for f in freqs:
            bundle.curves[f"duty0={fmt(d)};f_switch={fmt(f)}"] = np.array(
                [i2c.power_estimate(params, s, d, f) for s in settings])
    bundle.results["m_is"] = "DCP setting index"
    bundle.results["m"] = list(settings)
    return bundle


def cmd_fsm_trace(opts: dict) -> Bundle:
    regs = opts.get("registers")
    if not regs:
        raise ValidationError("give --registers R0,R1,...,RL")
    cfg = fsm.AdaptationConfig(tuple(regs), opts.get("n_bits", 8))
    if opts.get("stimulus"):
        path = Path(opts["stimulus"])
        if not path.is_file():
            raise ValidationError(f"stimulus file {str(path)!r} not found")
        with path.open() as fh:
            stimulus = fsm.read_stimulus(fh)
        words = []
    else:
        n_words = opts.get("words", 1)
        if n_words and opts.get("seed") is None:
            raise ValidationError("--seed is required to draw random words")
        rng = np.random.default_rng(opts.get("seed"))
        words = rng.integers(0, 1 << cfg.word_length, size=n_words).tolist()
        gap = opts.get("gap", 1)
        clock = opts.get("clock") or gap + n_words * (cfg.word_length + gap)
        stimulus = fsm.transaction_stimulus(cfg, n_words, clock, gap)
    trace = fsm.run(cfg, stimulus)
    buf = io.StringIO()
    fsm.write_trace(trace, buf)
    bundle = Bundle(opts, {"selection": np.array([c.selection for c in trace], dtype=np.int64)})
    bundle.results["words"] = words
    bundle.results["m_is"] = "cycle index"
    bundle.text_files[".trace"] = buf.getvalue()
    return bundle


def cmd_ingest(opts: dict) -> Bundle:
    width = check_width(opts["width"])
    if not Path(opts["path"]).is_file():
        raise ValidationError(f"samples file {opts['path']!r} not found")
    f_x, report = ingest_samples(opts["path"], width, opts.get("offset", 0), opts.get("header", False))
    return Bundle(opts, {"pmf": f_x.pmf}, {"ingest": report})


COMMANDS: dict[str, Callable[[dict], Bundle]] = {
    "distortion": cmd_distortion,
    "optimize": cmd_optimize,
    "i2c-sweep": cmd_i2c_sweep,
    "power-sweep": cmd_power_sweep,
    "fsm-trace": cmd_fsm_trace,
    "ingest": cmd_ingest,
}


def run_scenario(scenario: dict) -> Bundle:
    """Dispatch ``scenario["command"]`` with the remaining keys as options."""
    command = scenario.get("command")
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}")
    return COMMANDS[command](dict(scenario))


# ------------------------------------------------------------------ output

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def emit_curves(bundle: Bundle, path) -> list[Path]:
    """Write ``<path>.csv``, ``<path>.json`` and any text side files."""
    base = Path(path)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    scenario = json.dumps(_jsonable(bundle.scenario), sort_keys=True)
    xs = bundle.results.get("m")
    lines = [f"# scenario: {scenario}"]
    if "m_is" in bundle.results:
        lines.append(f"# m: {bundle.results['m_is']}")
    lines.append("m,value,series")
    for label, values in bundle.curves.items():
        for i, v in enumerate(np.asarray(values)):
            lines.append(f"{fmt(xs[i]) if xs is not None else i},{fmt(v)},{label}")
    csv_path = base.with_name(base.name + ".csv")
    json_path = base.with_name(base.name + ".json")
    csv_path.write_text("\n".join(lines) + "\n")
    mirror = {"scenario": bundle.scenario, "columns": ["m", "value", "series"],
              "series": {k: np.asarray(v).tolist() for k, v in bundle.curves.items()},
              "results": bundle.results}
    json_path.write_text(json.dumps(_jsonable(mirror), sort_keys=True, indent=1) + "\n")
    written = [csv_path, json_path]
    for suffix, text in bundle.text_files.items():
        p = base.with_name(base.name + suffix)
        p.write_text(text)
        written.append(p)
    return written


# ------------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1); 2 is reserved
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_input(p):
    p.add_argument("--input", default="uniform",
                   help="uniform | point:<value> | samples:<csv path>")
    p.add_argument("--offset", type=int, default=0,
                   help="added to every sample before range checking (offset binary)")


def _add_circuit(p):
    p.add_argument("--preset", choices=sorted(i2c.PARAM_PRESETS), default=None)
    p.add_argument("--dcp", choices=sorted(i2c.DCP_PRESETS), default=None)
    p.add_argument("--sigma-n", dest="sigma_n", type=float)
    p.add_argument("--c-bus", dest="c_bus", type=float)
    p.add_argument("--v-supply", dest="v_supply", type=float)
    p.add_argument("--t-clk", dest="t_clk", type=float)
    p.add_argument("--r-ipu", dest="r_ipu", type=float)
    p.add_argument("--r-off", dest="r_off", type=float)
    p.add_argument("--nominal", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vdb-channel", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("distortion", help="distortion PMF and tail for one channel")
    p.add_argument("--width", type=int, default=8)
    _add_input(p)
    p.add_argument("--p-down", dest="p_down", type=_floats)
    p.add_argument("--p-up", dest="p_up", type=_floats)
    p.add_argument("--channel", dest="channel_file")
    _add_circuit(p)
    p.add_argument("--setting", type=int, help="fixed DCP setting for all 8 bits")
    p.add_argument("--profile", type=_ints, help="8 comma-separated DCP settings")
    p.add_argument("--method", choices=["fast", "enumerative", "brute"], default="fast")
    p.add_argument("--monte-carlo", dest="monte_carlo", type=int, default=0)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("optimize", help="benefit-maximizing channel under a tail constraint")
    p.add_argument("--width", type=int, default=8)
    _add_input(p)
    p.add_argument("--constraint", dest="constraint_file")
    p.add_argument("--constraint-seed", dest="constraint_seed", type=int)
    p.add_argument("--mode", choices=["bit-independent", "bit-level", "both"], default="both")
    p.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--schedule", choices=["refine", "lagged"], default="refine")

    p = sub.add_parser("i2c-sweep", help="tails for fixed pull-up settings")
    _add_input(p)
    _add_circuit(p)
    p.add_argument("--settings", type=_ints)
    p.add_argument("--measurements",
                   help="'reference' or a JSON file; estimate r_ipu and r_off first")

    p = sub.add_parser("power-sweep", help="first-order power versus pull-up setting")
    _add_circuit(p)
    p.add_argument("--settings", type=_ints)
    p.add_argument("--duty0", type=_floats)
    p.add_argument("--f-switch", dest="f_switch", type=_floats)

    p = sub.add_parser("fsm-trace", help="selection trace of the adaptation controller")
    p.add_argument("--registers", type=_ints)
    p.add_argument("--n-bits", dest="n_bits", type=int, default=8)
    p.add_argument("--stimulus", help="file of '<cycle> <scl_edge> <start>' lines")
    p.add_argument("--words", type=int, default=1)
    p.add_argument("--gap", type=int, default=1)
    p.add_argument("--clock", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("ingest", help="empirical PMF of a sample file")
    p.add_argument("path")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--header", action="store_true", help="skip the first line")

    p = sub.add_parser("run", help="execute a JSON scenario file")
    p.add_argument("scenario")

    for name, sp in sub.choices.items():
        sp.add_argument("--out", help="output prefix for .csv/.json (default: stdout summary only)")
    return parser


def _scenario_from_args(args) -> dict:
    opts = {k: v for k, v in vars(args).items() if k != "out"}
    if args.command == "run":
        path = Path(args.scenario)
        if not path.is_file():
            raise ValidationError(f"scenario file {args.scenario!r} not found")
        try:
            opts = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"scenario file is not valid JSON: {exc}") from None
        if not isinstance(opts, dict):
            raise ValidationError("scenario must be a JSON object")
        opts.setdefault("out", args.out)
    return opts


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        scenario = _scenario_from_args(args)
        out = scenario.pop("out", None) or args.out
        bundle = run_scenario(scenario)
        if out:
            for p in emit_curves(bundle, out):
                print(p)
        else:
            print(json.dumps(_jsonable({"results": bundle.results,
                                        "series": sorted(bundle.curves)}), sort_keys=True))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
