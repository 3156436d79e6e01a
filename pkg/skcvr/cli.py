"""Command-line front end: every subcommand prints a table of rows as CSV or JSON.

Settings are resolved as built-in defaults, then the JSON file given by --config, then explicit
flags. Keys of the config file are the flag names with dashes replaced by underscores.
"""
import argparse
import json
import logging
import math
import sys
import warnings
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import skcvr
from skcvr.bounds import (
    DEFAULT_ATTENUATION,
    distance_from_transmissivity,
    nlink_bound,
    plob,
    transmissivity,
    unassisted_capacity,
)
from skcvr.curve import RateCurve, format_number
from skcvr.errors import (
    InvalidParameterError,
    InvalidStateError,
    NumericalFailure,
    TruncationWarning,
)
from skcvr.fock.channels import DeviceImperfections
from skcvr.fock.state import FockArray, coherent_amplitudes
from skcvr.gaussian import (
    Measurement,
    holevo_bound,
    min_leakage_pipeline,
    swap_tmsv,
    swap_tmsv_pipeline,
)
from skcvr.purification import (
    SingleShotPurification,
    enumerate_chains,
    heralded_rci,
    iterative_rate,
    linear_optics_probability,
    linear_optics_rate,
    single_shot_rate,
)
from skcvr.repeater.config import ChainConfig, PolarGrid
from skcvr.repeater.interface import RateProtocol, SweepConfig, sweep_rate_vs_distance
from skcvr.repeater.protocols import (
    CVQuantumRepeater,
    DirectTransmission,
    MemorylessRepeater,
    ThreeRepeaterChain,
)
from skcvr.repeater.waiting import simulate_steps, z_steps
from skcvr.scissors import ScissorSpec, nscissor_transform, scissor_circuit, scissor_fidelity

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_NUMERICAL_FAILURE = 3

Row = Dict[str, Any]

COMMON_DEFAULTS: Dict[str, Any] = {
    "out": "csv",
    "output": None,
    "attenuation": DEFAULT_ATTENUATION,
    "log_level": "WARNING",
    "n_process": 1,
    "progress": False,
    "seed": 0,
    "distance": None,
    "distance_range": None,
}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "bounds": {"eta": None, "links": 1},
    "scissor": {"order": 1, "gain": [0.5, 1.0, 2.0], "coherent": 0.1},
    "repeater": {
        "layout": "asymmetric",
        "chi": 0.4,
        "transmissivity_b": 2.0 / 3.0,
        "amplitude_gain": 0.21,
        "beta": 0.95,
        "excess_noise": 0.0,
        "source_efficiency": 1.0,
        "detector_efficiency": 1.0,
        "dark_count": 0.0,
        "cutoff": None,
        "three_repeater": False,
        "transmissivity_higher": 0.5,
        "direct": False,
        "measurement": "heterodyne",
    },
    "cvqr": {
        "links": 2,
        "chi": 0.3,
        "gain": 2.0,
        "cutoff": 10,
        "corrected_cutoff": 6,
        "gamma_max": None,
        "upper_gamma_max": 0.5,
        "radial_nodes": 32,
        "angular_nodes": 16,
        "beta": 0.95,
        "measurement": "homodyne",
    },
    "purify": {
        "mode": "optimal",
        "k": 1,
        "m": 2,
        "eta": None,
        "round_cap": None,
        "k_max": 60,
        "m_max": 10,
        "links": 1,
    },
    "minleak": {"mu": 2.0, "r": 0.3, "transmissivity": 0.7, "xi": 0.01},
    "selftest": {"trials": 200000},
}

# columns of the subcommands whose header does not depend on the options
COLUMNS: Dict[str, List[str]] = {
    "bounds": ["distance", "eta", "links", "rate", "plob", "unassisted"],
    "scissor": ["order", "gain", "coherent", "fidelity", "probability"],
    "purify": ["mode", "k", "m", "eta", "rate", "probability", "ratio"],
    "minleak": ["quantity", "value", "closed_form"],
    "selftest": ["check", "value", "reference", "passed"],
}


class ConfigError(InvalidParameterError):
    pass


def _add_common(parser: argparse.ArgumentParser, sweep: bool) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--config", metavar="PATH", help="JSON file with default settings")
    parser.add_argument("--out", choices=["csv", "json"], default=s, help="table format")
    parser.add_argument("--output", metavar="PATH", default=s, help="write to PATH, not stdout")
    parser.add_argument("--attenuation", type=float, default=s, help="fibre loss in dB/km")
    parser.add_argument("--log-level", default=s, help="logging level name")
    parser.add_argument("--seed", type=int, default=s, help="seed of Monte-Carlo checks")
    if sweep:
        parser.add_argument("--n-process", type=int, default=s, help="worker processes")
        parser.add_argument("--progress", action="store_true", default=s, help="progress bar")
        grid = parser.add_mutually_exclusive_group()
        grid.add_argument("--distance", type=float, nargs="+", default=s, help="km")
        grid.add_argument(
            "--distance-range",
            type=float,
            nargs=3,
            metavar=("START", "STOP", "STEP"),
            default=s,
            help="inclusive grid in km",
        )


def build_parser() -> argparse.ArgumentParser:
    s = argparse.SUPPRESS
    parser = argparse.ArgumentParser(
        prog="skcvr", description="rates of CV repeaters, scissors and purification"
    )
    parser.add_argument("--version", action="version", version=skcvr.__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="PLOB and N-link bound table")
    _add_common(p, sweep=True)
    p.add_argument("--eta", type=float, nargs="+", default=s, help="total transmissivities")
    p.add_argument("--links", type=int, default=s)

    p = sub.add_parser("scissor", help="fidelity and probability of an n-scissor vs gain")
    _add_common(p, sweep=False)
    p.add_argument("--order", type=int, default=s)
    p.add_argument("--gain", type=float, nargs="+", default=s)
    p.add_argument("--coherent", type=float, default=s, help="amplitude of the input")

    p = sub.add_parser("repeater", help="memoryless repeater key rate vs distance")
    _add_common(p, sweep=True)
    p.add_argument("--layout", choices=["asymmetric", "symmetric"], default=s)
    for name in ("chi", "transmissivity-b", "amplitude-gain", "beta", "excess-noise"):
        p.add_argument("--" + name, type=float, default=s)
    for name in ("source-efficiency", "detector-efficiency", "dark-count"):
        p.add_argument("--" + name, type=float, default=s)
    p.add_argument("--transmissivity-higher", type=float, default=s)
    p.add_argument("--cutoff", type=int, default=s, help="evaluate in Fock space")
    p.add_argument("--measurement", choices=["homodyne", "heterodyne"], default=s)
    which = p.add_mutually_exclusive_group()
    which.add_argument("--three-repeater", action="store_true", default=s)
    which.add_argument("--direct", action="store_true", default=s, help="no repeater baseline")

    p = sub.add_parser("cvqr", help="nested CV-QR chain, lower and upper bound")
    _add_common(p, sweep=True)
    p.add_argument("--links", type=int, default=s)
    for name in ("chi", "gain", "upper-gamma-max", "beta"):
        p.add_argument("--" + name, type=float, default=s)
    for name in ("cutoff", "corrected-cutoff", "radial-nodes", "angular-nodes"):
        p.add_argument("--" + name, type=int, default=s)
    p.add_argument("--gamma-max", type=float, nargs="+", default=s, help="radius per level")
    p.add_argument("--measurement", choices=["homodyne", "heterodyne"], default=s)

    p = sub.add_parser("purify", help="purification rates and ratio to the bound")
    _add_common(p, sweep=True)
    mode = p.add_mutually_exclusive_group()
    for flag in ("single-shot", "iterative", "linear-optics"):
        mode.add_argument(
            "--" + flag, dest="mode", action="store_const", const=flag, default=s
        )
    p.add_argument("--k", type=int, default=s)
    p.add_argument("--m", type=int, default=s)
    p.add_argument("--eta", type=float, nargs="+", default=s)
    p.add_argument("--round-cap", type=int, default=s)
    p.add_argument("--k-max", type=int, default=s)
    p.add_argument("--m-max", type=int, default=s)
    p.add_argument("--links", type=int, default=s)

    p = sub.add_parser("minleak", help="minimum-leakage covariance and Holevo bound")
    _add_common(p, sweep=False)
    for name in ("mu", "r", "transmissivity", "xi"):
        p.add_argument("--" + name, type=float, default=s)

    p = sub.add_parser("selftest", help="quick oracle checks")
    _add_common(p, sweep=False)
    p.add_argument("--trials", type=int, default=s)
    return parser


def load_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError("cannot read config {}: {}".format(path, e))
    if not isinstance(data, dict):
        raise ConfigError("config {} must hold a JSON object".format(path))
    return data


def resolve_settings(args: argparse.Namespace) -> Dict[str, Any]:
    command = args.command
    settings = dict(COMMON_DEFAULTS)
    settings.update(DEFAULTS[command])
    explicit = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.config is not None:
        from_file = load_config(args.config)
        unknown = sorted(set(from_file) - set(settings))
        if unknown:
            raise ConfigError("unknown keys for {}: {}".format(command, ", ".join(unknown)))
        settings.update(from_file)
    settings.update(explicit)
    return settings


def distance_grid(settings: Dict[str, Any]) -> List[float]:
    if settings["distance"] is not None:
        grid = [float(d) for d in settings["distance"]]
    elif settings["distance_range"] is not None:
        start, stop, step = (float(v) for v in settings["distance_range"])
        if step <= 0.0 or stop < start:
            raise InvalidParameterError("distance range needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = [start + i * step for i in range(n)]
    else:
        raise InvalidParameterError("give --distance or --distance-range")
    if len(grid) == 0:
        raise InvalidParameterError("the distance grid is empty")
    return grid


def _sweep(protocol: RateProtocol, settings: Dict[str, Any]) -> List[Row]:
    config = SweepConfig(n_process=settings["n_process"], progress=settings["progress"])
    curve = sweep_rate_vs_distance(protocol, distance_grid(settings), config)
    return _distance_rows(curve)


def _distance_rows(curve: RateCurve) -> List[Row]:
    return [{"distance": row.pop("parameter"), **row} for row in curve.rows()]


def _measurement(name: str) -> Measurement:
    try:
        return Measurement[name.upper()]
    except KeyError:
        raise InvalidParameterError("unknown measurement {}".format(name))


def command_bounds(settings: Dict[str, Any]) -> List[Row]:
    links = settings["links"]
    if settings["eta"] is not None:
        etas = [float(e) for e in settings["eta"]]
        distances = [
            float(distance_from_transmissivity(e, settings["attenuation"])) for e in etas
        ]
    else:
        distances = distance_grid(settings)
        etas = [float(transmissivity(d, settings["attenuation"])) for d in distances]
    rows = []
    for d, eta in zip(distances, etas):
        rows.append(
            {
                "distance": d,
                "eta": eta,
                "links": links,
                "rate": float(nlink_bound(eta, links)),
                "plob": float(plob(eta)),
                "unassisted": float(unassisted_capacity(eta)),
            }
        )
    return rows


def command_scissor(settings: Dict[str, Any]) -> List[Row]:
    rows = []
    for gain in settings["gain"]:
        spec = ScissorSpec(settings["order"], gain)
        fid, prob = scissor_fidelity(settings["coherent"], spec)
        rows.append(
            {
                "order": spec.order,
                "gain": float(gain),
                "coherent": float(settings["coherent"]),
                "fidelity": fid,
                "probability": prob,
            }
        )
    return rows


def _imperfections(settings: Dict[str, Any]) -> DeviceImperfections:
    return DeviceImperfections(
        source_efficiency=settings["source_efficiency"],
        detector_efficiency=settings["detector_efficiency"],
        dark_count_probability=settings["dark_count"],
    )


def command_repeater(settings: Dict[str, Any]) -> List[Row]:
    protocol: RateProtocol
    if settings["direct"]:
        protocol = DirectTransmission(
            beta=settings["beta"],
            excess_noise=settings["excess_noise"],
            measurement=_measurement(settings["measurement"]),
            attenuation=settings["attenuation"],
        )
    else:
        common = dict(
            layout=settings["layout"],
            chi=settings["chi"],
            transmissivity_b=settings["transmissivity_b"],
            amplitude_gain=settings["amplitude_gain"],
            beta=settings["beta"],
            excess_noise=settings["excess_noise"],
            imperfections=_imperfections(settings),
            cutoff=settings["cutoff"],
            attenuation=settings["attenuation"],
        )
        if settings["three_repeater"]:
            protocol = ThreeRepeaterChain(
                transmissivity_higher=settings["transmissivity_higher"], **common
            )
        else:
            protocol = MemorylessRepeater(**common)
    return _sweep(protocol, settings)


def command_cvqr(settings: Dict[str, Any]) -> List[Row]:
    gamma_max = settings["gamma_max"]
    chain = ChainConfig(
        n_links=settings["links"],
        chi=settings["chi"],
        gain=settings["gain"],
        cutoff=settings["cutoff"],
        corrected_cutoff=settings["corrected_cutoff"],
        gamma_max=None if gamma_max is None else [float(g) for g in gamma_max],
        upper_gamma_max=settings["upper_gamma_max"],
        grid=PolarGrid(settings["radial_nodes"], settings["angular_nodes"]),
        attenuation=settings["attenuation"],
    )
    protocol = CVQuantumRepeater(chain, settings["beta"], _measurement(settings["measurement"]))
    return _sweep(protocol, settings)


def _purify_point(mode: str, k: int, m: int, eta: float, round_cap: Optional[int]) -> Row:
    if not 0.0 < eta < 1.0:
        raise InvalidParameterError("purification ratios need 0 < eta < 1, got {}".format(eta))
    if mode == "single-shot":
        rate = single_shot_rate(k, m, eta)
        prob = eta**k
    elif mode == "iterative":
        res = iterative_rate(k, m, eta, round_cap)
        rate, prob = res.rate, res.success_probability
    else:
        rate = linear_optics_rate(k, m, eta)
        prob = linear_optics_probability(k, m, eta)
    return {
        "mode": mode,
        "k": k,
        "m": m,
        "eta": eta,
        "rate": rate,
        "probability": prob,
        "ratio": rate / float(plob(eta)),
    }


def command_purify(settings: Dict[str, Any]) -> List[Row]:
    mode = settings["mode"]
    if mode == "optimal":
        protocol = SingleShotPurification(
            k_max=settings["k_max"],
            m_max=settings["m_max"],
            links=settings["links"],
            attenuation=settings["attenuation"],
        )
        return _sweep(protocol, settings)
    if mode not in ("single-shot", "iterative", "linear-optics"):
        raise InvalidParameterError("unknown purification mode {}".format(mode))
    if settings["eta"] is not None:
        etas = [float(e) for e in settings["eta"]]
    else:
        etas = [float(transmissivity(d, settings["attenuation"])) for d in distance_grid(settings)]
    k, m = settings["k"], settings["m"]
    return [_purify_point(mode, k, m, eta, settings["round_cap"]) for eta in etas]


def command_minleak(settings: Dict[str, Any]) -> List[Row]:
    res = min_leakage_pipeline(
        settings["mu"], settings["r"], settings["transmissivity"], settings["xi"]
    )
    rows = []
    labels = ["{}_{}".format(label, q) for label in res.state.mode_labels for q in ("q", "p")]
    n = res.state.cov.shape[0]
    for i in range(n):
        for j in range(i, n):
            rows.append(
                {
                    "quantity": "cov[{},{}]".format(labels[i], labels[j]),
                    "value": float(res.state.cov[i, j]),
                    "closed_form": float(res.closed_form.cov[i, j]),
                }
            )
    closed_chi = holevo_bound(res.closed_form, 2, Measurement.HOMODYNE)
    rows.append({"quantity": "holevo", "value": res.chi_eb, "closed_form": closed_chi})
    return rows


def _check(name: str, value: float, reference: float, tolerance: float) -> Row:
    passed = abs(value - reference) <= tolerance * max(1.0, abs(reference))
    return {"check": name, "value": value, "reference": reference, "passed": passed}


def _selftest_scissor() -> float:
    spec = ScissorSpec(1, 1.0)
    c = coherent_amplitudes(0.1, 6)
    _, circuit_prob = scissor_circuit(FockArray(c), 0, spec)
    return abs(circuit_prob - nscissor_transform(c, spec).norm2)


def _selftest_chains() -> float:
    k1, m, eta = 2, 3, 0.7
    total = sum(c.probability(m, eta) * c.entanglement(m) for c in enumerate_chains(k1, m)) / m
    return abs(total - iterative_rate(k1, m, eta).rate)


def command_selftest(settings: Dict[str, Any]) -> List[Row]:
    trials, seed = settings["trials"], settings["seed"]
    ml = min_leakage_pipeline(2.0, 0.3, 0.7, 0.01)
    swapped = swap_tmsv_pipeline(3.0)
    return [
        _check("z_steps(1, 0.5)", z_steps(1, 0.5), 8.0 / 3.0, 1e-12),
        _check("simulated z_steps(1, 0.5)", simulate_steps(1, 0.5, trials, seed), 8.0 / 3.0, 1e-2),
        _check("swap pipeline nu=3", float(swapped.cov[0, 0]), swap_tmsv(3.0), 1e-12),
        _check(
            "minimum leakage closed form",
            float(np.max(np.abs(ml.state.cov - ml.closed_form.cov))),
            0.0,
            1e-10,
        ),
        _check("scissor circuit probability", _selftest_scissor(), 0.0, 1e-10),
        _check("linear optics P(2, 2)", linear_optics_probability(2, 2, 0.5), 0.25 / 9.0, 1e-12),
        _check("heralded rci (2, 1, 2)", heralded_rci(2, 1, 2), math.log2(1.5), 1e-12),
        _check("iterative rate vs chains", _selftest_chains(), 0.0, 1e-12),
        _check("unassisted capacity(0.5)", float(unassisted_capacity(0.5)), 0.0, 0.0),
    ]


COMMANDS: Dict[str, Callable[[Dict[str, Any]], List[Row]]] = {
    "bounds": command_bounds,
    "scissor": command_scissor,
    "repeater": command_repeater,
    "cvqr": command_cvqr,
    "purify": command_purify,
    "minleak": command_minleak,
    "selftest": command_selftest,
}


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ";".join(format_number(v) for v in value)
    return format_number(value)


def render_csv(rows: List[Row], columns: Optional[List[str]] = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(row.get(key)) for key in columns))
    return "\n".join(lines) + "\n"


def render_json(rows: List[Row], meta: Dict[str, Any]) -> str:
    return json.dumps({"rows": _plain(rows), "meta": _plain(meta)}, indent=2) + "\n"


def execute(command: str, settings: Dict[str, Any]) -> Tuple[List[Row], List[str]]:
    """run a subcommand and collect the truncation warnings it raised"""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = COMMANDS[command](settings)
    messages = []
    for w in caught:
        if issubclass(w.category, TruncationWarning):
            messages.append(str(w.message))
        else:
            warnings.showwarning(w.message, w.category, w.filename, w.lineno)
    for message in messages:
        logger.warning(message)
    return rows, messages


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_INVALID_CONFIG

    try:
        settings = resolve_settings(args)
        logging.basicConfig(
            level=getattr(logging, str(settings["log_level"]).upper(), logging.WARNING),
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        if settings["out"] not in ("csv", "json"):
            raise ConfigError("output format must be csv or json, got {}".format(settings["out"]))
        rows, truncations = execute(args.command, settings)
    except NumericalFailure as e:
        sys.stderr.write("numerical failure: {}\n".format(e))
        return EXIT_NUMERICAL_FAILURE
    except (InvalidParameterError, InvalidStateError, TypeError) as e:
        sys.stderr.write("invalid configuration: {}\n".format(e))
        return EXIT_INVALID_CONFIG

    if settings["out"] == "json":
        meta = {
            "version": skcvr.__version__,
            "command": args.command,
            "config": settings,
            "truncation": truncations,
        }
        text = render_json(rows, meta)
    else:
        text = render_csv(rows, COLUMNS.get(args.command))
    _write(text, settings["output"])

    if args.command == "selftest" and not all(row["passed"] for row in rows):
        sys.stderr.write("selftest failed\n")
        return EXIT_NUMERICAL_FAILURE
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))
