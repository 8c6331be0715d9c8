"""Command-line front end.

Configuration is a flat ``key=value`` file (``#`` starts a comment) and/or
command-line flags; flags win.  Every run writes ``<out>.csv`` and
``<out>.json``.  Exit codes: 1 usage, 2 numeric, 3 resonance, 4 I/O.
"""

import argparse
import dataclasses
import math
import os
import sys
from dataclasses import dataclass

from . import __version__
from .dynamics import (
    DEFAULT_TAU,
    MODELS,
    closed_form_trajectory,
    integrate_exact,
    integrate_first_order,
    integrate_second_order,
    time_averaged_S,
)
from .effective import find_rho2_zeros, rho_coefficients
from .errors import ResonanceError, TrimerError, UsageError
from .floquet import find_paired_crossings
from .model import FOCK_LABELS, ModelParams
from .scans import (
    Axis,
    ScanSpec,
    dump_json,
    fmt,
    scan_quasienergies,
    scan_rho2_surface,
    scan_S,
    write_scan_csv,
    write_text,
)

SUBCOMMANDS = ("simulate", "scan-s", "scan-rho2", "floquet-sweep", "analytic-compare", "find-crossings")
PARAM_KEYS = ("J", "U0", "u0-over-omega", "eps", "eps-over-omega", "omega")
# config key -> RunConfig attribute
KEYS = {
    "subcommand": "subcommand",
    "J": "J",
    "U0": "U0",
    "u0-over-omega": "U0_over_omega",
    "eps": "eps",
    "eps-over-omega": "eps_over_omega",
    "omega": "omega",
    "initial": "initial",
    "model": "model",
    "method": "method",
    "t-end": "t_end",
    "tau": "tau",
    "tol": "tol",
    "out": "out",
    "workers": "workers",
    "analytic": "analytic",
}
_ALIASES = {k.lower().replace("_", "-"): k for k in KEYS}
DEFAULT_CROSSING_RANGE = Axis("eps_over_omega", 0.0, 8.0, 0.005)


@dataclass(frozen=True)
class RunConfig:
    """Resolved run settings; physical parameters are floats or swept Axis ranges."""

    subcommand: str
    J: object = None
    U0: object = None
    U0_over_omega: object = None
    eps: object = None
    eps_over_omega: object = None
    omega: object = None
    initial: str = "020"
    model: str = "exact"
    method: str = "floquet"
    t_end: float = None
    tau: float = DEFAULT_TAU
    tol: float = 1e-10
    out: str = "trimer-out"
    workers: int = 1
    analytic: bool = False

    def swept(self):
        return {f.name: getattr(self, f.name) for f in _param_fields() if isinstance(getattr(self, f.name), Axis)}

    def fixed(self):
        return {
            f.name: getattr(self, f.name)
            for f in _param_fields()
            if getattr(self, f.name) is not None and not isinstance(getattr(self, f.name), Axis)
        }

    def model_params(self):
        f = self.fixed()
        _require(self, "J", "omega")
        return ModelParams.from_ratios(
            f["J"],
            f["omega"],
            U0=f.get("U0"),
            U0_over_omega=f.get("U0_over_omega"),
            eps=f.get("eps"),
            eps_over_omega=f.get("eps_over_omega"),
        )


def _param_fields():
    return [f for f in dataclasses.fields(RunConfig) if f.name in ("J", "U0", "U0_over_omega", "eps", "eps_over_omega", "omega")]


def _require(config, *attrs):
    inverse = {v: k for k, v in KEYS.items()}
    missing = [inverse[a] for a in attrs if getattr(config, a) is None]
    if missing:
        raise UsageError(f"{config.subcommand}: missing required key(s): {', '.join(missing)}")


def _number(key, text, kind=float):
    try:
        value = kind(text)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: malformed number {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise UsageError(f"{key}: value must be finite, got {text!r}")
    return value


def _boolean(key, text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{key}: expected true/false, got {text!r}")


def canonical_key(raw):
    key = _ALIASES.get(raw.strip().lower().replace("_", "-"))
    if key is None:
        raise UsageError(f"unknown config key {raw.strip()!r}")
    return key


def read_config_text(text):
    """Parse flat ``key=value`` lines into a dict of canonical keys to raw strings."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value, got {line!r}")
        raw, value = line.split("=", 1)
        values[canonical_key(raw)] = value.strip()
    return values


def config_from_mapping(values):
    """Validate raw string values (canonical keys) into a RunConfig."""
    unknown = [k for k in values if k not in KEYS]
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    sub = values.get("subcommand")
    if sub is None:
        raise UsageError("missing required key: subcommand")
    if sub not in SUBCOMMANDS:
        raise UsageError(f"subcommand: unknown subcommand {sub!r}; expected one of {', '.join(SUBCOMMANDS)}")
    kwargs = {"subcommand": sub}
    for key, text in values.items():
        attr = KEYS[key]
        if key in PARAM_KEYS:
            if ":" in str(text):
                try:
                    kwargs[attr] = Axis.parse(attr, text)
                except TrimerError as exc:
                    raise UsageError(f"{key}: {exc}") from None
            else:
                kwargs[attr] = _number(key, text)
        elif key in ("t-end", "tau", "tol"):
            kwargs[attr] = _number(key, text)
        elif key == "workers":
            kwargs[attr] = _number(key, text, int)
        elif key == "analytic":
            kwargs[attr] = _boolean(key, text)
        elif key != "subcommand":
            kwargs[attr] = str(text)
    config = RunConfig(**kwargs)
    validate(config)
    return config


def validate(config):
    if config.initial not in FOCK_LABELS:
        raise UsageError(f"initial: unknown state {config.initial!r}; expected one of {', '.join(FOCK_LABELS)}")
    if config.model not in MODELS:
        raise UsageError(f"model: unknown model {config.model!r}; expected one of {', '.join(MODELS)}")
    if config.method not in ("floquet", "direct"):
        raise UsageError(f"method: expected floquet or direct, got {config.method!r}")
    if config.workers < 1:
        raise UsageError(f"workers: must be at least 1, got {config.workers}")
    if not 1e-12 <= config.tol <= 1e-4:
        raise UsageError(f"tol: must lie in [1e-12, 1e-4], got {config.tol!r}")
    if not config.tau > 0:
        raise UsageError(f"tau: must be positive, got {config.tau!r}")
    for a, b in (("U0", "U0_over_omega"), ("eps", "eps_over_omega")):
        if getattr(config, a) is not None and getattr(config, b) is not None:
            raise UsageError(f"give only one of {a} and {b.replace('_', '-').lower()}")
    swept = config.swept()
    expected = _expected_axes(config)
    if expected is not None and set(swept) not in expected:
        names = " or ".join("+".join(sorted(s)) or "none" for s in expected)
        raise UsageError(f"{config.subcommand}: swept keys must be {names}, got {'+'.join(sorted(swept)) or 'none'}")
    sub = config.subcommand
    if sub == "simulate":
        _require(config, "t_end")
        if not config.t_end > 0:
            raise UsageError(f"t-end: must be positive, got {config.t_end!r}")
    if sub in ("simulate", "scan-s", "floquet-sweep", "analytic-compare"):
        _check_params(config)
    if sub == "find-crossings":
        _require(config, "U0_over_omega")


def _expected_axes(config):
    sub = config.subcommand
    if sub == "simulate":
        return [set()]
    if sub == "scan-s":
        return [{"U0"}, {"omega"}]
    if sub == "scan-rho2":
        return [{"U0_over_omega", "eps_over_omega"}]
    if sub in ("floquet-sweep", "analytic-compare"):
        return [{"eps_over_omega"}]
    return [set(), {"eps_over_omega"}]


def _check_params(config):
    """Run the ModelParams invariants on one representative point."""
    probe = {}
    for name, value in dataclasses.asdict(config).items():
        if name in config.swept():
            probe[name] = getattr(config, name).start
    point = dataclasses.replace(config, **probe)
    _require(point, "J", "omega")
    if point.U0 is None and point.U0_over_omega is None:
        raise UsageError(f"{config.subcommand}: missing required key: U0 or u0-over-omega")
    if point.eps is None and point.eps_over_omega is None:
        raise UsageError(f"{config.subcommand}: missing required key: eps or eps-over-omega")
    try:
        point.model_params()
    except TrimerError as exc:
        raise UsageError(str(exc)) from None


def _format_value(value):
    if isinstance(value, Axis):
        return value.text()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_items(config):
    """(key, text) pairs in a fixed order, skipping unset values."""
    items = []
    for key, attr in KEYS.items():
        value = getattr(config, attr)
        if value is not None:
            items.append((key, _format_value(value)))
    return items


def emit_config(config):
    return "".join(f"{k}={v}\n" for k, v in config_items(config))


def parse_config(text=None, argv=None):
    """Build a RunConfig from config text and/or command-line arguments (flags win)."""
    values = read_config_text(text) if text else {}
    if argv is not None:
        args = build_parser().parse_args(argv)
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    values.update(read_config_text(fh.read()))
            except OSError as exc:
                exc.trimer_key = "config"
                raise
        for key, attr in KEYS.items():
            flag_value = getattr(args, attr, None)
            if flag_value is not None:
                values[key] = flag_value
    return config_from_mapping(values)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="trimer", description="Two bosons in an ac-driven triple well.")
    parser.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key=value file; flags override its values")
    parser.add_argument("--J", dest="J")
    parser.add_argument("--U0", dest="U0")
    parser.add_argument("--u0-over-omega", "--U0-over-omega", dest="U0_over_omega")
    parser.add_argument("--eps", dest="eps")
    parser.add_argument("--eps-over-omega", dest="eps_over_omega")
    parser.add_argument("--omega", dest="omega")
    parser.add_argument("--initial", help="Fock label: " + ", ".join(FOCK_LABELS))
    parser.add_argument("--model", help=", ".join(MODELS))
    parser.add_argument("--method", help="exact solver: floquet (default) or direct")
    parser.add_argument("--t-end", dest="t_end")
    parser.add_argument("--tau")
    parser.add_argument("--tol")
    parser.add_argument("--out", help="output stem; writes <out>.csv and <out>.json")
    parser.add_argument("--workers")
    parser.add_argument("--analytic", action="store_const", const="true")
    parser.add_argument("--version", action="version", version=f"trimer {__version__}")
    return parser


# ----------------------------------------------------------------------- run


def _check_writable(out):
    directory = os.path.dirname(os.path.abspath(out))
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"output directory {directory} does not exist")
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"output directory {directory} is not writable")


def _config_json(config):
    return dict(config_items(config))


def _write_summary(config, results, statuses):
    payload = {"config": _config_json(config), "results": results, "statuses": statuses, "version": __version__}
    write_text(config.out + ".json", dump_json(payload))


def _simulate(config):
    params = config.model_params()
    if config.model == "exact":
        traj = integrate_exact(params, config.initial, config.t_end, tol=config.tol, method=config.method)
    elif config.model == "first-order":
        traj = integrate_first_order(params, config.initial, config.t_end, tol=config.tol)
    elif config.model == "second-order":
        traj = integrate_second_order(params, rho_coefficients(params), config.initial, config.t_end, tol=config.tol)
    else:
        traj = closed_form_trajectory(params, rho_coefficients(params), config.initial, config.t_end)
    lines = ["t,P1,P2,P3,P4,P5,P6"]
    lines += [",".join(fmt(v) for v in (t, *p)) for t, p in zip(traj.t, traj.P)]
    write_text(config.out + ".csv", "\n".join(lines) + "\n")
    labels = [f"P{k}" for k in range(1, 7)]
    results = {
        "samples": len(traj),
        "t_last": float(traj.t[-1]),
        "norm_error": traj.norm_error,
        "max": dict(zip(labels, traj.P.max(axis=0))),
        "final": dict(zip(labels, traj.P[-1])),
    }
    if traj.t[-1] >= config.tau:
        results["S_avg"] = time_averaged_S(traj, config.tau)
    try:
        coeffs = rho_coefficients(params)
        results["coefficients"] = dataclasses.asdict(coeffs)
    except ResonanceError:
        results["coefficients"] = None
    _write_summary(config, results, {"ok": 1})


def _scan_spec(config, quantity):
    axes = tuple(
        dataclasses.replace(axis, name=name) for name, axis in sorted(config.swept().items(), key=lambda kv: _axis_rank(kv[0]))
    )
    return ScanSpec(quantity, axes, config.fixed(), initial=config.initial, tau=config.tau, tol=config.tol)


def _axis_rank(name):
    return {"U0_over_omega": 0, "U0": 1, "omega": 2, "eps_over_omega": 3}.get(name, 9)


def _finish_scan(config, result):
    write_scan_csv(result, config.out + ".csv")
    statuses = {}
    for s in result.status:
        statuses[s] = statuses.get(s, 0) + 1
    _write_summary(config, result.summary, statuses)


def _find_crossings(config):
    r = config.U0_over_omega
    axis = config.eps_over_omega if isinstance(config.eps_over_omega, Axis) else DEFAULT_CROSSING_RANGE
    zeros = find_rho2_zeros(r, axis.start, axis.stop, min(axis.step, 0.01))
    crossings = find_paired_crossings(r, axis.start, axis.stop, axis.step)
    rows = [(x, "rho2_zero") for x in zeros] + [(x, "paired_crossing") for x in crossings]
    rows.sort()
    lines = [f"# quantity=crossings; fixed=U0_over_omega={r!r}; tau={config.tau!r}", "eps_over_omega,kind"]
    lines += [f"{fmt(x)},{kind}" for x, kind in rows]
    write_text(config.out + ".csv", "\n".join(lines) + "\n")
    _write_summary(config, {"rho2_zeros": zeros, "paired_crossings": crossings}, {"ok": 1})


def run(config):
    """Execute a validated config; returns the process exit status."""
    try:
        _check_writable(config.out)
        sub = config.subcommand
        if sub == "simulate":
            _simulate(config)
        elif sub == "scan-s":
            quantity = "S_vs_U0" if "U0" in config.swept() else "S_vs_omega"
            _finish_scan(config, scan_S(_scan_spec(config, quantity), workers=config.workers))
        elif sub == "scan-rho2":
            _finish_scan(config, scan_rho2_surface(_scan_spec(config, "rho2_surface"), workers=config.workers))
        elif sub in ("floquet-sweep", "analytic-compare"):
            analytic = config.analytic or sub == "analytic-compare"
            result = scan_quasienergies(_scan_spec(config, "quasienergy_sweep"), workers=config.workers, analytic=analytic)
            _finish_scan(config, result)
        else:
            _find_crossings(config)
    except TrimerError as exc:
        return _fail(exc, exc.exit_code)
    except OSError as exc:
        return _fail(exc, 4)
    return 0


def _fail(exc, code):
    print(f"trimer: error: {exc}", file=sys.stderr)
    return code


def main(argv=None):
    try:
        config = parse_config(argv=sys.argv[1:] if argv is None else argv)
    except TrimerError as exc:
        return _fail(exc, 1)
    except OSError as exc:
        return _fail(exc, 4)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
