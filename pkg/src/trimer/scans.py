"""Parameter sweeps producing plain data grids.

Grid points are evaluated independently (optionally in a process pool) and
always reported in row-major order over the axes, so the written files do
not depend on scheduling.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import __version__
from .dynamics import DEFAULT_TAU, integrate_exact, time_averaged_S
from .effective import RESONANCE_GUARD, default_truncation, rho_sums
from .errors import CoverageError, DomainError, ResonanceError, TrimerError
from .floquet import analytic_quasienergies, floquet_spectrum
from .model import ModelParams
from .specfun import bessel_j_orders

QUANTITIES = ("rho2_surface", "S_vs_U0", "S_vs_omega", "quasienergy_sweep")
RATIO_KEYS = {"U0_over_omega": "U0", "eps_over_omega": "eps"}


def fmt(value):
    """Twelve significant digits in scientific notation; ``nan`` for missing."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return format(float(value), ".11e")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError(f"axis {self.name}: step must be positive, got {self.step}")
        if self.stop < self.start:
            raise DomainError(f"axis {self.name}: stop {self.stop} is below start {self.start}")

    @classmethod
    def parse(cls, name, text):
        parts = str(text).split(":")
        if len(parts) != 3:
            raise DomainError(f"{name}: expected min:max:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise DomainError(f"{name}: malformed range {text!r}") from None
        return cls(name, start, stop, step)

    def values(self):
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return np.round(self.start + self.step * np.arange(count + 1), 12)

    def text(self):
        return f"{self.start!r}:{self.stop!r}:{self.step!r}"


@dataclass(frozen=True)
class ScanSpec:
    quantity: str
    axes: tuple
    fixed: dict = field(default_factory=dict)
    initial: str = "020"
    tau: float = DEFAULT_TAU
    tol: float = 1e-10

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise DomainError(f"unknown scan quantity {self.quantity!r}")
        if not self.axes:
            raise DomainError("a scan needs at least one axis")
        object.__setattr__(self, "axes", tuple(self.axes))

    def grid(self):
        """Row-major list of coordinate tuples."""
        mesh = np.meshgrid(*[a.values() for a in self.axes], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def metadata(self):
        fixed = ",".join(f"{k}={v!r}" for k, v in sorted(self.fixed.items()))
        return f"# quantity={self.quantity}; fixed={fixed}; tau={self.tau!r}"


@dataclass
class ScanResult:
    spec: ScanSpec
    coords: np.ndarray
    values: np.ndarray
    value_names: tuple
    status: tuple
    labels: list = None
    summary: dict = field(default_factory=dict)

    @property
    def axis_names(self):
        return tuple(a.name for a in self.spec.axes)

    def column(self, name):
        if name in self.axis_names:
            return self.coords[:, self.axis_names.index(name)]
        return self.values[:, self.value_names.index(name)]

    def ok(self):
        return np.array([s == "ok" for s in self.status])

    def header(self):
        if self.spec.quantity == "quasienergy_sweep":
            cols = list(self.axis_names) + [f"E{k}" for k in range(1, 7)] + [f"label{k}" for k in range(1, 7)]
            if len(self.value_names) > 6:
                cols += [f"A{k}" for k in range(1, 7)]
            return cols
        return list(self.axis_names) + list(self.value_names) + ["status"]

    def rows(self):
        for i in range(len(self.coords)):
            row = [fmt(c) for c in self.coords[i]]
            if self.spec.quantity == "quasienergy_sweep":
                row += [fmt(v) for v in self.values[i, :6]]
                row += list(self.labels[i]) if self.labels[i] is not None else ["failed"] * 6
                row += [fmt(v) for v in self.values[i, 6:]]
            else:
                row += [fmt(v) for v in self.values[i]] + [self.status[i]]
            yield row

    def to_csv(self):
        lines = [self.spec.metadata(), ",".join(self.header())]
        lines += [",".join(r) for r in self.rows()]
        return "\n".join(lines) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_scan_csv(result, path):
    write_text(path, result.to_csv())


def json_clean(obj):
    """Recursively turn numpy values into JSON-safe Python values (NaN -> None)."""
    if isinstance(obj, dict):
        return {str(k): json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dump_json(payload):
    return json.dumps(json_clean(payload), indent=2, sort_keys=True) + "\n"


def write_summary_json(result, path, config=None):
    payload = {
        "config": config if config is not None else spec_dict(result.spec),
        "results": result.summary,
        "statuses": status_counts(result.status),
        "version": __version__,
    }
    write_text(path, dump_json(payload))


def spec_dict(spec):
    return {
        "quantity": spec.quantity,
        "axes": [{"name": a.name, "range": a.text()} for a in spec.axes],
        "fixed": dict(spec.fixed),
        "initial": spec.initial,
        "tau": spec.tau,
        "tol": spec.tol,
    }


def status_counts(status):
    counts = {}
    for s in status:
        counts[s] = counts.get(s, 0) + 1
    return counts


def _map(fn, tasks, workers):
    if workers is None or workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def point_params(fixed, overrides):
    """Resolve a ModelParams from fixed values plus per-point axis values."""
    values = dict(fixed)
    values.update(overrides)
    for ratio, absolute in RATIO_KEYS.items():
        if ratio in overrides:
            values.pop(absolute, None)
        elif absolute in overrides:
            values.pop(ratio, None)
    missing = [k for k in ("J", "omega") if k not in values]
    if missing:
        raise DomainError(f"missing parameter(s): {', '.join(missing)}")
    return ModelParams.from_ratios(
        values["J"],
        values["omega"],
        U0=values.get("U0"),
        U0_over_omega=values.get("U0_over_omega"),
        eps=values.get("eps"),
        eps_over_omega=values.get("eps_over_omega"),
    )


def _is_resonant(ratio):
    return abs(ratio - round(ratio)) <= RESONANCE_GUARD


# ---------------------------------------------------------------- rho2 surface


def _rho2_column(task):
    x, ratios = task
    bessel = bessel_j_orders(default_truncation(x), x)
    out = []
    for r in ratios:
        if _is_resonant(r):
            out.append((math.nan, "skipped-resonance"))
            continue
        try:
            out.append((rho_sums(x, r, bessel=bessel)[1], "ok"))
        except ResonanceError:
            out.append((math.nan, "skipped-resonance"))
    return out


def scan_rho2_surface(spec, workers=1):
    """rho2 over a (U0/omega, eps/omega) grid; integer U0/omega is skipped."""
    names = [a.name for a in spec.axes]
    if sorted(names) != ["U0_over_omega", "eps_over_omega"]:
        raise DomainError(f"rho2 surface needs axes U0_over_omega and eps_over_omega, got {names}")
    grid = spec.grid()
    ix, ir = names.index("eps_over_omega"), names.index("U0_over_omega")
    xs = spec.axes[ix].values()
    rs = spec.axes[ir].values()
    columns = _map(_rho2_column, [(x, rs) for x in xs], workers)
    table = {(x, r): vr for x, col in zip(xs, columns) for r, vr in zip(rs, col)}
    values = np.empty((len(grid), 1))
    status = []
    for i, point in enumerate(grid):
        v, s = table[(point[ix], point[ir])]
        values[i, 0] = v
        status.append(s)
    result = ScanResult(spec, grid, values, ("rho2",), tuple(status))
    result.summary = _rho2_summary(result, rs, xs, ir, ix)
    return result


def _rho2_summary(result, rs, xs, ir, ix):
    ok = result.ok()
    vals = result.values[ok, 0]
    zeros = []
    for r in rs:
        sel = (result.coords[:, ir] == r) & ok
        x = result.coords[sel, ix]
        v = result.values[sel, 0]
        order = np.argsort(x)
        x, v = x[order], v[order]
        brackets = [
            float(x[k] - v[k] * (x[k + 1] - x[k]) / (v[k + 1] - v[k]))
            for k in range(len(x) - 1)
            if v[k] == 0 or v[k] * v[k + 1] < 0
        ]
        if brackets:
            zeros.append({"U0_over_omega": float(r), "eps_over_omega": brackets})
    return {
        "min": float(vals.min()) if len(vals) else None,
        "max": float(vals.max()) if len(vals) else None,
        "zeros": zeros,
    }


# ------------------------------------------------------------------- <S> scans


def _s_point(task):
    fixed, overrides, initial, tau, tol = task
    try:
        params = point_params(fixed, overrides)
        traj = integrate_exact(params, initial, tau, tol=tol)
        return time_averaged_S(traj, tau), "ok"
    except TrimerError:
        return math.nan, "failed"


def scan_S(spec, workers=1):
    """Time-averaged paired probability from the exact model at each grid point."""
    grid = spec.grid()
    names = [a.name for a in spec.axes]
    tasks = [(dict(spec.fixed), dict(zip(names, map(float, p))), spec.initial, spec.tau, spec.tol) for p in grid]
    out = _map(_s_point, tasks, workers)
    values = np.array([[v] for v, _ in out])
    result = ScanResult(spec, grid, values, ("S",), tuple(s for _, s in out))
    result.summary = _s_summary(result)
    return result


def find_dips(result, prominence=0.02):
    """Axis positions of local minima of <S> with at least ``prominence`` depth."""
    ok = result.ok()
    x = result.coords[ok, 0]
    s = result.values[ok, 0]
    peaks, _ = find_peaks(-s, prominence=prominence)
    return [float(x[k]) for k in peaks]


def _s_summary(result):
    ok = result.ok()
    if not ok.any():
        return {"dips": [], "min": None, "max": None}
    s = result.values[ok, 0]
    x = result.coords[ok, 0]
    return {
        "min": {"S": float(s.min()), "at": float(x[np.argmin(s)])},
        "max": {"S": float(s.max()), "at": float(x[np.argmax(s)])},
        "dips": find_dips(result),
    }


def estimate_half_width(result, m, omega=None, level=0.99):
    """Half-width of the <S> valley around ``U0 = m omega``.

    The valley edges are where <S> first climbs back above ``level`` walking
    outward from the valley floor (linear interpolation between grid points).
    """
    if result.axis_names[0] != "U0":
        raise DomainError("half-width needs an <S> scan over U0")
    if omega is None:
        omega = result.spec.fixed["omega"]
    ok = result.ok()
    x = result.coords[ok, 0]
    s = result.values[ok, 0]
    center = m * omega
    window = np.abs(x - center) <= omega / 2
    if not window.any():
        raise CoverageError(f"scan does not reach U0 = {center:g}")
    idx = np.flatnonzero(window)
    floor = idx[np.argmin(s[idx])]
    if s[floor] >= level:
        raise CoverageError(f"no valley below {level} around U0 = {center:g}")

    def edge(direction):
        k = floor
        while True:
            nxt = k + direction
            if nxt < idx[0] or nxt > idx[-1]:
                raise CoverageError(f"valley around U0 = {center:g} not bracketed by the scan")
            if s[nxt] >= level:
                frac = (level - s[k]) / (s[nxt] - s[k])
                return x[k] + frac * (x[nxt] - x[k])
            k = nxt

    return float(0.5 * (edge(+1) - edge(-1)))


# ------------------------------------------------------------ quasienergy sweep


def _quasi_point(task):
    fixed, overrides, tol, analytic = task
    nan6 = [math.nan] * 6
    try:
        params = point_params(fixed, overrides)
        record = floquet_spectrum(params, tol=min(tol, 1e-11))
    except TrimerError:
        return nan6 + (nan6 if analytic else []), None, "failed"
    values = list(record.energies)
    if analytic:
        try:
            values += list(analytic_quasienergies(params).sextuple())
        except ResonanceError:
            values += nan6
    return values, record.labels, "ok"


def scan_quasienergies(spec, workers=1, analytic=False):
    """Numerical quasienergies (sorted, labelled) along ``eps_over_omega``."""
    if [a.name for a in spec.axes] != ["eps_over_omega"]:
        raise DomainError("quasienergy sweep needs the single axis eps_over_omega")
    grid = spec.grid()
    tasks = [(dict(spec.fixed), {"eps_over_omega": float(p[0])}, spec.tol, analytic) for p in grid]
    out = _map(_quasi_point, tasks, workers)
    values = np.array([v for v, _, _ in out])
    names = tuple(f"E{k}" for k in range(1, 7))
    if analytic:
        names += tuple(f"A{k}" for k in range(1, 7))
    result = ScanResult(spec, grid, values, names, tuple(s for _, _, s in out), labels=[lab for _, lab, _ in out])
    result.summary = _quasi_summary(result, analytic)
    return result


def _quasi_summary(result, analytic):
    ok = result.ok()
    x = result.coords[ok, 0]
    e = result.values[ok, :6]
    if not len(x):
        return {}
    spread = e.max(axis=1) - e.min(axis=1)
    gaps = np.min(np.diff(e, axis=1), axis=1)
    summary = {
        "min_spread": {"value": float(spread.min()), "at": float(x[np.argmin(spread)])},
        "min_gap": {"value": float(gaps.min()), "at": float(x[np.argmin(gaps)])},
        "collapses": [float(x[k]) for k in find_peaks(-spread, prominence=1e-3)[0]],
    }
    if analytic:
        a = result.values[ok, 6:]
        dev = np.abs(a - e)
        finite = np.isfinite(dev).all(axis=1)
        summary["max_analytic_deviation"] = float(dev[finite].max()) if finite.any() else None
    return summary
