"""Scenario files: parsing, validation, dispatch to the solvers and output writing.

A scenario file is YAML.  It holds either one scenario mapping or a list
under ``scenarios``; a top-level ``description`` is kept for presets.  All
physical quantities are in units of ``omega``::

    description: fig3-desk  (alpha^2 = 100 instead of 5K)
    scenarios:
      - name: qrm_a100
        model: qrm
        params: {omega_t_pi: 50, alpha2: 100}
        horizon: 1500
        samples_per_pi_pulse: 16
        snapshot_pi_multiples: [1, 2]
        tolerances: {rtol: 1.0e-10, atol: 1.0e-12}

Accepted ``params`` keys: ``omega, Omega, Delta, G, omega_t_pi, g, alpha,
alpha2, n_qubits, delta_flag, gamma, gamma_phi, kappa, n_th, n_c``.
"""
from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__, kernels
from .analysis import photon_delta
from .core import FockWindow, ModelParams, QubitAmplitudes, TimeSeries
from .errors import ParameterError, RabiSimError
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL
from .qrm import default_sample_times

MODELS = ("srm_rwa", "srm_intermediate", "srm_semianalytic", "srm_exact", "srm_master", "qrm", "qrm_master")
SRM_MODELS = MODELS[:5]
QRM_MODELS = MODELS[5:]
PARAM_KEYS = ("omega", "Omega", "Delta", "G", "omega_t_pi", "g", "alpha", "alpha2", "n_qubits", "delta_flag",
              "gamma", "gamma_phi", "kappa", "n_th", "n_c")
SCENARIO_KEYS = ("name", "model", "params", "initial", "horizon", "samples_per_pi_pulse", "sample_step",
                 "snapshot_times", "snapshot_pi_multiples", "tolerances", "window", "cutoff")
TABLE_COLUMNS = {
    "qrm": ("p_e", "delta_n", "s_q", "s_q_linear", "s_f_linear", "p_alpha_survival", "n_mean", "norm", "leakage"),
    "qrm_master": ("p_e", "delta_n", "s_q", "s_q_linear", "s_f_linear", "p_alpha_survival", "n_mean", "norm",
                   "leakage"),
    "srm_master": ("p_e", "s_q", "s_q_linear", "trace"),
}


class ConfigError(RabiSimError):
    """Invalid scenario file; ``field`` names the offending entry, ``line`` its 1-based line if known."""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field = field
        self.line = line


@dataclass
class Scenario:
    name: str
    model: str
    params: ModelParams
    horizon: float
    samples_per_pi_pulse: int = 8
    sample_step: float | None = None
    initial: QubitAmplitudes = field(default_factory=QubitAmplitudes.ground)
    snapshot_times: tuple[float, ...] = ()
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    window: FockWindow | None = None
    cutoff: float | None = None
    raw: dict = field(default_factory=dict)

    def sample_times(self) -> np.ndarray:
        if self.sample_step is not None:
            count = int(math.floor(self.horizon / self.sample_step + 1e-9))
            grid = np.arange(count + 1) * self.sample_step
            if grid[-1] < self.horizon:
                grid = np.append(grid, self.horizon)
            return np.unique(np.concatenate([grid, [t for t in self.snapshot_times if t <= self.horizon]]))
        return default_sample_times(self.params, self.horizon, self.samples_per_pi_pulse, self.snapshot_times)

    def resolved(self) -> dict[str, Any]:
        """Every number needed to rerun the scenario."""
        return {
            "name": self.name, "model": self.model, "params": self.params.as_dict(),
            "horizon": self.horizon, "samples_per_pi_pulse": self.samples_per_pi_pulse,
            "sample_step": self.sample_step,
            "initial": [[self.initial.c_g.real, self.initial.c_g.imag], [self.initial.c_e.real, self.initial.c_e.imag]],
            "snapshot_times": list(self.snapshot_times), "rtol": self.rtol, "atol": self.atol,
            "window": None if self.window is None else [self.window.n1, self.window.n2],
            "cutoff": self.cutoff,
        }


def _number(value, name, positive=False, nonneg=False):
    # YAML 1.1 reads exponents without a decimal point ("1e-6") as strings
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"expected a number, got {value!r}", field=name) from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=name)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", field=name)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value}", field=name)
    if nonneg and value < 0:
        raise ConfigError(f"must be non-negative, got {value}", field=name)
    return value


def _params(raw: dict, model: str, prefix: str) -> ModelParams:
    if not isinstance(raw, dict):
        raise ConfigError("expected a mapping", field=prefix)
    unknown = sorted(set(raw) - set(PARAM_KEYS))
    if unknown:
        raise ConfigError(f"unknown parameter(s) {', '.join(unknown)}", field=f"{prefix}.{unknown[0]}")
    kw = {}
    for key in ("omega", "Omega", "Delta", "G", "g", "alpha", "gamma", "gamma_phi", "kappa", "n_th", "n_c"):
        if key in raw:
            kw[key] = _number(raw[key], f"{prefix}.{key}")
    for key in ("n_qubits", "delta_flag"):
        if key in raw:
            if not isinstance(raw[key], int) or isinstance(raw[key], bool):
                raise ConfigError(f"expected an integer, got {raw[key]!r}", field=f"{prefix}.{key}")
            kw[key] = raw[key]
    if "alpha2" in raw:
        if "alpha" in raw:
            raise ConfigError("give either alpha or alpha2, not both", field=f"{prefix}.alpha2")
        kw["alpha"] = math.sqrt(_number(raw["alpha2"], f"{prefix}.alpha2", nonneg=True))
    if "omega_t_pi" in raw:
        if "G" in raw:
            raise ConfigError("give either G or omega_t_pi, not both", field=f"{prefix}.omega_t_pi")
        omega = kw.get("omega", 1.0)
        kw["G"] = math.pi * omega / _number(raw["omega_t_pi"], f"{prefix}.omega_t_pi", positive=True)

    if model in QRM_MODELS:
        if "alpha" not in kw:
            raise ConfigError(f"missing alpha (or alpha2), required by model {model}", field=f"{prefix}.alpha")
        if "g" not in kw and "G" not in kw:
            raise ConfigError(f"missing coupling: give g, G or omega_t_pi for model {model}", field=f"{prefix}.g")
        if "g" not in kw and kw["alpha"] == 0:
            raise ConfigError("g cannot be inferred from G when alpha = 0", field=f"{prefix}.g")
    elif "G" not in kw:
        raise ConfigError(f"missing G (or omega_t_pi), required by model {model}", field=f"{prefix}.G")
    try:
        return ModelParams(**kw)
    except ParameterError as exc:
        raise ConfigError(str(exc), field=prefix) from exc


def _initial(raw, prefix) -> QubitAmplitudes:
    if raw is None or raw == "ground":
        return QubitAmplitudes.ground()
    if raw == "excited":
        return QubitAmplitudes.excited()
    if isinstance(raw, list) and len(raw) == 2:
        amps = []
        for i, entry in enumerate(raw):
            if isinstance(entry, list) and len(entry) == 2:
                amps.append(complex(_number(entry[0], f"{prefix}[{i}]"), _number(entry[1], f"{prefix}[{i}]")))
            else:
                amps.append(complex(_number(entry, f"{prefix}[{i}]")))
        try:
            return QubitAmplitudes(*amps)
        except ParameterError as exc:
            raise ConfigError(str(exc), field=prefix) from exc
    raise ConfigError("expected 'ground', 'excited' or [c_g, c_e] (complex entries as [re, im])", field=prefix)


def parse_scenario(raw: dict, index: int = 0, rtol: float | None = None, atol: float | None = None) -> Scenario:
    prefix = f"scenarios[{index}]"
    if not isinstance(raw, dict):
        raise ConfigError("expected a mapping", field=prefix)
    unknown = sorted(set(raw) - set(SCENARIO_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)}", field=f"{prefix}.{unknown[0]}")
    model = raw.get("model")
    if model is None:
        raise ConfigError("missing model", field=f"{prefix}.model")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; choose from {', '.join(MODELS)}", field=f"{prefix}.model")
    if "params" not in raw:
        raise ConfigError("missing params", field=f"{prefix}.params")
    params = _params(raw["params"], model, f"{prefix}.params")
    if "horizon" not in raw:
        raise ConfigError("missing horizon", field=f"{prefix}.horizon")
    horizon = _number(raw["horizon"], f"{prefix}.horizon", positive=True)

    spp = raw.get("samples_per_pi_pulse", 8)
    if not isinstance(spp, int) or isinstance(spp, bool) or spp < 4:
        raise ConfigError(f"must be an integer >= 4, got {spp!r}", field=f"{prefix}.samples_per_pi_pulse")
    step = raw.get("sample_step")
    if step is not None:
        step = _number(step, f"{prefix}.sample_step", positive=True)
    elif not params.G:
        raise ConfigError("sample_step is required when G = 0", field=f"{prefix}.sample_step")

    snaps = [_number(t, f"{prefix}.snapshot_times", nonneg=True) for t in raw.get("snapshot_times", []) or []]
    for m in raw.get("snapshot_pi_multiples", []) or []:
        snaps.append(_number(m, f"{prefix}.snapshot_pi_multiples", nonneg=True) * params.t_pi)
    if snaps and model not in QRM_MODELS:
        raise ConfigError(f"photon snapshots need a quantum model, not {model}", field=f"{prefix}.snapshot_times")
    if any(t > horizon for t in snaps):
        raise ConfigError("snapshot time beyond the horizon", field=f"{prefix}.snapshot_times")

    tol = raw.get("tolerances", {}) or {}
    if not isinstance(tol, dict) or set(tol) - {"rtol", "atol"}:
        raise ConfigError("expected a mapping with rtol and/or atol", field=f"{prefix}.tolerances")
    scen_rtol = _number(tol.get("rtol", DEFAULT_RTOL), f"{prefix}.tolerances.rtol", positive=True)
    scen_atol = _number(tol.get("atol", DEFAULT_ATOL), f"{prefix}.tolerances.atol", positive=True)

    window = raw.get("window")
    if window is not None:
        if not (isinstance(window, list) and len(window) == 2 and all(isinstance(n, int) for n in window)):
            raise ConfigError("expected [n1, n2]", field=f"{prefix}.window")
        try:
            window = FockWindow(*window)
        except ParameterError as exc:
            raise ConfigError(str(exc), field=f"{prefix}.window") from exc
    cutoff = raw.get("cutoff")
    if cutoff is not None:
        cutoff = _number(cutoff, f"{prefix}.cutoff", positive=True)
        if cutoff >= 1:
            raise ConfigError("must lie in (0, 1)", field=f"{prefix}.cutoff")

    name = raw.get("name", f"{model}_{index}")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError(f"invalid name {name!r}", field=f"{prefix}.name")
    return Scenario(
        name=name, model=model, params=params, horizon=horizon, samples_per_pi_pulse=spp, sample_step=step,
        initial=_initial(raw.get("initial"), f"{prefix}.initial"), snapshot_times=tuple(sorted(set(snaps))),
        rtol=rtol if rtol is not None else scen_rtol, atol=atol if atol is not None else scen_atol,
        window=window, cutoff=cutoff, raw=raw,
    )


def load_config(text: str, rtol: float | None = None, atol: float | None = None) -> tuple[str, list[Scenario]]:
    """Parse scenario-file text into ``(description, scenarios)``."""
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line=line) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("the file must contain a mapping")
    description = data.get("description", "")
    if "scenarios" in data:
        entries = data["scenarios"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("expected a non-empty list", field="scenarios")
        extra = sorted(set(data) - {"scenarios", "description"})
        if extra:
            raise ConfigError(f"unknown top-level key(s) {', '.join(extra)}", field=extra[0])
    else:
        entries = [{k: v for k, v in data.items() if k != "description"}]
    scenarios = [parse_scenario(entry, i, rtol, atol) for i, entry in enumerate(entries)]
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique", field="scenarios")
    return description, scenarios


def solve(scenario: Scenario) -> TimeSeries:
    """Run the solver selected by ``scenario.model``."""
    from . import qrm, qrm_master, srm, srm_master

    p, times = scenario.params, scenario.sample_times()
    tol = {"rtol": scenario.rtol, "atol": scenario.atol}
    model = scenario.model
    if model == "srm_rwa":
        return srm.evolve_rwa(scenario.initial, p, times)
    if model == "srm_intermediate":
        return srm.evolve_intermediate(scenario.initial, p, times)
    if model == "srm_semianalytic":
        return srm.evolve_semianalytic(scenario.initial, p, times, **tol)
    if model == "srm_exact":
        return srm.evolve_exact(scenario.initial, p, times, **tol)
    if model == "srm_master":
        return srm_master.evolve_master_srm(srm_master.QubitDensity.from_pure(scenario.initial), p, times, **tol)
    extra = {"window": scenario.window}
    if scenario.cutoff is not None:
        extra["cutoff"] = scenario.cutoff
    if model == "qrm":
        return qrm.evolve_qrm(p, times, keep_photon_dist=bool(scenario.snapshot_times), **tol, **extra)
    return qrm_master.evolve_master_qrm(p, times, keep_photon_dist=bool(scenario.snapshot_times), **tol, **extra)


def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, FockWindow):
        return [obj.n1, obj.n2]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _header(scenario: Scenario, extra: dict[str, Any]) -> str:
    lines = [f"# rabisim {__version__}", f"# scenario: {scenario.name}", f"# model: {scenario.model}"]
    for key, value in scenario.params.as_dict().items():
        lines.append(f"# {key}: {value!r}")
    lines.append(f"# rtol: {scenario.rtol!r}")
    lines.append(f"# atol: {scenario.atol!r}")
    for key, value in extra.items():
        lines.append(f"# {key}: {value}")
    return "\n".join(lines) + "\n"


def series_table(scenario: Scenario, series: TimeSeries) -> str:
    """Delimited text table: ``#`` metadata block, header row, one row per sample."""
    columns = ("p_e",) + tuple(c for c in TABLE_COLUMNS.get(scenario.model, ()) if c != "p_e")
    extra = {}
    if series.window is not None:
        extra["window"] = f"[{series.window.n1}, {series.window.n2}]"
    buf = io.StringIO()
    buf.write(_header(scenario, extra))
    buf.write(",".join(("t",) + columns) + "\n")
    data = [series.t] + [series[c] for c in columns]
    for row in zip(*data):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def snapshot_table(scenario: Scenario, series: TimeSeries, time: float) -> str:
    """``(n, p_n, delta p_n)`` at the sample nearest ``time``, relative to ``t = 0``."""
    i = series.at(time)
    delta = photon_delta(series.photon_dist[0], series.photon_dist[i])
    buf = io.StringIO()
    buf.write(_header(scenario, {"snapshot_time": _fmt(series.t[i])}))
    buf.write("n,p_n,delta_p_n\n")
    for n, pn, dpn in zip(series.window.indices, delta.current_dist, delta.delta):
        buf.write(f"{int(n)},{_fmt(pn)},{_fmt(dpn)}\n")
    return buf.getvalue()


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def run_scenario(scenario: Scenario, out_dir: Path, source_text: str = "") -> dict[str, Any]:
    """Solve one scenario and write its table, snapshots and manifest into ``out_dir``.

    Returns the manifest.  Solver exceptions propagate to the caller.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    series = solve(scenario)
    files = {f"{scenario.name}.csv": series_table(scenario, series)}
    for k, time in enumerate(scenario.snapshot_times):
        files[f"{scenario.name}_snapshot{k}.csv"] = snapshot_table(scenario, series, time)
    resolved = scenario.resolved()
    manifest = {
        "rabisim_version": __version__,
        "kernel_backend": kernels.active_backend(),
        "scenario": resolved,
        "input_sha256": _sha256(json.dumps(resolved, sort_keys=True) + "\n" + source_text),
        "window": series.window,
        "integrator": series.stats.as_dict() if series.stats is not None else None,
        "solver_meta": series.meta,
        "files": {name: _sha256(text) for name, text in files.items()},
    }
    files[f"{scenario.name}.manifest.json"] = json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n"
    for name, text in files.items():
        (out_dir / name).write_text(text)
    return manifest
