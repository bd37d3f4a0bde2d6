"""Configuration text, time-series CSV and legacy VTK output.

Configuration files are flat ``key = value`` lines with ``#`` comments and
optional ``[section]`` headers (geometry, fluid, wall, scheme, boundary,
output).  Keys are unique across sections.  ``benchmark = <id>`` loads a
preset whose values may then be overridden key by key.
"""
import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .driver import SimulationConfig
from .errors import ConfigError, DataError, FSIError
from .fluid import BoundaryData, FluidParams, load_waveform
from .observables import SERIES_FIELDS, ObservableSeries
from .shell import BC_KINDS, FormaggiaParams, WallParams

SCHEME_VERSION = "beta-scheme 1"

SECTIONS = {
    "geometry": ("L", "R", "n_z", "n_r"),
    "fluid": ("rho_f", "mu"),
    "wall": ("E", "sigma", "C_v", "D_v", "rho_s", "h", "model", "k", "G", "gamma",
             "radial_only", "C0_override", "bc"),
    "scheme": ("benchmark", "dt", "t_final", "beta"),
    "boundary": ("boundary", "p_max", "t_max", "p_in", "p_out", "waveform",
                 "waveform_delay", "mean_drop"),
    "output": ("out_dir", "snapshot_every"),
}
KEY_SECTION = {k: s for s, keys in SECTIONS.items() for k in keys}

FLOAT_KEYS = {"L", "R", "rho_f", "mu", "E", "sigma", "C_v", "D_v", "rho_s", "h", "k", "G",
              "gamma", "C0_override", "dt", "t_final", "beta", "p_max", "t_max", "p_in",
              "p_out", "waveform_delay", "mean_drop"}
INT_KEYS = {"n_z", "n_r", "snapshot_every"}
BOOL_KEYS = {"radial_only"}
CHOICES = {"model": ("koiter", "formaggia"), "bc": BC_KINDS,
           "boundary": BoundaryData.KINDS}
REQUIRED = ("L", "R", "rho_f", "mu", "E", "sigma", "rho_s", "h", "dt", "t_final")


def _convert(key, raw):
    if key in FLOAT_KEYS:
        if key == "C0_override" and raw.lower() in ("none", ""):
            return None
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"expected a number, got {raw!r}", key=key) from None
        if not math.isfinite(value):
            raise ConfigError(f"value must be finite, got {raw!r}", key=key)
        return value
    if key in INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", key=key) from None
    if key in BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"expected true/false, got {raw!r}", key=key)
    if key in CHOICES and raw not in CHOICES[key]:
        raise ConfigError(f"must be one of {', '.join(CHOICES[key])}, got {raw!r}", key=key)
    return raw


def parse_pairs(text):
    """``{key: raw string}`` from configuration text, validating structure."""
    values = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEY_SECTION:
            raise ConfigError(f"line {lineno}: unknown key", key=key)
        if section is not None and KEY_SECTION[key] != section:
            raise ConfigError(f"line {lineno}: belongs to [{KEY_SECTION[key]}], "
                              f"not [{section}]", key=key)
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key", key=key)
        values[key] = raw
    return values


def _defaults_from(cfg):
    """Flat key values of a configuration (the inverse of :func:`_build`)."""
    w, f, b = cfg.wall, cfg.fluid, cfg.boundary
    d = {"benchmark": cfg.benchmark, "L": cfg.L, "R": w.R, "n_z": cfg.n_z, "n_r": cfg.n_r,
         "rho_f": f.rho_f, "mu": f.mu, "E": w.E, "sigma": w.sigma, "C_v": w.C_v,
         "D_v": w.D_v, "rho_s": w.rho_s, "h": w.h, "model": cfg.model,
         "radial_only": cfg.radial_only, "C0_override": cfg.C0_override,
         "bc": cfg.bc_kind, "dt": cfg.dt, "t_final": cfg.t_final, "beta": cfg.beta,
         "boundary": b.kind, "out_dir": cfg.out_dir, "snapshot_every": cfg.snapshot_every}
    if cfg.formaggia is not None:
        d.update(k=cfg.formaggia.k, G=cfg.formaggia.G, gamma=cfg.formaggia.gamma)
    if b.kind == "pulse":
        d.update(p_max=b.p_max, t_max=b.t_max)
    elif b.kind == "constant":
        d.update(p_in=b.p_in_value, p_out=b.p_out_value)
    elif b.kind == "waveform":
        d.update(waveform=b.waveform_path, waveform_delay=b.delay, mean_drop=b.mean_drop)
    return d


def _build(v, base_dir=None):
    def get(key, default=None):
        return v.get(key, default)

    try:
        wall = WallParams(E=get("E"), sigma=get("sigma"), C_v=get("C_v", 0.0),
                          D_v=get("D_v", 0.0), rho_s=get("rho_s"), h=get("h"), R=get("R"))
    except (FSIError, TypeError) as exc:
        raise ConfigError(f"invalid wall parameters: {exc}", key=_guess_key(exc)) from exc
    try:
        fluid = FluidParams(rho_f=get("rho_f"), mu=get("mu"))
    except FSIError as exc:
        raise ConfigError(str(exc), key=_guess_key(exc)) from exc

    model = get("model", "koiter")
    formaggia = None
    if model == "formaggia" or any(k in v for k in ("k", "G", "gamma")):
        try:
            formaggia = FormaggiaParams(k=get("k", 1.0), G=get("G", wall.shear_modulus),
                                        gamma=get("gamma", 0.0))
        except FSIError as exc:
            raise ConfigError(str(exc), key=_guess_key(exc)) from exc

    kind = get("boundary", "zero")
    try:
        if kind == "pulse":
            bd = BoundaryData(kind="pulse", p_max=get("p_max", 0.0), t_max=get("t_max", 1.0))
        elif kind == "constant":
            bd = BoundaryData(kind="constant", p_in_value=get("p_in", 0.0),
                              p_out_value=get("p_out", 0.0))
        elif kind == "waveform":
            path = get("waveform")
            if not path:
                raise ConfigError("waveform boundary data needs a file", key="waveform")
            full = Path(path)
            if base_dir is not None and not full.is_absolute():
                full = Path(base_dir) / full
            try:
                wf = load_waveform(full)
            except OSError as exc:
                raise ConfigError(f"cannot read waveform: {exc}", key="waveform") from exc
            except DataError as exc:
                raise ConfigError(str(exc), key="waveform") from exc
            bd = BoundaryData(kind="waveform", waveform=wf, waveform_path=str(path),
                              delay=get("waveform_delay", 0.0),
                              mean_drop=get("mean_drop", 0.0))
        else:
            bd = BoundaryData()
    except ConfigError:
        raise
    except FSIError as exc:
        raise ConfigError(str(exc), key="boundary") from exc

    try:
        return SimulationConfig(
            wall=wall, fluid=fluid, L=get("L"), dt=get("dt"), t_final=get("t_final"),
            beta=get("beta", 1.0), bc_kind=get("bc", "clamped"), n_z=get("n_z", 31),
            n_r=get("n_r", 11), boundary=bd, model=model, formaggia=formaggia,
            radial_only=get("radial_only", False), C0_override=get("C0_override"),
            benchmark=get("benchmark", ""), out_dir=get("out_dir", ""),
            snapshot_every=get("snapshot_every", 0))
    except FSIError as exc:
        raise ConfigError(str(exc), key=_guess_key(exc)) from exc


def _guess_key(exc):
    msg = str(exc)
    for key in sorted(KEY_SECTION, key=len, reverse=True):
        if msg.startswith(key + " ") or msg.startswith(key + ":"):
            return key
    return None


def parse_config(text, base_dir=None):
    """Validated :class:`SimulationConfig` from configuration text.

    Raises
    ------
    ConfigError
        Unknown or duplicate key, malformed line, missing required key or
        out-of-range value; the message names the key.
    """
    raw = parse_pairs(text)
    values = {k: _convert(k, s) for k, s in raw.items()}
    bench = values.get("benchmark")
    if bench:
        from .bench.configs import CCA_MEAN_DROP_PER_CM, benchmark_config
        preset = _defaults_from(benchmark_config(bench))
        if bench == "cca" and "L" in values and "mean_drop" not in values:
            values["mean_drop"] = CCA_MEAN_DROP_PER_CM * values["L"]
        if "boundary" in values and values["boundary"] != preset["boundary"]:
            for key in SECTIONS["boundary"]:
                if key != "boundary":
                    preset.pop(key, None)
        preset.update(values)
        values = preset
    else:
        missing = [k for k in REQUIRED if k not in values]
        if missing:
            raise ConfigError("missing required key", key=missing[0])
    return _build(values, base_dir)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return "none"
    return str(value)


def serialize_config(cfg):
    """Configuration text that :func:`parse_config` maps back to ``cfg``."""
    values = _defaults_from(cfg)
    lines = []
    for section, keys in SECTIONS.items():
        present = [k for k in keys if k in values and values[k] not in ("",)]
        if not present:
            continue
        lines.append(f"[{section}]")
        for key in present:
            lines.append(f"{key} = {_fmt(values[key])}")
        lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunManifest:
    """What a run was started with: resolved configuration, output
    directory, snapshot cadence and recorded observables."""

    config: SimulationConfig
    out_dir: str
    snapshot_every: int = 0
    observables: tuple = SERIES_FIELDS
    scheme_version: str = SCHEME_VERSION

    def __post_init__(self):
        if self.snapshot_every < 0:
            raise ConfigError("snapshot cadence must be >= 0", key="snapshot_every")

    def write(self, path):
        cfg = replace(self.config, out_dir=self.out_dir, snapshot_every=self.snapshot_every)
        text = (f"# scheme_version: {self.scheme_version}\n"
                f"# observables: {','.join(self.observables)}\n" + serialize_config(cfg))
        Path(path).write_text(text)


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise DataError(f"refusing to write non-finite values to {what}")


def write_timeseries(series, path):
    """CSV of the observable series with full double precision."""
    data = series.as_array()
    _check_finite(data, path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_FIELDS)
        for row in data:
            w.writerow([format(float(x), ".17g") for x in row])


def read_timeseries(path):
    """Inverse of :func:`write_timeseries`."""
    series = ObservableSeries()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != SERIES_FIELDS:
            raise DataError(f"{path}: unexpected time-series header {header!r}")
        for row in reader:
            if not row:
                continue
            try:
                series.append(**dict(zip(SERIES_FIELDS, map(float, row))))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}: bad row {row!r}") from exc
    return series


def write_vtk_snapshot(state, path, title="koiterfsi snapshot"):
    """Legacy ASCII VTK unstructured grid of the fluid on the current mesh.

    Point data: ``velocity`` (third component zero) and ``pressure``
    (coarse P1 pressure interpolated to the velocity nodes).
    """
    ref = state.mesh.reference
    pts = state.mesh.points
    u = state.fluid.u
    p = ref.prolongation @ state.fluid.p
    for arr, name in ((pts, "points"), (u, "velocity"), (p, "pressure")):
        _check_finite(arr, f"{path} ({name})")
    tris = ref.tris
    n, m = len(pts), len(tris)
    out = [
        "# vtk DataFile Version 3.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    out += [f"{x:.17g} {y:.17g} 0" for x, y in pts]
    out.append(f"CELLS {m} {4 * m}")
    out += [f"3 {a} {b} {c}" for a, b, c in tris]
    out.append(f"CELL_TYPES {m}")
    out += ["5"] * m
    out.append(f"POINT_DATA {n}")
    out.append("VECTORS velocity double")
    out += [f"{a:.17g} {b:.17g} 0" for a, b in u]
    out.append("SCALARS pressure double 1")
    out.append("LOOKUP_TABLE default")
    out += [f"{x:.17g}" for x in p]
    Path(path).write_text("\n".join(out) + "\n")
