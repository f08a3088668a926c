"""Command-line driver: figure presets, scans and CSV output.

Usage: attodelay COMMAND [--E0 ..] [--config FILE] [--out PATH] ...

Exit codes: 0 success, 2 invalid configuration, 3 numerical non-convergence.
"""
import argparse
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__

COMMANDS = ("pmd", "backprop", "scan", "species", "scan3d", "wigner", "tdse-validate")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# grids, windows and scan ranges pinned per figure preset
PRESETS = {
    "pmd": {"pgrid": "peak:201"},
    "backprop": {"pgrid": "backprop:601"},
    "scan": {"ratios": "0.25:0.65:9", "pgrid": "backprop:601"},
    "species": {"omega": 0.2, "ratios": "0.28:0.75:15", "species": "Ar,Kr", "method": "spa",
                "pgrid": "peak:81"},
    "scan3d": {"ratios": "0.3:0.6:4", "pgrid": "backprop:601"},
    "wigner": {"ratios": "0.05:0.7:27"},
    "tdse-validate": {"pgrid": "peak:201"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = "pmd"
    kappa: float = 1.0
    E0: float = 0.25
    omega: float = 0.05
    method: str = "numeric"
    include_rescattering: bool = True
    pgrid: str = ""
    T: float = None
    xm: float = None
    out: str = ""
    overlay: str = ""
    ratios: str = ""
    species: str = ""
    sigma: float = 0.1
    dx: float = 0.05
    dt: float = 0.005
    L: float = 700.0


_FLOAT_KEYS = {"kappa", "E0", "omega", "T", "xm", "sigma", "dx", "dt", "L"}
_KEYS = {f.name for f in fields(RunConfig)}


def _parse_value(key, text):
    text = text.strip()
    if key in _FLOAT_KEYS:
        if text in ("", "None"):
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"cannot parse {key}={text!r} as a number") from None
    if key == "include_rescattering":
        low = text.lower()
        if low in ("1", "true", "yes"):
            return True
        if low in ("0", "false", "no"):
            return False
        raise ConfigError(f"cannot parse {key}={text!r} as a boolean")
    return text


def _format_value(v):
    if v is None:
        return "None"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_config_lines(lines):
    """key=value pairs from config text; '#' starts a comment."""
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        out[key] = _parse_value(key, val)
    return out


def load_config(path=None, flags=None, command=None):
    """Defaults < command preset < config file < flags."""
    values = {}
    if command is not None:
        values["command"] = command
        values.update({k: v for k, v in PRESETS.get(command, {}).items()})
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_lines(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for k, v in (flags or {}).items():
        if v is not None:
            values[k] = v
    if command is not None:
        values["command"] = command
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def _parse_range(text, name):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ConfigError(f"{name} must be min:max:n, got {text!r}") from None
    if n < 1 or (n > 1 and not b > a):
        raise ConfigError(f"{name} needs max > min and n >= 1, got {text!r}")
    return np.linspace(a, b, n)


def model_params(cfg):
    from .model import ModelParams
    try:
        return ModelParams(cfg.kappa, cfg.E0, cfg.omega)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def momentum_grid(cfg, params):
    from .observables import default_grid, backprop_grid
    spec = cfg.pgrid or "peak:201"
    head, _, tail = spec.partition(":")
    if head in ("peak", "backprop"):
        try:
            n = int(tail)
        except ValueError:
            raise ConfigError(f"pgrid {spec!r}: bad point count") from None
        if n < 5:
            raise ConfigError("pgrid needs at least 5 points")
        return default_grid(params, n) if head == "peak" else backprop_grid(params, n)
    p = _parse_range(spec, "pgrid")
    pm = params.E0 * params.t_f
    if len(p) < 5 or p[0] <= 0 or p[-1] >= pm:
        raise ConfigError(f"pgrid must hold >= 5 points inside (0, {pm:.6g})")
    return p


def validate_config(cfg):
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.method not in ("numeric", "spa"):
        raise ConfigError(f"method must be numeric or spa, got {cfg.method!r}")
    params = model_params(cfg)
    if cfg.T is not None and cfg.T - params.t_f < 1000:
        raise ConfigError(f"T must exceed t_f + 1000 = {params.t_f + 1000:.6g}")
    if cfg.xm is not None and cfg.xm <= 0:
        raise ConfigError("xm must be positive")
    momentum_grid(cfg, params)
    if cfg.ratios:
        r = _parse_range(cfg.ratios, "ratios")
        if np.any(r <= 0):
            raise ConfigError("ratios must be positive")
    if cfg.species:
        from .observables import SPECIES
        names = cfg.species.split(",")
        if len(names) != 2 or any(n not in SPECIES for n in names):
            raise ConfigError(f"species must be two of {sorted(SPECIES)}, got {cfg.species!r}")
    if cfg.command == "tdse-validate":
        from .tdse_oracle import GridConfig, GridConfigError
        try:
            GridConfig(cfg.L, cfg.dx, cfg.dt, cfg.sigma).validate(params)
        except GridConfigError as exc:
            raise ConfigError(str(exc)) from None
    if cfg.overlay and not os.path.isfile(cfg.overlay):
        raise ConfigError(f"overlay file {cfg.overlay!r} not found")
    return cfg


# CSV tables

@dataclass
class CsvTable:
    name: str
    columns: list
    descriptions: list
    rows: np.ndarray
    notes: list = None


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    v = float(v)
    if np.isnan(v):
        return "nan"
    return f"{v:.11e}"


def render_csv(table, cfg):
    lines = [f"# attodelay {__version__}", f"# table={table.name}"]
    for f in fields(RunConfig):
        lines.append(f"# config {f.name}={_format_value(getattr(cfg, f.name))}")
    for c, d in zip(table.columns, table.descriptions):
        lines.append(f"# column {c}: {d}")
    for note in table.notes or []:
        lines.append(f"# note {note}")
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def read_csv_config(path):
    """Reconstruct the RunConfig echoed in a CSV header."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if line.startswith("# config "):
                key, val = line[len("# config "):].rstrip("\n").split("=", 1)
                values[key] = _parse_value(key, val)
    return RunConfig(**values)


def read_csv(path):
    """(column names, float array) of a CSV written by this tool."""
    with open(path, encoding="utf-8") as fh:
        lines = [l for l in fh if not l.startswith("#")]
    cols = lines[0].strip().split(",")
    data = np.array([[float(x) for x in l.strip().split(",")] for l in lines[1:]])
    return cols, data.reshape(-1, len(cols))


def _out_paths(cfg, tables):
    base = cfg.out or f"{cfg.command}.csv"
    if base.endswith(os.sep) or os.path.isdir(base):
        base = os.path.join(base, f"{cfg.command}.csv")
    stem = base[:-4] if base.endswith(".csv") else base
    paths = []
    for i, t in enumerate(tables):
        paths.append(base if i == 0 else f"{stem}_{t.name}.csv")
    return paths


# commands

def _resolved_ratios(cfg):
    return _parse_range(cfg.ratios or PRESETS[cfg.command]["ratios"], "ratios")


def cmd_pmd(cfg):
    from .observables import compute_pmd, momentum_shift
    params = model_params(cfg)
    p = momentum_grid(cfg, params)
    spec = compute_pmd(params, p, cfg.method, cfg.include_rescattering)
    wD = np.abs(spec.m_direct) ** 2
    wR = np.abs(spec.m_rescatter) ** 2
    notes = []
    try:
        notes.append(f"delta_p={momentum_shift(spec):.11e}")
    except ValueError as exc:
        notes.append(f"delta_p unavailable: {exc}")
    rows = np.column_stack([p, wD, wR, spec.w, spec.valid.astype(float)])
    return [CsvTable("pmd", ["p", "w_direct", "w_rescatter", "w", "valid"],
                     ["final momentum (a.u.)", "|m_D|^2", "|m_R|^2", "|m_D + m_R|^2",
                      "1 if the point passed the saddle checks"], rows, notes)]


def cmd_backprop(cfg):
    from .observables import compute_pmd
    from . import backprop
    params = model_params(cfg)
    p = momentum_grid(cfg, params)
    spec = compute_pmd(params, p, cfg.method, cfg.include_rescattering)
    T = cfg.T
    full = backprop.exit_time_distribution(spec, T, "full")
    simple = backprop.exit_time_distribution(spec, T, "simple")
    direct = backprop.exit_time_distribution(spec.direct_only(), T, "full")
    te = full.t_e
    cols = [te, full.density]
    for d in (simple, direct):
        cols.append(np.interp(te, d.t_e, d.density, left=np.nan, right=np.nan))
    notes = [f"t_peak_full={full.t_peak:.11e}", f"t_mean_full={full.t_mean:.11e}",
             f"t_peak_simple={simple.t_peak:.11e}", f"t_peak_direct={direct.t_peak:.11e}"]
    return [CsvTable("backprop", ["t_e", "P_full", "P_simple", "P_direct_only"],
                     ["exit time (a.u.)", "backpropagated packet density",
                      "w(-A(t_e)) |E(t_e)|, normalised",
                      "full method with the direct amplitude only"],
                     np.column_stack(cols), notes)]


_SCAN_COLS = ["E0", "ratio", "gamma", "delta_p", "t_peak_direct", "t_peak_full",
              "t_avg_full", "t_wigner", "phi_e", "delta_p_spa", "ok"]
_SCAN_DESC = ["peak field (a.u.)", "E0/E_th", "Keldysh parameter", "PMD peak shift (a.u.)",
              "backprop peak, direct amplitude only", "backprop peak, full amplitude",
              "backprop mean, full amplitude", "quasistatic Wigner time",
              "attoclock angle -omega_eff delta_p/E0", "peak shift of the saddle-point PMD",
              "1 if the row completed"]


def _scan_rows(rows):
    out = []
    for r in rows:
        out.append([r.E0, r.ratio, r.gamma, r.delta_p, r.t_peak_direct, r.t_peak_full,
                    r.t_avg_full, r.t_wigner, r.phi_e, r.delta_p_spa, float(not r.error)])
    notes = [f"row {i} error: {r.error}" for i, r in enumerate(rows) if r.error]
    return np.array(out, dtype=float), notes


def _n_pmd(cfg):
    spec = cfg.pgrid or "backprop:601"
    head, _, tail = spec.partition(":")
    if head != "backprop":
        raise ConfigError("scan commands need pgrid=backprop:N")
    return int(tail)


def cmd_scan(cfg):
    from .observables import scan_delay
    params = model_params(cfg)
    rows = scan_delay(params, _resolved_ratios(cfg), n_pmd=_n_pmd(cfg), T=cfg.T, x_m=cfg.xm)
    data, notes = _scan_rows(rows)
    return [CsvTable("scan", _SCAN_COLS, _SCAN_DESC, data, notes)]


def cmd_scan3d(cfg):
    from .model3d import delay_curve_3d
    params = model_params(cfg)
    rows = delay_curve_3d(params, _resolved_ratios(cfg), n_pmd=_n_pmd(cfg), T=cfg.T, x_m=cfg.xm)
    data, notes = _scan_rows(rows)
    t_spa = -data[:, 9] / data[:, 0]
    return [CsvTable("scan3d", _SCAN_COLS + ["t_e_spa"],
                     _SCAN_DESC + ["-delta_p_spa/E0 (a.u.)"], np.column_stack([data, t_spa]),
                     notes)]


def cmd_species(cfg):
    from .observables import SPECIES, species_scan
    a, b = (cfg.species or PRESETS["species"]["species"]).split(",")
    n = int((cfg.pgrid or "peak:81").partition(":")[2])
    rows = species_scan(SPECIES[a], SPECIES[b], _resolved_ratios(cfg), omega=cfg.omega,
                        n_pmd=n, method=cfg.method)
    keys = ["ratio", "gamma", "gamma_a", "gamma_b", "E0_a", "E0_b", "delta_p_a", "delta_p_b",
            "phi_a", "phi_b", "delta_phi"]
    desc = ["E0/E_th (both species)", "mean Keldysh parameter", f"gamma of {a}",
            f"gamma of {b}", f"E0 of {a}", f"E0 of {b}", f"delta p of {a}", f"delta p of {b}",
            f"phi_e of {a} (rad)", f"phi_e of {b} (rad)", f"phi_e({a}) - phi_e({b})"]
    data = np.array([[r[k] for k in keys] for r in rows], dtype=float)
    return [CsvTable("species", keys, desc, data)]


def cmd_wigner(cfg):
    from .model import derive_params
    from .observables import wigner_argument, wigner_time
    params = model_params(cfg)
    e_th = derive_params(params).E_th
    r = _resolved_ratios(cfg)
    E0 = r * e_th
    z = [wigner_argument(e, params.kappa, cfg.xm) for e in E0]
    tw = [wigner_time(e, params.kappa, cfg.xm) for e in E0]
    return [CsvTable("wigner", ["E0", "ratio", "z", "t_wigner"],
                     ["peak field (a.u.)", "E0/E_th", "Airy argument", "Wigner time (a.u.)"],
                     np.column_stack([E0, r, z, tw]))]


def cmd_tdse_validate(cfg):
    from .observables import compute_pmd
    from .tdse_oracle import GridConfig, compare_with_sfa, positive_lobe, propagate
    params = model_params(cfg)
    res = propagate(GridConfig(cfg.L, cfg.dx, cfg.dt, cfg.sigma), params)
    p, w = positive_lobe(res.p, res.pmd)
    spec = compute_pmd(params, momentum_grid(cfg, params), cfg.method, cfg.include_rescattering)
    rep = compare_with_sfa((p, w), spec)
    report = CsvTable(
        "report", ["E0", "delta_p_tdse", "delta_p_sfa", "sign_match", "ratio", "norm_drift",
                   "bound_population", "ionized_fraction", "v0"],
        ["peak field (a.u.)", "TDSE peak shift", "SFA peak shift", "1 if signs agree",
         "delta_p_tdse / delta_p_sfa", "max |norm - 1|", "final ground-state population",
         "final continuum norm", "calibrated well depth"],
        np.array([[params.E0, rep["delta_p_tdse"], rep["delta_p_sfa"], rep["sign_match"],
                   rep["ratio"], res.norm_drift, res.bound_population, res.ionized_fraction,
                   res.config.v0]], dtype=float))
    pm = params.E0 * params.t_f
    sel = p < pm
    pmd = CsvTable("pmd", ["p", "w_tdse"], ["momentum (a.u.)", "TDSE continuum density"],
                   np.column_stack([p[sel], w[sel]]))
    return [report, pmd]


HANDLERS = {"pmd": cmd_pmd, "backprop": cmd_backprop, "scan": cmd_scan, "species": cmd_species,
            "scan3d": cmd_scan3d, "wigner": cmd_wigner, "tdse-validate": cmd_tdse_validate}


def _overlay_table(cfg):
    try:
        data = np.loadtxt(cfg.overlay, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"overlay {cfg.overlay!r}: {exc}") from None
    cols = [f"c{i}" for i in range(data.shape[1])]
    return CsvTable("overlay", cols, ["column copied from the overlay file"] * len(cols), data,
                    [f"source={cfg.overlay}"])


def run_command(name, config):
    """Tables of one command (no file output)."""
    cfg = replace(config, command=name)
    validate_config(cfg)
    tables = HANDLERS[name](cfg)
    if cfg.overlay:
        tables.append(_overlay_table(cfg))
    return tables


def write_tables(cfg, tables):
    paths = _out_paths(cfg, tables)
    for t, path in zip(tables, paths):
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_csv(t, cfg))
    return paths


def _numeric_errors():
    from .amplitudes import QuadratureError
    from .backprop import BranchExtractionError
    from .observables import PeakWindowError
    from .saddle import SaddleError
    from .specfun import AiryAccuracyError
    from .tdse_oracle import CalibrationError, GridTooSmallError, InsufficientSignalError
    return (QuadratureError, BranchExtractionError, PeakWindowError, SaddleError,
            AiryAccuracyError, CalibrationError, GridTooSmallError, InsufficientSignalError,
            np.linalg.LinAlgError, FloatingPointError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    ap = _Parser(prog="attodelay", description="Tunneling-delay pipeline for the zero-range atom")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--E0", type=str)
    ap.add_argument("--omega", type=str)
    ap.add_argument("--kappa", type=str)
    ap.add_argument("--method", choices=("numeric", "spa"))
    ap.add_argument("--no-rescatter", action="store_true")
    ap.add_argument("--pgrid", help="min:max:n, peak:n or backprop:n")
    ap.add_argument("--ratios", help="min:max:n of E0/E_th for scans")
    ap.add_argument("--species", help="two species, e.g. Ar,Kr")
    ap.add_argument("--T", type=str, help="backpropagation time (a.u.)")
    ap.add_argument("--xm", type=str, help="Wigner-time exit point (a.u.)")
    ap.add_argument("--sigma", type=str)
    ap.add_argument("--dx", type=str)
    ap.add_argument("--dt", type=str)
    ap.add_argument("--L", type=str)
    ap.add_argument("--out", type=str)
    ap.add_argument("--config", type=str)
    ap.add_argument("--overlay", type=str)
    return ap


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        flags = {}
        for key in ("E0", "omega", "kappa", "T", "xm", "sigma", "dx", "dt", "L"):
            v = getattr(args, key)
            if v is not None:
                flags[key] = _parse_value(key, v)
        for key in ("method", "pgrid", "ratios", "species", "out", "overlay"):
            if getattr(args, key) is not None:
                flags[key] = getattr(args, key)
        if args.no_rescatter:
            flags["include_rescattering"] = False
        cfg = load_config(args.config, flags, args.command)
    except ConfigError as exc:
        print(f"attodelay: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tables = run_command(cfg.command, cfg)
    except ConfigError as exc:
        print(f"attodelay: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _numeric_errors() as exc:
        print(f"attodelay: numerical failure in {type(exc).__module__}: "
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in write_tables(cfg, tables):
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
