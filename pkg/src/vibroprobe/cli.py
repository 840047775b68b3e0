"""Configuration-driven command-line front end.

``vibroprobe run <config.toml>`` parses a sectioned TOML config,
dispatches one of the signal engines, and writes one CSV artifact per
requested grid, echoing the resolved config into the CSV header.  All
config and CSV quantities are in external units (cm^-1 and fs); the
conversion to internal angular frequencies happens here.

Exit codes: 0 success, 2 config error, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import ast
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .grids import SignalGrid
from .model import (BathSpec, FrequencyTrajectory, LevelScheme,
                    PreparedState)
from .loop import loop_delta_dispersed
from .resolution import fig3_scan, fig4_scan
from .semiclassical import (mc_impulsive, sc_cumulant_impulsive,
                            sc_delta_dispersed)
from .sos import sos_delta_dispersed_prepared
from .units import cm1_to_radfs, radfs_to_cm1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

_ENGINES = ("sos", "loop", "semiclassical", "cumulant", "mc", "resolution")
_MODES = ("fdir", "srs")

# allowed keys per section; None marks a scalar top-level key
_SCHEMA = {
    None: {"engine", "mode", "output", "compare", "threads", "report"},
    "scheme": {"omega_a_cm1", "gamma_a", "mu_ag",
               "omega_c_cm1", "gamma_c", "mu_c", "alpha_c",
               "omega_d_cm1", "gamma_d", "mu_d", "alpha_d"},
    "pump": {"kind", "sigma_fs", "omega0_cm1", "center_fs", "amplitude"},
    "probe": {"kind", "sigma_fs", "omega0_cm1", "center_fs", "amplitude"},
    "narrowband": {"omega3_cm1"},
    "bath": {"lambda_cm1", "Lambda_inv_fs", "temperature_K", "classical"},
    "trajectory": {"branch", "index", "kind", "omega0_cm1", "jump_cm1",
                   "center_fs", "sigma_m_fs", "rate_cm1_per_fs"},
    "grid.omega": {"min_cm1", "max_cm1", "n"},
    "grid.delta": {"min_cm1", "max_cm1", "n"},
    "grid.tau": {"min_fs", "max_fs", "n"},
    "scan": {"T_fs"},
    "mc": {"n_traj", "seed"},
    "resolution": {"task", "sigma_m_fs", "gap0_cm1", "jump_cm1", "t0_fs",
                   "T_fs", "gamma_a", "gamma_probe"},
}

_REL_TOL = 1e-3  # convergence / crosscheck tolerance on reported values


class ConfigError(Exception):
    """Raised for malformed or inconsistent run configs."""


class ConvergenceError(Exception):
    """Raised when a quadrature refinement misses the tolerance."""


# ---------------------------------------------------------------------------
# config handling

def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def apply_overrides(config, pairs):
    """Apply ``section.key=value`` overrides in place."""
    for pair in pairs:
        key, eq, raw = pair.partition("=")
        if not eq:
            raise ConfigError(f"override '{pair}' is not key=value")
        try:
            value = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw
        target = config
        parts = key.strip().split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override '{key}' crosses a scalar")
        target[parts[-1]] = value
    return config


def _flatten(config, prefix=""):
    out = {}
    for key, value in config.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def check_schema(config):
    """Return a list of unknown-key / bad-value error strings."""
    errors = []
    for name in _flatten(config):
        section, _, key = name.rpartition(".")
        allowed = _SCHEMA.get(section or None)
        if allowed is None:
            msg = f"unknown section [{section}]"
            if msg not in errors:
                errors.append(msg)
        elif key not in allowed:
            where = f" in [{section}]" if section else ""
            errors.append(f"unknown key '{key}'{where}")
    engine = config.get("engine")
    if engine is not None and engine not in _ENGINES:
        errors.append(f"engine must be one of {_ENGINES}, got '{engine}'")
    mode = config.get("mode", "fdir")
    if mode not in _MODES:
        errors.append(f"mode must be one of {_MODES}, got '{mode}'")
    return errors


def config_from_meta(meta):
    """Rebuild the config dict echoed into a CSV header."""
    config = {}
    pairs = []
    for key, value in meta.items():
        if not key.startswith("config."):
            continue
        if isinstance(value, str):
            try:
                value = ast.literal_eval(value)
            except (ValueError, SyntaxError):
                pass
        pairs.append((key[len("config."):], value))
    for name, value in pairs:
        target = config
        parts = name.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
    return config


def _echo_meta(config):
    return {f"config.{k}": v for k, v in _flatten(config).items()}


# ---------------------------------------------------------------------------
# section builders

def _build_scheme(section):
    if section is None:
        raise ConfigError("missing [scheme] section")
    kw = {}
    for src, dst, conv in (
            ("omega_a_cm1", "omega_a", True), ("gamma_a", "gamma_a", False),
            ("mu_ag", "mu_ag", False),
            ("omega_c_cm1", "omega_c", True), ("gamma_c", "gamma_c", False),
            ("mu_c", "mu_c", False), ("alpha_c", "alpha_c", False),
            ("omega_d_cm1", "omega_d", True), ("gamma_d", "gamma_d", False),
            ("mu_d", "mu_d", False), ("alpha_d", "alpha_d", False)):
        if src in section:
            value = np.asarray(section[src], dtype=float)
            kw[dst] = cm1_to_radfs(value) if conv else value
    try:
        return LevelScheme.build(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[scheme]: {exc}") from exc


def _build_bath(section):
    if section is None:
        raise ConfigError("missing [bath] section")
    try:
        return BathSpec(lam=cm1_to_radfs(float(section["lambda_cm1"])),
                        Lambda=1.0 / float(section["Lambda_inv_fs"]),
                        temperature_K=float(section["temperature_K"]))
    except KeyError as exc:
        raise ConfigError(f"[bath] missing key {exc}") from exc


def _build_trajectory(section):
    if section is None:
        return None
    try:
        branch = section["branch"]
        index = int(section.get("index", 0))
        kind = section["kind"]
        omega0 = cm1_to_radfs(float(section["omega0_cm1"]))
        if kind == "constant":
            traj = FrequencyTrajectory.constant(omega0)
        elif kind == "linear_chirp":
            rate = cm1_to_radfs(float(section["rate_cm1_per_fs"]))
            traj = FrequencyTrajectory.linear_chirp(omega0, rate)
        elif kind == "erf_switch":
            traj = FrequencyTrajectory.erf_switch(
                omega0, cm1_to_radfs(float(section["jump_cm1"])),
                float(section["center_fs"]), float(section["sigma_m_fs"]))
        else:
            raise ConfigError(f"unknown trajectory kind '{kind}'")
    except KeyError as exc:
        raise ConfigError(f"[trajectory] missing key {exc}") from exc
    if branch not in ("c", "d"):
        raise ConfigError("[trajectory] branch must be 'c' or 'd'")
    return {(branch, index): traj}


def _grid(section, name):
    if section is None:
        raise ConfigError(f"missing [grid.{name}] section")
    try:
        if name == "tau":
            lo, hi = float(section["min_fs"]), float(section["max_fs"])
        else:
            lo, hi = float(section["min_cm1"]), float(section["max_cm1"])
        n = int(section["n"])
    except KeyError as exc:
        raise ConfigError(f"[grid.{name}] missing key {exc}") from exc
    if not lo < hi:
        raise ConfigError(f"[grid.{name}] needs min < max")
    if n < 2:
        raise ConfigError(f"[grid.{name}] needs n >= 2")
    axis = np.linspace(lo, hi, n)
    return axis if name == "tau" else cm1_to_radfs(axis)


# ---------------------------------------------------------------------------
# output

_AXIS_OUT = {"omega": ("omega_cm1", radfs_to_cm1),
             "delta": ("delta_cm1", radfs_to_cm1),
             "tau": ("tau_fs", None), "T": ("T_fs", None)}


def externalize(sgrid):
    """Convert a SignalGrid's axes from internal to CSV units."""
    names, axes = [], []
    for name, axis in zip(sgrid.axis_names, sgrid.axes):
        out_name, conv = _AXIS_OUT.get(name, (name, None))
        names.append(out_name)
        axes.append(conv(axis) if conv else axis)
    meta = {k: v for k, v in sgrid.meta.items()}
    for key in ("T_fs",):
        if "T" in sgrid.meta and key not in meta:
            meta[key] = sgrid.meta["T"]
    return SignalGrid(tuple(names), tuple(axes), sgrid.values,
                      sgrid.stderr, meta)


def _write(sgrid, path, echo, report):
    sgrid = externalize(sgrid)
    sgrid.meta.update(echo)
    sgrid.to_csv(path)
    written = [path]
    if report:
        png = Path(path).with_suffix(".png")
        _render_quicklook(sgrid, png)
        written.append(str(png))
    return written


def _render_quicklook(sgrid, png_path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.6), constrained_layout=True)
    if len(sgrid.axes) == 2:
        x, y = sgrid.axes[1], sgrid.axes[0]
        z = np.abs(sgrid.values) ** 2
        pm = ax.pcolormesh(x, y, z, shading="auto", cmap="viridis")
        fig.colorbar(pm, ax=ax, label="|S|^2")
        ax.set_xlabel(sgrid.axis_names[1])
        ax.set_ylabel(sgrid.axis_names[0])
    else:
        x = sgrid.axes[0]
        if np.iscomplexobj(sgrid.values):
            ax.plot(x, np.abs(sgrid.values) ** 2, label="|S|^2")
        else:
            ax.plot(x, sgrid.values, label="S")
            if sgrid.stderr is not None:
                ax.fill_between(x, sgrid.values - sgrid.stderr,
                                sgrid.values + sgrid.stderr, alpha=0.3)
        ax.set_xlabel(sgrid.axis_names[0])
        ax.legend(frameon=False)
    title = sgrid.meta.get("signal", "")
    if title:
        ax.set_title(str(title))
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _check_refinement(sgrid, label):
    ref = sgrid.meta.get("refinement_delta")
    if ref is None:
        return
    scale = float(np.abs(sgrid.values).max())
    if scale > 0 and ref / scale > _REL_TOL:
        raise ConvergenceError(
            f"{label}: refinement delta {ref / scale:.3e} relative "
            f"exceeds {_REL_TOL:g}")


# ---------------------------------------------------------------------------
# engine dispatch

def run_config(config, out_dir="."):
    """Execute a parsed config; returns the list of files written."""
    errors = check_schema(config)
    if errors:
        raise ConfigError("; ".join(errors))
    engine = config.get("engine")
    if engine is None:
        raise ConfigError("missing 'engine' key")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = config.get("output", engine)
    mode = config.get("mode", "fdir")
    omega3 = cm1_to_radfs(float(
        config.get("narrowband", {}).get("omega3_cm1", 0.0)))
    if mode == "srs" and omega3 == 0.0:
        raise ConfigError("mode 'srs' needs [narrowband] omega3_cm1")
    threads = int(config.get("threads", 1))
    report = bool(config.get("report", False))
    echo = _echo_meta(config)

    if engine == "resolution":
        return _run_resolution(config, out_dir, base, mode, omega3,
                               threads, echo, report)

    scheme = _build_scheme(config.get("scheme"))
    prepared = PreparedState.from_impulsive_pump(scheme)
    omega = _grid(config.get("grid", {}).get("omega"), "omega")
    if mode == "srs":
        omega = omega + omega3
    T = float(config.get("scan", {}).get("T_fs", 0.0))
    written = []

    if engine in ("sos", "loop", "semiclassical"):
        delta = _grid(config.get("grid", {}).get("delta"), "delta")
        traj = _build_trajectory(config.get("trajectory"))
        if traj is not None and engine == "sos":
            raise ConfigError("engine 'sos' does not take a trajectory")
        if engine == "sos":
            sg = sos_delta_dispersed_prepared(scheme, prepared, omega,
                                              delta, T, mode, omega3)
        elif engine == "loop":
            sg = loop_delta_dispersed(scheme, prepared, omega, delta, T,
                                      mode, omega3, trajectories=traj)
        else:
            sg = sc_delta_dispersed(scheme, prepared, omega, delta, T,
                                    trajectories=traj, mode=mode,
                                    omega3=omega3)
        _check_refinement(sg, engine)
        written += _write(sg, str(out_dir / f"{base}_delta.csv"),
                          echo, report)
        if config.get("compare") == "sos":
            ref = sos_delta_dispersed_prepared(scheme, prepared, omega,
                                               delta, T, mode, omega3)
            diff = float(np.abs(sg.values - ref.values).max()
                         / np.abs(ref.values).max())
            ref.meta["compare_max_rel"] = diff
            written += _write(ref, str(out_dir / f"{base}_sos.csv"),
                              echo, report)
            if diff > _REL_TOL:
                raise ConvergenceError(
                    f"{engine} vs sos differ by {diff:.3e} relative")
        return written

    if engine in ("cumulant", "mc"):
        bath = _build_bath(config.get("bath"))
        classical = bool(config.get("bath", {}).get("classical", False))
        if engine == "cumulant":
            sg = sc_cumulant_impulsive(scheme, prepared, omega, T, bath,
                                       mode, omega3, classical=classical)
            written += _write(sg, str(out_dir / f"{base}_spec.csv"),
                              echo, report)
            return written
        mc_sec = config.get("mc", {})
        sg = mc_impulsive(scheme, prepared, omega, T, bath,
                          n_traj=int(mc_sec.get("n_traj", 1000)),
                          seed=int(mc_sec.get("seed", 0)),
                          mode=mode, omega3=omega3)
        written += _write(sg, str(out_dir / f"{base}_spec.csv"),
                          echo, report)
        if config.get("compare") == "cumulant":
            ref = sc_cumulant_impulsive(scheme, prepared, omega, T, bath,
                                        mode, omega3, classical=True)
            z = np.abs(sg.values - ref.values) / sg.stderr
            ref.meta["compare_max_z"] = float(z.max())
            written += _write(ref, str(out_dir / f"{base}_cumulant.csv"),
                              echo, report)
        return written

    raise ConfigError(f"unhandled engine '{engine}'")


def _run_resolution(config, out_dir, base, mode, omega3, threads, echo,
                    report):
    section = config.get("resolution")
    if section is None:
        raise ConfigError("engine 'resolution' needs a [resolution] section")
    task = section.get("task")
    common = {k: float(section[k]) for k in
              ("gap0_cm1", "jump_cm1", "t0_fs", "T_fs", "gamma_a",
               "gamma_probe") if k in section}
    if "T_fs" in common:
        common["T"] = common.pop("T_fs")
    if "t0_fs" in common:
        common["t0"] = common.pop("t0_fs")
    written = []
    if task == "fig3":
        sigma_m = float(section.get("sigma_m_fs", 20.0))
        sg_delta, sg_tau = fig3_scan(sigma_m, mode=mode, omega3=omega3,
                                     **common)
        written += _write(sg_delta, str(out_dir / f"{base}_delta.csv"),
                          echo, report)
        written += _write(sg_tau, str(out_dir / f"{base}_tau.csv"),
                          echo, report)
        return written
    if task == "fig4":
        common.pop("gamma_probe", None)
        sigma_m = np.atleast_1d(np.asarray(
            section.get("sigma_m_fs", (20.0, 200.0)), dtype=float))
        sigma_pr = np.atleast_1d(np.asarray(
            config.get("probe", {}).get("sigma_fs",
                                        (400.0, 200.0, 50.0, 20.0)),
            dtype=float))

        def panel(sm):
            return fig4_scan(sigma_m_list=(sm,),
                             sigma_pr_list=tuple(sigma_pr), **common)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                panels = [p for group in pool.map(panel, sigma_m)
                          for p in group]
        else:
            panels = [p for sm in sigma_m for p in panel(sm)]
        for prof in panels:
            name = (f"{base}_sm{prof.meta['sigma_m_fs']:g}"
                    f"_sp{prof.meta['sigma_pr_fs']:g}.csv")
            written += _write(prof, str(out_dir / name), echo, report)
        return written
    raise ConfigError(f"[resolution] task must be fig3 or fig4, got {task!r}")


# ---------------------------------------------------------------------------
# validate

def validate_config(config):
    """Schema and sanity report: list of (severity, message)."""
    findings = [("error", msg) for msg in check_schema(config)]
    engine = config.get("engine")
    if engine is None:
        findings.append(("error", "missing 'engine' key"))
        return findings

    if engine in ("sos", "loop", "semiclassical", "cumulant", "mc"):
        scheme_sec = config.get("scheme")
        if scheme_sec is None:
            findings.append(("error", "missing [scheme] section"))
        else:
            for key in ("omega_a_cm1", "omega_c_cm1", "omega_d_cm1"):
                vals = np.atleast_1d(np.asarray(
                    scheme_sec.get(key, []), dtype=float))
                if np.any(vals <= 0):
                    findings.append(
                        ("error", f"[scheme] {key} must be positive"))
        grid_sec = config.get("grid", {})
        if "omega" not in grid_sec:
            findings.append(("error", "missing [grid.omega] section"))
        if engine in ("sos", "loop", "semiclassical"):
            if "delta" not in grid_sec:
                findings.append(("error", "missing [grid.delta] section"))
            elif scheme_sec is not None:
                gammas = [np.atleast_1d(np.asarray(
                    scheme_sec.get(k, []), dtype=float))
                    for k in ("gamma_a", "gamma_c", "gamma_d")]
                gammas = np.concatenate(
                    [g for g in gammas if g.size] or [np.array([np.inf])])
                dsec = grid_sec["delta"]
                try:
                    step = cm1_to_radfs(
                        (float(dsec["max_cm1"]) - float(dsec["min_cm1"]))
                        / (int(dsec["n"]) - 1))
                    if step > gammas.min() / 5.0:
                        findings.append((
                            "warning",
                            "Delta step exceeds gamma_min/5; narrow "
                            "Lorentzian factors may be under-resolved"))
                except (KeyError, ValueError, ZeroDivisionError):
                    findings.append(
                        ("error", "[grid.delta] needs min_cm1/max_cm1/n"))
        if engine in ("cumulant", "mc") and "bath" not in config:
            findings.append(("error", "missing [bath] section"))
        # Nyquist-style lint: the omega grid should bracket a gap
        if scheme_sec is not None and "omega" in grid_sec:
            try:
                lo = float(grid_sec["omega"]["min_cm1"])
                hi = float(grid_sec["omega"]["max_cm1"])
                gaps = []
                om_a = np.atleast_1d(np.asarray(
                    scheme_sec.get("omega_a_cm1", []), dtype=float))
                for key, sign in (("omega_c_cm1", 1), ("omega_d_cm1", -1)):
                    other = np.atleast_1d(np.asarray(
                        scheme_sec.get(key, []), dtype=float))
                    for g in other:
                        gaps.extend(sign * (g - om_a) if sign > 0
                                    else (om_a - g))
                if gaps and not np.any((np.asarray(gaps) >= lo)
                                       & (np.asarray(gaps) <= hi)):
                    findings.append((
                        "warning",
                        "no detection gap of the scheme lies inside "
                        "[grid.omega]"))
            except (KeyError, ValueError):
                findings.append(
                    ("error", "[grid.omega] needs min_cm1/max_cm1/n"))
    elif engine == "resolution":
        if "resolution" not in config:
            findings.append(("error", "missing [resolution] section"))
        elif config["resolution"].get("task") not in ("fig3", "fig4"):
            findings.append(
                ("error", "[resolution] task must be fig3 or fig4"))
    if config.get("mode") == "srs" and "narrowband" not in config:
        findings.append(("error", "mode 'srs' needs [narrowband] section"))
    return findings


# ---------------------------------------------------------------------------
# presets

def preset_names():
    root = resources.files("vibroprobe.presets")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".toml"))


def preset_text(name):
    if not name.endswith(".toml"):
        name += ".toml"
    root = resources.files("vibroprobe.presets")
    path = root / name
    if not path.is_file():
        raise ConfigError(f"no preset named '{name}'; "
                          f"available: {', '.join(preset_names())}")
    return path.read_text(encoding="utf-8"), name


# ---------------------------------------------------------------------------
# entry point

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="vibroprobe",
        description="Time- and frequency-gated pump-probe vibrational "
                    "signal simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a run config")
    p_run.add_argument("config", help="path to a TOML run config")
    p_run.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads for independent panels")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--report", action="store_true",
                       help="also render a quick-look figure per CSV")

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="path to a TOML run config")

    p_pre = sub.add_parser("presets", help="list or copy shipped presets")
    pre_sub = p_pre.add_subparsers(dest="preset_command", required=True)
    pre_sub.add_parser("list", help="list available presets")
    p_copy = pre_sub.add_parser("copy", help="copy a preset to a directory")
    p_copy.add_argument("name", help="preset name, e.g. fig3")
    p_copy.add_argument("--out", default=".", help="destination directory")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            apply_overrides(config, args.overrides)
            if args.threads is not None:
                config["threads"] = args.threads
            if args.report:
                config["report"] = True
            written = run_config(config, out_dir=args.out)
            for path in written:
                print(path)
            return EXIT_OK
        if args.command == "validate":
            config = load_config(args.config)
            findings = validate_config(config)
            for severity, message in findings:
                print(f"{severity}: {message}")
            if not findings:
                print("ok")
            return (EXIT_CONFIG if any(s == "error" for s, _ in findings)
                    else EXIT_OK)
        if args.command == "presets":
            if args.preset_command == "list":
                for name in preset_names():
                    print(name)
                return EXIT_OK
            text, name = preset_text(args.name)
            dest = Path(args.out)
            dest.mkdir(parents=True, exist_ok=True)
            target = dest / name
            target.write_text(text, encoding="utf-8")
            print(target)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
