"""Command-line front end: spectra, steady states, trajectories, sweeps.

Configuration lives in a single JSON file (see README for the schema);
command-line flags override file values.  Every output file carries a
JSON header line with the full configuration and package version so runs
are reproducible byte for byte (modulo the version field).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, analytics, ed, spectral, stochastic
from .channels import ChannelStrengths, LinearChannel, make_channel
from .evolution import evolve, fit_decay_rate
from .majorana import ground_state_cm, occupations, site_polarization, to_momentum
from .models import TIBlockSpec, XYParams, from_blocks, xy_chain


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending field path."""


FMT = "%.17g"


# ---------------------------------------------------------------------------
# configuration handling

DEFAULTS = {
    "task": None,
    "model": {"kind": "xy", "n_sites": 10, "coupling": 1.0, "gamma": 1.0,
              "field": 1.0, "blocks": None},
    "channel": {"preset": "dephasing-z", "g": 0.01, "mu": 1.0, "nu": 0.0},
    "output": {"path": None, "format": "csv"},
    "seed": 0,
    "spectrum": {"sector": "antisymmetric"},
    "evolve": {"t_end": 100.0, "dt": None, "initial": "ground",
               "sample_interval": None, "fit": False},
    "sweep": {"field_start": 0.0, "field_stop": 6.0, "field_num": 61,
              "gammas": [0.1, 0.3, 0.5, 1.0], "mode": "closed-form",
              "n_sites": None},
    "oracle": {"t_end": 50.0, "n_samples": 101},
    "stochastic": {"variance": 0.04, "correlation_time": 0.01, "t_end": 30.0,
                   "n_traj": 1000, "sample_stride": 50},
    "analytics": {"field_start": 0.0, "field_stop": 6.0, "field_num": 61,
                  "gammas": [0.1, 0.3, 0.5, 1.0], "mu": 1.0, "nu": 0.0},
}


def _merge(base: dict, update: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in update.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"{here}: unknown field")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, here)
        else:
            out[key] = val
    return out


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = DEFAULTS
    if path is not None:
        try:
            with open(path) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file: invalid JSON ({exc})") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file: top level must be an object")
        cfg = _merge(cfg, file_cfg)
    cfg = _merge(cfg, overrides)
    validate_config(cfg)
    return cfg


def _require(cond: bool, where: str, message: str):
    if not cond:
        raise ConfigError(f"{where}: {message}")


def validate_config(cfg: dict):
    model = cfg["model"]
    _require(model["kind"] in ("xy", "blocks"), "model.kind", "must be 'xy' or 'blocks'")
    _require(isinstance(model["n_sites"], int) and model["n_sites"] >= 2,
             "model.n_sites", "must be an integer >= 2")
    if model["kind"] == "blocks":
        _require(isinstance(model["blocks"], dict) and model["blocks"],
                 "model.blocks", "must map site differences to 2x2 blocks")
    ch = cfg["channel"]
    _require(ch["preset"] in ("loss-gain", "paired", "dephasing-z", "xx-coupling",
                              "dephasing-xx-mix"),
             "channel.preset", f"unknown preset {ch['preset']!r}")
    _require(ch["g"] >= 0, "channel.g", "must be >= 0")
    _require(cfg["output"]["format"] in ("csv", "json"), "output.format",
             "must be 'csv' or 'json'")
    _require(cfg["spectrum"]["sector"] in ("antisymmetric", "full"),
             "spectrum.sector", "must be 'antisymmetric' or 'full'")
    ev = cfg["evolve"]
    _require(ev["t_end"] > 0, "evolve.t_end", "must be > 0")
    _require(ev["initial"] in ("ground", "zero", "steady"), "evolve.initial",
             "must be 'ground', 'zero' or 'steady'")
    sw = cfg["sweep"]
    _require(sw["field_num"] >= 1, "sweep.field_num", "sweep range must be non-empty")
    _require(sw["field_stop"] >= sw["field_start"], "sweep.field_stop",
             "must be >= field_start")
    _require(len(sw["gammas"]) >= 1, "sweep.gammas", "sweep range must be non-empty")
    _require(sw["mode"] in ("closed-form", "momentum-sum", "dense"), "sweep.mode",
             "must be 'closed-form', 'momentum-sum' or 'dense'")
    st = cfg["stochastic"]
    _require(st["correlation_time"] > 0, "stochastic.correlation_time", "must be > 0")
    _require(st["n_traj"] >= 1, "stochastic.n_traj", "must be >= 1")
    an = cfg["analytics"]
    _require(an["field_num"] >= 1, "analytics.field_num", "sweep range must be non-empty")
    _require(len(an["gammas"]) >= 1, "analytics.gammas", "sweep range must be non-empty")


def build_model(cfg: dict) -> np.ndarray:
    model = cfg["model"]
    if model["kind"] == "xy":
        params = XYParams(n_sites=model["n_sites"], coupling=model["coupling"],
                          gamma=model["gamma"], field=model["field"])
        return xy_chain(params)
    blocks = {int(s): np.asarray(blk, dtype=float)
              for s, blk in model["blocks"].items()}
    return from_blocks(TIBlockSpec(n_sites=model["n_sites"], blocks=blocks))


def build_channel(cfg: dict):
    ch = cfg["channel"]
    strengths = ChannelStrengths(g=ch["g"], mu=ch["mu"], nu=ch["nu"])
    return make_channel(ch["preset"], cfg["model"]["n_sites"], strengths)


# ---------------------------------------------------------------------------
# output helpers

def _header(cfg: dict) -> str:
    record = {"config": cfg, "version": __version__}
    return "# " + json.dumps(record, sort_keys=True)


def write_csv(path: str, cfg: dict, columns: list[str], rows) -> None:
    lines = [_header(cfg), ",".join(columns)]
    for row in rows:
        lines.append(",".join(FMT % v for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, cfg: dict, payload: dict) -> None:
    record = {"config": cfg, "version": __version__, "result": payload}
    with open(path, "w") as fh:
        json.dump(record, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _out_path(cfg: dict, default: str) -> str:
    return cfg["output"]["path"] or default


# ---------------------------------------------------------------------------
# tasks

def _assemble(cfg: dict):
    h = build_model(cfg)
    channel = build_channel(cfg)
    if isinstance(channel, LinearChannel):
        return h, channel, spectral.assemble_linear(h, channel)
    return h, channel, spectral.assemble_quadratic(h, channel)


def task_spectrum(cfg: dict) -> int:
    _, _, superop = _assemble(cfg)
    spec = spectral.spectrum(superop, sector=cfg["spectrum"]["sector"])
    payload = {
        "adr": spec.adr,
        "zero_threshold": spec.zero_threshold,
        "zero_cluster_size": spec.zero_cluster_size,
        "adr_cluster_size": spec.adr_cluster_size,
        "n_eigenvalues": len(spec.eigenvalues),
        "sector": cfg["spectrum"]["sector"],
    }
    if cfg["output"]["format"] == "json":
        payload["eigenvalues"] = spec.eigenvalues
        write_json(_out_path(cfg, "spectrum.json"), cfg, payload)
    else:
        path = _out_path(cfg, "spectrum.csv")
        order = np.lexsort((spec.eigenvalues.imag, spec.eigenvalues.real))
        write_csv(path, cfg, ["re_lambda", "im_lambda"],
                  ((ev.real, ev.imag) for ev in spec.eigenvalues[order]))
        write_json(path + ".json", cfg, payload)
    return 0


def task_steady(cfg: dict) -> int:
    _, channel, superop = _assemble(cfg)
    if not isinstance(channel, LinearChannel):
        raise ConfigError(
            "channel.preset: steady-state solve needs a linear channel "
            "(quadratic Hermitian channels relax to the maximally mixed state)"
        )
    gamma = spectral.steady_state_linear(superop)
    payload = {
        "site_polarization": site_polarization(gamma),
        "occupations": occupations(gamma),
        "pairing_nearest": analytics.pairing_matrix(gamma).diagonal(1),
    }
    if cfg["output"]["format"] == "json":
        payload["covariance_matrix"] = gamma
        write_json(_out_path(cfg, "steady.json"), cfg, payload)
    else:
        path = _out_path(cfg, "steady.csv")
        write_csv(path, cfg, [f"col_{j}" for j in range(gamma.shape[1])], gamma)
        write_json(path + ".json", cfg, payload)
    return 0


def task_evolve(cfg: dict) -> int:
    h = build_model(cfg)
    channel = build_channel(cfg)
    ev = cfg["evolve"]
    steady = None
    if ev["initial"] == "ground":
        gamma0 = ground_state_cm(to_momentum(h))
    elif ev["initial"] == "zero":
        gamma0 = np.zeros_like(h)
    else:
        if not isinstance(channel, LinearChannel):
            raise ConfigError("evolve.initial: 'steady' needs a linear channel")
        gamma0 = spectral.steady_state_linear(spectral.assemble_linear(h, channel))
    if isinstance(channel, LinearChannel):
        steady = spectral.steady_state_linear(spectral.assemble_linear(h, channel))
    traj = evolve(gamma0, h, channel, ev["t_end"], ev["dt"],
                  sample_interval=ev["sample_interval"], steady_state=steady)
    n = traj.n_sites
    columns = ["t"] + [f"site_{j}" for j in range(n)] + ["mean_mag", "dist_ss"]
    rows = np.column_stack([traj.times, traj.site_values,
                            traj.mean_polarization, traj.distance_to_steady])
    path = _out_path(cfg, "trajectory.csv")
    if cfg["output"]["format"] == "json":
        payload = {"times": traj.times, "site_values": traj.site_values,
                   "mean_polarization": traj.mean_polarization,
                   "distance_to_steady": traj.distance_to_steady}
        if ev["fit"]:
            payload["decay_fit"] = asdict(fit_decay_rate(traj))
        write_json(_out_path(cfg, "trajectory.json"), cfg, payload)
    else:
        write_csv(path, cfg, columns, rows)
        if ev["fit"]:
            write_json(path + ".json", cfg, {"decay_fit": asdict(fit_decay_rate(traj))})
    return 0


def _sweep_point(args):
    gamma_val, field, cfg = args
    sw = cfg["sweep"]
    model = cfg["model"]
    ch = cfg["channel"]
    n_sites = sw["n_sites"] or model["n_sites"]
    g = ch["g"]
    if sw["mode"] == "closed-form":
        adr = analytics.xy_adr_closed_form(gamma_val, field, model["coupling"], g)
    else:
        params = XYParams(n_sites=n_sites, coupling=model["coupling"],
                          gamma=gamma_val, field=field)
        blocks = to_momentum(xy_chain(params))
        if sw["mode"] == "momentum-sum":
            adr = analytics.adr_weak_coupling_sum(blocks, g)
        else:  # dense
            strengths = ChannelStrengths(g=g, mu=ch["mu"], nu=ch["nu"])
            channel = make_channel(ch["preset"], n_sites, strengths)
            superop = spectral.assemble_quadratic(xy_chain(params), channel)
            adr = spectral.spectrum(superop).adr
    return gamma_val, field, adr, adr / g**2 if g > 0 else np.nan


def task_sweep_adr(cfg: dict) -> int:
    sw = cfg["sweep"]
    fields = np.linspace(sw["field_start"], sw["field_stop"], sw["field_num"])
    points = [(gamma_val, float(field), cfg)
              for gamma_val in sw["gammas"] for field in fields]
    workers = int(os.environ.get("FERMICOV_WORKERS", "1"))
    if workers > 1 and len(points) > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            rows = pool.map(_sweep_point, points)
    else:
        rows = [_sweep_point(p) for p in points]
    path = _out_path(cfg, "sweep_adr.csv")
    write_csv(path, cfg, ["gamma", "field", "adr", "adr_over_g2"], rows)
    return 0


def task_oracle(cfg: dict) -> int:
    model = cfg["model"]
    if model["n_sites"] > 3:
        raise ConfigError("model.n_sites: oracle task needs n_sites <= 3")
    h = build_model(cfg)
    channel = build_channel(cfg)
    report = ed.oracle_compare(h, channel, t_end=cfg["oracle"]["t_end"],
                               n_samples=cfg["oracle"]["n_samples"])
    write_json(_out_path(cfg, "oracle.json"), cfg, report.as_dict())
    return 0 if report.passed else 3


def task_stochastic(cfg: dict) -> int:
    h = build_model(cfg)
    st = cfg["stochastic"]
    spec = stochastic.NoiseSpec(variance=st["variance"],
                                correlation_time=st["correlation_time"],
                                seed=cfg["seed"])
    gamma0 = ground_state_cm(to_momentum(h))
    comp = stochastic.averaged_evolution(h, spec, gamma0, st["t_end"], st["n_traj"],
                                         sample_stride=st["sample_stride"])
    slope, sizes, devs = stochastic.convergence_exponent(comp)
    payload = {
        "g_squared": comp.g_squared_used,
        "max_deviation": comp.max_deviation,
        "max_sigma_units": comp.max_sigma_units,
        "candidate_deviations": comp.candidate_deviations,
        "convergence_slope": slope,
        "convergence_sizes": sizes,
        "convergence_deviations": devs,
        "markov_scale": spec.markov_scale(h),
    }
    path = _out_path(cfg, "stochastic.csv")
    n = comp.average_cm.shape[1] // 2
    j = np.arange(n)
    site_vals = comp.average_cm[:, 2 * j, 2 * j + 1]
    lind_vals = comp.lindblad_cm[:, 2 * j, 2 * j + 1]
    dev = np.max(np.abs(comp.average_cm - comp.lindblad_cm), axis=(1, 2))
    columns = ["t"] + [f"site_{k}" for k in range(n)] + ["mean_mag", "dist_lindblad"]
    rows = np.column_stack([comp.times, site_vals, site_vals.mean(axis=1), dev])
    if cfg["output"]["format"] == "json":
        payload["times"] = comp.times
        payload["mean_polarization"] = site_vals.mean(axis=1)
        payload["lindblad_polarization"] = lind_vals.mean(axis=1)
        write_json(_out_path(cfg, "stochastic.json"), cfg, payload)
    else:
        write_csv(path, cfg, columns, rows)
        write_json(path + ".json", cfg, payload)
    return 0


def task_analytics(cfg: dict) -> int:
    an = cfg["analytics"]
    model = cfg["model"]
    ch = cfg["channel"]
    fields = np.linspace(an["field_start"], an["field_stop"], an["field_num"])
    rows = []
    for gamma_val in an["gammas"]:
        for field in fields:
            adr = analytics.xy_adr_closed_form(gamma_val, float(field),
                                               model["coupling"], ch["g"])
            pol = analytics.xy_polarization_closed_form(
                gamma_val, float(field), model["coupling"], an["mu"], an["nu"])
            pole_set = analytics.poles(float(field), model["coupling"], gamma_val) \
                if gamma_val != -1.0 else None
            rows.append((
                gamma_val, float(field), adr, adr / ch["g"]**2 if ch["g"] > 0 else np.nan,
                pol, analytics.occupation_from_polarization(pol),
                abs(pole_set.z_plus) if pole_set else np.nan,
                abs(pole_set.z_minus) if pole_set else np.nan,
                float(pole_set.z_plus_inside) if pole_set else np.nan,
                float(pole_set.z_minus_inside) if pole_set else np.nan,
            ))
    path = _out_path(cfg, "analytics.csv")
    write_csv(path, cfg, ["gamma", "field", "adr", "adr_over_g2", "polarization",
                          "occupation", "abs_z_plus", "abs_z_minus",
                          "z_plus_inside", "z_minus_inside"], rows)
    return 0


TASKS = {
    "spectrum": task_spectrum,
    "steady": task_steady,
    "evolve": task_evolve,
    "sweep-adr": task_sweep_adr,
    "oracle": task_oracle,
    "stochastic": task_stochastic,
    "analytics": task_analytics,
}


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--n-sites", type=int)
    parser.add_argument("--coupling", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--field", type=float)
    parser.add_argument("--preset", help="channel preset")
    parser.add_argument("--g", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--nu", type=float)
    parser.add_argument("--seed", type=int)


def _overrides_from_args(args: argparse.Namespace) -> dict:
    over: dict = {"model": {}, "channel": {}, "output": {}}
    if args.n_sites is not None:
        over["model"]["n_sites"] = args.n_sites
    if args.coupling is not None:
        over["model"]["coupling"] = args.coupling
    if args.gamma is not None:
        over["model"]["gamma"] = args.gamma
    if args.field is not None:
        over["model"]["field"] = args.field
    if args.preset is not None:
        over["channel"]["preset"] = args.preset
    if args.g is not None:
        over["channel"]["g"] = args.g
    if args.mu is not None:
        over["channel"]["mu"] = args.mu
    if args.nu is not None:
        over["channel"]["nu"] = args.nu
    if args.out is not None:
        over["output"]["path"] = args.out
    if args.format is not None:
        over["output"]["format"] = args.format
    if args.seed is not None:
        over["seed"] = args.seed
    task_over = {}
    for group, names in (
        ("evolve", ("t_end", "dt")),
        ("stochastic", ("variance", "correlation_time", "n_traj")),
        ("sweep", ("mode",)),
        ("spectrum", ("sector",)),
    ):
        for name in names:
            val = getattr(args, f"{group}_{name}", None)
            if val is not None:
                task_over.setdefault(group, {})[name] = val
    over.update(task_over)
    return {k: v for k, v in over.items() if v != {}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermicov",
        description="Dissipative quasi-free fermion chains at the covariance-matrix level",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        _add_common(p)
        if task == "evolve":
            p.add_argument("--t-end", dest="evolve_t_end", type=float)
            p.add_argument("--dt", dest="evolve_dt", type=float)
        if task == "stochastic":
            p.add_argument("--variance", dest="stochastic_variance", type=float)
            p.add_argument("--correlation-time", dest="stochastic_correlation_time",
                           type=float)
            p.add_argument("--n-traj", dest="stochastic_n_traj", type=int)
        if task == "sweep-adr":
            p.add_argument("--mode", dest="sweep_mode",
                           choices=["closed-form", "momentum-sum", "dense"])
        if task == "spectrum":
            p.add_argument("--sector", dest="spectrum_sector",
                           choices=["antisymmetric", "full"])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides_from_args(args))
        cfg["task"] = args.task
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return TASKS[args.task](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical / runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
