"""Command-line front end.

Each subcommand writes one or more CSV files plus ``<command>.manifest.json``
into the output directory.  A manifest can be replayed with
``padim replay <manifest>`` to regenerate byte-identical CSVs.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import RunConfig, load_config
from .dimensioning import baseline_comparison, dimension_pa
from .errors import ConfigError, NumericalError
from .geometry import CouplingStats, build_layout, coupling_stats, sample_grid, write_grid_csv
from .optimize import build_table, ee_curve, global_optimum
from .power import PaSpec
from .traffic import QueueInputs, hourly_distributions, load_profile, queue_distribution, solve_lambda_max

log = logging.getLogger("padim")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return v


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, argv, cfg: RunConfig, outputs) -> Path:
    manifest = {
        "command": command,
        "argv": list(argv),
        "config_text": cfg.to_text(),
        "config_sha256": cfg.digest(),
        "grid_seed": cfg.grid_seed,
        "versions": {
            "padim": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    path = out / f"{command}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def get_coupling(cfg: RunConfig, cache_dir: Path | None) -> CouplingStats:
    """Coupling averages, cached on disk under a hash of their inputs."""
    key_src = repr(
        (
            cfg.d_max,
            cfg.d_min,
            cfg.grid_size,
            cfg.grid_seed,
            cfg.pathloss_log10_gain,
            cfg.pathloss_exponent,
            cfg.system.downlink_power,
            __version__,
        )
    )
    key = hashlib.sha256(key_src.encode()).hexdigest()[:16]
    if cache_dir is not None:
        f = cache_dir / f"coupling-{key}.json"
        if f.is_file():
            d = json.loads(f.read_text())
            return CouplingStats(d["lambda_cc"], d["interference_sum"])
    layout = build_layout(cfg.d_max, cfg.d_min)
    grid = sample_grid(layout, cfg.grid_size, cfg.grid_seed)
    stats = coupling_stats(layout, grid, cfg.system.downlink_power, **cfg.pathloss_kw())
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        f.write_text(json.dumps({"lambda_cc": stats.lambda_cc, "interference_sum": stats.interference_sum}))
    return stats


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def cmd_coupling(args, cfg, out, cache):
    stats = get_coupling(cfg, cache)
    outputs = [
        write_csv(
            out / "coupling.csv",
            ["lambda_cc", "interference_sum_W", "grid_size", "grid_seed", "d_max_m", "d_min_m"],
            [[stats.lambda_cc, stats.interference_sum, cfg.grid_size, cfg.grid_seed, cfg.d_max, cfg.d_min]],
        )
    ]
    if args.grid_csv:
        layout = build_layout(cfg.d_max, cfg.d_min)
        grid = sample_grid(layout, cfg.grid_size, cfg.grid_seed)
        path = out / "grid.csv"
        write_grid_csv(path, layout, grid, **cfg.pathloss_kw())
        outputs.append(path)
    print(f"lambda_cc={stats.lambda_cc:.6g} interference_sum={stats.interference_sum:.6g} W")
    return outputs


def cmd_ee_sweep(args, cfg, out, cache):
    coupling = get_coupling(cfg, cache)
    family = args.family or cfg.pa_family
    rows = []
    for label in _csv_list(args.pmax):
        pa = cfg.pa(family, label)
        for k, m, ee in ee_curve(cfg.system, pa, coupling, range(1, args.k_max + 1), cfg.m_max):
            rows.append([k, label, m, ee])
    return [write_csv(out / "ee_sweep.csv", ["K", "p_max_pa_label", "M_opt", "EE_bits_per_joule"], rows)]


def _global(cfg, coupling, family):
    pa = PaSpec.from_config(cfg.system, family)
    return global_optimum(cfg.system, pa, coupling, cfg.k_scan_max, cfg.m_max)


def cmd_global_opt(args, cfg, out, cache):
    coupling = get_coupling(cfg, cache)
    family = args.family or cfg.pa_family
    go = _global(cfg, coupling, family)
    print(f"{family}: M_gOpt={go.m_gopt} K_gOpt={go.k_gopt} M/K={go.ratio:.3f} EE={go.ee:.6g} bit/J")
    return [
        write_csv(
            out / "global_opt_curve.csv",
            ["K", "M_opt", "EE_bits_per_joule"],
            zip(go.users, go.antennas, go.ee_curve),
        ),
        write_csv(
            out / "global_opt.csv",
            ["pa_family", "M_gOpt", "K_gOpt", "EE_bits_per_joule"],
            [[family, go.m_gopt, go.k_gopt, go.ee]],
        ),
    ]


def cmd_queue(args, cfg, out, cache):
    coupling = get_coupling(cfg, cache)
    family = args.family or cfg.pa_family
    go = _global(cfg, coupling, family)
    pa = cfg.pa(family, args.pmax)
    table = build_table(cfg.system, pa, coupling, go.k_gopt, cfg.m_max)
    q = QueueInputs.from_table(table, cfg.sigma_bits)
    lam = solve_lambda_max(q, cfg.target_blocking)
    rows = []
    for load in (float(x) for x in _csv_list(args.loads)):
        if not 0 <= load:
            raise ConfigError(f"loads must be non-negative, got {load}")
        dist = queue_distribution(q.with_arrival_rate(load * lam))
        print(f"load {load:g}: mean users {dist.mean():.3f}, top-state probability {dist.blocking:.6g}")
        rows += [[load, n, p] for n, p in enumerate(dist.pi)]
    outputs = [write_csv(out / "queue.csv", ["load_fraction", "n_users", "probability"], rows)]
    if args.hourly:
        profile = load_profile(cfg.profile)
        dists = hourly_distributions(profile, lam, q)
        header = ["hour"] + [f"pi_n{n}" for n in range(q.m + 1)]
        outputs.append(
            write_csv(out / "queue_hourly.csv", header, ([h, *d.pi] for h, d in enumerate(dists)))
        )
    print(f"m={q.m} lambda_max={lam:.6g} 1/s (sigma={cfg.sigma_bits:g} bit)")
    return outputs


def _dimension(cfg, coupling, family, profile):
    return dimension_pa(
        cfg.system,
        coupling,
        profile,
        family,
        cfg.sigma_bits,
        cfg.target_blocking,
        cfg.k_scan_max,
        cfg.m_max,
    )


def cmd_dimension(args, cfg, out, cache):
    coupling = get_coupling(cfg, cache)
    families = _csv_list(args.family) if args.family else [cfg.pa_family]
    profiles = _csv_list(args.profiles) if args.profiles else [cfg.profile]
    rows, outputs = [], []
    for family in families:
        for pname in profiles:
            profile = load_profile(pname)
            rep = _dimension(cfg, coupling, family, profile)
            rows += [[c.p_max_pa, c.weighted_ee, profile.name, family] for c in rep.candidates]
            path = out / f"dimension_{family}_{profile.name}.json"
            path.write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
            outputs.append(path)
            print(
                f"{family}/{profile.name}: best P_max={rep.best_p_max_pa:.4g} W "
                f"({rep.best.min_active_antennas} active antennas), "
                f"weighted EE={rep.best_weighted_ee:.6g} bit/J"
            )
    outputs.insert(
        0,
        write_csv(out / "dimension.csv", ["p_max_pa_W", "weighted_ee", "profile_name", "pa_family"], rows),
    )
    return outputs


def cmd_compare_baseline(args, cfg, out, cache):
    coupling = get_coupling(cfg, cache)
    family = args.family or cfg.pa_family
    profile = load_profile(cfg.profile)
    go = _global(cfg, coupling, family)
    if args.pmax:
        pa = cfg.pa(family, args.pmax)
    else:
        rep = _dimension(cfg, coupling, family, profile)
        pa = PaSpec.from_config(cfg.system, family, rep.best_p_max_pa)
    cmp = baseline_comparison(
        cfg.system,
        pa,
        coupling,
        profile,
        go.k_gopt,
        go.m_gopt,
        sigma_t=cfg.sigma_bits,
        target_blocking=cfg.target_blocking,
        m_max=cfg.m_max,
    )
    a, f = cmp.adaptive.table, cmp.fixed.table
    rows = [[n, a.antennas[n], a.ee[n], f.antennas[n], f.ee[n]] for n in range(1, a.m + 1)]
    print(
        f"P_max={pa.p_max_pa:.4g} W: adaptive {cmp.adaptive.value:.6g} bit/J vs fixed at "
        f"M_gOpt={go.m_gopt} {cmp.fixed.value:.6g} bit/J, gain {cmp.gain_percent:.2f}%"
    )
    return [
        write_csv(
            out / "baseline_states.csv",
            ["n_users", "M_adaptive", "EE_adaptive_bits_per_joule", "M_fixed", "EE_fixed_bits_per_joule"],
            rows,
        ),
        write_csv(
            out / "baseline.csv",
            [
                "pa_family",
                "p_max_pa_W",
                "M_gOpt",
                "K_gOpt",
                "weighted_ee_adaptive",
                "weighted_ee_fixed",
                "gain_percent",
                "profile_name",
            ],
            [[family, pa.p_max_pa, go.m_gopt, go.k_gopt, cmp.adaptive.value, cmp.fixed.value, cmp.gain_percent, profile.name]],
        ),
    ]


COMMANDS = {
    "coupling": cmd_coupling,
    "ee-sweep": cmd_ee_sweep,
    "global-opt": cmd_global_opt,
    "queue": cmd_queue,
    "dimension": cmd_dimension,
    "compare-baseline": cmd_compare_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="flat key = value config file")
    common.add_argument("-o", "--out", help="output directory (overrides output_dir)")
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key"
    )
    common.add_argument("--cache-dir", help="coupling cache directory (default: <out>/.cache)")
    common.add_argument("--no-cache", action="store_true", help="recompute coupling averages")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="padim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"padim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("coupling", parents=[common], help="grid-averaged coupling terms")
    s.add_argument("--grid-csv", action="store_true", help="also export per-point gains")

    s = sub.add_parser("ee-sweep", parents=[common], help="per-K optimal antennas and EE")
    s.add_argument("--pmax", default="variable,21dB,8dB,1dB", help="comma-separated P_max labels")
    s.add_argument("--family", choices=["etpa", "tpa"])
    s.add_argument("--k-max", type=int, default=150)

    s = sub.add_parser("global-opt", parents=[common], help="global EE maximiser (M_gOpt, K_gOpt)")
    s.add_argument("--family", choices=["etpa", "tpa"])

    s = sub.add_parser("queue", parents=[common], help="user-state distributions at given loads")
    s.add_argument("--loads", default="0.5,1.0")
    s.add_argument("--family", choices=["etpa", "tpa"])
    s.add_argument("--pmax", default=None, help="P_max label (default: config p_max_pa)")
    s.add_argument("--hourly", action="store_true", help="also write the 24-hour table")

    s = sub.add_parser("dimension", parents=[common], help="day-weighted EE per candidate P_max")
    s.add_argument("--family", help="etpa, tpa or etpa,tpa")
    s.add_argument("--profiles", help="comma-separated profiles (default: config profile)")

    s = sub.add_parser("compare-baseline", parents=[common], help="adaptive vs fixed-M_gOpt system")
    s.add_argument("--family", choices=["etpa", "tpa"])
    s.add_argument("--pmax", help="P_max label; default runs the dimensioning first")

    s = sub.add_parser("replay", help="re-run a manifest")
    s.add_argument("manifest")
    s.add_argument("-o", "--out", help="output directory (default: the manifest's directory)")
    return p


def _run(args, argv) -> int:
    if args.command == "replay":
        mpath = Path(args.manifest)
        manifest = json.loads(mpath.read_text())
        new_argv = list(manifest["argv"])
        out = Path(args.out) if args.out else mpath.parent
        cfg_file = out / f".{manifest['command']}.replay.conf"
        out.mkdir(parents=True, exist_ok=True)
        cfg_file.write_text(manifest["config_text"])
        # the recorded argv already carries its --set overrides in config_text
        cleaned = _strip_options(new_argv, {"-c", "--config", "-o", "--out", "--set"})
        return main(cleaned + ["--config", str(cfg_file), "--out", str(out)])

    cfg = load_config(args.config, args.set)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = None if args.no_cache else Path(args.cache_dir) if args.cache_dir else out / ".cache"
    outputs = COMMANDS[args.command](args, cfg, out, cache)
    write_manifest(out, args.command, argv, cfg, outputs)
    for p in outputs:
        log.info("wrote %s", p)
    return 0


def _strip_options(argv, names):
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in names:
            skip = True
            continue
        if any(tok.startswith(n + "=") for n in names if n.startswith("--")):
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args, argv)
    except ConfigError as exc:
        print(f"padim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"padim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
