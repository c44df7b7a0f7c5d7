"""Unified command line: train | eval | fit-reference | plot-data | scenario-list.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 divergence
under --strict. Every run directory gets a manifest (config hash, seed,
code version, backend, timestamps, output inventory) written at start
and finalized at the end; data files themselves carry no timestamps so
fixed-seed reruns are byte-identical.
"""

import argparse
import glob
import json
import os
import sys
import time

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .config import (
    ConfigError,
    baseline_gains,
    config_hash,
    parse_and_validate,
    train_config,
    training_env_config,
    vehicle_params,
)
from .losses import ReferenceGaussians
from .metrics import MetricsReport, compare_report, write_plot_csvs
from .runner import make_controller, run_scenario
from .scenarios import ScenarioConfig, WindConfig, scenario_catalog


def _manifest_start(out_dir, cfg, seed, command):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": seed,
        "code_version": __version__,
        "backend": BACKEND,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "finished": None,
        "outputs": [],
        "status": "running",
    }
    _manifest_write(out_dir, manifest)
    return manifest


def _manifest_write(out_dir, manifest):
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _manifest_finish(out_dir, manifest, status="complete"):
    manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    manifest["status"] = status
    manifest["outputs"] = sorted(
        os.path.relpath(p, out_dir)
        for p in glob.glob(os.path.join(out_dir, "**", "*"), recursive=True)
        if os.path.isfile(p) and os.path.basename(p) != "manifest.json"
    )
    _manifest_write(out_dir, manifest)


def load_scenario_file(path) -> ScenarioConfig:
    """Scenario from a JSON file (same fields as the catalog entries)."""
    with open(path) as fh:
        raw = json.load(fh)
    wind = None
    if raw.get("wind"):
        wind = WindConfig(
            mean_force=np.asarray(raw["wind"].get("mean_force", [3.0, 0.0, 0.0])),
            gust_amplitude=raw["wind"].get("gust_amplitude", 1.0),
            gust_frequency=raw["wind"].get("gust_frequency", 0.5),
            per_propeller=raw["wind"].get("per_propeller", False),
            per_prop_amplitude=raw["wind"].get("per_prop_amplitude", 0.5),
            per_prop_bandwidth=raw["wind"].get("per_prop_bandwidth", 20.0),
        )
    attached = raw.get("attached_mass")
    return ScenarioConfig(
        name=raw.get("name", os.path.splitext(os.path.basename(path))[0]),
        reference_position=np.asarray(raw.get("reference_position", [0.0, 0.0, 1.5])),
        reference_attitude=np.asarray(raw.get("reference_attitude", [1.0, 0.0, 0.0, 0.0])),
        ground_plane=raw.get("ground_plane", False),
        attached_mass=(attached[0], np.asarray(attached[1])) if attached else None,
        wind=wind,
        duration=raw.get("duration", 10.0),
        randomize=raw.get("randomize", False),
        controller=raw.get("controller"),
    )


def _resolve_scenario(spec) -> ScenarioConfig:
    catalog = scenario_catalog()
    if spec in catalog:
        return catalog[spec]
    if os.path.exists(spec):
        return load_scenario_file(spec)
    raise ConfigError(
        f"unknown scenario '{spec}'; catalog: {', '.join(sorted(catalog))}"
    )


def _controller_label(spec):
    if spec == "baseline":
        return "baseline"
    stem = os.path.splitext(os.path.basename(spec))[0]
    return f"policy-{stem}"


def cmd_train(args) -> int:
    from .train import TrainingDivergedError, train

    cfg = parse_and_validate(args.config, args.set or ())
    nominal = vehicle_params(cfg)
    env_cfg = training_env_config(cfg)
    tcfg = train_config(cfg, args.seed)
    manifest = _manifest_start(args.out, cfg, args.seed, "train")
    reference = None
    if args.reference:
        with open(args.reference) as fh:
            raw = json.load(fh)
        reference = ReferenceGaussians(
            raw["mu_tilt"], raw["sigma_tilt"], raw["mu_prop"], raw["sigma_prop"]
        ).validate()
    try:
        train(
            tcfg, nominal, env_cfg, args.out,
            reference=reference, resume=args.resume,
            config_hash=config_hash(cfg), quiet=args.quiet,
        )
    except TrainingDivergedError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        _manifest_finish(args.out, manifest, status="diverged")
        return 1
    _manifest_finish(args.out, manifest)
    return 0


def cmd_eval(args) -> int:
    cfg = parse_and_validate(args.config, args.set or ())
    nominal = vehicle_params(cfg)
    gains = baseline_gains(cfg)
    scenario = _resolve_scenario(args.scenario)
    controllers = args.controller or ([scenario.controller] if scenario.controller else [])
    if not controllers:
        print("eval: at least one --controller required", file=sys.stderr)
        return 2
    if len(controllers) > 2:
        print("eval: at most two controllers", file=sys.stderr)
        return 2
    manifest = _manifest_start(args.out, cfg, args.seed, "eval")

    reports = []
    labels = []
    for spec in controllers:
        label = _controller_label(spec)
        if label in labels:
            label += "-2"
        labels.append(label)
        controller = make_controller(spec, nominal, gains)
        controller.name = label
        traj, report = run_scenario(
            scenario, controller, args.seed, nominal,
            steady_start=cfg["eval"]["steady_start"],
            k_f_nominal=nominal.k_f,
        )
        sub = os.path.join(args.out, label)
        os.makedirs(sub, exist_ok=True)
        traj.to_csv(os.path.join(sub, "trajectory.csv"))
        report.to_json(os.path.join(sub, "metrics.json"))
        reports.append(report)
        state = "DIVERGED" if report.diverged else "ok"
        print(
            f"{scenario.name} / {label}: mean|e_p| = "
            f"{report.position_error['total']['mean']:.4f} m, "
            f"mean|e_R| = {report.attitude_error['total']['mean']:.4f}  [{state}]"
        )

    if len(reports) == 2:
        cmp_dict, cmp_text = compare_report(reports[0], reports[1])
        with open(os.path.join(args.out, "compare.txt"), "w") as fh:
            fh.write(cmp_text)
        with open(os.path.join(args.out, "compare.json"), "w") as fh:
            json.dump(cmp_dict, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(cmp_text)

    diverged = any(r.diverged for r in reports)
    _manifest_finish(args.out, manifest, status="diverged" if diverged else "complete")
    if diverged and args.strict:
        return 3
    return 0


def cmd_fit_reference(args) -> int:
    from .train import fit_reference_from_baseline

    cfg = parse_and_validate(args.config, args.set or ())
    nominal = vehicle_params(cfg)
    env_cfg = training_env_config(cfg)
    ref = fit_reference_from_baseline(
        nominal, env_cfg, seed=args.seed, min_samples=args.samples
    )
    payload = {
        "mu_tilt": ref.mu_tilt,
        "sigma_tilt": ref.sigma_tilt,
        "mu_prop": ref.mu_prop,
        "sigma_prop": ref.sigma_prop,
        "samples": args.samples,
        "seed": args.seed,
        "config_hash": config_hash(cfg),
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(
        f"fitted reference gaussians: tilt N({ref.mu_tilt:.4g}, {ref.sigma_tilt:.4g}^2), "
        f"prop N({ref.mu_prop:.4g}, {ref.sigma_prop:.4g}^2) -> {args.out}"
    )
    return 0


def cmd_plot_data(args) -> int:
    paths = []
    for spec in args.run:
        if os.path.isfile(spec):
            paths.append(spec)
        else:
            paths.extend(
                sorted(glob.glob(os.path.join(spec, "**", "metrics.json"), recursive=True))
            )
    if not paths:
        print("plot-data: no metrics.json found under the given runs", file=sys.stderr)
        return 1
    reports = [MetricsReport.from_json(p) for p in paths]
    write_plot_csvs(reports, args.out)
    print(f"wrote plot data for {len(reports)} report(s) to {args.out}")
    return 0


def cmd_scenario_list(_args) -> int:
    for name, sc in sorted(scenario_catalog().items()):
        extras = []
        if sc.ground_plane:
            extras.append("ground effect")
        if sc.attached_mass:
            extras.append(f"{sc.attached_mass[0]:.1f} kg @ {np.linalg.norm(sc.attached_mass[1]):.2f} m")
        if sc.wind:
            extras.append("wind")
        detail = f" ({', '.join(extras)})" if extras else ""
        print(f"{name}{detail}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tiltlab",
        description="Desk-scale tiltrotor hexacopter lab: simulate, train, evaluate.",
    )
    parser.add_argument("--version", action="version", version=f"tiltlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file (defaults apply)")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config leaf (repeatable)")

    p = sub.add_parser("train", parents=[common], help="train the policy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")
    p.add_argument("--reference", default=None, help="reference-gaussians JSON (else fitted)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="run a scenario")
    p.add_argument("--scenario", required=True, help="catalog name or scenario JSON file")
    p.add_argument("--controller", action="append",
                   help="'baseline' or checkpoint path (repeat to compare two)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when any controller diverges")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fit-reference", parents=[common],
                       help="fit baseline command distributions")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=12000)
    p.set_defaults(func=cmd_fit_reference)

    p = sub.add_parser("plot-data", help="emit per-figure CSVs from eval outputs")
    p.add_argument("--run", action="append", required=True,
                   help="eval output dir or metrics.json (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("scenario-list", help="list the scenario catalog")
    p.set_defaults(func=cmd_scenario_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def dispatch(argv) -> int:
    """Exit-status wrapper (argparse usage errors surface as code 2)."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
