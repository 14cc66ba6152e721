"""Command-line interface.

Verbs: gen, train, describe, plan, sweep, obstacle-study, serve. Every verb
accepts --seed and, where it trains or evaluates, --config pointing at a
JSON file of overrides; outputs land under --out.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .datagen import ModeSpec, default_modes, generate
from .harness import (SweepConfig, run_obstacle_study, run_sweep, write_report,
                      DEFAULT_OBSTACLE_RADIUS_M)
from .pipeline import (TrainConfig, load_artifact, save_artifact, train_pipeline)
from .planner import Obstacle
from .trajectories import (Trajectory, load_dataset, load_trajectory_csv,
                           preprocess, save_dataset)


def _read_json(path):
    return json.loads(Path(path).read_text())


def _load_config(path, cls):
    if path is None:
        return cls()
    overrides = _read_json(path)
    return cls(**overrides)


def _load_observation(path, out_len: int) -> Trajectory:
    p = Path(path)
    if p.suffix == ".csv":
        t, x = load_trajectory_csv(p)
    else:
        rec = _read_json(p)
        t, x = np.asarray(rec["t"], dtype=float), np.asarray(rec["x"], dtype=float)
    return preprocess((t, x), out_len=min(out_len, len(t)) if len(t) >= 2 else out_len)


def cmd_gen(args) -> int:
    if args.modes:
        specs = [ModeSpec.from_dict(m) for m in _read_json(args.modes)]
    else:
        specs = default_modes()
    dataset = generate(specs, sample_rate_hz=args.rate, seed=args.seed)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} demos to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(args.data, format=args.format)
    config = _load_config(args.config, TrainConfig)
    if args.clusters is not None:
        config = TrainConfig(**{**config.to_dict(), "n_clusters": args.clusters})
    config = TrainConfig(**{**config.to_dict(), "seed": args.seed})
    models = train_pipeline(dataset, config)
    save_artifact(models, args.out)
    print(f"trained {len(models.bank)} flow models, "
          f"{models.reward.inducing.shape[0]} inducing points -> {args.out}")
    return 0


def cmd_describe(args) -> int:
    models = load_artifact(args.model)
    xi = _load_observation(args.traj, models.out_len)
    from .flow import describe
    p = describe(xi, models.bank, models.spatial_weight)
    out = {"p": p.tolist(), "argmax": int(np.argmax(p))}
    if args.out:
        Path(args.out).write_text(json.dumps(out))
    print(json.dumps(out))
    return 0


def cmd_plan(args) -> int:
    models = load_artifact(args.model)
    xi = _load_observation(args.obs, models.out_len)
    obstacles = None
    if args.obstacles:
        obstacles = [Obstacle.from_dict(o) for o in _read_json(args.obstacles)]
    planner = models.planner()
    from .arm import ik_solve
    q_now = (np.asarray(_read_json(args.q_now), dtype=float) if args.q_now
             else models.arm.q_home)
    result = planner.plan(xi, q_now, n_samples=args.samples, seed=args.seed,
                          obstacles=obstacles)
    payload = result.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(payload))
        print(f"wrote plan to {args.out}")
    else:
        print(json.dumps({"goal_pos": payload["goal_pos"],
                          "clearance_mm": payload["clearance_mm"]}))
    return 0


def cmd_sweep(args) -> int:
    dataset = load_dataset(args.data, format=args.format)
    config = _load_config_sweep(args)
    report = run_sweep(dataset, config)
    csv_path, json_path = write_report(report, args.out, "sweep")
    for row in report.rows:
        print(f"ratio {row['ratio']:.1f}: rms {row['mean_rms']:.4f} "
              f"+- {row['std_rms']:.4f} m")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_obstacle_study(args) -> int:
    dataset = load_dataset(args.data, format=args.format)
    config = _load_config_sweep(args)
    obstacle = "target_midpoint"
    if args.obstacles:
        obstacle = Obstacle.from_dict(_read_json(args.obstacles)[0])
    report = run_obstacle_study(dataset, config, obstacle=obstacle,
                                radius_m=args.radius)
    csv_path, json_path = write_report(report, args.out, "obstacle_study")
    d_mins = [r["d_min_mm"] for r in report.rows if r["d_min_mm"] is not None]
    if d_mins:
        print(f"{len(report.rows)} runs, min clearance {min(d_mins):.1f} mm")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _load_config_sweep(args) -> SweepConfig:
    if args.config:
        raw = _read_json(args.config)
        train = TrainConfig(**raw.pop("train")) if "train" in raw else None
        from .planner import PlanConfig
        plan = PlanConfig(**raw.pop("plan")) if "plan" in raw else PlanConfig()
        cfg = SweepConfig(**raw, train=train, plan=plan)
    else:
        cfg = SweepConfig()
    return SweepConfig(**{**cfg.to_dict(),
                          "train": TrainConfig(**{**cfg.train.to_dict(),
                                                  "seed": args.seed}),
                          "plan": cfg.plan,
                          "seed": args.seed})


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app_from_artifact
    app = create_app_from_artifact(args.model)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowcoop")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--modes", help="JSON list of mode specs (default: built-in)")
    p.add_argument("--out", required=True)
    p.add_argument("--rate", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train flow bank + reward into an artifact")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", required=True)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--config", help="JSON TrainConfig overrides")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("describe", help="descriptor of a trajectory")
    p.add_argument("--model", required=True)
    p.add_argument("--traj", required=True, help="JSON {t, x} or CSV t,x0,x1,...")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("plan", help="plan a cooperative trajectory")
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--obstacles", help="JSON [{center, radius_m}]")
    p.add_argument("--q-now", dest="q_now", help="JSON list of 7 joint angles")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="observation-ratio sweep")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON SweepConfig overrides")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("obstacle-study", help="clearance study with the barrier")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--obstacles", help="JSON [{center, radius_m}]; default midpoint")
    p.add_argument("--radius", type=float, default=DEFAULT_OBSTACLE_RADIUS_M)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_obstacle_study)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
