"""Entry point: train a multiplier network from a dataset manifest."""

from __future__ import annotations

import argparse
import sys

from .training import TrainConfig, train


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="wenods-train",
        description="Train the smoothness-multiplier CNN on stored reference "
                    "trajectories and export solver-ready weight files.")
    ap.add_argument("--config", help="JSON file with TrainConfig fields")
    ap.add_argument("--manifest", help="dataset manifest from `wenods generate`")
    ap.add_argument("--validation-manifest")
    ap.add_argument("--out", help="checkpoint/log directory")
    ap.add_argument("--coarse-grid", type=int)
    ap.add_argument("--arch-tag", choices=["A", "B", "C"])
    ap.add_argument("--steps", type=int, dest="max_steps")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--lr", type=float)
    ap.add_argument("--validation-period", type=int)
    args = ap.parse_args(argv)

    if args.config:
        config = TrainConfig.from_json(args.config)
    else:
        if not (args.manifest and args.out):
            ap.error("--manifest and --out are required without --config")
        config = TrainConfig(manifest=args.manifest, out_dir=args.out)
    for key in ("manifest", "validation_manifest", "coarse_grid", "arch_tag",
                "max_steps", "seed", "lr", "validation_period"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    if args.out:
        config.out_dir = args.out

    log = train(config)
    print(f"trained {config.max_steps} steps, "
          f"best checkpoint: {log.get('best_checkpoint', log['final_checkpoint'])}",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
