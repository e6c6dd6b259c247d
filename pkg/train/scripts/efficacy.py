#!/usr/bin/env python3
"""End-to-end training-efficacy experiment.

Generates a four-shock training dataset with the solver CLI, trains the
multiplier network (optionally several seeds), evaluates the best
checkpoint of each seed against the plain tau5 scheme on the published
four-shock test problem, and reports the density-error ratio (baseline
over trained; > 1 means the trained scheme wins).

The defaults reproduce the reduced-scale protocol (20 problems, 2000
steps, three seeds, architecture A, 100x100 training grid, 400x400
references) and take a few CPU-hours; shrink --problems/--steps/--seeds
for a quicker look.

Usage:
  python scripts/efficacy.py --work DIR [--problems 20] [--steps 2000]
                             [--seeds 0,1,2] [--snapshot-every 1]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def sh(*argv):
    print("+", " ".join(str(a) for a in argv), file=sys.stderr, flush=True)
    subprocess.run([str(a) for a in argv], check=True)


def ensure_dataset(work, tag, count, seed, snapshot_every, fine_grid):
    out = os.path.join(work, tag)
    manifest = os.path.join(out, "manifest.json")
    if not os.path.exists(manifest):
        sh("wenods", "generate", "--config-tag", 3, "--count", count,
           "--seed", seed, "--fine-grid", fine_grid,
           "--snapshot-every", snapshot_every, "--out", out)
    return manifest


def ensure_reference(work, fine_grid):
    out = os.path.join(work, f"reference{fine_grid}")
    if not os.path.exists(os.path.join(out, "final.f64grid")):
        sh("wenods", "solve", "--ic", "config3", "--grid",
           f"{fine_grid}x{fine_grid}", "--scheme", "z", "--out", out)
    return out


def compare_ratio(work, label, weights, reference, eval_grid):
    out = os.path.join(work, f"compare_{label}")
    sh("wenods", "compare", "--ic", "config3", "--grids", eval_grid,
       "--baseline", "z", "--candidate", "ds-z", "--weights", weights,
       "--reference", reference, "--out", out)
    with open(os.path.join(out, "table.json")) as fh:
        table = json.load(fh)
    return table["rows"][0]["ratio"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--work", required=True)
    ap.add_argument("--problems", type=int, default=20)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--snapshot-every", type=int, default=1)
    ap.add_argument("--coarse-grid", type=int, default=100)
    ap.add_argument("--fine-grid", type=int, default=400)
    ap.add_argument("--validation-problems", type=int, default=2)
    ap.add_argument("--validation-period", type=int, default=100)
    args = ap.parse_args()

    os.makedirs(args.work, exist_ok=True)
    start = time.time()
    train_manifest = ensure_dataset(args.work, "train_data", args.problems, 7,
                                    args.snapshot_every, args.fine_grid)
    val_manifest = ensure_dataset(args.work, "val_data", args.validation_problems,
                                  1234, args.snapshot_every, args.fine_grid)
    reference = ensure_reference(args.work, args.fine_grid)

    ratios = []
    for seed in (int(s) for s in args.seeds.split(",")):
        run_dir = os.path.join(args.work, f"run_seed{seed}")
        log_path = os.path.join(run_dir, "validation_log.json")
        if not os.path.exists(log_path):
            sh("wenods-train", "--manifest", train_manifest,
               "--validation-manifest", val_manifest, "--out", run_dir,
               "--coarse-grid", args.coarse_grid, "--arch-tag", "A",
               "--steps", args.steps, "--seed", seed,
               "--validation-period", args.validation_period)
        with open(log_path) as fh:
            log = json.load(fh)
        best = log.get("best_checkpoint", log["final_checkpoint"])
        ratio = compare_ratio(args.work, f"seed{seed}", best, reference,
                              args.coarse_grid)
        print(f"[efficacy] seed {seed}: best {os.path.basename(best)} "
              f"ratios {ratio}", flush=True)
        ratios.append(ratio)

    rho = sorted(r["rho"] for r in ratios)
    median = rho[len(rho) // 2]
    verdict = {
        "problems": args.problems,
        "steps": args.steps,
        "seeds": args.seeds,
        "snapshot_every": args.snapshot_every,
        "rho_ratios": rho,
        "median_rho_ratio": median,
        "wall_time_h": (time.time() - start) / 3600.0,
    }
    with open(os.path.join(args.work, "efficacy.json"), "w") as fh:
        json.dump(verdict, fh, indent=2)
        fh.write("\n")
    print(f"[efficacy] median density ratio: {median:.3f} "
          f"(target >= 1.15 at full reduced scale)", flush=True)


if __name__ == "__main__":
    main()
