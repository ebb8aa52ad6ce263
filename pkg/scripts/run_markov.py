#!/usr/bin/env python3
"""Markov-game learning: model-based vs model-free on a random 2-state MG.

Writes results/markov/{model-based,model-free}.csv (+ aggregates).
"""

import argparse
import pathlib

from teamfp.cli import main as teamfp


def run(args):
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    gen = (f"random-mg:teams=2x2+2x2:num_states=2:horizon=10"
           f":seed={args.game_seed}")
    for algorithm in ("model-based", "model-free"):
        code = teamfp([
            "run-mg", "--gen", gen, "--algorithm", algorithm,
            "--tau", "0.1", "--iterations", str(args.episodes),
            "--trials", str(args.trials), "--stride", str(args.stride),
            "--seed", "3", "--out", str(outdir / f"{algorithm}.csv"),
        ])
        if code != 0:
            raise SystemExit(code)
    print(f"wrote {outdir}/{{model-based,model-free}}.csv (+ .agg.csv)")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--episodes", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--stride", type=int, default=1000)
    p.add_argument("--game-seed", type=int, default=404)
    p.add_argument("--out", default="results/markov")
    run(p.parse_args())
