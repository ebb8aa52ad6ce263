#!/usr/bin/env python3
"""Temperature and inertia sweeps on the benchmark game.

Produces the tau-plateau curves (team-fp at tau in {0.1, 0.15, 0.2}) and the
delta-speed curves (independent-team-fp at delta in {0.2, 0.5}) under
results/sweeps/.
"""

import argparse
import pathlib

from teamfp.cli import main as teamfp


def run(args):
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    gen = f"random-zsptg:teams=2x2x2x2+2x2x2x2:seed={args.game_seed}"
    code = teamfp([
        "sweep", "--gen", gen, "--variant", "team-fp,independent-team-fp",
        "--tau", "0.1,0.15,0.2", "--delta", "0.2,0.5",
        "--iterations", str(args.iterations), "--trials", str(args.trials),
        "--stride", "100", "--seed", "0", "--out", str(outdir),
    ])
    if code != 0:
        raise SystemExit(code)
    print(f"wrote sweep CSVs under {outdir}/")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--game-seed", type=int, default=2024)
    p.add_argument("--out", default="results/sweeps")
    run(p.parse_args())
