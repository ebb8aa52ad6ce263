#!/usr/bin/env python3
"""Benchmark game: team-fp vs the SFP and MWU baselines.

Writes one long CSV plus aggregate per dynamic into results/baselines/.
"""

import argparse
import pathlib

from teamfp.cli import main as teamfp


def run(args):
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    gen = f"random-zsptg:teams=2x2x2x2+2x2x2x2:seed={args.game_seed}"
    for variant in ("team-fp", "sfp", "mwu"):
        code = teamfp([
            "run", "--gen", gen, "--variant", variant,
            "--tau", "0.1", "--eta", "0.05",
            "--iterations", str(args.iterations),
            "--trials", str(args.trials), "--stride", "100",
            "--seed", "0", "--out", str(outdir / f"{variant}.csv"),
        ])
        if code != 0:
            raise SystemExit(code)
    print(f"wrote {outdir}/{{team-fp,sfp,mwu}}.csv (+ .agg.csv)")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--game-seed", type=int, default=2024)
    p.add_argument("--out", default="results/baselines")
    run(p.parse_args())
