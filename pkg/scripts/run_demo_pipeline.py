#!/usr/bin/env python3
"""End-to-end demo: synthesize an episode, evaluate it, segment a hypothesis,
review the reference with the mock provider, and merge the report.

Equivalent to running the CLI by hand:

    python3 scripts/make_synthetic_episode.py --out demo/episode
    subqa eval --spec demo/episode/manifest.json --out demo/run1
    subqa segment --transcript demo/episode/hyp_modelA.json --out demo/segmented.srt
    subqa review --in demo/episode/reference.srt --mode entities --provider mock --out demo/reviewed.srt
    subqa report --runs demo --plots demo/plots
"""
import argparse
import subprocess
import sys
from pathlib import Path

from subqa.cli import main as subqa


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    episode = out / "episode"
    subprocess.run([sys.executable, str(Path(__file__).with_name("make_synthetic_episode.py")),
                    "--out", str(episode), "--seed", str(args.seed)], check=True)

    steps = [
        ["eval", "--spec", str(episode / "manifest.json"), "--out", str(out / "run1")],
        ["segment", "--transcript", str(episode / "hyp_modelA.json"),
         "--out", str(out / "segmented.srt")],
        ["review", "--in", str(episode / "reference.srt"), "--mode", "entities",
         "--provider", "mock", "--out", str(out / "reviewed.srt")],
        ["report", "--runs", str(out), "--plots", str(out / "plots")],
    ]
    for step in steps:
        print("+ subqa " + " ".join(step))
        code = subqa(step)
        if code != 0:
            sys.exit(code)

    print((out / "run1" / "metrics.csv").read_text(), end="")


if __name__ == "__main__":
    main()
