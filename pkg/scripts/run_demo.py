#!/usr/bin/env python3
"""Run the full synthetic pipeline and leave a servable snapshot behind.

Thin wrapper over `neuroembed demo`; handy when iterating on training
hyperparameters without retyping the flag set.
"""

import argparse
import sys
from pathlib import Path

from neuroembed.cli import DEMO_BATCH, DEMO_LEARNING_RATE, DEMO_PROVIDER_DIM, run_demo
from neuroembed.demodata import DEFAULT_SEED


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out", help="output directory")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--dim", type=int, default=DEMO_PROVIDER_DIM)
    parser.add_argument("--epochs", type=int, default=2)
    parser.add_argument("--batch", type=int, default=DEMO_BATCH)
    parser.add_argument("--lr", type=float, default=DEMO_LEARNING_RATE)
    parser.add_argument("--loss", choices=("infonce", "hinge"),
                        default="infonce")
    args = parser.parse_args()

    result = run_demo(Path(args.out), seed=args.seed, dim=args.dim,
                      epochs=args.epochs, batch=args.batch, lr=args.lr,
                      loss_variant=args.loss)
    print(f"serve it with: neuroembed serve --snapshot {result['snapshot_dir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
