"""Monte Carlo picture of the i.i.d. uniform cube: Cesaro spread and block-event decay."""
from __future__ import annotations

import argparse
import json
import math
from dataclasses import asdict, dataclass

from seqlab.randmeasure import block_event_probability, mc_block_decay, mc_lln


@dataclass
class Config:
    seed: int = 0
    N: int = 1 << 14
    lln_trials: int = 2000
    block_sizes: tuple = (1, 2, 4, 8)
    m_max: int = 12
    block_trials: int = 100_000
    threads: int = 1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--threads", type=int, default=Config.threads)
    ap.add_argument("--block-trials", type=int, default=Config.block_trials)
    ap.add_argument("--out")
    args = ap.parse_args()
    cfg = Config(seed=args.seed, threads=args.threads, block_trials=args.block_trials)

    lln = mc_lln(cfg.seed, cfg.N, cfg.lln_trials, threads=cfg.threads)
    print("n        std        sqrt(1/12n)  ratio")
    for row in lln.statistics["cesaro"]:
        print(f"{row['n']:<8d} {row['std']:.6f}   {row['reference_std']:.6f}     {row['std_ratio']:.4f}")

    blocks = []
    print("\nN_b  p_hat     exact     slope      ln(exact)")
    for b in cfg.block_sizes:
        rep = mc_block_decay(cfg.seed, b, cfg.m_max, cfg.block_trials, threads=cfg.threads)
        st = rep.statistics
        exact = float(block_event_probability(b))
        slope = st["fit"].get("slope", float("nan"))
        print(f"{b:<4d} {st['p_hat']:.6f}  {exact:.6f}  {slope:+.5f}  {math.log(exact):+.5f}")
        blocks.append(rep.to_dict())

    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"config": asdict(cfg), "lln": lln.to_dict(), "blocks": blocks}, fh, indent=2)


if __name__ == "__main__":
    main()
