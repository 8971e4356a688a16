"""Smallest singular value of the normalised Gram matrix of monomial images.

Shows how quickly the exponential family e^{s z} loses numerical rank on a
sequence whose nonzero values live in [1, 2].
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

from seqlab import seqgen as sg
from seqlab.algebra import check_exponent_sums, gram_sigma_min, monomials

BETA_SETS = {
    "sqrt(2,3,5)": [math.sqrt(2), math.sqrt(3), math.sqrt(5)],
    "sqrt(2,3)": [math.sqrt(2), math.sqrt(3)],
    "1,sqrt2,sqrt3": [1.0, math.sqrt(2), math.sqrt(3)],
    "sqrt2": [math.sqrt(2)],
}


@dataclass
class Config:
    blocks: int = 2000
    max_degree: int = 3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, default=Config.blocks)
    ap.add_argument("--max-degree", type=int, default=Config.max_degree)
    args = ap.parse_args()
    cfg = Config(args.blocks, args.max_degree)

    spec = sg.z_chat_minus_c()
    N = sg.boundary(spec, cfg.blocks)
    print(f"N = {N}")
    print(f"{'betas':16s} degree  monomials  sigma_min")
    for label, betas in BETA_SETS.items():
        for degree in range(1, cfg.max_degree + 1):
            try:
                sums = check_exponent_sums(betas, degree)
            except ValueError as exc:
                print(f"{label:16s} {degree:<7d} clash: {exc}")
                continue
            sigma, _ = gram_sigma_min(spec, N, sums)
            print(f"{label:16s} {degree:<7d} {len(monomials(len(betas), degree)):<10d} {sigma:.3e}")


if __name__ == "__main__":
    main()
