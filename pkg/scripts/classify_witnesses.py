"""Classify the witness sequences and their e^x images at growing truncations.

    python scripts/classify_witnesses.py --tol 0.05 --out witnesses.json
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field

from seqlab import seqgen as sg
from seqlab import windowstats as ws
from seqlab.classify import Verdict, classify

CODES = {Verdict.MEMBER.value: "M", Verdict.NON_MEMBER.value: "X", Verdict.INCONCLUSIVE.value: "?"}


@dataclass
class Config:
    tol: float = 0.05
    # (name, list of block counts); lengths are the block boundaries
    runs: list = field(
        default_factory=lambda: [
            ("example-s-not-chat", [12, 16, 20]),
            ("z-chat-minus-c", [200, 800, 2000]),
            ("z-s-minus-chat", [14, 18, 22]),
            ("z-linf-minus-s", [5, 6, 7]),
        ]
    )
    exp_image: bool = True


def classify_one(spec, N, tol):
    start = time.perf_counter()
    rep = classify(ws.lorentz_profile(sg.generate(spec, N)), tol)
    d = rep.to_dict()
    return {
        "N": N,
        "verdicts": d["verdicts"],
        "banach": [d["banach_lo"], d["banach_hi"]],
        "cesaro_limit": d["cesaro_limit"],
        "seconds": round(time.perf_counter() - start, 3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=Config.tol)
    ap.add_argument("--out")
    args = ap.parse_args()
    cfg = Config(tol=args.tol)

    rows = []
    for name, blocks in cfg.runs:
        base = sg.named(name)
        for j in blocks:
            N = sg.boundary(base, j)
            for label, spec in (("x", base), ("exp(x)", sg.explike_image(base, [(1.0, 1.0)]))):
                if label != "x" and not cfg.exp_image:
                    continue
                row = {"sequence": name, "map": label, "blocks": j} | classify_one(spec, N, cfg.tol)
                rows.append(row)
                short = " ".join(f"{k}:{CODES[v]}" for k, v in row["verdicts"].items())
                print(f"{name:20s} {label:7s} j={j:<5d} N={N:<9d} {short}  [{row['seconds']}s]")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
