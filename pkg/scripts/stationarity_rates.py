"""Size and power of the stationarity and noise labels on simulated series.

    python3 scripts/stationarity_rates.py --seeds 200 --length 200
"""

import argparse

import numpy as np

from tsart.tools.pattern import adf_test, kpss_test, noise_label


def rates(seeds: int, length: int) -> dict[str, float]:
    hits = dict.fromkeys(["adf_white", "adf_walk", "kpss_white", "kpss_walk", "noise_white", "noise_walk"], 0)
    for seed in range(seeds):
        white = np.random.default_rng([seed, 0]).normal(size=length)
        walk = np.cumsum(np.random.default_rng([seed, 1]).normal(size=length))
        hits["adf_white"] += adf_test(white)["status"] == "stationary"
        hits["adf_walk"] += adf_test(walk)["status"] == "nonstationary"
        hits["kpss_white"] += kpss_test(white)["status"] == "stationary"
        hits["kpss_walk"] += kpss_test(walk)["status"] == "nonstationary"
        hits["noise_white"] += noise_label(white) == "white"
        hits["noise_walk"] += noise_label(walk) == "red"
    return {k: v / seeds for k, v in hits.items()}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--length", type=int, nargs="+", default=[100, 200, 500])
    args = ap.parse_args()
    for n in args.length:
        r = rates(args.seeds, n)
        print(f"T={n:4d}  " + "  ".join(f"{k}={v:.2f}" for k, v in r.items()))


if __name__ == "__main__":
    main()
