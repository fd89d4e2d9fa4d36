"""Monte Carlo calibration of CUSUM-of-squares 5% band half-widths.

Under parameter stability the recursive residuals are iid Gaussian, so the
CUSUM-of-squares path s_t = cumsum(w^2)/sum(w^2), t = 1..m, is distribution
free. The band half-width c0(m) is the 95th percentile of
max_t |s_t - t/m|. This script estimates c0 on a grid of m by simulation
and prints the block pasted into cointkit/tables.py.

Run: python3 tools/calibrate_cusumsq.py
"""

import numpy as np

GRID = [5, 8, 10, 12, 15, 18, 20, 25, 30, 40, 50, 60, 80, 100]
PATHS = 500_000
CHUNK = 50_000
SEED = 318_979  # fixed so the published constants are reproducible
LEVEL = 0.95


def c0_for(m: int, rng: np.random.Generator) -> float:
    ref = np.arange(1, m + 1) / m
    maxdev = np.empty(PATHS)
    done = 0
    while done < PATHS:
        take = min(CHUNK, PATHS - done)
        w2 = rng.standard_normal((take, m)) ** 2
        s = np.cumsum(w2, axis=1)
        s /= s[:, -1][:, None]
        maxdev[done : done + take] = np.max(np.abs(s - ref), axis=1)
        done += take
    return float(np.quantile(maxdev, LEVEL))


def main() -> None:
    rng = np.random.default_rng(SEED)
    values = []
    for m in GRID:
        c0 = c0_for(m, rng)
        values.append(c0)
        print(f"m={m:4d}  c0={c0:.5f}", flush=True)

    print("\n# start calibrated-values block (do not edit by hand)")
    print("_CUSUMSQ_C0_05 = np.array(")
    print("    [")
    for v in values:
        print(f"        {v:.5f},")
    print("    ]")
    print(")")
    print("# end calibrated-values block")


if __name__ == "__main__":
    main()
