#!/usr/bin/env python3
"""Mixing and resolution study behind the Gibbs sampler defaults.

Three probes:
  1. Chain autocorrelation of Z at selected lags, plus the integrated
     autocorrelation time. Justifies thin=5: at the strongest acceptance
     correlations the lag-5 autocorrelation is already in the noise.
  2. Equilibration of the running variance across early sweeps. Justifies
     burn_in=1000 as at least an order of magnitude past observed settling.
  3. Runtime and variance accuracy as the quantile grid is refined.
     Justifies grid_points=256 as the conservative default and 128 as a
     fast setting with no measurable bias at Monte Carlo scale.

Usage:
    python scripts/sampler_study.py [--n-rounds 400] [--chains 128]
"""

import argparse
import time

import numpy as np

from qnormal3d.densities import ModelParams
from qnormal3d.moments import var_z
from qnormal3d.sampler import SamplerConfig, mc_moment, sample_3d

POINTS = [
    ModelParams(0.3, 0.4, 0.5, 0.5),
    ModelParams(0.3, 0.6, -0.6, 0.9),
]


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-rounds", type=int, default=400)
    parser.add_argument("--chains", type=int, default=128)
    parser.add_argument("--seed", type=int, default=20240)
    return parser.parse_args()


def chain_matrix(p, rounds, chains, seed, burn_in, thin):
    """Z-coordinate as (rounds, chains): one row per harvest round."""
    cfg = SamplerConfig(
        seed=seed,
        n_samples=rounds * chains,
        grid_points=128,
        burn_in=burn_in,
        thin=thin,
        n_chains=chains,
    )
    draws = sample_3d(p, cfg)
    return draws[:, 2].reshape(rounds, chains)


def autocorrelation(z, max_lag):
    """Mean-of-chains autocorrelation of the (rounds, chains) matrix."""
    centered = z - z.mean(axis=0)
    var = (centered**2).mean(axis=0)
    acf = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        prod = centered[: len(centered) - lag] * centered[lag:]
        acf[lag] = (prod.mean(axis=0) / var).mean()
    return acf


def probe_mixing(args):
    print("probe 1: autocorrelation of raw (unthinned) chains")
    lags = (1, 2, 3, 5, 10)
    for p in POINTS:
        z = chain_matrix(p, args.n_rounds, args.chains, args.seed, burn_in=200, thin=1)
        acf = autocorrelation(z, max_lag=10)
        tau = 1.0 + 2.0 * acf[1:][acf[1:] > 0].sum()
        row = "  ".join(f"acf[{k}]={acf[k]:+.3f}" for k in lags)
        print(
            f"  rho=({p.rho12},{p.rho13},{p.rho23}) q={p.q}: {row}  "
            f"tau_int={tau:.2f}"
        )
    print("  -> thin=5 leaves residual correlation at the 1e-2 level or below\n")


def probe_burn_in(args):
    print("probe 2: settling of var(Z) across early sweeps (no burn-in)")
    p = POINTS[1]
    z = chain_matrix(p, args.n_rounds, args.chains, args.seed + 1, burn_in=0, thin=1)
    target = var_z(p.r, p.q)
    for sweep in (1, 5, 10, 25, 50, 100, 200):
        window = z[max(0, sweep - 5) : sweep + 5]
        print(f"  sweep {sweep:>4d}: var(Z) = {window.var():.4f} (target {target:.4f})")
    print("  -> settled within tens of sweeps; burn_in=1000 is conservative\n")


def probe_grid(args):
    print("probe 3: quantile-grid resolution vs runtime and accuracy")
    p = POINTS[0]
    target = var_z(p.r, p.q)
    n = 20_000
    for grid_points in (96, 128, 192, 256):
        cfg = SamplerConfig(
            seed=args.seed, n_samples=n, grid_points=grid_points, n_chains=args.chains
        )
        start = time.perf_counter()
        draws = sample_3d(p, cfg)
        elapsed = time.perf_counter() - start
        est = mc_moment(draws, lambda x, y, z: z * z)
        dev = (est.value - target) / est.std_error
        print(
            f"  grid_points={grid_points:>3d}: var(Z) dev {dev:+.2f} se, "
            f"{elapsed:5.1f} s for n={n}"
        )
    print("  -> no resolution-linked bias beyond 96 points; runtime scales mildly\n")


def main():
    args = parse_args()
    probe_mixing(args)
    probe_burn_in(args)
    probe_grid(args)


if __name__ == "__main__":
    main()
