"""Minislot contention among relays that decoded the packet.

Each eligible relay sends a short Hello in every minislot with probability p;
a minislot succeeds when exactly one relay sends. The table compares
simulated rates with the closed forms n p (1-p)^(n-1) and its K-fold miss
probability.
"""
import argparse

import numpy as np

from harqrelay.protocol import ContentionConfig, contend, contention_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--minislots", type=int, default=10)
    ap.add_argument("--trials", type=int, default=200_000)
    args = ap.parse_args()

    rng = np.random.default_rng(2)
    k = args.minislots
    print(" n    p   slot_sim  slot_exact  miss_sim  miss_exact")
    for n in (1, 2, 5, 8):
        for p in (0.1, 0.3, 0.7):
            q = n * p * (1 - p) ** (n - 1)
            sim_q, sim_miss = contention_batch(n, p, k, args.trials, rng)
            print(f"{n:2d}  {p:.1f}  {sim_q:8.4f}  {q:10.4f}  {sim_miss:8.4f}  {(1 - q) ** k:10.4f}")

    res = contend({3, 7, 12}, ContentionConfig(minislots=k, feedback_prob=0.3), rng)
    print(f"\none round with relays 3, 7, 12: winner {res.winner}, lone Hellos {list(res.successes)}, "
          f"collisions {res.collisions}, idle {res.idle}")


if __name__ == "__main__":
    main()
