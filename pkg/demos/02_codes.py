"""The concatenated code: RS(255,239) outside, a punctured convolutional family inside.

Shows the five nested puncturing masks, how many coded bits each HARQ round
adds for one packet, and the residual packet error rate after each round on
an AWGN channel with a fixed per-bit SNR.
"""
import argparse

import numpy as np

from harqrelay.harq import CodeChain, SoftBuffer, attempt_decode


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--es-n0-db", type=float, default=-1.0, help="per coded bit")
    ap.add_argument("--packets", type=int, default=100)
    args = ap.parse_args()

    chain = CodeChain()
    print(chain.family.to_text())
    for j, rate in enumerate(chain.family.rates(), 1):
        print(f"round {j}: rate {str(rate):>4}  +{chain.round_positions(j).size:5d} bits, "
              f"{chain.positions(j).size:5d} in total")

    rng = np.random.default_rng(1)
    es_n0 = 10 ** (args.es_n0_db / 10)
    decoded = np.zeros(chain.n_rates, int)
    for _ in range(args.packets):
        payload = rng.integers(0, 256, 239, dtype=np.uint8)
        c = chain.encode(payload)
        y = np.sqrt(es_n0) * (1.0 - 2.0 * c) + rng.normal(0, np.sqrt(0.5), c.size)
        llr = 4 * np.sqrt(es_n0) * y
        buf = SoftBuffer.empty(c.size)
        for j in range(1, chain.n_rates + 1):
            pos = chain.round_positions(j)
            buf.absorb_llrs(pos, llr[pos])
            decoded[j - 1] += attempt_decode(buf, chain, payload).success
    print(f"\npacket error rate at Es/N0 = {args.es_n0_db:g} dB after each round:")
    print("  ".join(f"{1 - d / args.packets:.3f}" for d in decoded))


if __name__ == "__main__":
    main()
