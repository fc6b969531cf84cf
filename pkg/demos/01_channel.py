"""Link budget and the BPSK soft channel.

Prints the mean power gain at a few distances, the transmit energy that puts
the source-destination link at the configured average SNR, and an uncoded
bit error rate measured through the soft demodulator next to Q(sqrt(2*snr)).
"""
import argparse

import numpy as np

from harqrelay import SimConfig, path_gain
from harqrelay.phy import NoiseParams, bpsk_ber, demodulate, linear_to_db, transmit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr-db", type=float, default=2.0)
    ap.add_argument("--bits", type=int, default=200_000)
    args = ap.parse_args()

    cfg = SimConfig(avg_snr_db=args.snr_db)
    params = cfg.path_loss()
    for d in (1.0, 25.0, 50.0, 100.0):
        print(f"mean gain at {d:5.0f} m: {float(linear_to_db(path_gain(d, params))):8.2f} dB")

    noise = cfg.noise()
    print(f"E/N0 needed for {args.snr_db:g} dB at 100 m: {float(linear_to_db(noise.tx_energy / noise.n0)):.2f} dB")

    rng = np.random.default_rng(0)
    print("\nsnr_db  measured_ber  q_function")
    for snr_db in (0.0, 3.0, 6.0):
        snr = 10 ** (snr_db / 10)
        unit = NoiseParams(n0=1.0, tx_energy=snr)
        bits = rng.integers(0, 2, args.bits)
        llr = demodulate(transmit(bits, 1.0, unit, rng), 1.0, unit).llrs
        ber = np.mean((llr < 0) != (bits == 1))
        print(f"{snr_db:6.1f}  {ber:12.5f}  {bpsk_ber(snr):10.5f}")


if __name__ == "__main__":
    main()
