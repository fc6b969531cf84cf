"""A short feedback-probability sweep and a strategy comparison.

Small packet counts keep this to a minute or two; the CLI presets run the
full-size versions (``harqrelay --preset fig3`` and friends).
"""
import argparse

from harqrelay import SimConfig, run_campaign, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--packets", type=int, default=150)
    args = ap.parse_args()

    base = SimConfig(n_packets=args.packets, gain_threshold_db=-91.0)
    print("feedback_prob  r_avg   +-ci    outage")
    for value, _, m in sweep(base, axis="feedback_prob", values=(0.05, 0.3, 0.95)):
        print(f"{value:13.2f}  {m.r_avg:.4f}  {m.ci_halfwidth:.4f}  {m.outage_rate:.3f}")

    print("\nstrategy       r_avg   +-ci    mean_rounds")
    for strategy in ("opportunistic", "harbinger", "p2p"):
        m = run_campaign(base.replace(strategy=strategy))
        print(f"{strategy:13s}  {m.r_avg:.4f}  {m.ci_halfwidth:.4f}  {m.mean_rounds:.2f}")


if __name__ == "__main__":
    main()
