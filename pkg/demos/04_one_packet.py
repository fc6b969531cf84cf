"""Follow a single packet through the relay network.

Places relays, draws one channel realisation and prints the per-round event
log for each forwarding strategy. All strategies see the same fading and
noise because the random streams are keyed by packet index.
"""
import argparse

from harqrelay import SimConfig
from harqrelay.engine import PacketSimulator, campaign_topology, packet_rngs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr-db", type=float, default=0.0)
    ap.add_argument("--packet", type=int, default=0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    for strategy in ("opportunistic", "harbinger", "p2p"):
        cfg = SimConfig(avg_snr_db=args.snr_db, strategy=strategy, seed=args.seed)
        sim = PacketSimulator(cfg)
        topo = campaign_topology(cfg)
        channel_rng, contention_rng = packet_rngs(cfg.seed, args.packet)
        out = sim.run_packet(topo, sim.channel_for(topo, channel_rng), contention_rng)
        print(f"== {strategy}: success={out.success} rounds={out.rounds_used} coded_bits={out.coded_bits_sent}")
        for ev in out.transcript:
            extra = f" eligible={ev['eligible']}" if "eligible" in ev else ""
            print(f"   round {ev['round']}: tx={ev['tx']} ack={ev['ack']} "
                  f"decoded_relays={ev.get('decoded', [])}{extra}")


if __name__ == "__main__":
    main()
