"""Measure ADWIN detection delay on step streams and false alarms on stationary ones."""

import argparse

import numpy as np

from stream_triage.drift import Adwin


def detections(bits, delta, max_buckets):
    ad = Adwin(delta=delta, max_buckets=max_buckets)
    return [i for i, b in enumerate(bits, start=1) if ad.update(int(b))]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--delta", type=float, default=0.002)
    parser.add_argument("--max-buckets", type=int, default=5)
    parser.add_argument("--change-at", type=int, default=500)
    parser.add_argument("--p-before", type=float, default=0.75)
    parser.add_argument("--p-after", type=float, default=0.25)
    parser.add_argument("--null-length", type=int, default=5000)
    args = parser.parse_args()

    print("seed  step_detections  delay  null_detections")
    total_null = 0
    for seed in range(args.seeds):
        rng = np.random.default_rng(seed)
        step = np.concatenate([rng.random(args.change_at) < args.p_before,
                               rng.random(args.change_at) < args.p_after])
        hits = detections(step, args.delta, args.max_buckets)
        after = [h - args.change_at for h in hits if h > args.change_at]
        null = detections(np.random.default_rng(100 + seed).integers(0, 2, args.null_length),
                          args.delta, args.max_buckets)
        total_null += len(null)
        delay = after[0] if after else "-"
        print(f"{seed:>4}  {len(hits):>15}  {delay:>5}  {len(null):>15}")
    print(f"false alarms over {args.seeds} x {args.null_length} bits: {total_null}")


if __name__ == "__main__":
    main()
