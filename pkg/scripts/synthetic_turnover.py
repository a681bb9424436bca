"""Replay a synthetic team-turnover stream through all four configurations."""

import argparse

from stream_triage.evaluation import CONFIG_NAMES, ModelConfig, compare_configs, emit_report
from stream_triage.synthetic import turnover_stream


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--issues", type=int, default=1200)
    parser.add_argument("--stream-seed", type=int, default=2)
    parser.add_argument("--seed", type=int, default=42, help="model seed shared by all configurations")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", help="write the usual report files here")
    args = parser.parse_args()

    stream = turnover_stream(args.issues, seed=args.stream_seed)
    rows = compare_configs(stream, [ModelConfig(n) for n in CONFIG_NAMES], seed=args.seed, jobs=args.jobs)
    print(f"handovers at {args.issues // 3} and {2 * args.issues // 3}")
    for row in rows:
        r = row.result
        print(f"{row.config.name:<24} final={r.final_accuracy:.4f} drifts={r.drift_indices}")
    if args.out:
        emit_report([r.result for r in rows], args.out)


if __name__ == "__main__":
    main()
