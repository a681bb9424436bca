"""Full sweep over the filtered Apache Jira projects, then the DATALAB drift timeline.

Expects the export in the package's JSONL/CSV issue schema.
"""

import argparse
import os
import time

from stream_triage.corpus import filter_projects, ingest, project_stats
from stream_triage.evaluation import CONFIG_NAMES, ModelConfig, emit_report, sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", default=os.environ.get("STREAM_TRIAGE_JIRA"), help="issue export")
    parser.add_argument("--out", default="out/jira")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    if not args.input:
        parser.error("pass --input or set STREAM_TRIAGE_JIRA")

    projects = filter_projects(ingest(args.input).streams)
    print(f"{len(projects)} projects after filtering")
    for s in projects:
        p = project_stats(s)
        print(f"  {p.project_key:<10} {p.n_assignees:>3} {p.n_issues:>5} {p.issues_per_assignee:>4}")

    started = time.perf_counter()
    rows = sweep(projects, [ModelConfig(n, seed=args.seed) for n in CONFIG_NAMES], jobs=args.jobs)
    print(f"sweep took {time.perf_counter() - started:.0f}s")
    ok = [r.result for r in rows if r.result is not None]
    for r in rows:
        if r.result is None:
            print(f"  {r.project} {r.config.name} failed: {r.error}")
    emit_report(ok, args.out)

    full = [r for r in ok if r.config.name == "adaboost_adwin_activity"]
    accs = [r.final_accuracy for r in full]
    if accs:
        print(f"full model: mean {sum(accs) / len(accs):.4f} min {min(accs):.4f} max {max(accs):.4f}")
    for r in ok:
        if r.project == "DATALAB":
            print(f"DATALAB {r.config.name:<24} final={r.final_accuracy:.4f} drifts={r.drift_indices}")


if __name__ == "__main__":
    main()
