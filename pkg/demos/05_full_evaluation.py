"""Run the full evaluation protocol on the bundled fixture suite.

Uses the synthetic noisy sampler (no network, fully seeded) to emulate
generator diversity, runs seed-matched sweeps in both execution modes, and
prints summary tables plus a small noise sweep.
"""

from votetree import RunConfig, format_table, load_dataset, run_suite

bundle = load_dataset()
print(f"evaluating {len(bundle.tasks)} tasks over {len(bundle.scenes)} scenes "
      "(the 4 in-context example tasks are held out)\n")

base = dict(master_seed=42, repetitions=10, drop_prob=0.2, swap_prob=0.1, output_dir=None)

rows = []
for mode in ("no_correction", "with_correction"):
    result = run_suite(RunConfig(**base, mode=mode), bundle, write_outputs=False)
    rows.append(result.row)
print(format_table(rows))

print("selection ablation (no correction):")
rows = []
for selection in ("random", "max_vote"):
    cfg = RunConfig(**base, mode="no_correction", selection=selection,
                    method_label=f"selection={selection}")
    rows.append(run_suite(cfg, bundle, write_outputs=False).row)
print(format_table(rows))

print("drop-noise sweep (with correction, SR means):")
for drop in (0.0, 0.1, 0.2, 0.3):
    cfg = RunConfig(master_seed=42, repetitions=5, drop_prob=drop, output_dir=None)
    row = run_suite(cfg, bundle, write_outputs=False).row
    bar = "#" * round(row.sr_mean * 40)
    print(f"  drop={drop:.1f}  SR {row.sr_mean:.3f}  {bar}")
