"""Run a sweep described by a YAML config and check the MD curve is monotone."""

import sys
from pathlib import Path

from permdecode.harness import SweepConfig, monotone_within, run_sweep

config = Path(__file__).resolve().parent.parent / "configs" / "plc_sync_md.yaml"
cfg = SweepConfig.load(config)
cfg.trials = 20_000
records = run_sweep(cfg)
for r in records:
    print(f"{r.decoder:>10}  p_bg={r.p_bg:<6} bler={r.bler:.2e} +- {r.stderr:.1e}")

plain = [r for r in records if r.decoder == "md_plain"]
print("md_plain monotone within 3 sigma:", monotone_within(plain))
if len(sys.argv) > 1:
    run_sweep(cfg, Path(sys.argv[1]))
