#!/usr/bin/env python3
"""Re-record the expected values of the pinned sweep fixture.

Writes tests/data/sweep_expected.json, which the acceptance suite compares
against bit-for-bit. Run only when the fixture or the pipeline intentionally
changes.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
from run_sweep import SEED, SEPARATION, default_config  # noqa: E402

from failsort.sweep import run_sweep  # noqa: E402
from failsort.synthetic import gen_synthetic  # noqa: E402


def main() -> int:
    ds = gen_synthetic(57, SEPARATION, seed=SEED)
    res = run_sweep(ds, default_config())
    doc = {
        "external_test_oca_by_year": res.external_test_oca_by_year(),
        "fold_avg": res.fold_avg,
        "summary": res.summary,
        "majority": res.majority,
    }
    out = Path(__file__).parent.parent / "tests" / "data" / "sweep_expected.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"recorded {out} ({out.stat().st_size} bytes)")
    if res.errors:
        print(f"warning: {len(res.errors)} failed cells")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
