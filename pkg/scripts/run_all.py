"""Run every experiment and write CSV/JSON results plus a manifest.

    python3 scripts/run_all.py --mode calibrated --seed 42 --out results
"""

import sys

from ckledger.cli import main

if __name__ == "__main__":
    raise SystemExit(main(["bench", "run-all", *sys.argv[1:]]))
