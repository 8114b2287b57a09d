"""Tabulate predicted rekey cost over churn levels and epoch lengths.

Uses the calibrated per-update cost; prints a CSV to stdout.
"""

import argparse
import csv
import sys

from ckledger.bench.calibration import Calibration
from ckledger.bench.costmodel import CostModelParams, predict_cost


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--assets", type=int, default=200)
    parser.add_argument("--window", type=float, default=180.0)
    parser.add_argument("--churn", type=float, nargs="+", default=[0, 1, 2, 5, 10, 20])
    parser.add_argument("--epoch-len", type=float, nargs="+", default=[5, 10, 30, 60, 120])
    args = parser.parse_args()

    ck_ms = Calibration.load()["rekey.ck_update"]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["churn_per_min", "R", "epoch_len_s", "E", "naive_s", "epoch_s", "ratio"])
    for churn in args.churn:
        R = round(churn * args.window / 60)
        for L in args.epoch_len:
            p = predict_cost(CostModelParams(M=args.assets, N=0, policy_size_k=6, T_s=args.window, L_s=L, R=R, ck_update_ms=ck_ms))
            writer.writerow([churn, R, L, p.epoch_updates // args.assets, f"{p.naive_rekey_cost_s:.1f}", f"{p.epoch_rekey_cost_s:.1f}", f"{p.ratio:.2f}"])


if __name__ == "__main__":
    main()
