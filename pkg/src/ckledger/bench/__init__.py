"""Benchmark harness: calibration, cost model, experiments and emission."""

from ckledger.bench.calibration import Calibration
from ckledger.bench.costmodel import CostModelParams, CostPrediction, predict_cost
from ckledger.bench.emit import emit, verify_manifest
from ckledger.bench.experiments import RUNNERS, ExperimentResult, RunConfig, run_all, run_experiment

__all__ = [
    "Calibration",
    "CostModelParams",
    "CostPrediction",
    "ExperimentResult",
    "RUNNERS",
    "RunConfig",
    "emit",
    "predict_cost",
    "run_all",
    "run_experiment",
    "verify_manifest",
]
