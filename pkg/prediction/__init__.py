from __future__ import annotations

from .evaluation import ScoreReport, evaluate_predictor
from .predictor import Predictor, assemble_predictor, predict_intensity
from .traces import write_trace_csv

__all__ = [
    "Predictor",
    "ScoreReport",
    "assemble_predictor",
    "evaluate_predictor",
    "predict_intensity",
    "write_trace_csv",
]
