"""Floating-point evaluation, transcription oracles, period quadrature and the curvature oracle."""
from .evaluate import EvalPoint, evaluate

__all__ = ["EvalPoint", "evaluate"]
