"""Hierarchical hidden Markov models for sequences of high-frequency curves."""
from .features import DiveRecord, FeatureConfig, RawSeries, WindowFeatures
from .models import HierModelParams, ModelSpec, hier_loglik
from .simulate import SimConfig, design_params, simulate

__version__ = "0.1.0"
