"""Model and dataset IR plus the reference evaluator."""

from .core import (
    DecisionFunction, Dense, Model, NetworkGraph, Normalization, Pipeline, ReLU,
    SvmModel, compose_sequential, decision, eval_batch, eval_model, flat_layers, is_rbf, signature,
)
from .dataset import Dataset, Row, load_dataset, parse_dataset
from .native import load_model, model_from_dict, model_to_dict, parse_native_model, write_native_model
from .nnet import parse_nnet, write_nnet

__all__ = [
    "DecisionFunction", "Dense", "Model", "NetworkGraph", "Normalization", "Pipeline",
    "ReLU", "SvmModel", "compose_sequential", "decision", "eval_batch", "eval_model", "flat_layers",
    "is_rbf", "signature", "Dataset", "Row", "load_dataset", "parse_dataset",
    "load_model", "model_from_dict", "model_to_dict", "parse_native_model",
    "write_native_model", "parse_nnet", "write_nnet",
]
