"""From-scratch recurrent classifiers trained by backpropagation through time."""

from .layers import Dense, Dropout, NonFiniteActivation, Recurrent, ShapeMismatch
from .network import LayerSpec, Network, NetworkSpec, bce_loss, count_params
from .optim import adam_step, init_moments
from .presets import DEEP_FAMILIES, network_spec, train_config
from .training import EmptyDataset, History, RecurrentClassifier, TrainConfig, fit

__all__ = [
    "Dense", "Dropout", "NonFiniteActivation", "Recurrent", "ShapeMismatch",
    "LayerSpec", "Network", "NetworkSpec", "bce_loss", "count_params",
    "adam_step", "init_moments", "DEEP_FAMILIES", "network_spec", "train_config",
    "EmptyDataset", "History", "RecurrentClassifier", "TrainConfig", "fit",
]
