from .datagen import Dataset, LabeledStep, TrainingExample, generate_labels
from .features import SubproblemData, subproblem_features, summary_features, summary_features_batch
from .models import RegressionModel, huber, init_model, load_model
from .train import TrainConfig, augment, train

__all__ = [
    "Dataset",
    "LabeledStep",
    "RegressionModel",
    "SubproblemData",
    "TrainConfig",
    "TrainingExample",
    "augment",
    "generate_labels",
    "huber",
    "init_model",
    "load_model",
    "subproblem_features",
    "summary_features",
    "summary_features_batch",
    "train",
]
