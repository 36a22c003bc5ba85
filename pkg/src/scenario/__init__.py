from .dataset_io import export_dataset_csv, load_dataset, save_dataset
from .generator import (
    Dataset,
    Hypothesis,
    Observation,
    SecondaryData,
    Split,
    calibrate_alpha,
    clutter_covariance,
    embed_real,
    generate_splits,
    sample_complex_gaussian,
    sample_observation,
    sample_observations,
    sample_secondary,
    sample_texture,
    steering_vector,
    total_covariance,
    unembed_real,
)
from .rng import stream

__all__ = [
    "Dataset",
    "Hypothesis",
    "Observation",
    "SecondaryData",
    "Split",
    "calibrate_alpha",
    "clutter_covariance",
    "embed_real",
    "export_dataset_csv",
    "generate_splits",
    "load_dataset",
    "sample_complex_gaussian",
    "sample_observation",
    "sample_observations",
    "sample_secondary",
    "sample_texture",
    "save_dataset",
    "steering_vector",
    "stream",
    "total_covariance",
    "unembed_real",
]
