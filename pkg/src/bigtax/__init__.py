"""Big-data taxonomy toolkit: preprocessing, kernels, classifiers, ensembles, evaluation."""

__version__ = "0.1.0"
