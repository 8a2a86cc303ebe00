"""Feature extraction, statistics, topic models, tree ensembles and Shapley attribution for tweet corpora."""

__version__ = "0.1.0"
