"""Active monitoring engine for neural-network classifiers.

Wraps a trained classifier with an adaptive feature-space monitor that
detects inputs of novel classes in a prediction stream, queries an
authority for labels under a fixed budget, and adapts both the monitor
and the classifier at prediction time.
"""

__version__ = "0.1.0"
