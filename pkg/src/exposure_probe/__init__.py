"""Exposure-aware evaluation of bug-vs-fix preference in code language models.

The pipeline builds a strided Bloom-filter portrait of a training corpus,
classifies bug/fix variants by training-data exposure, scores model
preference with likelihood metrics, and matches sampled completions
against both variants.
"""

__version__ = "0.1.0"
