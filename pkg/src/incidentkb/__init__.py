"""Transportation cyber-incident knowledge base.

Normalizes heterogeneous incident feeds into canonical records,
classifies each incident's transportation mode, and answers questions
over the corpus with hybrid (dense + BM25) retrieval-augmented
generation.
"""

__version__ = "0.1.0"
