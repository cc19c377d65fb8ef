"""bindkit: drug-target interaction prediction with swappable encoders.

Featurize compounds (SMILES) and proteins (sequences), train any valid
encoder pair end-to-end against binding labels, evaluate, screen compound
libraries, and serve predictions over HTTP.
"""

import logging
import os

__version__ = "0.1.0"

_level = os.environ.get("BINDKIT_LOG", "WARNING").upper()
logging.getLogger("bindkit").setLevel(getattr(logging, _level, logging.WARNING))

from . import (chemgraph, dataio, drug_features, encoders, espf, metrics, nn,  # noqa: E402
               persist, protein_features, screening, training)

__all__ = [
    "chemgraph", "drug_features", "protein_features", "espf", "nn", "encoders",
    "metrics", "training", "dataio", "screening", "persist", "__version__",
]
