"""Semi-supervised triage pipeline for classified-ad corpora.

Stages: ingest and normalize listings, extract 15 binary trafficking-signal
features, drop all-zero vectors, fit an LDA topic model over the remainder,
then spread a small set of expert labels over a similarity graph of the
document-topic vectors. An HTTP service hosts the expert review loop.
"""

from ._kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
__version__ = "0.1.0"
