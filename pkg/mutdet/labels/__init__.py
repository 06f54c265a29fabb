"""labels/__init__.py

Offline pseudo-label preparation: PCA, k-means and the label store.
"""

from mutdet.labels.store import (  # noqa: F401
    PseudoLabel, PseudoLabelSet, read_label_store, write_label_store
)
