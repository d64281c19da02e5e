"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
``DIAGNET_PURE_PYTHON`` environment variable is set to a non-empty value,
the numpy fallback is used.
"""
import os

if os.environ.get("DIAGNET_PURE_PYTHON"):
    from diagnet import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from diagnet import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        from diagnet import _kernels_py as _impl
        BACKEND = "python"

cosine_distance_matrix = _impl.cosine_distance_matrix
euclidean_distance_matrix = _impl.euclidean_distance_matrix
knn_select = _impl.knn_select
signed_graph_loss = _impl.signed_graph_loss
pegasos_train = _impl.pegasos_train

__all__ = [
    "BACKEND",
    "cosine_distance_matrix",
    "euclidean_distance_matrix",
    "knn_select",
    "signed_graph_loss",
    "pegasos_train",
]
