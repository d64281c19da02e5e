"""Signed graph regularized classification with adversarial neighbor augmentation."""

__version__ = "0.1.0"
