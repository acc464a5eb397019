"""Desk-scale speaker verification with adversarial data augmentation.

Synthesizes a self-contained multi-speaker corpus, trains embedding
extractors under three regimes (no augmentation, additive-noise
augmentation, and augmentation plus an adversarial anti-residual
objective), and evaluates them with cosine scoring and EER under seen
and unseen noise conditions.
"""

__version__ = "0.1.0"
