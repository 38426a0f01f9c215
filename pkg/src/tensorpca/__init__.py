"""Tensor PCA from orthonormal bases in tensor space."""
