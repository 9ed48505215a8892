"""Lindblad channel constructors.

Two exactly solvable classes are supported:

* linear channels -- each Lindblad operator is a complex combination
  L = sum_m l_m c_m of Majorana operators, stored as the coefficient
  vector l of length 2N;
* Hermitian quadratic channels -- each Lindblad operator is
  L = (i/4) sum_{mn} L_mn c_m c_n with a real antisymmetric matrix L.

Fermion operators use a_j = (c_{j,0} + i c_{j,1}) / 2.  In the quadratic
parameterization the single-site spin operator g*sz_j corresponds to the
matrix with site block [[0, -2g], [2g, 0]] (note the factor 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ChannelStrengths:
    """Coupling g (rates scale as g^2) and relative weights mu, nu."""

    g: float
    mu: float = 1.0
    nu: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.g) and self.g >= 0):
            raise ValueError(f"g must be finite and >= 0, got {self.g}")
        if not (math.isfinite(self.mu) and math.isfinite(self.nu)):
            raise ValueError("mu and nu must be finite")


@dataclass(frozen=True)
class LinearChannel:
    """Set of linear Lindblad operators as coefficient vectors (n_ops, 2N)."""

    n_sites: int
    vectors: np.ndarray

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2 or v.shape[1] != 2 * self.n_sites or v.shape[0] == 0:
            raise ValueError(f"vectors must have shape (n_ops >= 1, {2 * self.n_sites})")
        if not np.all(np.isfinite(v)):
            raise ValueError("vectors have non-finite entries")

    def mixing_matrix(self) -> np.ndarray:
        """M = sum_a 2 Re(l_a l_a^dag), real symmetric PSD (2N x 2N)."""
        return 2.0 * np.real(np.einsum("am,an->mn", self.vectors, np.conj(self.vectors)))

    def source_matrix(self) -> np.ndarray:
        """A = sum_a 4 Im(l_a l_a^dag), real antisymmetric; the constant term
        of the covariance-matrix master equation."""
        return 4.0 * np.imag(np.einsum("am,an->mn", self.vectors, np.conj(self.vectors)))


@dataclass(frozen=True)
class QuadraticHermitianChannel:
    """Set of Hermitian quadratic Lindblad operators as real antisymmetric
    matrices (n_ops, 2N, 2N).

    ``mask_weights``, when present, is the 2N x 2N entrywise decay-rate table
    W of the summed dissipator, sum_a (1/2)[L_a,[L_a,Gamma]] = -W * Gamma
    (valid for antisymmetric Gamma); preset constructors attach it so time
    integration avoids per-operator double commutators.
    """

    n_sites: int
    matrices: np.ndarray
    mask_weights: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        m = self.matrices
        dim = 2 * self.n_sites
        if m.ndim != 3 or m.shape[1:] != (dim, dim) or m.shape[0] == 0:
            raise ValueError(f"matrices must have shape (n_ops >= 1, {dim}, {dim})")
        if np.max(np.abs(m + m.transpose(0, 2, 1))) != 0.0:
            raise ValueError("channel matrices must be exactly antisymmetric")


def loss_gain(n_sites: int, strengths: ChannelStrengths) -> LinearChannel:
    """Site-local loss g*mu*a_j and gain g*nu*a_j^dag operators (2N vectors)."""
    g, mu, nu = strengths.g, strengths.mu, strengths.nu
    vectors = np.zeros((2 * n_sites, 2 * n_sites), dtype=complex)
    for j in range(n_sites):
        vectors[2 * j, 2 * j] = g * mu / 2.0
        vectors[2 * j, 2 * j + 1] = 1j * g * mu / 2.0
        vectors[2 * j + 1, 2 * j] = g * nu / 2.0
        vectors[2 * j + 1, 2 * j + 1] = -1j * g * nu / 2.0
    return LinearChannel(n_sites=n_sites, vectors=vectors)


def paired(n_sites: int, strengths: ChannelStrengths) -> LinearChannel:
    """Nearest-neighbor pairing operators g(mu a_j + nu a_{j+1}^dag)."""
    if n_sites < 2:
        raise ValueError("paired channel needs at least 2 sites")
    g, mu, nu = strengths.g, strengths.mu, strengths.nu
    vectors = np.zeros((n_sites, 2 * n_sites), dtype=complex)
    for j in range(n_sites):
        nxt = (j + 1) % n_sites
        vectors[j, 2 * j] = g * mu / 2.0
        vectors[j, 2 * j + 1] = 1j * g * mu / 2.0
        vectors[j, 2 * nxt] = g * nu / 2.0
        vectors[j, 2 * nxt + 1] = -1j * g * nu / 2.0
    return LinearChannel(n_sites=n_sites, vectors=vectors)


def _site_block_mask(n_sites: int) -> np.ndarray:
    """1 on diagonal 2x2 site blocks, 0 elsewhere."""
    return np.kron(np.eye(n_sites), np.ones((2, 2)))


def _xx_preserved_mask(n_sites: int) -> np.ndarray:
    """1 on the entries ((j,0),(j+1,1)) and transposes preserved by the
    bond-centered dephasing channel."""
    mask = np.zeros((2 * n_sites, 2 * n_sites))
    for j in range(n_sites):
        a, b = 2 * j, (2 * j + 3) % (2 * n_sites)
        mask[a, b] = mask[b, a] = 1.0
    return mask


def dephasing_z(n_sites: int, strengths: ChannelStrengths) -> QuadraticHermitianChannel:
    """Site-local sz dephasing: N operators g*mu*sz_j."""
    g, mu = strengths.g, strengths.mu
    dim = 2 * n_sites
    mats = np.zeros((n_sites, dim, dim))
    for j in range(n_sites):
        mats[j, 2 * j, 2 * j + 1] = -2.0 * g * mu
        mats[j, 2 * j + 1, 2 * j] = 2.0 * g * mu
    weights = 4.0 * g**2 * mu**2 * (1.0 - _site_block_mask(n_sites))
    return QuadraticHermitianChannel(n_sites=n_sites, matrices=mats, mask_weights=weights)


def xx_coupling(n_sites: int, strengths: ChannelStrengths) -> QuadraticHermitianChannel:
    """Bond dephasing: N operators g*nu*(i/2)[c_{j,0}, c_{j+1,1}], coupling
    flavor 0 of site j with flavor 1 of site j+1.

    This Majorana ordering (not its flavor-swapped cousin) is the one whose
    combination with sz dephasing reproduces the weak-coupling rate pair of
    :func:`fermicov.analytics.two_lowest_rates`; the two orderings are
    inequivalent bond operators with identical single-channel rates.
    """
    if n_sites < 2:
        raise ValueError("xx coupling needs at least 2 sites")
    g, nu = strengths.g, strengths.nu
    dim = 2 * n_sites
    mats = np.zeros((n_sites, dim, dim))
    for j in range(n_sites):
        a, b = 2 * j, (2 * j + 3) % dim
        mats[j, a, b] = -2.0 * g * nu
        mats[j, b, a] = 2.0 * g * nu
    weights = 4.0 * g**2 * nu**2 * (1.0 - _xx_preserved_mask(n_sites))
    return QuadraticHermitianChannel(n_sites=n_sites, matrices=mats, mask_weights=weights)


def dephasing_xx_mix(n_sites: int, strengths: ChannelStrengths) -> QuadraticHermitianChannel:
    """Combined sz dephasing (weight mu) and sx sx bond dephasing (weight nu)."""
    z = dephasing_z(n_sites, strengths)
    x = xx_coupling(n_sites, strengths)
    return QuadraticHermitianChannel(
        n_sites=n_sites,
        matrices=np.concatenate([z.matrices, x.matrices]),
        mask_weights=z.mask_weights + x.mask_weights,
    )


PRESETS = {
    "loss-gain": loss_gain,
    "paired": paired,
    "dephasing-z": dephasing_z,
    "xx-coupling": xx_coupling,
    "dephasing-xx-mix": dephasing_xx_mix,
}


def make_channel(preset: str, n_sites: int, strengths: ChannelStrengths):
    """Build a channel by CLI-facing preset name."""
    try:
        constructor = PRESETS[preset]
    except KeyError:
        raise ValueError(
            f"unknown channel preset {preset!r}; available: {sorted(PRESETS)}"
        ) from None
    return constructor(n_sites, strengths)
