"""Quadratic Hamiltonian constructors.

The anisotropic XY chain in a transverse field,

    H = -J sum_j [(1+gamma) sx_j sx_{j+1} + (1-gamma) sy_j sy_{j+1}]
        + B sum_j sz_j,

maps under the Jordan-Wigner transformation to a quadratic fermionic
Hamiltonian with circulant site blocks

    H_0 = [[0, -2B], [2B, 0]],
    H_1 = [[0, 2J(1-gamma)], [-2J(1+gamma), 0]],   H_{-1} = -H_1^T,

whose momentum parameters are h_n = -2B + 2J[(1+gamma) e^{2 pi i n/N}
+ (1-gamma) e^{-2 pi i n/N}], k_n = l_n = 0.  Generic translationally
invariant models are specified by their difference blocks H_s directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .majorana import as_site_blocks, from_site_blocks


@dataclass(frozen=True)
class XYParams:
    """Anisotropic XY chain parameters (periodic boundary conditions)."""

    n_sites: int
    coupling: float = 1.0  # J
    gamma: float = 1.0
    field: float = 0.0  # B

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.n_sites}")
        for name in ("coupling", "gamma", "field"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def xy_blocks(params: XYParams) -> dict[int, np.ndarray]:
    """Nearest-neighbor difference blocks of the XY chain."""
    j, g, b = params.coupling, params.gamma, params.field
    h0 = np.array([[0.0, -2.0 * b], [2.0 * b, 0.0]])
    h1 = np.array([[0.0, 2.0 * j * (1.0 - g)], [-2.0 * j * (1.0 + g), 0.0]])
    return {0: h0, 1: h1, -1: -h1.T}


def xy_chain(params: XYParams) -> np.ndarray:
    """Dense 2N x 2N antisymmetric matrix of the XY chain."""
    return from_blocks(TIBlockSpec(n_sites=params.n_sites, blocks=xy_blocks(params)))


@dataclass(frozen=True)
class TIBlockSpec:
    """Translationally invariant model given by difference blocks H_s.

    ``blocks`` maps the signed site difference s to a 2x2 real block; the
    antisymmetry partner H_{-s} = -H_s^T is filled in automatically and
    checked when both are supplied.
    """

    n_sites: int
    blocks: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.n_sites}")
        for s, blk in self.blocks.items():
            if np.asarray(blk).shape != (2, 2):
                raise ValueError(f"block {s} is not 2x2")
            if abs(s) > self.n_sites // 2:
                raise ValueError(
                    f"block range |s| = {abs(s)} exceeds N/2 = {self.n_sites // 2}"
                )

    def completed(self, tol: Tolerances = DEFAULT_TOL) -> dict[int, np.ndarray]:
        """Blocks with antisymmetry partners filled and validated."""
        out: dict[int, np.ndarray] = {}
        for s, blk in self.blocks.items():
            blk = np.asarray(blk, dtype=float)
            partner = -blk.T
            if s == 0:
                if np.max(np.abs(blk + blk.T)) > tol.structural:
                    raise ValueError("on-site block must be antisymmetric")
                out[0] = blk
                continue
            if -s in out:
                if np.max(np.abs(out[-s] - partner)) > tol.structural:
                    raise ValueError(f"blocks {s} and {-s} violate H_-s = -H_s^T")
            out[s] = blk
            out.setdefault(-s, partner)
        return out


def from_blocks(spec: TIBlockSpec, *, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Assemble the dense circulant-block antisymmetric matrix."""
    n = spec.n_sites
    completed = spec.completed(tol)
    dblocks = np.zeros((n, 2, 2))
    for s, blk in completed.items():
        dblocks[s % n] += blk
    dense = np.zeros((2 * n, 2 * n))
    full = as_site_blocks(dense)
    rows = np.arange(n)
    full[...] = dblocks[(rows[:, None] - rows[None, :]) % n]
    out = from_site_blocks(full)
    defect = np.max(np.abs(out + out.T))
    if defect > tol.structural * max(1.0, np.max(np.abs(out))):
        raise ValueError(f"assembled matrix not antisymmetric, defect {defect:.3e}")
    return out


def xy_momentum_h(params: XYParams) -> np.ndarray:
    """h_n of the XY chain, directly from the closed form."""
    n = np.arange(params.n_sites)
    phase = np.exp(2j * np.pi * n / params.n_sites)
    j, g = params.coupling, params.gamma
    return -2.0 * params.field + 2.0 * j * ((1.0 + g) * phase + (1.0 - g) / phase)
