"""Brute-force exact-diagonalization oracle for small chains (N <= 3).

Builds Jordan-Wigner Majorana operators as dense 2^N x 2^N matrices,
assembles full density-matrix Liouvillians (4^N x 4^N) for both channel
classes, and compares the resulting dynamics, spectra and steady states
against the covariance-matrix machinery.  Everything here is deliberately
naive: dense matrices, scaling-and-squaring exponentials, no shortcuts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy.linalg import expm

from .channels import LinearChannel, QuadraticHermitianChannel
from .config import DEFAULT_TOL
from .majorana import n_sites_of

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

HARD_CAP = 4


def _kron_chain(ops) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def spin_op(n_sites: int, site: int, op: np.ndarray) -> np.ndarray:
    """Single-site Pauli operator embedded in the 2^N-dimensional space."""
    return _kron_chain([op if j == site else ID2 for j in range(n_sites)])


def _check_cap(n_sites: int):
    if n_sites > HARD_CAP:
        raise ValueError(f"ED oracle capped at N = {HARD_CAP}, got {n_sites}")
    if n_sites == HARD_CAP:
        warnings.warn("ED oracle at N = 4 is slow; intended for N <= 3", stacklevel=3)


def build_majoranas(n_sites: int) -> list[np.ndarray]:
    """Jordan-Wigner Majorana operators c_{j,0}, c_{j,1} (flattened order)."""
    _check_cap(n_sites)
    ops = []
    for j in range(n_sites):
        string = [SZ] * j
        ops.append(_kron_chain(string + [SX] + [ID2] * (n_sites - j - 1)))
        ops.append(_kron_chain(string + [SY] + [ID2] * (n_sites - j - 1)))
    return ops


def car_defect(majoranas: list[np.ndarray]) -> float:
    """Max violation of {c_m, c_n} = 2 delta_mn."""
    dim = majoranas[0].shape[0]
    worst = 0.0
    for m, cm in enumerate(majoranas):
        for n, cn in enumerate(majoranas):
            target = 2.0 * np.eye(dim) if m == n else 0.0
            worst = max(worst, float(np.max(np.abs(cm @ cn + cn @ cm - target))))
    return worst


def parity_operator(n_sites: int) -> np.ndarray:
    """P = sz_1 ... sz_N."""
    return _kron_chain([SZ] * n_sites)


def annihilation_ops(majoranas: list[np.ndarray]) -> list[np.ndarray]:
    """a_j = (c_{j,0} + i c_{j,1}) / 2."""
    return [
        (majoranas[2 * j] + 1j * majoranas[2 * j + 1]) / 2.0
        for j in range(len(majoranas) // 2)
    ]


def fermionic_hamiltonian(h_matrix: np.ndarray, majoranas: list[np.ndarray]) -> np.ndarray:
    """(i/4) sum_{mn} H_mn c_m c_n as a dense matrix."""
    dim = majoranas[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(h_matrix.shape[0]):
        for n in range(h_matrix.shape[1]):
            if h_matrix[m, n] != 0.0:
                out += (1j / 4.0) * h_matrix[m, n] * (majoranas[m] @ majoranas[n])
    return out


def lindblad_operators(channel, majoranas: list[np.ndarray]) -> list[np.ndarray]:
    """Dense Lindblad operators for either channel class."""
    if isinstance(channel, LinearChannel):
        dim = majoranas[0].shape[0]
        ops = []
        for v in channel.vectors:
            op = np.zeros((dim, dim), dtype=complex)
            for m in range(len(majoranas)):
                if v[m] != 0.0:
                    op += v[m] * majoranas[m]
            ops.append(op)
        return ops
    if isinstance(channel, QuadraticHermitianChannel):
        return [fermionic_hamiltonian(mat, majoranas) for mat in channel.matrices]
    raise TypeError(f"unsupported channel type {type(channel)!r}")


def liouvillian_dense(h_matrix: np.ndarray, channel=None,
                      majoranas: list[np.ndarray] | None = None) -> np.ndarray:
    """Dense Liouvillian on row-major vectorized density matrices.

    S = -i(H x 1 - 1 x H^T) + sum_a [L x conj(L) - (1/2)(L^dag L x 1)
        - (1/2)(1 x (L^dag L)^T)]
    """
    n = n_sites_of(h_matrix)
    if majoranas is None:
        majoranas = build_majoranas(n)
    dim = majoranas[0].shape[0]
    eye = np.eye(dim)
    h_op = fermionic_hamiltonian(h_matrix, majoranas)
    liou = -1j * (np.kron(h_op, eye) - np.kron(eye, h_op.T))
    if channel is not None:
        for l_op in lindblad_operators(channel, majoranas):
            ldl = l_op.conj().T @ l_op
            liou += np.kron(l_op, l_op.conj())
            liou -= 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))
    return liou


def cm_from_rho(rho: np.ndarray, majoranas: list[np.ndarray]) -> np.ndarray:
    """Covariance matrix Gamma_mn = tr(rho (i/2)[c_m, c_n])."""
    n_maj = len(majoranas)
    gamma = np.zeros((n_maj, n_maj))
    for m in range(n_maj):
        for n in range(m + 1, n_maj):
            comm = majoranas[m] @ majoranas[n] - majoranas[n] @ majoranas[m]
            val = 0.5j * np.trace(rho @ comm)
            gamma[m, n] = val.real
            gamma[n, m] = -val.real
    return gamma


def ground_state_rho(h_matrix: np.ndarray, majoranas: list[np.ndarray]) -> np.ndarray:
    """Projector onto the ground state of the quadratic Hamiltonian."""
    h_op = fermionic_hamiltonian(h_matrix, majoranas)
    vals, vecs = np.linalg.eigh(h_op)
    psi = vecs[:, 0]
    return np.outer(psi, psi.conj())


def evolve_rho(liouvillian: np.ndarray, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Density-matrix trajectory via propagator exponentials, shape (T, d, d)."""
    dim = rho0.shape[0]
    vec = rho0.reshape(-1)
    out = np.empty((len(times), dim, dim), dtype=complex)
    for i, t in enumerate(times):
        out[i] = (expm(liouvillian * t) @ vec).reshape(dim, dim)
    return out


def steady_space_dimension(liouvillian: np.ndarray, *, tol: float = 1e-9) -> int:
    """Number of (right) eigenvalues at zero within tolerance."""
    eigs = np.linalg.eigvals(liouvillian)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    return int(np.sum(np.abs(eigs) <= tol * scale))


@dataclass
class OracleReport:
    """Machine-readable comparison between CM and density-matrix dynamics."""

    n_sites: int
    channel_kind: str
    trajectory_max_deviation: float
    spectrum_max_distance: float
    steady_state_max_deviation: float | None
    trajectory_tol: float
    spectrum_tol: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _spectrum_subset_distance(cm_eigs: np.ndarray, dense_eigs: np.ndarray) -> float:
    """Max over CM eigenvalues of the distance to the closest dense eigenvalue."""
    dist = np.abs(cm_eigs[:, None] - dense_eigs[None, :])
    return float(np.max(np.min(dist, axis=1)))


def oracle_compare(h_matrix: np.ndarray, channel, *, t_end: float = 50.0,
                   n_samples: int = 101, rho0: np.ndarray | None = None,
                   trajectory_tol: float = 1e-8,
                   spectrum_tol: float = 1e-8) -> OracleReport:
    """Compare CM-level dynamics against the dense Liouvillian.

    Checks (i) the full CM trajectory from ``rho0`` (ground state of the
    Hamiltonian by default) against tr(rho(t) (i/2)[c,c]); (ii) that the
    physical CM-superoperator spectrum is a subset of the dense Liouvillian
    spectrum; (iii) for linear channels, the steady-state CMs.
    """
    from . import spectral

    n = n_sites_of(h_matrix)
    majoranas = build_majoranas(n)
    liou = liouvillian_dense(h_matrix, channel, majoranas)
    if rho0 is None:
        rho0 = ground_state_rho(h_matrix, majoranas)
    times = np.linspace(0.0, t_end, n_samples)

    rho_traj = evolve_rho(liou, rho0, times)
    gamma0 = cm_from_rho(rho0, majoranas)

    linear = isinstance(channel, LinearChannel)
    superop = (
        spectral.assemble_linear(h_matrix, channel)
        if linear
        else spectral.assemble_quadratic(h_matrix, channel)
    )
    cm_traj = spectral.propagate_exact(superop, gamma0, times)

    worst_traj = 0.0
    for rho_t, gamma_t in zip(rho_traj, cm_traj):
        gamma_ed = cm_from_rho(rho_t, majoranas)
        worst_traj = max(worst_traj, float(np.max(np.abs(gamma_ed - gamma_t))))

    cm_eigs = spectral.antisymmetric_sector_eigenvalues(superop)
    dense_eigs = np.linalg.eigvals(liou)
    scale = max(1.0, float(np.max(np.abs(dense_eigs))))
    spec_dist = _spectrum_subset_distance(cm_eigs, dense_eigs) / scale

    steady_dev = None
    if linear:
        gamma_ss = spectral.steady_state_linear(superop)
        # dense steady state: kernel of the Liouvillian, trace-normalized
        vals, vecs = np.linalg.eig(liou)
        idx = int(np.argmin(np.abs(vals)))
        dim = rho0.shape[0]
        rho_ss = vecs[:, idx].reshape(dim, dim)
        rho_ss = rho_ss / np.trace(rho_ss)
        rho_ss = (rho_ss + rho_ss.conj().T) / 2.0
        steady_dev = float(np.max(np.abs(cm_from_rho(rho_ss, majoranas) - gamma_ss)))

    passed = (
        worst_traj < trajectory_tol
        and spec_dist < spectrum_tol
        and (steady_dev is None or steady_dev < trajectory_tol)
    )
    return OracleReport(
        n_sites=n,
        channel_kind="linear" if linear else "quadratic",
        trajectory_max_deviation=worst_traj,
        spectrum_max_distance=spec_dist,
        steady_state_max_deviation=steady_dev,
        trajectory_tol=trajectory_tol,
        spectrum_tol=spectrum_tol,
        passed=passed,
    )
