"""Majorana-indexed real antisymmetric matrices and covariance matrices.

A chain of N fermionic modes carries 2N Hermitian Majorana operators
c_{j,u} with site j in [0, N) and flavor u in {0, 1}; the flattened index
is m = 2 j + u.  Quadratic Hamiltonians are parameterized by a real
antisymmetric 2N x 2N matrix H through H_op = (i/4) sum_{mn} H_mn c_m c_n
(hbar = 1), and states enter only through the covariance matrix

    Gamma_mn = tr(rho (i/2) [c_m, c_n]),

which is real, antisymmetric, and satisfies Gamma^T Gamma <= 1 (pure states
saturate the bound).  Fermion operators are recovered as
a_j = (c_{j,0} + i c_{j,1}) / 2, so Gamma_{jj,01} = <2 a_j^dag a_j - 1>.

Translationally invariant matrices block-diagonalize under the unitary
Fourier transform U_{mn,uv} = exp(2 pi i m n / N) delta_uv / sqrt(N) into
2x2 blocks parameterized by (h_n complex, k_n real, l_n real):

    H~_nn = [[i k_n, h_n], [-conj(h_n), i l_n]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances


class AsymmetryError(ValueError):
    """Input matrix is too far from antisymmetric."""


class NotTranslationallyInvariant(ValueError):
    """Site blocks do not depend on the site difference only."""


class DegenerateGroundState(ValueError):
    """A momentum mode has a degenerate single-particle ground state."""

    def __init__(self, mode: int, message: str | None = None):
        self.mode = mode
        super().__init__(message or f"degenerate ground state at mode {mode}")


def flat_index(site: int, flavor: int, n_sites: int) -> int:
    """Flattened Majorana index of c_{site,flavor}."""
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} out of range [0, {n_sites})")
    if flavor not in (0, 1):
        raise ValueError(f"flavor must be 0 or 1, got {flavor}")
    return 2 * site + flavor


def site_flavor(index: int) -> tuple[int, int]:
    """Inverse of :func:`flat_index` (site, flavor)."""
    return index // 2, index % 2


def n_sites_of(matrix: np.ndarray) -> int:
    """Number of sites for a 2N x 2N Majorana-indexed matrix."""
    dim = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != dim or dim % 2:
        raise ValueError(f"expected a square even-dimensional matrix, got {matrix.shape}")
    return dim // 2


def antisymmetrize(raw: np.ndarray, *, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Return the antisymmetric part (raw - raw^T)/2 of a real square matrix.

    Raises
    ------
    AsymmetryError
        If the symmetric remainder exceeds ``tol.antisymmetry_input``
        relative to the largest entry (the input was not approximately
        antisymmetric to begin with).
    ValueError
        If the matrix is not square with even dimension or has non-finite
        entries.
    """
    raw = np.asarray(raw, dtype=float)
    n_sites_of(raw)  # shape check
    if not np.all(np.isfinite(raw)):
        raise ValueError("matrix has non-finite entries")
    scale = np.max(np.abs(raw))
    if scale > 0:
        defect = np.max(np.abs(raw + raw.T)) / scale
        if defect > tol.antisymmetry_input:
            raise AsymmetryError(
                f"relative symmetric part {defect:.3e} exceeds {tol.antisymmetry_input:.1e}"
            )
    return (raw - raw.T) / 2.0


def site_block(matrix: np.ndarray, j: int, k: int) -> np.ndarray:
    """The 2x2 block coupling sites j and k."""
    return matrix[2 * j : 2 * j + 2, 2 * k : 2 * k + 2]


def as_site_blocks(matrix: np.ndarray) -> np.ndarray:
    """View a 2N x 2N matrix as an (N, N, 2, 2) array of site blocks."""
    n = n_sites_of(matrix)
    return matrix.reshape(n, 2, n, 2).transpose(0, 2, 1, 3)


def from_site_blocks(blocks: np.ndarray) -> np.ndarray:
    """Inverse of :func:`as_site_blocks`."""
    n = blocks.shape[0]
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


@dataclass(frozen=True)
class MomentumBlocks:
    """Per-mode parameters (h_n, k_n, l_n) of a Fourier block-diagonal matrix."""

    n_sites: int
    h: np.ndarray  # complex, shape (N,)
    k: np.ndarray  # real, shape (N,)
    l: np.ndarray  # real, shape (N,)

    def __post_init__(self):
        for name in ("h", "k", "l"):
            v = getattr(self, name)
            if v.shape != (self.n_sites,):
                raise ValueError(f"{name} must have shape ({self.n_sites},)")

    def beta(self) -> np.ndarray:
        """sqrt(|h_n|^2 + ((k_n - l_n)/2)^2), the mode energy scale."""
        return np.sqrt(np.abs(self.h) ** 2 + ((self.k - self.l) / 2.0) ** 2)

    def block(self, n: int) -> np.ndarray:
        """The 2x2 momentum block [[i k_n, h_n], [-conj(h_n), i l_n]]."""
        return np.array(
            [[1j * self.k[n], self.h[n]], [-np.conj(self.h[n]), 1j * self.l[n]]]
        )

    def dense_blocks(self) -> np.ndarray:
        """All momentum blocks, shape (N, 2, 2)."""
        out = np.zeros((self.n_sites, 2, 2), dtype=complex)
        out[:, 0, 0] = 1j * self.k
        out[:, 0, 1] = self.h
        out[:, 1, 0] = -np.conj(self.h)
        out[:, 1, 1] = 1j * self.l
        return out

    def reality_symmetry_defect(self) -> float:
        """Max violation of h_{-n} = h_n*, k_{-n} = -k_n, l_{-n} = -l_n."""
        idx = (-np.arange(self.n_sites)) % self.n_sites
        return max(
            float(np.max(np.abs(self.h[idx] - np.conj(self.h)))),
            float(np.max(np.abs(self.k[idx] + self.k))),
            float(np.max(np.abs(self.l[idx] + self.l))),
        )


def fourier_matrix(n_sites: int) -> np.ndarray:
    """The 2N x 2N unitary U_{mn,uv} = exp(2 pi i m n / N) delta_uv / sqrt(N)."""
    m = np.arange(n_sites)
    f = np.exp(2j * np.pi * np.outer(m, m) / n_sites) / np.sqrt(n_sites)
    return np.kron(f, np.eye(2))


def _difference_blocks(matrix: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Site blocks H_s of a circulant-block matrix; checks H_{jk} = H_{j-k}."""
    n = n_sites_of(matrix)
    blocks = as_site_blocks(np.asarray(matrix, dtype=float))
    # H_s from the first block column: H_{j0} has difference j
    dblocks = blocks[:, 0]
    rows = np.arange(n)
    expected = dblocks[(rows[:, None] - rows[None, :]) % n]
    deviation = np.max(np.abs(blocks - expected))
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if deviation > tol.structural * scale:
        raise NotTranslationallyInvariant(
            f"max deviation across block diagonals {deviation:.3e}"
        )
    return dblocks


def to_momentum(matrix: np.ndarray, *, tol: Tolerances = DEFAULT_TOL) -> MomentumBlocks:
    """Fourier block-diagonalize a translationally invariant antisymmetric matrix.

    Computes H~_nn = sum_s H_s exp(-2 pi i s n / N) and parses the blocks into
    (h_n, k_n, l_n).  Raises :class:`NotTranslationallyInvariant` when the site
    blocks do not depend on the difference (j - k) mod N alone.
    """
    n = n_sites_of(matrix)
    dblocks = _difference_blocks(matrix, tol)
    tilde = np.fft.fft(dblocks, axis=0)  # sum_s H_s e^{-2 pi i s n / N}
    scale = max(1.0, float(np.max(np.abs(tilde))))
    # structural sanity on the parameterization
    if np.max(np.abs(tilde[:, 0, 0].real)) > tol.structural * scale or np.max(
        np.abs(tilde[:, 1, 1].real)
    ) > tol.structural * scale:
        raise ValueError("momentum blocks have non-imaginary diagonal entries")
    if np.max(np.abs(tilde[:, 1, 0] + np.conj(tilde[:, 0, 1]))) > tol.structural * scale:
        raise ValueError("momentum blocks are not anti-Hermitian")
    return MomentumBlocks(
        n_sites=n,
        h=tilde[:, 0, 1].copy(),
        k=tilde[:, 0, 0].imag.copy(),
        l=tilde[:, 1, 1].imag.copy(),
    )


def from_momentum(blocks: MomentumBlocks, *, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Assemble the real-space circulant-block matrix from momentum blocks."""
    n = blocks.n_sites
    tilde = blocks.dense_blocks()
    dblocks = np.fft.ifft(tilde, axis=0)  # H_s = (1/N) sum_n H~_n e^{+2 pi i s n / N}
    scale = max(1.0, float(np.max(np.abs(dblocks))))
    if np.max(np.abs(dblocks.imag)) > tol.structural * scale:
        raise ValueError("momentum blocks do not correspond to a real matrix")
    dense = np.zeros((2 * n, 2 * n))
    full = as_site_blocks(dense)
    rows = np.arange(n)
    full[...] = dblocks.real[(rows[:, None] - rows[None, :]) % n]
    return from_site_blocks(full)


def excitation_energies(blocks: MomentumBlocks) -> np.ndarray:
    """Elementary excitation energies, both branches, shape (N, 2).

    eps_n = |(k_n + l_n)/2 +- sqrt(((k_n - l_n)/2)^2 + |h_n|^2)|
    """
    mid = (blocks.k + blocks.l) / 2.0
    beta = blocks.beta()
    return np.abs(np.stack([mid + beta, mid - beta], axis=1))


def ground_state_cm(blocks: MomentumBlocks, *, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Covariance matrix of the quadratic Hamiltonian's ground state.

    Mode by mode the momentum block is, for k_n l_n < |h_n|^2,

        G_n = [[i(k_n-l_n)/2, -h_n], [conj(h_n), -i(k_n-l_n)/2]] / beta_n,

    and -i sign(k_n + l_n) * I otherwise; the result is transformed back to a
    real antisymmetric (pure) covariance matrix.

    Raises
    ------
    DegenerateGroundState
        When a mode has beta_n = 0 (first branch) or k_n + l_n = 0 (second
        branch): the single-particle ground state is not unique there.
    """
    n = blocks.n_sites
    beta = blocks.beta()
    g = np.zeros((n, 2, 2), dtype=complex)
    for m in range(n):
        kl = blocks.k[m] * blocks.l[m]
        if kl < np.abs(blocks.h[m]) ** 2:
            if beta[m] <= tol.structural:
                raise DegenerateGroundState(m)
            d = (blocks.k[m] - blocks.l[m]) / 2.0
            g[m] = np.array(
                [[1j * d, -blocks.h[m]], [np.conj(blocks.h[m]), -1j * d]]
            ) / beta[m]
        else:
            s = blocks.k[m] + blocks.l[m]
            if abs(s) <= tol.structural:
                raise DegenerateGroundState(
                    m, f"mode {m}: sign(k+l) undefined at k+l = 0"
                )
            g[m] = -1j * np.sign(s) * np.eye(2)
    gamma = from_momentum(
        MomentumBlocks(n_sites=n, h=g[:, 0, 1].copy(), k=g[:, 0, 0].imag.copy(),
                       l=g[:, 1, 1].imag.copy()),
        tol=tol,
    )
    gamma = (gamma - gamma.T) / 2.0
    purity = np.max(np.abs(gamma.T @ gamma - np.eye(2 * n)))
    if purity > tol.spectral:
        raise ValueError(f"ground-state CM purity defect {purity:.3e}")
    return gamma


def energy_expectation(hamiltonian: np.ndarray, gamma: np.ndarray) -> float:
    """Tr(H^T Gamma); the operator expectation value is this divided by 4."""
    if hamiltonian.shape != gamma.shape:
        raise ValueError(
            f"dimension mismatch: {hamiltonian.shape} vs {gamma.shape}"
        )
    return float(np.sum(hamiltonian * gamma))


@dataclass(frozen=True)
class CMDiagnostics:
    """Validation record for a candidate covariance matrix."""

    antisymmetry_defect: float
    max_gram_eigenvalue: float  # largest eigenvalue of Gamma^T Gamma
    purity_defect: float  # max |eig(Gamma^T Gamma) - 1|
    valid: bool
    pure: bool


def validate_cm(gamma: np.ndarray, *, tol: Tolerances = DEFAULT_TOL) -> CMDiagnostics:
    """Diagnose antisymmetry and the eigenvalue bound Gamma^T Gamma <= 1."""
    gamma = np.asarray(gamma, dtype=float)
    n_sites_of(gamma)
    scale = max(1.0, float(np.max(np.abs(gamma))))
    anti = float(np.max(np.abs(gamma + gamma.T)))
    gram_eigs = np.linalg.eigvalsh(gamma.T @ gamma)
    max_eig = float(gram_eigs[-1])
    purity = float(np.max(np.abs(gram_eigs - 1.0)))
    valid = anti <= tol.structural * scale and max_eig <= 1.0 + tol.spectral
    return CMDiagnostics(
        antisymmetry_defect=anti,
        max_gram_eigenvalue=max_eig,
        purity_defect=purity,
        valid=valid,
        pure=valid and purity <= tol.spectral,
    )


def random_pure_cm(n_sites: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-random pure Gaussian covariance matrix (orthogonal conjugation
    of the reference ground-state pattern)."""
    ref = np.kron(np.eye(n_sites), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    a = rng.standard_normal((2 * n_sites, 2 * n_sites))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q @ ref @ q.T


def site_polarization(gamma: np.ndarray) -> np.ndarray:
    """Per-site <2 a_j^dag a_j - 1> = Gamma_{jj,01}, shape (N,)."""
    n = n_sites_of(gamma)
    j = np.arange(n)
    return gamma[2 * j, 2 * j + 1]


def occupations(gamma: np.ndarray) -> np.ndarray:
    """Per-site <a_j^dag a_j> = (1 + Gamma_{jj,01}) / 2."""
    return (1.0 + site_polarization(gamma)) / 2.0
