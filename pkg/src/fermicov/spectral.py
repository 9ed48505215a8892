"""Covariance-matrix Liouvillians: assembly, spectra, steady states.

For linear channels the master equation is affine,

    d/dt Gamma = [H, Gamma] - {M, Gamma} + A,
    M = sum_a 2 Re(l_a l_a^dag),   A = sum_a 4 Im(l_a l_a^dag),

and for Hermitian quadratic channels it is linear,

    d/dt Gamma = [H, Gamma] + (1/2) sum_a [L_a, [L_a, Gamma]].

Vectorization is row-major (C order), vec(Gamma) = Gamma.reshape(-1); for
antisymmetric H and symmetric M the assembled superoperators H x 1 + 1 x H
and M x 1 + 1 x M are identical to their column-major counterparts.  The
asymptotic decay rate (ADR) is the smallest |Re lambda| above the zero
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .channels import ChannelStrengths, LinearChannel, QuadraticHermitianChannel
from .config import DEFAULT_TOL, Tolerances
from .majorana import MomentumBlocks, from_momentum, n_sites_of, validate_cm


class SingularSteadyState(ValueError):
    """The linear steady-state system is (numerically) singular."""

    def __init__(self, nullity: int):
        self.nullity = nullity
        super().__init__(
            f"steady-state system is singular (estimated nullity {nullity}); "
            "the steady state is not unique"
        )


def vec(matrix: np.ndarray) -> np.ndarray:
    """Row-major vectorization."""
    return matrix.reshape(-1)


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    return vector.reshape(dim, dim)


def _add_kron_left(s4: np.ndarray, a: np.ndarray, factor: float = 1.0):
    """In-place s += factor * kron(a, identity) on the (d,d,d,d) view."""
    d = a.shape[0]
    for j in range(d):
        s4[:, j, :, j] += factor * a


def _add_kron_right(s4: np.ndarray, b: np.ndarray, factor: float = 1.0):
    """In-place s += factor * kron(identity, b) on the (d,d,d,d) view."""
    d = b.shape[0]
    for i in range(d):
        s4[i, :, i, :] += factor * b


def _add_kron_pair(s4: np.ndarray, l: np.ndarray, factor: float = 1.0):
    """In-place s += factor * kron(l, l), exploiting sparsity of l."""
    rows, cols = np.nonzero(l)
    vals = l[rows, cols]
    for a, b, va in zip(rows, cols, vals):
        for c, d, vc in zip(rows, cols, vals):
            s4[a, c, b, d] += factor * va * vc


@dataclass
class SuperoperatorDense:
    """Dense (2N)^2 x (2N)^2 superoperator acting on vectorized Gamma.

    ``matrix`` is S with d/dt |Gamma> = S |Gamma> - |affine| (affine is zero
    for quadratic channels).  The Hamiltonian and mixing parts are rebuilt on
    demand for invariant checks rather than stored.
    """

    n_sites: int
    kind: str  # "linear" | "quadratic"
    matrix: np.ndarray
    affine: np.ndarray
    hamiltonian: np.ndarray = field(repr=False)
    channel: object = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.n_sites

    def hamiltonian_superop(self) -> np.ndarray:
        d = self.dim
        out = np.zeros((d * d, d * d))
        s4 = out.reshape(d, d, d, d)
        _add_kron_left(s4, self.hamiltonian)
        _add_kron_right(s4, -self.hamiltonian.T)
        return out

    def mixing_superop(self) -> np.ndarray:
        """The positive semi-definite part, S = H_superop - mixing."""
        return self.hamiltonian_superop() - self.matrix

    def action(self, gamma: np.ndarray) -> np.ndarray:
        """d/dt Gamma for the given covariance matrix."""
        d = self.dim
        return unvec(self.matrix @ vec(gamma) - self.affine, d)


def _hamiltonian_into(s4: np.ndarray, h: np.ndarray):
    _add_kron_left(s4, h)
    _add_kron_right(s4, -h.T)


def assemble_linear(hamiltonian: np.ndarray, channel: LinearChannel) -> SuperoperatorDense:
    """Superoperator for a quadratic Hamiltonian with linear Lindblad operators."""
    d = hamiltonian.shape[0]
    if d != 2 * channel.n_sites:
        raise ValueError(
            f"dimension mismatch: H is {hamiltonian.shape}, channel has N = {channel.n_sites}"
        )
    m_tot = channel.mixing_matrix()
    a_tot = channel.source_matrix()
    s = np.zeros((d * d, d * d))
    s4 = s.reshape(d, d, d, d)
    _hamiltonian_into(s4, hamiltonian)
    _add_kron_left(s4, m_tot, -1.0)
    _add_kron_right(s4, m_tot.T, -1.0)
    return SuperoperatorDense(
        n_sites=channel.n_sites,
        kind="linear",
        matrix=s,
        affine=-vec(a_tot).copy(),
        hamiltonian=np.asarray(hamiltonian, dtype=float),
        channel=channel,
    )


def assemble_quadratic(hamiltonian: np.ndarray,
                       channel: QuadraticHermitianChannel) -> SuperoperatorDense:
    """Superoperator for Hermitian quadratic Lindblad operators.

    Uses (L x 1 + 1 x L)^2 = L^2 x 1 + 1 x L^2 + 2 L x L so that the sum over
    operators costs one 2N x 2N accumulation plus sparse kron updates.
    """
    d = hamiltonian.shape[0]
    if d != 2 * channel.n_sites:
        raise ValueError(
            f"dimension mismatch: H is {hamiltonian.shape}, channel has N = {channel.n_sites}"
        )
    s = np.zeros((d * d, d * d))
    s4 = s.reshape(d, d, d, d)
    _hamiltonian_into(s4, hamiltonian)
    l_sq = np.einsum("aij,ajk->ik", channel.matrices, channel.matrices)
    _add_kron_left(s4, l_sq, 0.5)
    _add_kron_right(s4, l_sq, 0.5)
    for l in channel.matrices:
        _add_kron_pair(s4, l, 1.0)
    return SuperoperatorDense(
        n_sites=channel.n_sites,
        kind="quadratic",
        matrix=s,
        affine=np.zeros(d * d),
        hamiltonian=np.asarray(hamiltonian, dtype=float),
        channel=channel,
    )


@dataclass(frozen=True)
class LiouvillianSpectrum:
    """Eigenvalues of a CM-level superoperator with the extracted ADR."""

    eigenvalues: np.ndarray
    zero_threshold: float
    adr: float
    zero_cluster_size: int
    adr_cluster_size: int


def _extract_adr(eigs: np.ndarray, tol: Tolerances) -> tuple[float, float, int, int]:
    re = np.abs(eigs.real)
    threshold = max(tol.adr_absolute, tol.adr_relative * float(re.max(initial=0.0)))
    nonzero = re > threshold
    zero_cluster = int(np.sum(~nonzero))
    if not np.any(nonzero):
        return 0.0, threshold, zero_cluster, 0
    adr = float(re[nonzero].min())
    cluster_tol = max(1e-12, 1e-6 * adr)
    adr_cluster = int(np.sum(np.abs(re - adr) <= cluster_tol))
    return adr, threshold, zero_cluster, adr_cluster


def spectrum(superop: SuperoperatorDense, *, dimension_cap: int = 10_000,
             tol: Tolerances = DEFAULT_TOL, sector: str = "antisymmetric",
             overwrite_matrix: bool = False) -> LiouvillianSpectrum:
    """Dense non-symmetric eigendecomposition of the superoperator.

    ``sector="antisymmetric"`` (default) diagonalizes the physical
    covariance-matrix sector of dimension N(2N-1); ``sector="full"`` the
    embedding (2N)^2 space, which additionally contains unphysical
    symmetric-sector eigenvalues (including an exact zero from the identity
    matrix for quadratic channels).  The matrix dimension must not exceed
    ``dimension_cap`` (use the momentum path for larger translationally
    invariant systems).
    """
    dim = superop.matrix.shape[0]
    if dim > dimension_cap:
        raise ValueError(
            f"superoperator dimension {dim} exceeds cap {dimension_cap}; "
            "use the momentum-resolved path"
        )
    if sector == "antisymmetric":
        matrix = antisymmetric_sector_matrix(superop)
        eigs = scipy.linalg.eigvals(matrix, check_finite=False, overwrite_a=True)
    elif sector == "full":
        eigs = scipy.linalg.eigvals(
            superop.matrix, check_finite=False, overwrite_a=overwrite_matrix
        )
    else:
        raise ValueError(f"unknown sector {sector!r}")
    adr, threshold, nzero, nadr = _extract_adr(eigs, tol)
    return LiouvillianSpectrum(
        eigenvalues=eigs,
        zero_threshold=threshold,
        adr=adr,
        zero_cluster_size=nzero,
        adr_cluster_size=nadr,
    )


def antisymmetric_pairs(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (m, n) with m < n spanning antisymmetric matrices."""
    m, n = np.triu_indices(dim, k=1)
    return m, n


def antisymmetric_sector_matrix(superop: SuperoperatorDense) -> np.ndarray:
    """The superoperator restricted to the antisymmetric subspace.

    Physical covariance matrices are antisymmetric; this is the sector whose
    eigenvalues appear in the dense density-matrix Liouvillian.
    """
    d = superop.dim
    m, n = antisymmetric_pairs(d)
    s4 = superop.matrix.reshape(d, d, d, d)
    ra, rb = m[:, None], n[:, None]
    ca, cb = m[None, :], n[None, :]
    block = s4[ra, rb, ca, cb].copy()
    block -= s4[ra, rb, cb, ca]
    block -= s4[rb, ra, ca, cb]
    block += s4[rb, ra, cb, ca]
    return 0.5 * block


def antisymmetric_sector_eigenvalues(superop: SuperoperatorDense) -> np.ndarray:
    return np.linalg.eigvals(antisymmetric_sector_matrix(superop))


def spectrum_antisymmetric(superop: SuperoperatorDense, *,
                           tol: Tolerances = DEFAULT_TOL) -> LiouvillianSpectrum:
    """Spectrum restricted to the physical (antisymmetric) sector."""
    eigs = antisymmetric_sector_eigenvalues(superop)
    adr, threshold, nzero, nadr = _extract_adr(eigs, tol)
    return LiouvillianSpectrum(
        eigenvalues=eigs,
        zero_threshold=threshold,
        adr=adr,
        zero_cluster_size=nzero,
        adr_cluster_size=nadr,
    )


def steady_state_linear(superop: SuperoperatorDense, *,
                        tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve S |Gamma0> = |affine| for the unique steady covariance matrix.

    Raises :class:`SingularSteadyState` when the smallest singular value of S
    falls below 1e-10 of the largest (non-unique steady state), and validates
    the solution as a covariance matrix.
    """
    if superop.kind != "linear":
        raise ValueError("steady_state_linear needs a linear-channel superoperator")
    svals = scipy.linalg.svdvals(superop.matrix)
    if svals[-1] <= 1e-10 * svals[0]:
        nullity = int(np.sum(svals <= 1e-10 * svals[0]))
        raise SingularSteadyState(nullity)
    sol = scipy.linalg.solve(superop.matrix, superop.affine)
    residual = float(np.linalg.norm(superop.matrix @ sol - superop.affine))
    if residual > 1e-8 * max(1.0, float(np.linalg.norm(superop.affine))):
        raise RuntimeError(f"steady-state solve residual {residual:.3e}")
    gamma = unvec(sol, superop.dim)
    gamma = (gamma - gamma.T) / 2.0
    diag = validate_cm(gamma, tol=tol)
    if not diag.valid:
        raise RuntimeError(f"steady-state solution is not a valid CM: {diag}")
    return gamma


def propagate_exact(superop: SuperoperatorDense, gamma0: np.ndarray,
                    times: np.ndarray) -> np.ndarray:
    """Exact trajectory Gamma(t) via matrix exponentials, shape (T, 2N, 2N).

    Affine dynamics are handled with the augmented propagator
    exp(t [[S, -V], [0, 0]]) acting on (vec Gamma, 1).
    """
    d = superop.dim
    n2 = d * d
    aug = np.zeros((n2 + 1, n2 + 1))
    aug[:n2, :n2] = superop.matrix
    aug[:n2, n2] = -superop.affine
    state0 = np.append(vec(gamma0), 1.0)
    out = np.empty((len(times), d, d))
    for i, t in enumerate(times):
        state = scipy.linalg.expm(aug * t) @ state0
        out[i] = unvec(state[:n2], d)
    return out


@dataclass
class MomentumLinearSolution:
    """Per-mode exact solution for a translationally invariant Hamiltonian
    with the site-local loss/gain channel.

    All real parts of the Liouvillian eigenvalues equal -g^2(mu^2+nu^2); the
    imaginary parts are differences of the single-particle energies
    eta_n(+-) = (k_n + l_n)/2 +- beta_n across mode pairs.
    """

    blocks: MomentumBlocks
    strengths: ChannelStrengths
    eta_plus: np.ndarray
    eta_minus: np.ndarray
    decay_rate: float  # g^2 (mu^2 + nu^2); uniform |Re| of all eigenvalues
    steady_blocks: np.ndarray  # exact finite-g, shape (N, 2, 2) complex
    weak_blocks: np.ndarray  # g -> 0 limit
    correction_blocks: np.ndarray  # steady_blocks - weak_blocks

    @property
    def adr(self) -> float:
        return self.decay_rate

    def mode_eigenvalues(self, m: int, n: int) -> np.ndarray:
        """The four eigenvalues of the (m, n) momentum-block dynamics."""
        etas_m = (self.eta_plus[m], self.eta_minus[m])
        etas_n = (self.eta_plus[n], self.eta_minus[n])
        return np.array(
            [1j * (em - en) - self.decay_rate for em in etas_m for en in etas_n]
        )

    def full_spectrum(self) -> np.ndarray:
        """All (2N)^2 eigenvalues of the vectorized dynamics."""
        n = self.blocks.n_sites
        out = np.empty(4 * n * n, dtype=complex)
        i = 0
        for m in range(n):
            for k in range(n):
                out[i : i + 4] = self.mode_eigenvalues(m, k)
                i += 4
        return out

    def steady_state_dense(self) -> np.ndarray:
        """Real-space steady covariance matrix from the exact mode blocks."""
        g = self.steady_blocks
        return from_momentum(
            MomentumBlocks(
                n_sites=self.blocks.n_sites,
                h=g[:, 0, 1].copy(),
                k=g[:, 0, 0].imag.copy(),
                l=g[:, 1, 1].imag.copy(),
            )
        )

    @property
    def steady_polarization(self) -> float:
        """Site-independent Gamma_{jj,01} of the exact steady state."""
        return float(np.mean(self.steady_blocks[:, 0, 1]).real)


def momentum_spectrum_linear(blocks: MomentumBlocks,
                             strengths: ChannelStrengths) -> MomentumLinearSolution:
    """Exact per-mode solve of the loss/gain master equation in Fourier space.

    Solves, mode by mode, [H~_n, G_n] - c G_n = s * i sigma_y with
    c = g^2(mu^2+nu^2) and s = g^2(mu^2-nu^2); O(N) total cost.  The
    weak-coupling blocks are -p Re(h_n)/beta_n^2 * [[i d/2, h],[-h*, -i d/2]]
    with p = s/c and d = k_n - l_n; ``correction_blocks`` carries the exact
    finite-g remainder (O(g^2), vanishing as g -> 0).
    """
    g2 = strengths.g**2
    c = g2 * (strengths.mu**2 + strengths.nu**2)
    s = g2 * (strengths.mu**2 - strengths.nu**2)
    if c <= 0.0:
        raise ValueError("loss/gain channel needs g > 0 and (mu, nu) != (0, 0)")
    h, k, l = blocks.h, blocks.k, blocks.l
    hr, hi = h.real, h.imag
    d = k - l
    beta_sq = np.abs(h) ** 2 + d**2 / 4.0
    big_d = c**2 + 4.0 * beta_sq

    w = (-s * (c**2 + 4.0 * hr**2) - 1j * s * (c * d + 4.0 * hr * hi)) / (c * big_d)
    a = (2.0 * s / (c * big_d)) * (c * hi - d * hr)
    n = blocks.n_sites
    steady = np.zeros((n, 2, 2), dtype=complex)
    steady[:, 0, 0] = 1j * a
    steady[:, 0, 1] = w
    steady[:, 1, 0] = -np.conj(w)
    steady[:, 1, 1] = -1j * a

    p = s / c
    weak = np.zeros((n, 2, 2), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.where(beta_sq > 0.0, -p * hr / beta_sq, np.nan)
    weak[:, 0, 0] = pref * 1j * d / 2.0
    weak[:, 0, 1] = pref * h
    weak[:, 1, 0] = -np.conj(weak[:, 0, 1])
    weak[:, 1, 1] = -weak[:, 0, 0]

    mid = (k + l) / 2.0
    beta = np.sqrt(beta_sq)
    return MomentumLinearSolution(
        blocks=blocks,
        strengths=strengths,
        eta_plus=mid + beta,
        eta_minus=mid - beta,
        decay_rate=c,
        steady_blocks=steady,
        weak_blocks=weak,
        correction_blocks=steady - weak,
    )
