"""Closed-form and perturbative results for weak coupling and N -> infinity.

For the sz-dephasing channel (weight mu) and the sx sx bond channel
(weight nu) on a translationally invariant chain the weak-coupling decay
rates follow from degenerate perturbation theory on the momentum-space
Liouvillian.  With beta_m = sqrt(|h_m|^2 + (k_m - l_m)^2 / 4) the two
lowest rates are

    Delta(+-)/4g^2 = mu^2 + nu^2 - (eps_z + eps_x)/2
                     +- sqrt(((eps_z - eps_x)/2)^2 + eps^2),

    eps_z = (mu^2/N) sum Re(h_m)^2 / beta_m^2,
    eps_x = (nu^2/N) sum Re(h_m e^{-2 pi i m/N})^2 / beta_m^2,
    eps   = (mu nu/N) sum Re(h_m) Re(h_m e^{-2 pi i m/N}) / beta_m^2,

which for nu = 0 collapses to Delta = (4g^2/N) sum [4 Im(h_m)^2 +
(k_m-l_m)^2] / [4|h_m|^2 + (k_m-l_m)^2].  For the XY chain the momentum
sums become residue-theorem closed forms with a kink at B = 2J.

Note on eps: the residue evaluation gives eps/(mu nu) = -B/4J (B <= 2J)
and -J/B (B >= 2J); only these values make Delta(-) = 4 g^2 mu^2 constant
at mu = nu, consistent with the dense spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .majorana import MomentumBlocks, n_sites_of


class CriticalMode(ValueError):
    """A momentum sum hit a mode with beta_m = 0 (exact criticality)."""

    def __init__(self, modes):
        self.modes = list(modes)
        super().__init__(f"critical modes with beta = 0: {self.modes}")


def _beta_checked(blocks: MomentumBlocks, tol: Tolerances) -> np.ndarray:
    beta = blocks.beta()
    bad = np.flatnonzero(beta < 1e-12)
    if bad.size:
        raise CriticalMode(bad)
    return beta


@dataclass(frozen=True)
class PerturbationData:
    """Per-mode quantities entering the weak-coupling perturbation theory."""

    alpha: np.ndarray  # |k_m + l_m| / 2
    beta: np.ndarray
    a: np.ndarray  # (k_m - l_m) / (2 beta_m)
    b: np.ndarray  # Im h_m / beta_m
    c: np.ndarray  # Re h_m / beta_m


def perturbation_data(blocks: MomentumBlocks, *,
                      tol: Tolerances = DEFAULT_TOL) -> PerturbationData:
    beta = _beta_checked(blocks, tol)
    return PerturbationData(
        alpha=np.abs(blocks.k + blocks.l) / 2.0,
        beta=beta,
        a=(blocks.k - blocks.l) / (2.0 * beta),
        b=blocks.h.imag / beta,
        c=blocks.h.real / beta,
    )


def adr_weak_coupling_sum(blocks: MomentumBlocks, g: float, *,
                          tol: Tolerances = DEFAULT_TOL) -> float:
    """Finite-N weak-coupling ADR of the sz-dephasing channel (mu=1, nu=0)."""
    _beta_checked(blocks, tol)
    d = blocks.k - blocks.l
    num = 4.0 * blocks.h.imag**2 + d**2
    den = 4.0 * np.abs(blocks.h) ** 2 + d**2
    return float(4.0 * g**2 * np.mean(num / den))


def momentum_sums(blocks: MomentumBlocks, mu: float, nu: float, *,
                  tol: Tolerances = DEFAULT_TOL) -> tuple[float, float, float]:
    """(eps_z, eps_x, eps) at finite N."""
    beta = _beta_checked(blocks, tol)
    n = blocks.n_sites
    phase = np.exp(-2j * np.pi * np.arange(n) / n)
    re_h = blocks.h.real
    re_hp = (blocks.h * phase).real
    eps_z = mu**2 * np.mean(re_h**2 / beta**2)
    eps_x = nu**2 * np.mean(re_hp**2 / beta**2)
    eps = mu * nu * np.mean(re_h * re_hp / beta**2)
    return float(eps_z), float(eps_x), float(eps)


def two_lowest_rates(blocks: MomentumBlocks, g: float, mu: float, nu: float, *,
                     tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """(Delta_plus, Delta_minus): the two slowest weak-coupling decay rates
    of the combined dephasing/bond channel."""
    eps_z, eps_x, eps = momentum_sums(blocks, mu, nu, tol=tol)
    base = mu**2 + nu**2 - (eps_z + eps_x) / 2.0
    root = np.sqrt(((eps_z - eps_x) / 2.0) ** 2 + eps**2)
    return (
        abs(4.0 * g**2 * (base + root)),
        abs(4.0 * g**2 * (base - root)),
    )


def _validate_xy(gamma: float, field: float, coupling: float):
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [-1, 1], got {gamma}")
    if field < 0.0:
        raise ValueError(f"field must be >= 0, got {field}")
    if coupling <= 0.0:
        raise ValueError(f"coupling must be > 0, got {coupling}")


def xy_adr_closed_form(gamma: float, field: float, coupling: float = 1.0,
                       g: float = 1.0) -> float:
    """Thermodynamic-limit weak-coupling ADR of the XY chain with sz dephasing.

    Delta = 4 g^2 |gamma| / (1 + |gamma|) for B <= 2J and
    4 g^2 gamma^2/(1-gamma^2) ([1 - (2J/B)^2 (1-gamma^2)]^{-1/2} - 1) for
    B >= 2J; at |gamma| = 1 the second branch is the limit 2 g^2 (2J/B)^2.
    Both branches agree at B = 2J.
    """
    _validate_xy(gamma, field, coupling)
    ag = abs(gamma)
    if field <= 2.0 * coupling:
        return 4.0 * g**2 * ag / (1.0 + ag)
    u = (2.0 * coupling / field) ** 2
    if ag == 1.0:
        return 2.0 * g**2 * u
    gsq = gamma**2
    return 4.0 * g**2 * (gsq / (1.0 - gsq)) * (1.0 / np.sqrt(1.0 - u * (1.0 - gsq)) - 1.0)


def xy_polarization_closed_form(gamma: float, field: float, coupling: float = 1.0,
                                mu: float = 1.0, nu: float = 0.0) -> float:
    """Thermodynamic-limit steady-state polarization of the loss/gain channel.

    Returns the residue-theorem value p * {1/(1+|gamma|) for B <= 2J;
    (1 - gamma^2/sqrt(1-(2J/B)^2(1-gamma^2)))/(1-gamma^2) for B >= 2J} with
    p = (mu^2-nu^2)/(mu^2+nu^2); independent of sign(gamma).  The steady
    covariance matrix carries (Gamma_0)_{jj,01} = -(this value); see
    :func:`polarization_sum`.
    """
    _validate_xy(gamma, field, coupling)
    if mu == 0.0 and nu == 0.0:
        raise ValueError("(mu, nu) must not both vanish")
    p = (mu**2 - nu**2) / (mu**2 + nu**2)
    ag = abs(gamma)
    if field <= 2.0 * coupling:
        return p / (1.0 + ag)
    u = (2.0 * coupling / field) ** 2
    if ag == 1.0:
        return p * (1.0 - u / 2.0)
    gsq = gamma**2
    return p * (1.0 - gsq / np.sqrt(1.0 - u * (1.0 - gsq))) / (1.0 - gsq)


def polarization_sum(blocks: MomentumBlocks, mu: float = 1.0, nu: float = 0.0, *,
                     tol: Tolerances = DEFAULT_TOL) -> float:
    """Finite-N weak-coupling steady-state polarization of loss/gain,

        p * (1/N) sum_n Re(h_n)^2 / [(k_n-l_n)^2/4 + |h_n|^2].

    Equals (p/2)(1 + (1/N) sum h_n^*/h_n) when k = l = 0.  The steady CM
    entry is (Gamma_0)_{jj,01} = -(this value).
    """
    beta = _beta_checked(blocks, tol)
    if mu == 0.0 and nu == 0.0:
        raise ValueError("(mu, nu) must not both vanish")
    p = (mu**2 - nu**2) / (mu**2 + nu**2)
    return float(p * np.mean(blocks.h.real**2 / beta**2))


def occupation_from_polarization(value: float) -> float:
    """<a^dag a> = (1 + value)/2 for a polarization <2 a^dag a - 1>."""
    return (1.0 + value) / 2.0


@dataclass(frozen=True)
class PoleSet:
    """Poles of the thermodynamic-limit contour integrand for the XY chain."""

    z_zero: complex
    z_plus: complex
    z_minus: complex
    z_plus_inside: bool
    z_minus_inside: bool
    critical: bool  # some pole sits on the unit contour

    def inside(self) -> list[complex]:
        out = [self.z_zero]
        if self.z_plus_inside:
            out.append(self.z_plus)
        if self.z_minus_inside:
            out.append(self.z_minus)
        return out


def poles(field: float, coupling: float, gamma: float, *,
          contour_tol: float = 1e-12) -> PoleSet:
    """Pole locations z0 = 0, z+- = [B +- sqrt(B^2 - 4J^2(1-gamma^2))]/(2J(1+gamma))
    with inside/outside classification against the unit circle.

    For gamma > 0, z+ crosses the contour at B = 2J (z- is always inside);
    for gamma < 0 the roles swap.  gamma = -1 makes the denominator vanish:
    use the gamma -> -gamma symmetry of the physical results instead.
    """
    if coupling <= 0.0:
        raise ValueError("coupling must be > 0")
    if gamma == -1.0:
        raise ValueError(
            "gamma = -1 has a vanishing denominator; use the gamma -> -gamma symmetry"
        )
    disc = complex(field**2 - 4.0 * coupling**2 * (1.0 - gamma**2))
    root = np.sqrt(disc)
    denom = 2.0 * coupling * (1.0 + gamma)
    zp = (field + root) / denom
    zm = (field - root) / denom
    crit = abs(abs(zp) - 1.0) < contour_tol or abs(abs(zm) - 1.0) < contour_tol
    return PoleSet(
        z_zero=0.0 + 0.0j,
        z_plus=zp,
        z_minus=zm,
        z_plus_inside=abs(zp) < 1.0 - contour_tol,
        z_minus_inside=abs(zm) < 1.0 - contour_tol,
        critical=crit,
    )


def paired_steady_state(n_sites: int, mu: float, nu: float) -> np.ndarray:
    """Closed-form steady covariance matrix of the nearest-neighbor pairing
    channel (no Hamiltonian): momentum blocks

        G_n = -p i sigma_y - q sin(2 pi n/N) i sigma_x,

    p = (mu^2-nu^2)/(mu^2+nu^2), q = 2 mu nu/(mu^2+nu^2).  Remains the
    physically selected steady state in the gapless limit mu = nu where the
    dynamical steady state becomes non-unique.
    """
    from .majorana import MomentumBlocks, from_momentum

    if mu == 0.0 and nu == 0.0:
        raise ValueError("(mu, nu) must not both vanish")
    norm = mu**2 + nu**2
    p = (mu**2 - nu**2) / norm
    q = 2.0 * mu * nu / norm
    theta = 2.0 * np.pi * np.arange(n_sites) / n_sites
    # blocks in the e^{-2 pi i s n/N} transform convention of to_momentum;
    # conjugating with U instead (paper layout) relabels n -> -n and flips
    # the sign of the sin term
    h = -p + 1j * q * np.sin(theta)  # block [[0, h], [-h*, 0]]
    return from_momentum(
        MomentumBlocks(n_sites=n_sites, h=h, k=np.zeros(n_sites), l=np.zeros(n_sites))
    )


def pairing_matrix(gamma_cm: np.ndarray) -> np.ndarray:
    """Pair-correlation matrix Q_kl = <a_k a_l> of a covariance matrix.

    Antisymmetric; a Gaussian state is paired iff Q != 0.  Assembled from
    the second moments <c_m c_n> = delta_mn - i Gamma_mn with
    a_k = (c_{k,0} + i c_{k,1})/2.
    """
    n = n_sites_of(gamma_cm)
    # <c_m c_n> = delta_mn - i Gamma_mn
    moments = np.eye(2 * n) - 1j * gamma_cm
    a_rows = moments[0::2]  # index (k, 0)
    q = 0.25 * (
        a_rows[:, 0::2]  # <c_k0 c_l0>
        + 1j * a_rows[:, 1::2]  # i <c_k0 c_l1>
        + 1j * moments[1::2, 0::2]  # i <c_k1 c_l0>
        - moments[1::2, 1::2]  # -<c_k1 c_l1>
    )
    np.fill_diagonal(q, 0.0)
    return q


@dataclass(frozen=True)
class PerturbationMatrix:
    """Zero-sector perturbation matrix P with its rank-3 decomposition."""

    matrix: np.ndarray  # (N, N) real symmetric
    vectors: PerturbationData
    delta_p: float  # <c|c> = sum Re(h)^2/beta^2, the ADR-relevant eigenvalue
    overlap_ca: float
    overlap_cb: float

    def reconstruction_defect(self) -> float:
        v = self.vectors
        rebuilt = np.outer(v.c, v.c) + np.outer(v.b, v.b) - np.outer(v.a, v.a)
        return float(np.max(np.abs(self.matrix - rebuilt)))


def perturbation_matrix(blocks: MomentumBlocks, *,
                        tol: Tolerances = DEFAULT_TOL) -> PerturbationMatrix:
    """P_mn = [2 h_m h_n^* + 2 h_m^* h_n - (k_m-l_m)(k_n-l_n)]/(4 beta_m beta_n)
    restricted to the Liouvillian zero sector, with P = |c><c| + |b><b| - |a><a|.

    Only |c> maps to a real antisymmetric covariance matrix, so
    Delta = 4 g^2 (1 - delta_p / N) is the weak-coupling ADR.
    """
    data = perturbation_data(blocks, tol=tol)
    h, beta = blocks.h, data.beta
    d = blocks.k - blocks.l
    # 2 h_m h_n^* + 2 h_m^* h_n = 4 Re(h_m h_n^*)
    num = 4.0 * np.real(np.outer(h, np.conj(h))) - np.outer(d, d)
    p = num / (4.0 * np.outer(beta, beta))
    return PerturbationMatrix(
        matrix=p,
        vectors=data,
        delta_p=float(np.dot(data.c, data.c)),
        overlap_ca=float(np.dot(data.c, data.a)),
        overlap_cb=float(np.dot(data.c, data.b)),
    )
