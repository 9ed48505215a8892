"""Time integration of the covariance-matrix master equations.

Fixed-step classic fourth-order Runge-Kutta on the matrix ODE; the step is
bounded by dt * (||H||_2 + dissipation scale) <= 0.1.  Antisymmetry is
re-enforced every step (after checking the accumulated defect stays below
the structural tolerance) and the covariance eigenvalue bound is monitored
at sample times.  Preset quadratic channels evolve through their entrywise
decay-weight table; generic quadratic channels fall back to per-operator
double commutators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import LinearChannel, QuadraticHermitianChannel
from .config import DEFAULT_TOL, Tolerances
from .majorana import n_sites_of, site_polarization


class StepSizeError(ValueError):
    """Requested step violates the stability bound."""


class IntegrationUnstable(RuntimeError):
    """Antisymmetry or the CM eigenvalue bound degraded beyond tolerance."""


class TailTooShort(ValueError):
    """Not enough samples above the noise floor for a decay fit."""


@dataclass
class Trajectory:
    """Sampled covariance-matrix trajectory and derived observables."""

    times: np.ndarray  # (T,)
    site_values: np.ndarray  # (T, N): <2 a_j^dag a_j - 1> = Gamma_{jj,01}
    mean_polarization: np.ndarray  # (T,)
    distance_to_steady: np.ndarray  # (T,) Frobenius distance
    final_cm: np.ndarray
    dt: float

    @property
    def n_sites(self) -> int:
        return self.site_values.shape[1]


def spectral_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix, 2))


def dissipation_scale(channel) -> float:
    """Largest entrywise decay rate of the channel's dissipator.

    Linear channels: 2 lambda_max(M); quadratic: lambda_max(sum_a L_a^T L_a)
    (equals 4 g^2 (mu^2 + nu^2) for the dephasing presets).
    """
    if channel is None:
        return 0.0
    if isinstance(channel, LinearChannel):
        return 2.0 * float(np.linalg.eigvalsh(channel.mixing_matrix())[-1])
    if isinstance(channel, QuadraticHermitianChannel):
        gram = np.einsum("aji,ajk->ik", channel.matrices, channel.matrices)
        return float(np.linalg.eigvalsh(gram)[-1])
    raise TypeError(f"unsupported channel type {type(channel)!r}")


def _make_rhs(hamiltonian: np.ndarray, channel):
    """Right-hand side Gamma -> dGamma/dt as a fast closure."""
    h = np.asarray(hamiltonian, dtype=float)

    def comm_h(gamma):
        hg = h @ gamma
        return hg - hg.T  # (H Gamma)^T = Gamma H for antisymmetric H, Gamma

    if channel is None:
        return comm_h
    if isinstance(channel, LinearChannel):
        m_tot = channel.mixing_matrix()
        a_tot = channel.source_matrix()

        def rhs(gamma):
            mg = m_tot @ gamma
            return comm_h(gamma) - mg + mg.T + a_tot  # {M,G} = MG - (MG)^T

        return rhs
    if isinstance(channel, QuadraticHermitianChannel):
        if channel.mask_weights is not None:
            weights = channel.mask_weights

            def rhs(gamma):
                return comm_h(gamma) - weights * gamma

            return rhs
        mats = channel.matrices

        def rhs(gamma):
            out = comm_h(gamma)
            for l in mats:
                inner = l @ gamma - gamma @ l
                out += 0.5 * (l @ inner - inner @ l)
            return out

        return rhs
    raise TypeError(f"unsupported channel type {type(channel)!r}")


def evolve(gamma0: np.ndarray, hamiltonian: np.ndarray, channel, t_end: float,
           dt: float | None = None, *, sample_interval: float | None = None,
           steady_state: np.ndarray | None = None,
           tol: Tolerances = DEFAULT_TOL,
           check_bound: bool = True) -> Trajectory:
    """Integrate d/dt Gamma from ``gamma0`` up to ``t_end``.

    ``dt`` defaults to (just under) the stability bound
    0.1 / (||H||_2 + dissipation scale); passing a larger value raises
    :class:`StepSizeError`.  Observables are recorded every
    ``sample_interval`` (default: every step for short runs, ~1000 samples
    otherwise).  ``steady_state`` sets the reference for the distance
    observable (zero matrix when omitted, the correct asymptote for
    quadratic channels).
    """
    n = n_sites_of(gamma0)
    if hamiltonian.shape != gamma0.shape:
        raise ValueError("Hamiltonian and CM dimensions differ")
    scale = spectral_norm(hamiltonian) + dissipation_scale(channel)
    bound = 0.1 / scale if scale > 0 else np.inf
    if dt is None:
        dt = min(bound * 0.999, t_end)
    elif dt > bound:
        raise StepSizeError(
            f"dt = {dt:.3e} exceeds the stability bound 0.1/(||H|| + rate) = {bound:.3e}"
        )
    n_steps = max(1, int(np.ceil(t_end / dt - 1e-12)))
    dt = t_end / n_steps
    if sample_interval is None:
        stride = max(1, n_steps // 1000)
    else:
        stride = max(1, int(round(sample_interval / dt)))

    rhs = _make_rhs(hamiltonian, channel)
    reference = np.zeros_like(gamma0) if steady_state is None else steady_state
    gamma = (np.asarray(gamma0, dtype=float) - np.asarray(gamma0, dtype=float).T) / 2.0

    times = [0.0]
    sites = [site_polarization(gamma).copy()]
    dists = [float(np.linalg.norm(gamma - reference))]
    anti_tol = 1e-12 * max(1.0, float(np.max(np.abs(gamma))))

    for step in range(1, n_steps + 1):
        k1 = rhs(gamma)
        k2 = rhs(gamma + 0.5 * dt * k1)
        k3 = rhs(gamma + 0.5 * dt * k2)
        k4 = rhs(gamma + dt * k3)
        gamma = gamma + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        defect = float(np.max(np.abs(gamma + gamma.T)))
        if defect > anti_tol:
            raise IntegrationUnstable(
                f"antisymmetry defect {defect:.3e} at step {step} (t = {step * dt:.3f})"
            )
        gamma = (gamma - gamma.T) / 2.0
        if step % stride == 0 or step == n_steps:
            if check_bound:
                top = float(np.linalg.eigvalsh(gamma.T @ gamma)[-1])
                if top > 1.0 + 1e-6:
                    raise IntegrationUnstable(
                        f"CM eigenvalue bound violated ({top:.6f}) at t = {step * dt:.3f}"
                    )
            times.append(step * dt)
            sites.append(site_polarization(gamma).copy())
            dists.append(float(np.linalg.norm(gamma - reference)))

    sites_arr = np.array(sites)
    return Trajectory(
        times=np.array(times),
        site_values=sites_arr,
        mean_polarization=sites_arr.mean(axis=1),
        distance_to_steady=np.array(dists),
        final_cm=gamma,
        dt=dt,
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares late-time decay rate with diagnostics."""

    rate: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    oscillatory: bool


def fit_decay_rate(traj: Trajectory, *, observable: str = "mean_polarization",
                   site: int | None = None, asymptote: float = 0.0,
                   min_tail_points: int = 50,
                   tail_fraction: float = 0.2) -> DecayFit:
    """Fit the late-time exponential decay of a trajectory observable.

    The tail window is the last ``tail_fraction`` of samples whose deviation
    from ``asymptote`` exceeds 1e-10; the slope of log|deviation| is fitted
    by linear least squares.  A non-monotone tail switches to fitting the
    local maxima of the modulus (flagged ``oscillatory``).
    """
    if site is not None:
        signal = traj.site_values[:, site]
    elif observable == "mean_polarization":
        signal = traj.mean_polarization
    elif observable == "distance_to_steady":
        signal = traj.distance_to_steady
    else:
        raise ValueError(f"unknown observable {observable!r}")

    dev = np.abs(signal - asymptote)
    valid = np.flatnonzero(dev > 1e-10)
    if len(valid) < min_tail_points:
        raise TailTooShort(
            f"only {len(valid)} samples above the noise floor, need {min_tail_points}"
        )
    tail = valid[int(np.floor(len(valid) * (1.0 - tail_fraction))):]
    if len(tail) < min_tail_points:
        raise TailTooShort(
            f"tail window has {len(tail)} points, need {min_tail_points}"
        )
    t = traj.times[tail]
    d = dev[tail]

    oscillatory = bool(np.any(np.diff(d) > 1e-3 * d[:-1] + 1e-14))
    if oscillatory:
        peaks = np.flatnonzero((d[1:-1] >= d[:-2]) & (d[1:-1] >= d[2:])) + 1
        if len(peaks) < 5:
            raise TailTooShort(
                f"oscillatory tail with only {len(peaks)} envelope peaks"
            )
        t, d = t[peaks], d[peaks]

    logd = np.log(d)
    slope, intercept = np.polyfit(t, logd, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((logd - fitted) ** 2))
    ss_tot = float(np.sum((logd - logd.mean()) ** 2))
    r_sq = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        rate=-float(slope),
        r_squared=r_sq,
        window=(float(t[0]), float(t[-1])),
        n_points=len(t),
        oscillatory=oscillatory,
    )
