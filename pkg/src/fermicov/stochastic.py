"""Classical fluctuating-field trajectories and their Lindblad limit.

Each site carries an independent stationary Gaussian process dB_j(t) with

    <dB(t1) dB(t2)> = (variance / sqrt(2 pi)) exp(-(t1-t2)^2 / 2 T^2),

generated by convolving white noise with a Gaussian kernel.  A single
trajectory evolves coherently under H + sum_j dB_j(t) Vz_j (Vz_j is the
quadratic matrix of sz_j), so every trajectory preserves purity; the
ensemble average converges, for correlation times short against the
Hamiltonian spectral width, to the sz-dephasing Lindblad channel with
g^2 = variance * T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelStrengths, dephasing_z
from .evolution import spectral_norm
from .majorana import n_sites_of


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian-kernel field noise: variance is the stationary covariance
    normalization (the kernel value at zero lag times sqrt(2 pi)),
    correlation_time the kernel width T."""

    variance: float
    correlation_time: float
    seed: int = 0
    per_site_independent: bool = True

    def __post_init__(self):
        if self.correlation_time <= 0:
            raise ValueError("correlation_time must be > 0")
        if self.variance < 0:
            raise ValueError("variance must be >= 0")

    def markov_scale(self, hamiltonian: np.ndarray) -> float:
        """T times the Hamiltonian spectral width; must stay << 1 for the
        Lindblad limit to hold."""
        return self.correlation_time * 2.0 * spectral_norm(hamiltonian)

    @property
    def lindblad_g_squared(self) -> float:
        """The emergent dephasing strength g^2 = variance * T."""
        return self.variance * self.correlation_time


def _gaussian_kernel(spec: NoiseSpec, dt: float) -> np.ndarray:
    """Discretized convolution kernel k(t) = sqrt(variance/(pi T))
    * exp(-t^2/T^2); k * k reproduces the target covariance."""
    t_half = 5.0 * spec.correlation_time
    n_half = int(math.ceil(t_half / dt))
    t = np.arange(-n_half, n_half + 1) * dt
    amp = math.sqrt(spec.variance / (math.pi * spec.correlation_time))
    return amp * np.exp(-(t**2) / spec.correlation_time**2)


def sample_noise(spec: NoiseSpec, n_steps: int, dt: float, n_sites: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Stationary per-site noise paths, shape (n_sites, n_steps).

    Requires dt <= T/5 so the kernel is resolved.
    """
    if dt > spec.correlation_time / 5.0 + 1e-15:
        raise ValueError(
            f"dt = {dt:.3e} too coarse for correlation time {spec.correlation_time:.3e}"
            " (need dt <= T/5)"
        )
    kernel = _gaussian_kernel(spec, dt)
    pad = len(kernel) - 1
    white = rng.standard_normal((n_sites, n_steps + pad)) / math.sqrt(dt)
    out = np.empty((n_sites, n_steps))
    for j in range(n_sites):
        out[j] = np.convolve(white[j], kernel, mode="valid") * dt
    return out


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Per-trajectory stream independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _sz_matrices(n_sites: int) -> np.ndarray:
    """Quadratic Majorana matrices of sz_j, shape (N, 2N, 2N)."""
    return dephasing_z(n_sites, ChannelStrengths(g=1.0, mu=1.0)).matrices


def lindblad_reference(hamiltonian: np.ndarray, gamma0: np.ndarray,
                       times: np.ndarray, g_squared: float) -> np.ndarray:
    """Exact dephasing-z CM trajectory at the sample times."""
    from .spectral import assemble_quadratic, propagate_exact

    n = n_sites_of(gamma0)
    channel = dephasing_z(n, ChannelStrengths(g=math.sqrt(g_squared), mu=1.0))
    superop = assemble_quadratic(hamiltonian, channel)
    return propagate_exact(superop, gamma0, times)


@dataclass
class StochasticComparison:
    """Averaged noisy evolution against the emergent Lindblad channel.

    Deviations are matrix-level: max over sampled times and CM entries of
    |ensemble mean - Lindblad prediction|; ``max_sigma_units`` normalizes
    entrywise by the bootstrap standard deviation of the ensemble mean.
    """

    times: np.ndarray
    average_cm: np.ndarray  # (T, 2N, 2N)
    lindblad_cm: np.ndarray  # (T, 2N, 2N)
    bootstrap_sigma: np.ndarray  # (T, 2N, 2N)
    per_trajectory_cms: np.ndarray  # (n_traj, T, 2N, 2N)
    g_squared_used: float
    candidate_deviations: dict[str, float]
    max_deviation: float
    max_sigma_units: float

    @property
    def mean_polarization(self) -> np.ndarray:
        j = np.arange(self.average_cm.shape[1] // 2)
        return self.average_cm[:, 2 * j, 2 * j + 1].mean(axis=1)

    def deviation_for_subset(self, n: int, lindblad: np.ndarray | None = None) -> float:
        """Max deviation of the mean over the first n trajectories."""
        ref = self.lindblad_cm if lindblad is None else lindblad
        sub = self.per_trajectory_cms[:n].mean(axis=0)
        return float(np.max(np.abs(sub - ref)))


def averaged_evolution(hamiltonian: np.ndarray, spec: NoiseSpec,
                       gamma0: np.ndarray, t_end: float, n_traj: int, *,
                       dt: float | None = None, sample_stride: int = 50,
                       chunk: int = 250, n_boot: int = 200,
                       g_squared: float | None = None) -> StochasticComparison:
    """Average ``n_traj`` coherent noisy trajectories and compare with the
    dephasing-z Lindblad channel of strength g^2 = variance * T.

    Trajectories are integrated in vectorized batches with a shared RK4
    step; the noise is sampled on the half-step grid so the Runge-Kutta
    midpoints see the physical field.  ``candidate_deviations`` also scores
    the alternative bookkeeping g^2 = variance * T / 2 so the matching
    constant is identified empirically.
    """
    n = n_sites_of(gamma0)
    v_z = _sz_matrices(n)
    bound = 0.1 / max(spectral_norm(hamiltonian), 1e-12)
    if dt is None:
        dt = min(spec.correlation_time / 5.0, bound)
    n_steps = max(1, int(round(t_end / dt)))
    dt = t_end / n_steps
    sample_idx = np.arange(0, n_steps + 1, sample_stride)
    if sample_idx[-1] != n_steps:
        sample_idx = np.append(sample_idx, n_steps)
    times = sample_idx * dt
    n_samples = len(sample_idx)

    h = np.asarray(hamiltonian, dtype=float)
    gamma0 = (np.asarray(gamma0, dtype=float) - np.asarray(gamma0, dtype=float).T) / 2.0

    per_traj = np.empty((n_traj, n_samples, 2 * n, 2 * n))

    def batch_rhs(gammas: np.ndarray, fields: np.ndarray) -> np.ndarray:
        # gammas: (B, 2N, 2N); fields: (B, N)
        ht = h + np.einsum("bj,jmn->bmn", fields, v_z)
        hg = ht @ gammas
        return hg - hg.transpose(0, 2, 1)

    done = 0
    while done < n_traj:
        b = min(chunk, n_traj - done)
        noise = np.empty((b, n, 2 * n_steps + 1))
        for i in range(b):
            rng = trajectory_rng(spec.seed, done + i)
            noise[i] = sample_noise(spec, 2 * n_steps + 1, dt / 2.0, n, rng)
        gammas = np.broadcast_to(gamma0, (b, 2 * n, 2 * n)).copy()
        sample_pos = 0
        if sample_idx[0] == 0:
            per_traj[done : done + b, 0] = gammas
            sample_pos = 1
        for step in range(n_steps):
            f0 = noise[:, :, 2 * step]
            fh = noise[:, :, 2 * step + 1]
            f1 = noise[:, :, 2 * step + 2]
            k1 = batch_rhs(gammas, f0)
            k2 = batch_rhs(gammas + 0.5 * dt * k1, fh)
            k3 = batch_rhs(gammas + 0.5 * dt * k2, fh)
            k4 = batch_rhs(gammas + dt * k3, f1)
            gammas = gammas + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            gammas = (gammas - gammas.transpose(0, 2, 1)) / 2.0
            if sample_pos < n_samples and step + 1 == sample_idx[sample_pos]:
                per_traj[done : done + b, sample_pos] = gammas
                sample_pos += 1
        done += b

    average_cm = per_traj.mean(axis=0)

    g2 = spec.lindblad_g_squared if g_squared is None else g_squared
    lind = lindblad_reference(h, gamma0, times, g2)
    candidates = {
        "variance*T": float(np.max(np.abs(
            average_cm - lindblad_reference(h, gamma0, times, spec.lindblad_g_squared)
        ))),
        "variance*T/2": float(np.max(np.abs(
            average_cm - lindblad_reference(h, gamma0, times, spec.lindblad_g_squared / 2)
        ))),
    }

    boot_rng = np.random.default_rng(np.random.SeedSequence(entropy=spec.seed,
                                                            spawn_key=(0xB00,)))
    boot = np.empty((n_boot, n_samples, 2 * n, 2 * n))
    for i in range(n_boot):
        pick = boot_rng.integers(0, n_traj, size=n_traj)
        boot[i] = per_traj[pick].mean(axis=0)
    sigma = boot.std(axis=0)

    dev = np.abs(average_cm - lind)
    floor = max(1e-15, 1e-3 * float(sigma.max()))
    sigma_units = np.where(sigma > floor, dev / np.maximum(sigma, floor), 0.0)
    return StochasticComparison(
        times=times,
        average_cm=average_cm,
        lindblad_cm=lind,
        bootstrap_sigma=sigma,
        per_trajectory_cms=per_traj,
        g_squared_used=g2,
        candidate_deviations=candidates,
        max_deviation=float(dev.max()),
        max_sigma_units=float(np.max(sigma_units)),
    )


def convergence_exponent(comparison: StochasticComparison,
                         sizes=(100, 1000, None)) -> tuple[float, np.ndarray, np.ndarray]:
    """Fitted log-log slope of the ensemble deviation against n_traj.

    For each size the trajectories are split into disjoint groups and the
    RMS of the group-mean deviations is taken, damping single-realization
    scatter.  Returns (slope, sizes_used, deviations).
    """
    total = comparison.per_trajectory_cms.shape[0]
    sizes = [total if s is None else s for s in sizes]
    devs = []
    for s in sizes:
        n_groups = max(1, total // s)
        acc = 0.0
        for gidx in range(n_groups):
            sub = comparison.per_trajectory_cms[gidx * s : (gidx + 1) * s].mean(axis=0)
            acc += float(np.max(np.abs(sub - comparison.lindblad_cm))) ** 2
        devs.append(math.sqrt(acc / n_groups))
    sizes_arr = np.array(sizes, dtype=float)
    devs_arr = np.array(devs)
    slope = np.polyfit(np.log(sizes_arr), np.log(devs_arr), 1)[0]
    return float(slope), sizes_arr, devs_arr
