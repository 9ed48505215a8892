"""Dissipative quasi-free fermion chains at the covariance-matrix level."""

__version__ = "0.1.0"

from .config import DEFAULT_TOL, Tolerances
from .majorana import (
    MomentumBlocks,
    antisymmetrize,
    energy_expectation,
    excitation_energies,
    fourier_matrix,
    from_momentum,
    ground_state_cm,
    occupations,
    site_polarization,
    to_momentum,
    validate_cm,
)
from .models import TIBlockSpec, XYParams, from_blocks, xy_chain
from .channels import (
    ChannelStrengths,
    LinearChannel,
    QuadraticHermitianChannel,
    dephasing_xx_mix,
    dephasing_z,
    loss_gain,
    make_channel,
    paired,
    xx_coupling,
)
from .spectral import (
    LiouvillianSpectrum,
    SuperoperatorDense,
    assemble_linear,
    assemble_quadratic,
    momentum_spectrum_linear,
    spectrum,
    spectrum_antisymmetric,
    steady_state_linear,
)
from .evolution import DecayFit, Trajectory, evolve, fit_decay_rate
from .analytics import (
    PoleSet,
    adr_weak_coupling_sum,
    pairing_matrix,
    perturbation_matrix,
    polarization_sum,
    poles,
    two_lowest_rates,
    xy_adr_closed_form,
    xy_polarization_closed_form,
)
from .stochastic import NoiseSpec, averaged_evolution, sample_noise
