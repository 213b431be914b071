"""Score-based channel estimation for ambient backscatter links.

Simulates direct and cascaded channels with Hadamard tag pilots, provides
LS and linear-MMSE baselines, trains a noise-conditional score network with
an adversarial denoising objective, and estimates channels by annealed
Langevin sampling from the posterior.
"""

from .als import (
    AlsConfig,
    AnalyticGaussianScore,
    SamplingDiverged,
    ZeroScore,
    als_estimate,
    als_sample,
    likelihood_grad,
    posterior_grad,
)
from .channel import ChannelSet, FadingConfig, assemble_hbar, sample_channel_set, sample_hbar
from .classical import (
    PriorSpec, cascaded_prior_scale, ls_estimate, ls_nmse, mmse_estimate, mmse_nmse,
)
from .numerics import derive_rng, make_rng, sample_complex_gaussian, sample_nakagami_vector
from .pilots import PilotSet, build_pilots, hadamard, simulate_observation

__version__ = "0.1.0"
