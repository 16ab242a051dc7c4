"""Noisy frequency-based channels: kernels, Poisson-entropy calculus, capacity
bounds and desk-scale experiments."""

from .bounds import (
    BoundReport,
    DnaParams,
    FeinsteinParams,
    achievability_bound,
    converse_bound,
    dna_rate_bound,
    feinstein_epsilon_bound,
)
from .channel import ChannelConfig, OutputHistogram, output_probs, poisson_intensities, sample_channel
from .entropy import binary_entropy, poisson_entropy, poisson_entropy_deriv, poisson_entropy_second_deriv, psi
from .errors import FreqcapError
from .experiments import (
    CodingExperimentSpec,
    constraint_set_probability,
    random_coding_experiment,
    reproduce_examples,
)
from .infodensity import (
    InputPrior,
    concentration_experiment,
    default_prior,
    enumerate_marginal,
    exact_mutual_information,
    info_density,
    mc_mutual_information,
)
from .kernel import (
    KernelFamily,
    TransitionKernel,
    closed_form_penalty,
    det_penalty,
    kron_det_shortcut,
    kron_power,
    make_family,
    new_kernel,
    well_conditioned_report,
)

__version__ = "0.1.0"
