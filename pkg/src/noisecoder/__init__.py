"""noisecoder: hide bit payloads in the initial noise of an ODE sampler.

The pipeline is hide = ode_forward(embed(project(message))) and extract =
invert(ode_backward(sample)); see README for the protocol details.
"""

from .core import (
    CapacityError,
    FormatError,
    Message,
    NoisecoderError,
    ProjectionSpec,
    Rng,
    StegoKey,
    bits_to_bytes,
    pack_bits,
    tensor_read,
    tensor_write,
)
from .sampler import (
    SamplerError,
    SigmaSchedule,
    build_schedule,
    extract,
    heun_forward,
    heun_inverse,
    hide,
)
from .score_models import GaussianMixtureModel, default_fixture_path, load_default_model
from .bridge import BridgeModel, BridgeSession
from .metrics import accuracy, bits_per_pixel, detection_error, frechet_distance
from .diagnostics import check_collapse, error_histogram

__version__ = "0.1.0"

__all__ = [
    "BridgeModel",
    "BridgeSession",
    "CapacityError",
    "FormatError",
    "GaussianMixtureModel",
    "Message",
    "NoisecoderError",
    "ProjectionSpec",
    "Rng",
    "SamplerError",
    "SigmaSchedule",
    "StegoKey",
    "accuracy",
    "bits_per_pixel",
    "bits_to_bytes",
    "build_schedule",
    "check_collapse",
    "default_fixture_path",
    "detection_error",
    "error_histogram",
    "extract",
    "frechet_distance",
    "heun_forward",
    "heun_inverse",
    "hide",
    "load_default_model",
    "pack_bits",
    "tensor_read",
    "tensor_write",
]
