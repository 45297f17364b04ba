"""Toy linear-probe evaluation harness emitting sweep prediction records."""

from .config import HarnessConfig, config_from_obj, load_config
from .model import BackboneLoadError, TinyConvNet, parameter_count
from .noise import SsimUnreachable, mean_ssim, perturb_to_ssim
from .runner import run_harness

__version__ = "0.1.0"
