"""Reproducible geometric/photometric augmentation and mask-aware mixup."""

from .errors import MedaugError
from .geometric import (GeometricParams, crop_center, flip_horizontal, rotate90_cw, scale,
                        scale_mask, shear_horizontal, shear_mask, translate)
from .metrics import (ConfusionMatrix2, DiceReport, binarize_prediction, confusion_and_accuracy,
                      dice, mean_dice)
from .mixup import MixupResult, generate_mixup_set, mixup_composite, mixup_global
from .photometric import (PhotometricParams, add_gaussian_noise, adjust_brightness,
                          adjust_contrast, equalize_histogram_luma)
from .raster import BinaryMask, ImageBuffer, SamplePair, clamp_round, luma_to_rgb, rgb_to_luma
from .rng import MixupParams, RngStream, derive_stream, sample_beta, sample_gaussian

__version__ = "0.1.0"
