"""
Constants for the PerceptiveNet package.
"""

import math


# Network variants
class Variants:
    """Network variant names."""

    RESUNET = "resunet"
    DILRESUNET = "dilresunet"
    LGMPRESUNET = "lgmpresunet"
    PERCEPTIVENET = "perceptivenet"

    ALL = (RESUNET, DILRESUNET, LGMPRESUNET, PERCEPTIVENET)


# First layer kinds
class FirstLayers:
    """First-layer kinds for the stem."""

    CONV = "conv"
    GABOR = "gabor"
    LOGGABOR = "loggabor"

    ALL = (CONV, GABOR, LOGGABOR)


# Dataset splits
class Splits:
    """Dataset split names."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


# Log-Gabor bank
DEFAULT_LOGGABOR_KERNEL = 7
DEFAULT_LOGGABOR_DELTA = 1e-3
LOGGABOR_F0_RANGE = (0.15, 0.85)
LOGGABOR_SIGMA_RATIO = 0.55
LOGGABOR_MAX_SCALES = 4

# Projection bounds applied after each optimiser step
LOGGABOR_MIN_F0 = 0.02
LOGGABOR_MIN_SIGMA = 0.02
LOGGABOR_MIN_LOG_BANDWIDTH = 0.05

# Gabor bank
GABOR_OMEGA_RANGE = (math.pi / 8, math.pi / 2)
GABOR_SIGMA = 2.0
GABOR_GAMMA = 1.0

# Layers
DEFAULT_MIX_ALPHA = 0.8
DEFAULT_POOL_WINDOW = 2
DEFAULT_POOL_STRIDE = 2
DEFAULT_DILATION_RATES = (1, 3, 6, 9)

# Model
DEFAULT_BASE_CHANNELS = 64
DEFAULT_DEPTH = 3

# Training
DEFAULT_EPOCHS = 130
DEFAULT_BATCH_SIZE = 16
DEFAULT_LR = 1e-3
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8

# Augmentation probabilities
ROTATE_PROBABILITY = 0.9
HFLIP_PROBABILITY = 0.5
VFLIP_PROBABILITY = 0.1

# Split fractions of the total
TEST_FRACTION = 0.2
VAL_FRACTION = 0.16

# Gradient checks
GRADCHECK_STEP = 1e-5
KERNEL_GRADCHECK_STEP = 1e-6
GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_KINK_RATIO = 1e-4
GRADCHECK_MAX_REFINEMENTS = 2
GRADCHECK_MIN_STEP = 1e-7
# A tenfold smaller step shrinks a smooth second difference about tenfold
GRADCHECK_CURVATURE_BAND = (0.05, 0.3)

# Checkpoint format
CHECKPOINT_MAGIC = b"PNET"
CHECKPOINT_VERSION = 1

# Report columns
METRICS_COLUMNS = ["variant", "seed", "epoch", "split", "pixel_acc", "miou"]
