import numpy as np

# Two precision builds: training runs in single precision, gradient checks
# and invariance tests in double precision.
TRAIN_DATATYPE = np.float32
VERIFY_DATATYPE = np.float64
DATATYPES = {'float32': np.float32, 'float64': np.float64}

CHECKPOINT_MAGIC = b'SMCK1'

# Disparity maps on disk are always in fractions of the image width.
DISPARITY_UNITS = 'width_fraction'
DEPTH_UNITS = 'meters'

MIN_DEPTH = 1e-3
MAKE3D_MAX_DEPTH = 70.0

# Garg crop, as fractions of (H, W)
EIGEN_CROP = (0.40810811, 0.99189189, 0.03594771, 0.96405229)
