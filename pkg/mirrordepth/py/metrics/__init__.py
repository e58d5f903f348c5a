from mirrordepth.py.metrics.DepthMetrics import CameraCalib, DepthMetrics
from mirrordepth.py.metrics.DepthMetrics import disparityToDepth
from mirrordepth.py.metrics.DepthMetrics import eigenMetrics, silogSuite
from mirrordepth.py.metrics.DepthMetrics import make3dC1, eigenCropMask
from mirrordepth.py.metrics.DepthMetrics import centerCropMask
from mirrordepth.py.metrics.DepthMetrics import aggregateMetrics, evaluate
