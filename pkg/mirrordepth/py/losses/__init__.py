from mirrordepth.py.losses.PhotometricLoss import LossWeights
from mirrordepth.py.losses.PhotometricLoss import ScaleLossBreakdown
from mirrordepth.py.losses.PhotometricLoss import ssimMap, imageLoss
from mirrordepth.py.losses.PhotometricLoss import lrConsistencyLoss, tvLoss
from mirrordepth.py.losses.PhotometricLoss import scaleLoss, totalLoss
from mirrordepth.py.losses.PhotometricLoss import pyramidLoss
