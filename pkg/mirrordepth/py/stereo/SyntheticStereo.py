'''
Procedural rectified stereo pairs with exact ground-truth disparity.

A scene is a smoothed random RGB texture seen from two cameras. In
``constant-plane`` mode the whole texture sits at one disparity. In
``two-layer`` mode a textured rectangle floats in front of a background
plane; the right view is composed back to front, so the rectangle hides
part of the background, and the left-image pixels that the right camera
cannot see are recorded in ``occlusion``.

Left pixel ``j`` corresponds to right pixel ``j - d`` (``d`` in pixels).

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.stereo.SyntheticStereo import exactShift
>>> row = np.array([1., 2., 3., 4.]).reshape(1, 1, 1, 4)
>>> exactShift(row, 2).ravel()
array([3., 4., 4., 4.])

'''

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from mirrordepth.py import Constants
from mirrordepth.py.Errors import ConfigError
from mirrordepth.py.modeling.MDTensor import MDTensor
from mirrordepth.py.metrics.DepthMetrics import CameraCalib

logger = logging.getLogger(__name__)

CONSTANT_PLANE = 'constant-plane'
TWO_LAYER = 'two-layer'
MODES = (CONSTANT_PLANE, TWO_LAYER)


@dataclass
class SceneConfig:
    height: int = 64
    width: int = 128
    disparity_px: list = field(default_factory=lambda: [2.0, 8.0])
    texture_sigma: float = 1.0
    mode: str = CONSTANT_PLANE
    depth_cued_texture: bool = True
    focal_px: float = 721.0
    baseline_m: float = 0.54

    @property
    def calib(self):
        return CameraCalib(self.focal_px, self.baseline_m)

    def validate(self):
        if self.height < 1 or self.width < 1:
            raise ConfigError('scene size must be positive')
        if self.mode not in MODES:
            raise ConfigError('mode must be one of %s, got %r'
                              % (', '.join(MODES), self.mode))
        if len(self.disparity_px) != 2:
            raise ConfigError('disparity_px must be a [low, high] pair')
        lo, hi = self.disparity_px
        if not 0 <= lo <= hi:
            raise ConfigError('disparity_px range [%g, %g] is invalid'
                              % (lo, hi))
        if not hi < self.width / 4.:
            raise ConfigError('disparity out of range: %g px must stay '
                              'below a quarter of the width (%d)'
                              % (hi, self.width))
        if self.mode == TWO_LAYER and \
                np.floor(hi) - np.ceil(lo) < 1:
            raise ConfigError('two-layer scenes need two integer '
                              'disparities inside disparity_px')
        if self.texture_sigma <= 0:
            raise ConfigError('texture_sigma must be > 0')
        self.calib.validate()
        return self


@dataclass
class StereoSample:
    '''
    ``left`` and ``right`` are [1, 3, H, W] tensors in [0, 1];
    ``gt_disparity`` is [1, 1, H, W] in width fractions, left-image
    coordinates. ``occlusion`` (two-layer scenes) is 1 where a left pixel
    is hidden in the right view.
    '''
    left: MDTensor
    right: MDTensor
    gt_disparity: MDTensor = None
    calib: CameraCalib = field(default_factory=CameraCalib)
    occlusion: np.ndarray = None
    seed: int = None
    disparity_px: tuple = ()


def exactShift(texture, dPx):
    '''
    Right view of ``texture`` at disparity ``dPx`` pixels:
    ``out[..., j] = texture[..., j + dPx]`` with linear interpolation and
    the last column repeated past the border.
    '''
    texture = np.asarray(texture, dtype=np.float64)
    width = texture.shape[-1]
    if not 0 <= dPx < width:
        raise ConfigError('shift %g px outside [0, %d)' % (dPx, width))
    if dPx == 0:
        return texture.copy()
    shift = [0] * (texture.ndim - 1) + [-dPx]
    return ndimage.shift(texture, shift, order=1, mode='nearest')


def textureSigma(cfg, dPx):
    '''
    Smoothing of a plane's texture. With ``depth_cued_texture`` nearer
    planes (larger disparity) get coarser texture.
    '''
    if not cfg.depth_cued_texture:
        return cfg.texture_sigma
    mid = np.mean(cfg.disparity_px)
    if mid <= 0:
        return cfg.texture_sigma
    return cfg.texture_sigma * dPx / mid


def randomTexture(rng, height, width, sigma):
    'Per-channel Gaussian-smoothed uniform noise, stretched to [0, 1]'
    noise = rng.uniform(size=(3, height, width))
    out = np.empty_like(noise)
    for c in range(3):
        t = ndimage.gaussian_filter(noise[c], sigma, mode='reflect')
        lo, hi = t.min(), t.max()
        out[c] = (t - lo) / (hi - lo) if hi > lo else 0.5
    return out[None]


def _constantPlane(rng, cfg):
    H, W = cfg.height, cfg.width
    lo, hi = cfg.disparity_px
    d = float(rng.uniform(lo, hi))
    left = randomTexture(rng, H, W, textureSigma(cfg, d))
    right = exactShift(left, d)
    gt = np.full((1, 1, H, W), d / W)
    return left, right, gt, None, (d,)


def _twoLayer(rng, cfg):
    H, W = cfg.height, cfg.width
    lo, hi = cfg.disparity_px
    candidates = np.arange(int(np.ceil(lo)), int(np.floor(hi)) + 1)
    dBg, dFg = sorted(int(v) for v in
                      rng.choice(candidates, 2, replace=False))
    back = randomTexture(rng, H, W, textureSigma(cfg, dBg))
    front = randomTexture(rng, H, W, textureSigma(cfg, dFg))

    r0 = int(rng.integers(H // 8, H // 4 + 1))
    r1 = r0 + H // 2
    c0 = int(rng.integers(W // 4, W // 2 + 1))
    c1 = c0 + W // 4

    inLeft = np.zeros((1, 1, H, W), dtype=bool)
    inLeft[..., r0:r1, c0:c1] = True
    inRight = np.zeros((1, 1, H, W), dtype=bool)
    inRight[..., r0:r1, c0 - dFg:c1 - dFg] = True

    left = np.where(inLeft, front, back)
    right = np.where(inRight, exactShift(front, dFg), exactShift(back, dBg))
    gt = np.where(inLeft, float(dFg), float(dBg)) / W

    occlusion = np.zeros((1, 1, H, W))
    occlusion[..., r0:r1, c0 - (dFg - dBg):c0] = 1.0
    return left, right, gt, occlusion, (dBg, dFg)


def generateScene(seed, cfg, dtype=Constants.VERIFY_DATATYPE):
    '''
    Draw the scene for ``seed``. The same seed and config always give the
    same sample.
    '''
    cfg.validate()
    rng = np.random.default_rng(seed)
    if cfg.mode == CONSTANT_PLANE:
        left, right, gt, occ, dPx = _constantPlane(rng, cfg)
    else:
        left, right, gt, occ, dPx = _twoLayer(rng, cfg)
    logger.debug('scene seed %d: %s, disparity %s px', seed, cfg.mode, dPx)
    return StereoSample(left=MDTensor(left.astype(dtype)),
                        right=MDTensor(right.astype(dtype)),
                        gt_disparity=MDTensor(gt.astype(dtype)),
                        calib=cfg.calib,
                        occlusion=occ,
                        seed=seed,
                        disparity_px=dPx)
