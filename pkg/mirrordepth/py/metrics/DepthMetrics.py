'''
Disparity-to-depth conversion and the depth error suites: the Eigen
suite (abs/sq relative error, RMSE, log RMSE, threshold accuracies), the
scale-invariant log suite and the Make3D C1 suite, with the evaluation
crops.

All routines take 2-D (or any-shape) depth arrays in meters and a boolean
mask of pixels to evaluate.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.metrics.DepthMetrics import silogSuite
>>> gt = np.array([1., 2., 4.])
>>> m = silogSuite(2 * gt, gt)
>>> abs(m.silog) < 1e-10
True

'''

import logging
from dataclasses import dataclass, fields

import numpy as np

from mirrordepth.py import Constants
from mirrordepth.py.Errors import ConfigError, DataError, NumericError
from mirrordepth.py.utils.util import postcondition

logger = logging.getLogger(__name__)

SUITES = ('eigen', 'silog', 'make3d')

SUITE_FIELDS = {
    'eigen': ('abs_rel', 'sq_rel', 'rmse', 'rmse_log',
              'delta1', 'delta2', 'delta3'),
    'silog': ('silog', 'sq_rel_pct', 'abs_rel_pct', 'irmse'),
    'make3d': ('make3d_sq_rel', 'make3d_abs_rel', 'make3d_rmse',
               'make3d_log10'),
}


@dataclass
class CameraCalib:
    focal_px: float = 721.0
    baseline_m: float = 0.54

    def validate(self):
        if not self.focal_px > 0 or not self.baseline_m > 0:
            raise ConfigError('focal_px and baseline_m must be > 0')
        return self


@dataclass
class DepthMetrics:
    '''
    One row of metric values. Each suite fills its own fields and leaves
    the others as None.
    '''
    abs_rel: float = None
    sq_rel: float = None
    rmse: float = None
    rmse_log: float = None
    delta1: float = None
    delta2: float = None
    delta3: float = None
    silog: float = None
    sq_rel_pct: float = None
    abs_rel_pct: float = None
    irmse: float = None
    make3d_sq_rel: float = None
    make3d_abs_rel: float = None
    make3d_rmse: float = None
    make3d_log10: float = None

    def values(self):
        'Filled fields as a dict, in declaration order'
        ret = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                ret[f.name] = v
        return ret


def disparityToDepth(d, calib, widthPx, mask=None):
    '''
    ``focal_px * baseline_m / (d * widthPx)`` for disparities ``d`` in
    width fractions. Pixels outside ``mask`` get depth 0.
    '''
    d = np.asarray(d, dtype=np.float64)
    if mask is None:
        mask = np.ones(d.shape, dtype=bool)
    if np.any(d[mask] <= 0):
        raise DataError('zero or negative disparity inside the evaluation '
                        'mask')
    depth = np.zeros(d.shape)
    depth[mask] = calib.focal_px * calib.baseline_m / (d[mask] * widthPx)
    return depth


def _checkFinite(result, *args, **kwargs):
    for name, v in result.values().items():
        if not np.isfinite(v):
            raise NumericError('metric %s is not finite' % name)


def _select(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DataError('prediction shape %s does not match ground truth %s'
                        % (pred.shape, gt.shape))
    if mask is None:
        mask = np.ones(gt.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise DataError('empty evaluation mask')
    return pred[mask], gt[mask]


@postcondition(_checkFinite)
def eigenMetrics(pred, gt, mask=None, cap=None):
    '''
    Eigen suite on pixels under ``mask``. Both depths are clamped to
    ``[MIN_DEPTH, cap]`` (no upper clamp when ``cap`` is None).
    '''
    p, g = _select(pred, gt, mask)
    upper = np.inf if cap is None else cap
    p = np.clip(p, Constants.MIN_DEPTH, upper)
    g = np.clip(g, Constants.MIN_DEPTH, upper)

    ratio = np.maximum(p / g, g / p)
    return DepthMetrics(
        abs_rel=np.mean(np.abs(g - p) / g),
        sq_rel=np.mean((g - p) ** 2 / g),
        rmse=np.sqrt(np.mean((g - p) ** 2)),
        rmse_log=np.sqrt(np.mean((np.log(g) - np.log(p)) ** 2)),
        delta1=np.mean(ratio < 1.25),
        delta2=np.mean(ratio < 1.25 ** 2),
        delta3=np.mean(ratio < 1.25 ** 3))


@postcondition(_checkFinite)
def silogSuite(pred, gt, mask=None):
    '''
    Scale-invariant log error (x100), relative errors in percent and the
    inverse-depth RMSE in 1/km.
    '''
    p, g = _select(pred, gt, mask)
    if np.any(p <= 0) or np.any(g <= 0):
        raise DataError('silog suite needs positive depths')
    e = np.log(p) - np.log(g)
    return DepthMetrics(
        silog=(np.mean(e ** 2) - np.mean(e) ** 2) * 100,
        sq_rel_pct=np.mean((g - p) ** 2 / g) * 100,
        abs_rel_pct=np.mean(np.abs(g - p) / g) * 100,
        irmse=np.sqrt(np.mean((1. / g - 1. / p) ** 2)) * 1000)


@postcondition(_checkFinite)
def make3dC1(pred, gt, mask=None):
    'Make3D C1 errors on pixels whose ground truth is at most 70 m'
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    within = gt <= Constants.MAKE3D_MAX_DEPTH
    if mask is not None:
        within &= np.asarray(mask, dtype=bool)
    p, g = _select(pred, gt, within)
    if np.any(p <= 0) or np.any(g <= 0):
        raise DataError('make3d suite needs positive depths')
    return DepthMetrics(
        make3d_sq_rel=np.mean((g - p) ** 2 / g),
        make3d_abs_rel=np.mean(np.abs(g - p) / g),
        make3d_rmse=np.sqrt(np.mean((g - p) ** 2)),
        make3d_log10=np.mean(np.abs(np.log10(g) - np.log10(p))))


def eigenCropMask(height, width):
    'The standard KITTI crop: fixed fractions of the rows and columns'
    top, bottom, left, right = Constants.EIGEN_CROP
    mask = np.zeros((height, width), dtype=bool)
    mask[int(np.floor(top * height)):int(np.floor(bottom * height)),
         int(np.floor(left * width)):int(np.floor(right * width))] = True
    return mask


def centerCropMask(height, width, aspect):
    '''
    Central crop with ``width / height == aspect``, removing columns or
    rows as needed.
    '''
    if not aspect > 0:
        raise ConfigError('crop aspect must be > 0, got %r' % aspect)
    mask = np.zeros((height, width), dtype=bool)
    if float(width) / height > aspect:
        w = max(int(round(height * aspect)), 1)
        c0 = (width - w) // 2
        mask[:, c0:c0 + w] = True
    else:
        h = max(int(round(width / aspect)), 1)
        r0 = (height - h) // 2
        mask[r0:r0 + h, :] = True
    return mask


def evaluate(pred, gt, suite, mask=None, cap=None):
    'Dispatch to one suite by name'
    if suite == 'eigen':
        return eigenMetrics(pred, gt, mask, cap)
    if suite == 'silog':
        return silogSuite(pred, gt, mask)
    if suite == 'make3d':
        return make3dC1(pred, gt, mask)
    raise ConfigError('unknown metric suite "%s" (choose from %s)'
                      % (suite, ', '.join(SUITES)))


def aggregateMetrics(rows):
    'Field-wise mean over a list of :class:`DepthMetrics`'
    rows = list(rows)
    if not rows:
        raise DataError('no metric rows to aggregate')
    keys = rows[0].values().keys()
    agg = DepthMetrics()
    for k in keys:
        setattr(agg, k, float(np.mean([r.values()[k] for r in rows])))
    return agg
