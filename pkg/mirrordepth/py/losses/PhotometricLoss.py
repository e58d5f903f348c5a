'''
Self-supervised stereo losses: an SSIM + L1 appearance term, a
left-right disparity consistency term and a total-variation smoothness
term, combined per scale and summed over the disparity pyramid.

Every term is a mean over pixels (channels averaged), so the weights mean
the same thing at every scale.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.modeling.MDTensor import MDTensor
>>> from mirrordepth.py.losses.PhotometricLoss import tvLoss
>>> d = MDTensor(np.arange(3.).reshape(1, 1, 1, 3).repeat(2, axis=2))
>>> round(float(tvLoss(d).item()), 6)
0.666667

'''

import math
import logging
from dataclasses import dataclass

from mirrordepth.py.Errors import ConfigError, ShapeError, NumericError
from mirrordepth.py.modeling.MDTensor import reduce, spatialSlice
from mirrordepth.py.imageops.ImageOps import (warpHorizontal, WarpDirection,
                                              gaussianBlur, downsample2x)
from mirrordepth.py.utils.util import precondition, checkSameShape

logger = logging.getLogger(__name__)

LEFT = 'left'
RIGHT = 'right'

TERMS = ('im', 'tv', 'lr')


@dataclass
class LossWeights:
    alpha_im: float = 1.0
    alpha_tv: float = 0.001
    alpha_lr: float = 1.0
    alpha_ssim_mix: float = 0.85
    c1: float = 0.01 ** 2
    c2: float = 0.03 ** 2
    ssim_sigma: float = 1.5
    ssim_radius: int = 3

    def validate(self):
        for name in ('alpha_im', 'alpha_tv', 'alpha_lr'):
            if getattr(self, name) < 0:
                raise ConfigError('%s must be >= 0' % name)
        if not 0 <= self.alpha_ssim_mix <= 1:
            raise ConfigError('alpha_ssim_mix must lie in [0, 1]')
        if self.c1 <= 0 or self.c2 <= 0:
            raise ConfigError('c1 and c2 must be > 0')
        if self.ssim_sigma <= 0:
            raise ConfigError('ssim_sigma must be > 0')
        if int(self.ssim_radius) != self.ssim_radius or self.ssim_radius < 1:
            raise ConfigError('ssim_radius must be an integer >= 1')
        return self


def _sameShape(x, y, *args, **kwargs):
    checkSameShape(x, y, 'loss inputs')


@precondition(_sameShape)
def ssimMap(x, y, w):
    '''
    Per-pixel SSIM of ``x`` and ``y`` with Gaussian-weighted local
    moments. Values lie in [-1, 1].
    '''
    blur = lambda t: gaussianBlur(t, w.ssim_sigma, w.ssim_radius)
    muX = blur(x)
    muY = blur(y)
    muXX = muX * muX
    muYY = muY * muY
    muXY = muX * muY
    sigXX = blur(x * x) - muXX
    sigYY = blur(y * y) - muYY
    sigXY = blur(x * y) - muXY

    num = (muXY * 2 + w.c1) * (sigXY * 2 + w.c2)
    den = (muXX + muYY + w.c1) * (sigXX + sigYY + w.c2)
    return num / den


@precondition(_sameShape)
def imageLoss(target, reconstruction, w):
    '''
    Mean over pixels and channels of
    ``a * (1 - SSIM) / 2 + (1 - a) * |target - reconstruction|``,
    ``a = w.alpha_ssim_mix``.
    '''
    a = w.alpha_ssim_mix
    ssim = ssimMap(target, reconstruction, w)
    dssim = (1 - ssim) * (a / 2.)
    l1 = abs(target - reconstruction) * (1. - a)
    return reduce('mean', dssim + l1)


def lrConsistencyLoss(dOwn, dOther, side):
    '''
    Mean absolute difference between a view's disparity and the other
    view's disparity looked up through it. The left view looks at column
    ``j - d * W`` of the right map, the right view at ``j + d * W``.
    '''
    checkSameShape(dOwn, dOther, 'lrConsistencyLoss')
    if side == LEFT:
        direction = WarpDirection.RightToLeft
    elif side == RIGHT:
        direction = WarpDirection.LeftToRight
    else:
        raise ConfigError('side must be "left" or "right", got %r' % side)
    sampled = warpHorizontal(dOther, dOwn, direction)
    return reduce('mean', abs(dOwn - sampled))


def _checkTv(d):
    if d.shape[2] < 2:
        raise ShapeError('tvLoss: dimension H must be >= 2, got %d'
                         % d.shape[2])
    if d.shape[3] < 2:
        raise ShapeError('tvLoss: dimension W must be >= 2, got %d'
                         % d.shape[3])


@precondition(_checkTv)
def tvLoss(d):
    '''
    Sum of absolute vertical and horizontal neighbour differences, divided
    by the number of pixels.
    '''
    N, C, H, W = d.shape
    dy = spatialSlice(d, rows=(1, H)) - spatialSlice(d, rows=(0, H - 1))
    dx = spatialSlice(d, cols=(1, W)) - spatialSlice(d, cols=(0, W - 1))
    total = reduce('sum', abs(dy)) + reduce('sum', abs(dx))
    return total * (1. / (N * C * H * W))


class ScaleLossBreakdown(object):
    '''
    The six terms of one pyramid scale and their weighted combination
    ``combined``. All members are ``[1, 1, 1, 1]`` tensors.
    '''

    def __init__(self, im_l, im_r, tv_l, tv_r, lr_l, lr_r, w):
        self.im_l, self.im_r = im_l, im_r
        self.tv_l, self.tv_r = tv_l, tv_r
        self.lr_l, self.lr_r = lr_l, lr_r
        self.weights = w
        self.combined = ((im_l + im_r) * w.alpha_im +
                         (tv_l + tv_r) * w.alpha_tv +
                         (lr_l + lr_r) * w.alpha_lr)

    def terms(self):
        'Return the six terms as ``{"im_l": value, ...}`` in CSV order'
        ret = {}
        for term in TERMS:
            for side in ('l', 'r'):
                key = '%s_%s' % (term, side)
                ret[key] = getattr(self, key).item()
        return ret

    def recombine(self):
        '''
        Recompute the combined value from the reported terms, in the same
        order and precision as ``combined``.
        '''
        t = self.terms()
        w = self.weights
        c = type(t['im_l'])
        return ((t['im_l'] + t['im_r']) * c(w.alpha_im) +
                (t['tv_l'] + t['tv_r']) * c(w.alpha_tv) +
                (t['lr_l'] + t['lr_r']) * c(w.alpha_lr))

    def __repr__(self):
        return 'ScaleLossBreakdown(%s, L_s=%g)' % (
            ', '.join('%s=%g' % kv for kv in self.terms().items()),
            self.combined.item())


def scaleLoss(I_l, I_r, d_l, d_r, w):
    '''
    Loss of one scale. The left view is rebuilt from the right image and
    ``d_l``, the right view from the left image and ``d_r``.
    '''
    rec_l = warpHorizontal(I_r, d_l, WarpDirection.RightToLeft)
    rec_r = warpHorizontal(I_l, d_r, WarpDirection.LeftToRight)
    return ScaleLossBreakdown(
        im_l=imageLoss(I_l, rec_l, w),
        im_r=imageLoss(I_r, rec_r, w),
        tv_l=tvLoss(d_l),
        tv_r=tvLoss(d_r),
        lr_l=lrConsistencyLoss(d_l, d_r, LEFT),
        lr_r=lrConsistencyLoss(d_r, d_l, RIGHT),
        w=w)


def _termEvaluators(I_l, I_r, d_l, d_r, w):
    'The six terms of one scale as deferred calls, in trace order'
    return (
        ('im_l', lambda: imageLoss(
            I_l, warpHorizontal(I_r, d_l, WarpDirection.RightToLeft), w)),
        ('im_r', lambda: imageLoss(
            I_r, warpHorizontal(I_l, d_r, WarpDirection.LeftToRight), w)),
        ('tv_l', lambda: tvLoss(d_l)),
        ('tv_r', lambda: tvLoss(d_r)),
        ('lr_l', lambda: lrConsistencyLoss(d_l, d_r, LEFT)),
        ('lr_r', lambda: lrConsistencyLoss(d_r, d_l, RIGHT)))


def lossReport(I_l, I_r, output, w):
    '''
    Evaluate every term of every scale on its own, untracked, to locate a
    non-finite loss.

    Returns ``(values, failed)``: ``values`` maps the loss trace columns
    (``L_total``, ``s1_im_l`` ...) to floats, NaN where the term could not
    be evaluated; ``failed`` lists the columns that raised
    :class:`~mirrordepth.py.Errors.NumericError`.
    '''
    scales = len(output.left)
    pyrL = imagePyramid(I_l.detach(), scales)
    pyrR = imagePyramid(I_r.detach(), scales)
    values = {'L_total': float('nan')}
    failed = []
    total = 0.
    for s in range(scales):
        terms = _termEvaluators(pyrL[s], pyrR[s], output.left[s].detach(),
                                output.right[s].detach(), w)
        for name, evaluate in terms:
            key = 's%d_%s' % (s + 1, name)
            try:
                values[key] = float(evaluate().item())
            except NumericError:
                values[key] = float('nan')
                failed.append(key)
        weights = {'im': w.alpha_im, 'tv': w.alpha_tv, 'lr': w.alpha_lr}
        total += sum(weights[name[:2]] * values['s%d_%s' % (s + 1, name)]
                     for name, _ in terms)
    if not failed:
        if math.isfinite(total):
            values['L_total'] = total
        else:
            failed.append('L_total')
    return values, failed


def totalLoss(breakdowns, scales=4):
    'Unweighted sum of the per-scale combined losses'
    breakdowns = list(breakdowns)
    if len(breakdowns) != scales:
        raise ShapeError('totalLoss: expected %d scales, got %d'
                         % (scales, len(breakdowns)))
    total = breakdowns[0].combined
    for b in breakdowns[1:]:
        total = total + b.combined
    return total


def imagePyramid(image, scales):
    'Finest first; every level is the 2x2 mean pool of the previous one'
    ret = [image]
    for _ in range(scales - 1):
        ret.append(downsample2x(ret[-1]))
    return ret


def pyramidLoss(I_l, I_r, output, w, singleScale=False):
    '''
    Loss of a Siamese forward pass ``output`` (with ``left`` and ``right``
    lists of disparities, finest first) against the image pair.

    Returns ``(total, breakdowns)``. With ``singleScale`` only the finest
    scale contributes to ``total``; every breakdown is still computed for
    the trace.
    '''
    scales = len(output.left)
    if len(output.right) != scales:
        raise ShapeError('pyramidLoss: %d left scales vs %d right scales'
                         % (scales, len(output.right)))
    pyrL = imagePyramid(I_l, scales)
    pyrR = imagePyramid(I_r, scales)
    breakdowns = [scaleLoss(pyrL[s], pyrR[s], output.left[s],
                            output.right[s], w)
                  for s in range(scales)]
    if singleScale:
        return breakdowns[0].combined, breakdowns
    return totalLoss(breakdowns, scales), breakdowns
