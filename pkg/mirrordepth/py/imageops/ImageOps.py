'''
Differentiable image-domain operations on ``[N, C, H, W]`` tensors:
horizontal mirroring, scanline bilinear warping, Gaussian filtering and
the 2x pyramid steps.

Disparities are fractions of the image width. A left disparity ``d``
means left pixel ``j`` sees right pixel ``j - d * W``.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.modeling.MDTensor import MDTensor
>>> from mirrordepth.py.imageops.ImageOps import (mirror, warpHorizontal,
...                                              WarpDirection)
>>> row = MDTensor(np.array([10., 20., 30., 40.]).reshape(1, 1, 1, 4))
>>> d = MDTensor(np.full((1, 1, 1, 4), 1. / 4))
>>> warpHorizontal(row, d, WarpDirection.RightToLeft).values.ravel()
array([10., 10., 20., 30.])
>>> mirror(row).values.ravel()
array([40., 30., 20., 10.])

'''

import logging
from enum import Enum

import numpy as np
from scipy import ndimage

from mirrordepth.py.Errors import ShapeError, ConfigError
from mirrordepth.py.modeling.MDTensor import apply
from mirrordepth.py.utils.util import precondition, checkSpatialMatch

logger = logging.getLogger(__name__)


class WarpDirection(Enum):
    # reconstruct the left view by sampling the right one
    RightToLeft = -1
    # reconstruct the right view by sampling the left one
    LeftToRight = 1


def mirror(t):
    'Flip ``t`` about the vertical axis: column j goes to column W - 1 - j'
    out = np.ascontiguousarray(t.values[..., ::-1])
    return apply('mirror', (t,), out,
                 lambda g: (np.ascontiguousarray(g[..., ::-1]),))


def _checkWarp(source, disparity, direction):
    checkSpatialMatch(source, disparity, 'warpHorizontal')
    if disparity.shape[1] != 1:
        raise ShapeError('warpHorizontal: disparity dimension C must be 1, '
                         'got %d' % disparity.shape[1])
    if not isinstance(direction, WarpDirection):
        raise ConfigError('warpHorizontal: unknown direction %r' % direction)


@precondition(_checkWarp)
def warpHorizontal(source, disparity, direction):
    '''
    Resample every scanline of ``source`` at column ``j - d * W``
    (``RightToLeft``) or ``j + d * W`` (``LeftToRight``) with linear
    interpolation. Sample positions are clamped to ``[0, W - 1]``.
    Differentiable with respect to both ``source`` and ``disparity``.
    '''
    src = source.values
    N, C, H, W = src.shape
    dt = src.dtype
    sign = dt.type(direction.value)

    d = disparity.values[:, 0]
    cols = np.arange(W, dtype=dt).reshape(1, 1, W)
    xRaw = cols + sign * d * dt.type(W)
    x = np.clip(xRaw, 0, W - 1)
    x0 = np.floor(x).astype(np.intp)
    if W > 1:
        x0 = np.minimum(x0, W - 2)
    x1 = np.minimum(x0 + 1, W - 1)
    a = (x - x0).astype(dt)[:, None]

    idx0 = np.broadcast_to(x0[:, None], src.shape)
    idx1 = np.broadcast_to(x1[:, None], src.shape)
    v0 = np.take_along_axis(src, idx0, axis=3)
    v1 = np.take_along_axis(src, idx1, axis=3)
    delta = v1 - v0
    # v0 + a * (v1 - v0) keeps constant rows exactly constant
    out = v0 + a * delta

    inside = ((xRaw >= 0) & (xRaw <= W - 1))[:, None]
    size = src.size

    def back(g):
        base = (np.arange(N * C * H) * W).reshape(N, C, H, 1)
        i0 = (base + idx0).ravel()
        i1 = (base + idx1).ravel()
        gs = np.bincount(i0, weights=(g * (1 - a)).ravel(), minlength=size)
        gs += np.bincount(i1, weights=(g * a).ravel(), minlength=size)
        gs = gs.reshape(src.shape).astype(dt)
        gd = np.where(inside, g * delta, 0).sum(axis=1, keepdims=True)
        gd = (gd * (sign * dt.type(W))).astype(dt)
        return (gs, gd)

    return apply('warp', (source, disparity), out, back)


def gaussianKernel(sigma, radius):
    'Normalized taps exp(-k^2 / (2 sigma^2)), k = -radius..radius'
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-k ** 2 / (2. * sigma ** 2))
    return g / g.sum()


def _correlate(x, kernel, axis):
    'Zero-padded correlation of ``x`` with a symmetric 1-D kernel'
    return ndimage.correlate1d(x, kernel, axis=axis, mode='constant',
                               cval=0.)


def _checkBlur(t, sigma, radius):
    if not sigma > 0:
        raise ConfigError('gaussianBlur: sigma must be > 0, got %r' % sigma)
    if radius < 1:
        raise ConfigError('gaussianBlur: radius must be >= 1, got %r'
                          % radius)


@precondition(_checkBlur)
def gaussianBlur(t, sigma, radius):
    '''
    Separable Gaussian filter. Near the borders the kernel is renormalized
    over the taps that fall inside the image, so constant images stay
    constant.
    '''
    x = t.values
    dt = x.dtype
    kernel = gaussianKernel(sigma, radius).astype(dt)
    H, W = x.shape[2], x.shape[3]
    normH = _correlate(np.ones(H, dt), kernel, 0).reshape(H, 1)
    normW = _correlate(np.ones(W, dt), kernel, 0).reshape(1, W)
    norm = normH * normW

    out = _correlate(_correlate(x, kernel, 2), kernel, 3) / norm

    def back(g):
        g = g / norm
        return (_correlate(_correlate(g, kernel, 3), kernel, 2),)

    return apply('blur', (t,), out, back)


def _checkEven(t):
    H, W = t.shape[2], t.shape[3]
    if H % 2:
        raise ShapeError('downsample2x: dimension H is odd (%d)' % H)
    if W % 2:
        raise ShapeError('downsample2x: dimension W is odd (%d)' % W)


@precondition(_checkEven)
def downsample2x(t):
    '2x2 mean pooling'
    N, C, H, W = t.shape
    out = t.values.reshape(N, C, H // 2, 2, W // 2, 2).mean(axis=(3, 5))
    out = out.astype(t.dtype)

    def back(g):
        g = g * g.dtype.type(0.25)
        return (np.repeat(np.repeat(g, 2, axis=2), 2, axis=3),)

    return apply('downsample', (t,), out, back)


def upsample2xNearest(t):
    'Replicate every value into a 2x2 block'
    N, C, H, W = t.shape
    out = np.repeat(np.repeat(t.values, 2, axis=2), 2, axis=3)

    def back(g):
        return (g.reshape(N, C, H, 2, W, 2).sum(axis=(3, 5)),)

    return apply('upsample', (t,), out, back)


def resizeBilinear(a, height, width):
    '''
    Rescale a 2-D array to ``(height, width)`` with bilinear interpolation
    (pixel-center aligned, edges clamped). Not differentiable; used by the
    evaluation to bring predictions to the ground-truth size.
    '''
    a = np.asarray(a, dtype=np.float64)
    if a.shape == (height, width):
        return a.copy()
    h, w = a.shape
    rows = (np.arange(height) + 0.5) * (float(h) / height) - 0.5
    cols = (np.arange(width) + 0.5) * (float(w) / width) - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing='ij')
    return ndimage.map_coordinates(a, [rr, cc], order=1, mode='nearest')
