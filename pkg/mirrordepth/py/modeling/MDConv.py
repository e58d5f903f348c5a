'''
2-D convolution (cross-correlation, as in every deep learning library)
on :class:`~mirrordepth.py.modeling.MDTensor.MDTensor` values, with zero
padding and an integer stride.

The receptive fields are gathered once per call into a contiguous
column matrix, one row per output pixel. The forward product and the
weight gradient are single matrix products with it.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.modeling.MDTensor import MDTensor
>>> from mirrordepth.py.modeling.MDConv import conv2d
>>> x = MDTensor(np.ones((1, 1, 3, 3)))
>>> w = MDTensor(np.ones((1, 1, 3, 3)))
>>> b = MDTensor(np.zeros((1, 1, 1, 1)))
>>> y = conv2d(x, w, b, stride=1, padding=1)
>>> y.values[0, 0]
array([[4., 6., 4.],
       [6., 9., 6.],
       [4., 6., 4.]])

'''

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from mirrordepth.py.Errors import ShapeError, MirrorDepthError
from mirrordepth.py.modeling.MDTensor import apply

logger = logging.getLogger(__name__)


def outputSize(n, k, stride, padding):
    return (n + 2 * padding - k) // stride + 1


def _checkConv(input, weight, bias, stride, padding):
    if stride < 1:
        raise MirrorDepthError('conv2d: stride must be >= 1, got %d' % stride)
    if padding < 0:
        raise MirrorDepthError('conv2d: padding must be >= 0, got %d'
                               % padding)
    cOut, cIn, kh, kw = weight.shape
    if input.shape[1] != cIn:
        raise ShapeError('conv2d: input dimension C is %d, weight expects '
                         'Cin = %d' % (input.shape[1], cIn))
    if bias is not None and bias.size != cOut:
        raise ShapeError('conv2d: bias has %d elements, weight has '
                         'Cout = %d' % (bias.size, cOut))
    H, W = input.shape[2], input.shape[3]
    if H + 2 * padding < kh:
        raise ShapeError('conv2d: dimension H (%d, padded %d) is smaller '
                         'than the kernel height %d' % (H, padding, kh))
    if W + 2 * padding < kw:
        raise ShapeError('conv2d: dimension W (%d, padded %d) is smaller '
                         'than the kernel width %d' % (W, padding, kw))
    if input.dtype != weight.dtype:
        raise MirrorDepthError('conv2d: precision mismatch (%s vs %s)'
                               % (input.dtype.name, weight.dtype.name))


def conv2d(input, weight, bias=None, stride=1, padding=0):
    '''
    Convolve ``input`` [N, Cin, H, W] with ``weight`` [Cout, Cin, kh, kw]
    and add ``bias`` (Cout elements, stored as [Cout, 1, 1, 1]).

    Output spatial size is ``(H + 2 * padding - kh) // stride + 1``
    (likewise for W).
    '''
    _checkConv(input, weight, bias, stride, padding)
    x = input.values
    w = weight.values
    N, C, H, W = x.shape
    cOut, _, kh, kw = w.shape
    Ho = outputSize(H, kh, stride, padding)
    Wo = outputSize(W, kw, stride, padding)

    if padding:
        xp = np.pad(x, ((0, 0), (0, 0), (padding, padding),
                        (padding, padding)))
    else:
        xp = x
    # [N, C, Ho, Wo, kh, kw]
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    # one row per output pixel: [N * Ho * Wo, C * kh * kw]
    cols = np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5))
    cols = cols.reshape(N * Ho * Wo, C * kh * kw)
    wmat = w.reshape(cOut, C * kh * kw)
    out = (cols @ wmat.T).reshape(N, Ho, Wo, cOut).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.values.reshape(1, cOut, 1, 1)
    out = np.ascontiguousarray(out)

    padShape = xp.shape

    def back(g):
        gmat = g.transpose(0, 2, 3, 1).reshape(N * Ho * Wo, cOut)
        gw = (gmat.T @ cols).reshape(w.shape)
        gb = None
        if bias is not None:
            gb = g.sum(axis=(0, 2, 3)).reshape(bias.shape)
        gcols = (gmat @ wmat).reshape(N, Ho, Wo, C, kh, kw)
        gxp = np.zeros(padShape, dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + stride * Ho:stride, j:j + stride * Wo:stride] += \
                    gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        gx = gxp[:, :, padding:padding + H, padding:padding + W]
        return (np.ascontiguousarray(gx), gw, gb)

    inputs = (input, weight, bias) if bias is not None else (input, weight)
    if bias is None:
        return apply('conv2d', inputs, out, lambda g: back(g)[:2])
    return apply('conv2d', inputs, out, back)
