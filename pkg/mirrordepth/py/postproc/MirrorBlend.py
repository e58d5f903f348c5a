'''
Test-time mirror blending. The network is run on the image and on its
mirror; near the left border the estimate from the mirrored image is
used, near the right border the direct estimate, and the two are averaged
in between, with linear ramps over ``ramp_fraction`` of the width.

**Usage**

>>> from mirrordepth.py.postproc.MirrorBlend import BlendConfig, blendWeights
>>> wl, wr = blendWeights(10, BlendConfig(ramp_fraction=0.2))
>>> wl
array([1. , 0.5, 0. , 0. , 0. , 0. , 0. , 0. , 0. , 0. ])
>>> wr
array([0. , 0. , 0. , 0. , 0. , 0. , 0. , 0. , 0.5, 1. ])

'''

import logging
from dataclasses import dataclass

import numpy as np

from mirrordepth.py.Errors import ConfigError
from mirrordepth.py.modeling.MDTensor import MDTensor
from mirrordepth.py.imageops.ImageOps import mirror
from mirrordepth.py.network.DispNetLite import inferMono
from mirrordepth.py.utils.util import precondition, checkSameShape

logger = logging.getLogger(__name__)


@dataclass
class BlendConfig:
    ramp_fraction: float = 0.05

    def validate(self):
        if not 0 < self.ramp_fraction < 0.5:
            raise ConfigError('ramp_fraction must lie in (0, 0.5), got %r'
                              % self.ramp_fraction)
        return self


def blendWeights(width, cfg):
    '''
    Column weights ``(w_l, w_r)``: ``w_l`` falls linearly from 1 at
    column 0 to 0 at ``ramp_fraction * width``; ``w_r`` is its mirror.
    '''
    r = cfg.ramp_fraction * width
    j = np.arange(width, dtype=np.float64)
    wl = np.clip(1. - j / r, 0., 1.)
    return wl, wl[::-1].copy()


def _checkBlend(d, dMirror, cfg):
    checkSameShape(d, dMirror, 'mirrorBlend')
    cfg.validate()


@precondition(_checkBlend)
def mirrorBlend(d, dMirror, cfg):
    '''
    Blend the direct estimate ``d`` with ``dMirror`` (the mirrored
    estimate of the mirrored image, already in the same coordinates):
    ``w_l * dMirror + w_r * d + (1 - w_l - w_r) * (d + dMirror) / 2``.
    '''
    a = d.values
    b = dMirror.values
    dt = a.dtype
    wl, wr = blendWeights(a.shape[3], cfg)
    wl = wl.astype(dt)
    wr = wr.astype(dt)
    avg = (a + b) / dt.type(2)
    mixed = avg + wl * (b - avg) + wr * (a - avg)
    out = np.where(wl >= 1, b, np.where(wr >= 1, a, mixed))
    return MDTensor(out.astype(dt))


def inferWithPp(params, image, spec, cfg):
    'Finest-scale disparity of ``image`` with mirror blending'
    d = inferMono(params, image, spec)[0]
    dMirror = mirror(inferMono(params, mirror(image), spec)[0])
    return mirrorBlend(d, dMirror, cfg)
