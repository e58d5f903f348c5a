'''
Photometric augmentation of stereo pairs: one gamma, one brightness
factor and one colour factor per channel are drawn per pair and applied
identically to both views. Geometry (and so the disparity) is untouched.
'''

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from mirrordepth.py.Errors import ConfigError
from mirrordepth.py.modeling.MDTensor import MDTensor

logger = logging.getLogger(__name__)


@dataclass
class AugmentConfig:
    augment_enabled: bool = True
    gamma_range: list = field(default_factory=lambda: [0.8, 1.2])
    brightness_range: list = field(default_factory=lambda: [0.5, 2.0])
    color_range: list = field(default_factory=lambda: [0.8, 1.2])

    def validate(self):
        for name in ('gamma_range', 'brightness_range', 'color_range'):
            r = getattr(self, name)
            if len(r) != 2 or not 0 < r[0] <= r[1]:
                raise ConfigError('%s must be a positive [low, high] pair, '
                                  'got %r' % (name, r))
        return self


def photometric(x, gamma, brightness, color):
    'clamp(x^gamma * brightness * color[c], 0, 1) for [N, 3, H, W] ``x``'
    dt = x.dtype
    color = np.asarray(color, dtype=dt).reshape(1, -1, 1, 1)
    out = np.power(x, dt.type(gamma)) * dt.type(brightness) * color
    return np.clip(out, 0, 1).astype(dt)


def augment(sample, rng, cfg):
    '''
    Return ``sample`` with both images transformed by one shared random
    draw from ``rng``.
    '''
    if not cfg.augment_enabled:
        return sample
    gamma = rng.uniform(*cfg.gamma_range)
    brightness = rng.uniform(*cfg.brightness_range)
    color = rng.uniform(cfg.color_range[0], cfg.color_range[1], size=3)
    logger.debug('augment: gamma %.3f, brightness %.3f', gamma, brightness)
    return replace(
        sample,
        left=MDTensor(photometric(sample.left.values, gamma, brightness,
                                  color)),
        right=MDTensor(photometric(sample.right.values, gamma, brightness,
                                   color)))
