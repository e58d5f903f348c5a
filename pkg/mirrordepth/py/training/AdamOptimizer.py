'''
Bias-corrected Adam with a constant learning rate.

The state (first and second moments per parameter and the step counter)
is saved in the checkpoint container under ``m/<name>``, ``v/<name>`` and
``t``, so training can be resumed bit-exactly.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.modeling.MDParameter import ParameterSet
>>> from mirrordepth.py.training.AdamOptimizer import (AdamConfig,
...                                                    AdamState, adamStep)
>>> ps = ParameterSet()
>>> p = ps.addParameter('w', np.zeros((1, 1, 1, 1)))
>>> state = AdamState.fresh(ps)
>>> adamStep(ps, {'w': np.full((1, 1, 1, 1), 0.1)}, state, AdamConfig())
>>> state.t
1
>>> float(ps['w'].values[0, 0, 0, 0]) < 0
True

'''

import logging
from dataclasses import dataclass

import numpy as np

from mirrordepth.py.Errors import ConfigError, DataError, MirrorDepthError
from mirrordepth.py.modeling.MDParameter import writeArrays, readArrays

logger = logging.getLogger(__name__)


@dataclass
class AdamConfig:
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    learning_rate: float = 1e-4

    def validate(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError('beta1 and beta2 must lie in [0, 1)')
        if not self.epsilon > 0:
            raise ConfigError('epsilon must be > 0')
        if not self.learning_rate > 0:
            raise ConfigError('learning_rate must be > 0')
        return self


class AdamState(object):
    '''
    Moments ``m`` and ``v`` keyed by parameter name, and the number of
    steps taken ``t``.
    '''

    def __init__(self, m, v, t=0):
        self.m = m
        self.v = v
        self.t = t

    @classmethod
    def fresh(cls, params):
        m = dict((p.name, np.zeros(p.shape, p.values.dtype))
                 for p in params.trainable())
        v = dict((p.name, np.zeros(p.shape, p.values.dtype))
                 for p in params.trainable())
        return cls(m, v, 0)

    def checkShapes(self, params):
        for p in params.trainable():
            for moments in (self.m, self.v):
                if p.name not in moments:
                    raise DataError('optimizer state has no entry for %s'
                                    % p.name)
                if moments[p.name].shape != p.shape:
                    raise DataError('optimizer state for %s has shape %s, '
                                    'expected %s' % (p.name,
                                                     moments[p.name].shape,
                                                     p.shape))

    def save(self, filename):
        arrays = []
        for name in self.m:
            arrays.append(('m/' + name, self.m[name]))
            arrays.append(('v/' + name, self.v[name]))
        dtype = arrays[0][1].dtype if arrays else np.float32
        arrays.append(('t', np.full((1, 1, 1, 1), self.t, dtype=dtype)))
        writeArrays(filename, arrays)

    @classmethod
    def load(cls, filename):
        m, v, t = {}, {}, None
        for name, a in readArrays(filename):
            if name == 't':
                t = int(a.reshape(-1)[0])
            elif name.startswith('m/'):
                m[name[2:]] = a
            elif name.startswith('v/'):
                v[name[2:]] = a
            else:
                raise DataError('%s: unexpected entry %s' % (filename, name))
        if t is None:
            raise DataError('%s: missing step counter' % filename)
        return cls(m, v, t)


def adamStep(params, grads, state, cfg):
    '''
    One Adam update of every trainable parameter in ``params`` with
    ``grads`` (``{name: array}``). ``state`` is updated in place.
    '''
    missing = [p.name for p in params.trainable() if p.name not in grads]
    if missing:
        raise MirrorDepthError('no gradient for trainable parameter(s) %s'
                               % ', '.join(missing))
    state.t += 1
    t = state.t
    for p in params.trainable():
        dt = p.values.dtype.type
        g = np.asarray(grads[p.name], dtype=p.values.dtype)
        b1, b2 = dt(cfg.beta1), dt(cfg.beta2)
        m = b1 * state.m[p.name] + (1 - b1) * g
        v = b2 * state.v[p.name] + (1 - b2) * g * g
        mHat = m / (1 - b1 ** t)
        vHat = v / (1 - b2 ** t)
        step = dt(cfg.learning_rate) * mHat / (np.sqrt(vHat) +
                                              dt(cfg.epsilon))
        state.m[p.name] = m
        state.v[p.name] = v
        p.assign(p.values - step)
