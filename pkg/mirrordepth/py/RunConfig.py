'''
The run configuration: one flat JSON object whose keys are the fields of
the configuration dataclasses. Each key belongs to exactly one dataclass;
unknown keys are rejected, and the whole configuration is validated
before any command writes output.

Relative paths are taken relative to the directory of the config file.

**Usage**

>>> from mirrordepth.py.RunConfig import RunConfig
>>> cfg = RunConfig.fromDict({'steps': 10, 'learning_rate': 1e-3})
>>> cfg.train.adam.learning_rate
0.001
>>> RunConfig.fromDict({'stpes': 10})
Traceback (most recent call last):
...
mirrordepth.py.Errors.ConfigError: unknown configuration key(s): stpes

'''

import os
import json
import logging
from dataclasses import dataclass, fields, asdict

from mirrordepth.py.Errors import ConfigError
from mirrordepth.py.losses.PhotometricLoss import LossWeights
from mirrordepth.py.network.DispNetLite import NetworkSpec
from mirrordepth.py.training.AdamOptimizer import AdamConfig
from mirrordepth.py.training.Augmentation import AugmentConfig
from mirrordepth.py.training.Trainer import TrainConfig
from mirrordepth.py.stereo.SyntheticStereo import SceneConfig
from mirrordepth.py.postproc.MirrorBlend import BlendConfig

logger = logging.getLogger(__name__)


@dataclass
class PathsConfig:
    data_dir: str = 'data'
    checkpoint_dir: str = 'checkpoints'
    output_dir: str = 'output'

    def validate(self):
        for f in fields(self):
            if not getattr(self, f.name):
                raise ConfigError('%s must not be empty' % f.name)
        return self

    def resolve(self, base):
        for f in fields(self):
            path = os.path.expanduser(getattr(self, f.name))
            setattr(self, f.name, os.path.normpath(os.path.join(base, path)))


# dataclass -> attribute path inside RunConfig
SECTIONS = (
    (TrainConfig, ('train',)),
    (LossWeights, ('train', 'weights')),
    (NetworkSpec, ('train', 'spec')),
    (AdamConfig, ('train', 'adam')),
    (AugmentConfig, ('train', 'augment')),
    (SceneConfig, ('scene',)),
    (BlendConfig, ('blend',)),
    (PathsConfig, ('paths',)),
)
NESTED = set(('weights', 'spec', 'adam', 'augment'))


def _keyOwners():
    owners = {}
    for cls, path in SECTIONS:
        for f in fields(cls):
            if cls is TrainConfig and f.name in NESTED:
                continue
            if f.name in owners:
                raise ConfigError('configuration key %s is claimed by %s '
                                  'and %s' % (f.name, owners[f.name][0]
                                              .__name__, cls.__name__))
            owners[f.name] = (cls, path)
    return owners


KEY_OWNERS = _keyOwners()

LIST_KEYS = set(('encoder_channels', 'encoder_kernels', 'disparity_px',
                 'gamma_range', 'brightness_range', 'color_range'))


class RunConfig(object):
    '''
    Holds ``train`` (a TrainConfig with its nested loss weights, network
    spec, optimizer and augmentation settings), ``scene``, ``blend`` and
    ``paths``.
    '''

    def __init__(self, train=None, scene=None, blend=None, paths=None):
        self.train = train or TrainConfig()
        self.scene = scene or SceneConfig()
        self.blend = blend or BlendConfig()
        self.paths = paths or PathsConfig()

    def _section(self, path):
        obj = self
        for attr in path:
            obj = getattr(obj, attr)
        return obj

    def set(self, key, value):
        owner = KEY_OWNERS.get(key)
        if owner is None:
            raise ConfigError('unknown configuration key(s): %s' % key)
        cls, path = owner
        default = getattr(cls(), key)
        if key in LIST_KEYS:
            if not isinstance(value, (list, tuple)):
                raise ConfigError('%s must be a list, got %r' % (key, value))
            value = list(value)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError('%s must be true or false, got %r'
                                  % (key, value))
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError('%s must be an integer, got %r'
                                  % (key, value))
        elif isinstance(default, float):
            if isinstance(value, bool) or \
                    not isinstance(value, (int, float)):
                raise ConfigError('%s must be a number, got %r'
                                  % (key, value))
            value = float(value)
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError('%s must be a string, got %r'
                                  % (key, value))
        setattr(self._section(path), key, value)

    @classmethod
    def fromDict(cls, d, base=None):
        unknown = sorted(k for k in d if k not in KEY_OWNERS)
        if unknown:
            raise ConfigError('unknown configuration key(s): %s'
                              % ', '.join(unknown))
        cfg = cls()
        for key, value in d.items():
            cfg.set(key, value)
        if base is not None:
            cfg.paths.resolve(base)
        return cfg.validate()

    @classmethod
    def load(cls, filename):
        try:
            with open(filename) as f:
                d = json.load(f)
        except (IOError, OSError) as e:
            raise ConfigError('cannot read config %s: %s' % (filename, e))
        except ValueError as e:
            raise ConfigError('config %s is not valid JSON: %s'
                              % (filename, e))
        if not isinstance(d, dict):
            raise ConfigError('config %s must hold a JSON object' % filename)
        logger.debug('loaded config %s', filename)
        return cls.fromDict(d, base=os.path.dirname(os.path.abspath(filename)))

    def validate(self):
        self.train.validate()
        self.scene.validate()
        self.blend.validate()
        self.paths.validate()
        return self

    def toDict(self):
        'The flat JSON form, every key present'
        ret = {}
        for key, (cls, path) in KEY_OWNERS.items():
            ret[key] = getattr(self._section(path), key)
        return ret

    def save(self, filename):
        with open(filename, 'w') as f:
            json.dump(self.toDict(), f, indent=2, sort_keys=True)
            f.write('\n')

    def __repr__(self):
        return 'RunConfig(%s)' % asdict(self.train)
