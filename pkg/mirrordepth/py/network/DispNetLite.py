'''
A small encoder-decoder disparity network with skip connections and
disparity heads at the four finest decoder levels, plus the Siamese
forward pass that shares one :class:`ParameterSet` between the left view
and the mirrored right view.

Layer ``k`` of the encoder is a stride-2 convolution with ELU. Decoder
level ``i`` (coarsest first) upsamples, convolves (``upconv<i>``),
concatenates the encoder skip and the upsampled coarser disparity, and
convolves again (``iconv<i>``). Levels 1..4 end in a head ``disp<i>``:
3x3 convolution, sigmoid, times ``d_max``.

**Usage**

>>> from mirrordepth.py.network.DispNetLite import NetworkSpec
>>> from mirrordepth.py.network.DispNetLite import countParameters
>>> countParameters(NetworkSpec())
658180

'''

import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from mirrordepth.py import Constants
from mirrordepth.py.Errors import ConfigError, ShapeError
from mirrordepth.py.modeling.MDTensor import elementwise, concatChannels
from mirrordepth.py.modeling.MDConv import conv2d
from mirrordepth.py.modeling.MDParameter import ParameterSet
from mirrordepth.py.imageops.ImageOps import mirror, upsample2xNearest
from mirrordepth.py.utils.util import checkSameShape

logger = logging.getLogger(__name__)

IMAGE_CHANNELS = 3

# left and right are lists of disparity maps, finest scale first
SiameseOutput = namedtuple('SiameseOutput', ['left', 'right'])


@dataclass
class NetworkSpec:
    encoder_channels: list = field(
        default_factory=lambda: [16, 32, 64, 96, 128])
    encoder_kernels: list = field(default_factory=lambda: [7, 5, 3, 3, 3])
    decoder_kernel: int = 3
    d_max: float = 0.3
    scales: int = 4

    @property
    def levels(self):
        return len(self.encoder_channels)

    @property
    def sizeDivisor(self):
        return 2 ** self.levels

    def validate(self):
        if self.scales != 4:
            raise ConfigError('scales is fixed at 4, got %r' % self.scales)
        if self.levels < self.scales + 1:
            raise ConfigError('encoder_channels needs at least %d levels, '
                              'got %d' % (self.scales + 1, self.levels))
        if len(self.encoder_kernels) != self.levels:
            raise ConfigError('encoder_kernels has %d entries, '
                              'encoder_channels has %d'
                              % (len(self.encoder_kernels), self.levels))
        if any(c < 1 for c in self.encoder_channels):
            raise ConfigError('encoder_channels must be positive')
        for k in list(self.encoder_kernels) + [self.decoder_kernel]:
            if k < 1 or k % 2 == 0:
                raise ConfigError('kernel sizes must be odd and positive, '
                                  'got %r' % k)
        if not 0 < self.d_max < 1:
            raise ConfigError('d_max must lie in (0, 1), got %r' % self.d_max)
        return self

    def checkImageSize(self, height, width):
        n = self.sizeDivisor
        if height % n or width % n:
            raise ConfigError('image size %dx%d is not divisible by %d '
                              '(2^%d encoder levels)'
                              % (height, width, n, self.levels))


def _decoderWidth(spec, i):
    return spec.encoder_channels[max(i - 2, 0)]


def layerShapes(spec):
    '''
    Return ``[(name, weight shape)]`` for every convolution in
    initialization order. Biases are ``[Cout, 1, 1, 1]``.
    '''
    ch = spec.encoder_channels
    ret = []
    cIn = IMAGE_CHANNELS
    for k in range(1, spec.levels + 1):
        kk = spec.encoder_kernels[k - 1]
        ret.append(('enc%d' % k, (ch[k - 1], cIn, kk, kk)))
        cIn = ch[k - 1]
    kd = spec.decoder_kernel
    for i in range(spec.levels, 0, -1):
        width = _decoderWidth(spec, i)
        ret.append(('upconv%d' % i, (width, cIn, kd, kd)))
        cCat = width
        if i >= 2:
            cCat += ch[i - 2]
        if i + 1 <= spec.scales:
            cCat += 1
        ret.append(('iconv%d' % i, (width, cCat, kd, kd)))
        if i <= spec.scales:
            ret.append(('disp%d' % i, (1, width, kd, kd)))
        cIn = width
    return ret


def countParameters(spec):
    'Number of scalar parameters of the network described by ``spec``'
    return sum(int(np.prod(shape)) + shape[0]
               for _, shape in layerShapes(spec))


def initParams(spec, seed, dtype=Constants.TRAIN_DATATYPE):
    '''
    He-normal weights (std ``sqrt(2 / fan_in)``) and zero biases, drawn
    from ``numpy.random.default_rng(seed)`` in double precision and then
    cast, so both precision builds start from the same values.
    '''
    spec.validate()
    rng = np.random.default_rng(seed)
    params = ParameterSet()
    for name, shape in layerShapes(spec):
        fanIn = shape[1] * shape[2] * shape[3]
        w = rng.standard_normal(shape) * np.sqrt(2.0 / fanIn)
        params.addParameter(name + '.weight', w.astype(dtype))
        params.addParameter(name + '.bias',
                            np.zeros((shape[0], 1, 1, 1), dtype=dtype))
    logger.debug('initialized %d parameters (%d values), seed %d',
                 len(params), params.nElements, seed)
    return params


def _conv(params, record, name, x, stride=1):
    w = params[name + '.weight']
    b = params[name + '.bias']
    if record is not None:
        wt, bt = record.parameter(w), record.parameter(b)
    else:
        wt, bt = w.tensor, b.tensor
    return conv2d(x, wt, bt, stride=stride, padding=w.shape[2] // 2)


def forwardSingle(params, image, spec, record=None):
    '''
    Run the network on ``image`` [N, 3, H, W]. Returns the disparity
    maps of scales 1..4, finest first, with values in ``[0, d_max]``.

    When ``record`` is given the parameters are read through it, so a
    backward pass yields their gradients.
    '''
    if image.shape[1] != IMAGE_CHANNELS:
        raise ShapeError('image dimension C must be %d, got %d'
                         % (IMAGE_CHANNELS, image.shape[1]))
    spec.checkImageSize(image.shape[2], image.shape[3])

    skips = []
    x = image
    for k in range(1, spec.levels + 1):
        x = elementwise('elu', _conv(params, record, 'enc%d' % k, x,
                                     stride=2))
        skips.append(x)

    disps = {}
    for i in range(spec.levels, 0, -1):
        x = upsample2xNearest(x)
        x = elementwise('elu', _conv(params, record, 'upconv%d' % i, x))
        parts = [x]
        if i >= 2:
            parts.append(skips[i - 2])
        if i + 1 <= spec.scales:
            parts.append(upsample2xNearest(disps[i + 1]))
        x = concatChannels(parts)
        x = elementwise('elu',
                        _conv(params, record, 'iconv%d' % i, x))
        if i <= spec.scales:
            head = _conv(params, record, 'disp%d' % i, x)
            disps[i] = elementwise('sigmoid', head) * spec.d_max
    return [disps[s] for s in range(1, spec.scales + 1)]


def forwardSiamese(params, I_l, I_r, spec, record=None):
    '''
    Left branch ``f(I_l)``; right branch ``m(f(m(I_r)))`` per scale, with
    ``m`` the horizontal mirror. Both branches read the same parameters.
    '''
    checkSameShape(I_l, I_r, 'forwardSiamese')
    left = forwardSingle(params, I_l, spec, record)
    right = [mirror(d) for d in
             forwardSingle(params, mirror(I_r), spec, record)]
    return SiameseOutput(left, right)


def inferMono(params, image, spec):
    'Test-time entry point: the single-image network, no right view needed'
    return forwardSingle(params, image, spec)
