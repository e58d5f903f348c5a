'''
Named trainable tensors and their checkpoint container.

A :class:`ParameterSet` keeps parameters in insertion order, which is also
the order in which they are initialized, updated and written to disk.

Checkpoint layout (all integers unsigned 32-bit little-endian)::

    b"SMCK1"  one byte value width (4 or 8)
    repeated: name length, name (utf-8), N, C, H, W, N*C*H*W values

Values are stored little-endian in the precision of the parameters, so a
write followed by a read is bit-exact in both builds.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.modeling.MDParameter import ParameterSet
>>> ps = ParameterSet()
>>> w = ps.addParameter('conv.weight', np.zeros((4, 3, 3, 3)))
>>> ps.hasParameter('conv.weight')
True
>>> ps.nElements
108

'''

import struct
import logging

import numpy as np

from mirrordepth.py import Constants
from mirrordepth.py.Errors import ConfigError, DataError
from mirrordepth.py.modeling.MDTensor import MDTensor

logger = logging.getLogger(__name__)

WIDTH_TO_DTYPE = {4: np.dtype('<f4'), 8: np.dtype('<f8')}


class Parameter(object):
    '''
    A named tensor. ``name`` is unique within its :class:`ParameterSet`
    and is the key used by checkpoints and optimizer state.
    '''

    def __init__(self, name, tensor, trainable=True):
        if not isinstance(tensor, MDTensor):
            tensor = MDTensor(tensor, name=name)
        self.name = name
        self.tensor = tensor
        self.trainable = trainable

    def __repr__(self):
        return 'Parameter(%s, %s%s)' % (self.name, self.tensor.shape,
                                        '' if self.trainable else ', frozen')

    @property
    def shape(self):
        return self.tensor.shape

    @property
    def values(self):
        return self.tensor.values

    def assign(self, values):
        'Replace the values (same shape), as the optimizer does'
        values = np.asarray(values, dtype=self.tensor.dtype)
        if values.shape != self.shape:
            raise DataError('parameter %s: new shape %s, expected %s'
                            % (self.name, values.shape, self.shape))
        self.tensor = MDTensor(values, name=self.name)


class ParameterSet(object):
    '''
    Ordered collection of :class:`Parameter` objects. Both Siamese
    branches read the same set, so there is exactly one copy of every
    weight.
    '''

    def __init__(self):
        self.parameters = {}
        self.names = []

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        for name in self.names:
            yield self.parameters[name]

    def __getitem__(self, name):
        return self.parameters[name]

    def __repr__(self):
        s = 'parameters : \n'
        for p in self:
            s += '%s : %s\n' % (p.name.rjust(15), str(p.shape))
        return s

    def hasParameter(self, name):
        return name in self.parameters

    def addParameter(self, name, values, trainable=True):
        if not name:
            raise ConfigError('You must specify a name for a parameter.')
        if self.hasParameter(name):
            raise ConfigError('Parameter %s already exists.' % name)
        p = Parameter(name, values, trainable)
        self.parameters[name] = p
        self.names.append(name)
        return p

    def getParameterByName(self, name):
        return self.parameters.get(name)

    @property
    def nElements(self):
        return sum(p.tensor.size for p in self)

    @property
    def dtype(self):
        if not self.names:
            return np.dtype(Constants.TRAIN_DATATYPE)
        return self.parameters[self.names[0]].tensor.dtype

    def trainable(self):
        return [p for p in self if p.trainable]

    def copy(self):
        ret = ParameterSet()
        for p in self:
            ret.addParameter(p.name, p.values.copy(), p.trainable)
        return ret

    def astype(self, dtype):
        'Return a copy with every parameter cast to ``dtype``'
        ret = ParameterSet()
        for p in self:
            ret.addParameter(p.name, p.values.astype(dtype), p.trainable)
        return ret

    def asDict(self):
        return dict((p.name, p.values) for p in self)


def writeArrays(filename, arrays):
    '''
    Write an ordered list of ``(name, 4-D array)`` pairs as a checkpoint
    container. All arrays must share one precision.
    '''
    arrays = list(arrays)
    widths = set(np.asarray(a).dtype.itemsize for _, a in arrays)
    if len(widths) > 1:
        raise DataError('checkpoint arrays mix precisions: %s' % widths)
    width = widths.pop() if widths else 4
    if width not in WIDTH_TO_DTYPE:
        raise DataError('unsupported value width %d' % width)
    dt = WIDTH_TO_DTYPE[width]
    with open(filename, 'wb') as f:
        f.write(Constants.CHECKPOINT_MAGIC)
        f.write(struct.pack('<B', width))
        for name, a in arrays:
            a = np.asarray(a)
            if a.ndim != 4:
                raise DataError('checkpoint entry %s is not 4-D' % name)
            nameBytes = name.encode('utf-8')
            f.write(struct.pack('<I', len(nameBytes)))
            f.write(nameBytes)
            f.write(struct.pack('<4I', *a.shape))
            f.write(np.ascontiguousarray(a, dtype=dt).tobytes())
    logger.debug('wrote %d arrays to %s', len(arrays), filename)


def readArrays(filename):
    'Return the ``(name, array)`` pairs of a checkpoint container, in order'
    try:
        with open(filename, 'rb') as f:
            data = f.read()
    except (IOError, OSError) as e:
        raise DataError('cannot read checkpoint %s: %s' % (filename, e))
    magic = Constants.CHECKPOINT_MAGIC
    if data[:len(magic)] != magic:
        raise DataError('%s: bad magic, not a checkpoint' % filename)
    pos = len(magic)
    if len(data) < pos + 1:
        raise DataError('%s: truncated header' % filename)
    width = data[pos]
    pos += 1
    if width not in WIDTH_TO_DTYPE:
        raise DataError('%s: unsupported value width %d' % (filename, width))
    dt = WIDTH_TO_DTYPE[width]
    ret = []
    while pos < len(data):
        if pos + 4 > len(data):
            raise DataError('%s: truncated record header' % filename)
        nameLen, = struct.unpack_from('<I', data, pos)
        pos += 4
        if pos + nameLen + 16 > len(data):
            raise DataError('%s: truncated record header' % filename)
        name = data[pos:pos + nameLen].decode('utf-8')
        pos += nameLen
        shape = struct.unpack_from('<4I', data, pos)
        pos += 16
        n = int(np.prod(shape))
        nBytes = n * width
        if pos + nBytes > len(data):
            raise DataError('%s: truncated values for %s' % (filename, name))
        a = np.frombuffer(data, dtype=dt, count=n, offset=pos)
        ret.append((name, a.reshape(shape).astype(dt.newbyteorder('='))))
        pos += nBytes
    return ret


def saveCheckpoint(filename, params):
    writeArrays(filename, [(p.name, p.values) for p in params])


def loadCheckpoint(filename, reference=None):
    '''
    Read a checkpoint into a new :class:`ParameterSet`. When
    ``reference`` is given, names and shapes must match it exactly.
    '''
    ps = ParameterSet()
    for name, a in readArrays(filename):
        if ps.hasParameter(name):
            raise DataError('%s: duplicate parameter %s' % (filename, name))
        ps.addParameter(name, a)
    if reference is not None:
        if ps.names != reference.names:
            raise DataError('%s: parameter names do not match the network'
                            % filename)
        for p in reference:
            if ps[p.name].shape != p.shape:
                raise DataError('%s: parameter %s has shape %s, expected %s'
                                % (filename, p.name, ps[p.name].shape,
                                   p.shape))
            ps[p.name].trainable = p.trainable
    return ps
