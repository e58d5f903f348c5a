'''
A dense 4-D array type with a recorded computation for reverse-mode
differentiation.

An :class:`MDTensor` holds a ``[N, C, H, W]`` numpy array. A tensor that is
not attached to a :class:`ComputationRecord` is an immutable value. Once a
tensor is registered on a record (as a leaf, or as the output of an
operation with a recorded input) every operation on it appends a node to
that record. :meth:`ComputationRecord.backward` walks the nodes in
decreasing id order and accumulates gradients into each input, so a
tensor used twice receives the sum of both contributions.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.modeling.MDTensor import MDTensor, ComputationRecord
>>> from mirrordepth.py.modeling.MDTensor import reduce
>>> rec = ComputationRecord()
>>> x = rec.leaf(np.full((1, 1, 1, 1), 3.0))
>>> loss = reduce('sum', x * x)
>>> grads = rec.backward(loss)
>>> float(grads[x][0, 0, 0, 0])
6.0

'''

import logging
import numbers

import numpy as np
from scipy.special import expit

from mirrordepth.py import Constants
from mirrordepth.py.Errors import MirrorDepthError, ShapeError, NumericError
from mirrordepth.py.utils.util import checkSameShape, checkSpatialMatch

logger = logging.getLogger(__name__)

NUMBERS = (numbers.Real, np.floating, np.integer)


def isNumber(n):
    return isinstance(n, NUMBERS) and not isinstance(n, bool)


class MDTensor(object):
    '''
    A ``[N, C, H, W]`` real array, optionally attached to a
    :class:`ComputationRecord` through ``nodeId``.

    Values must be finite; a NaN or an infinity raises
    :class:`~mirrordepth.py.Errors.NumericError` at construction.
    '''

    # Make numpy defer to our reflected operators (np.float64(2) * t)
    __array_priority__ = 100

    def __init__(self, values, record=None, nodeId=None, name=''):
        values = np.asarray(values)
        if values.dtype not in (np.float32, np.float64):
            values = values.astype(Constants.VERIFY_DATATYPE)
        if values.ndim != 4:
            raise ShapeError('tensor must have 4 dimensions [N, C, H, W], '
                             'got shape %s' % (values.shape,))
        if not np.isfinite(values).all():
            raise NumericError('non-finite value in tensor %s' %
                               (name or '(%s)' % (values.shape,)))
        self.values = values
        self.record = record
        self.nodeId = nodeId
        self.name = name

    def __repr__(self):
        s = 'MDTensor(%s, %s' % (self.shape, self.dtype.name)
        if self.nodeId is not None:
            s += ', node %d' % self.nodeId
        return s + ')'

    @property
    def shape(self):
        return self.values.shape

    @property
    def dtype(self):
        return self.values.dtype

    @property
    def size(self):
        return self.values.size

    @property
    def isTracked(self):
        return self.record is not None

    def item(self):
        if self.size != 1:
            raise ShapeError('item() needs a single-element tensor, got %s'
                             % (self.shape,))
        return self.values.reshape(-1)[0]

    def detach(self):
        'Return the same values as an untracked tensor'
        return MDTensor(self.values, name=self.name)

    def __add__(self, other):
        if isNumber(other):
            return elementwise('shift', self, constant=other)
        return elementwise('add', self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isNumber(other):
            return elementwise('shift', self, constant=-other)
        return elementwise('sub', self, other)

    def __rsub__(self, other):
        if isNumber(other):
            return elementwise('shift', elementwise('neg', self),
                               constant=other)
        return NotImplemented

    def __mul__(self, other):
        if isNumber(other):
            return elementwise('scale', self, constant=other)
        return elementwise('mul', self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isNumber(other):
            return elementwise('scale', self, constant=1.0 / other)
        return elementwise('div', self, other)

    def __neg__(self):
        return elementwise('neg', self)

    def __abs__(self):
        return elementwise('abs', self)


class Node(object):
    __slots__ = ('kind', 'inputIds', 'shape', 'backward', 'name')

    def __init__(self, kind, inputIds, shape, backward, name=''):
        self.kind = kind
        self.inputIds = inputIds
        self.shape = shape
        self.backward = backward
        self.name = name

    def __repr__(self):
        return '%s%s <- %s' % (self.kind, self.shape, self.inputIds)


class ComputationRecord(object):
    '''
    Append-only list of operation nodes. Node ids are assigned in creation
    order, so the inputs of node ``k`` always have ids smaller than ``k``.

    A record is confined to one thread.
    '''

    def __init__(self):
        self.nodes = []
        self.parameterNodes = {}

    def __len__(self):
        return len(self.nodes)

    def addNode(self, kind, inputIds, values, backward, name=''):
        nodeId = len(self.nodes)
        self.nodes.append(Node(kind, inputIds, values.shape, backward, name))
        return MDTensor(values, record=self, nodeId=nodeId, name=name)

    def leaf(self, t, name=''):
        '''
        Register ``t`` (an MDTensor or an array) as a differentiable input
        and return the tracked tensor.
        '''
        values = t.values if isinstance(t, MDTensor) else t
        return self.addNode('leaf', (), values, None, name)

    def parameter(self, p):
        '''
        Return the tensor standing for :class:`Parameter` ``p`` on this
        record. Every call with the same parameter returns the same node,
        which is what makes weight sharing accumulate gradients.
        Non-trainable parameters come back untracked.
        '''
        if not p.trainable:
            return p.tensor
        t = self.parameterNodes.get(p.name)
        if t is None:
            t = self.leaf(p.tensor, p.name)
            self.parameterNodes[p.name] = t
        return t

    def backward(self, loss):
        '''
        Propagate gradients from the scalar ``loss`` back to every node it
        depends on. Return a :class:`GradientMap`.
        '''
        if loss.record is not self:
            raise MirrorDepthError('loss does not belong to this record')
        if loss.size != 1:
            raise ShapeError('loss must be a scalar, got shape %s'
                             % (loss.shape,))
        grads = {loss.nodeId: np.ones(loss.shape, loss.dtype)}
        for nodeId in range(loss.nodeId, -1, -1):
            g = grads.get(nodeId)
            if g is None:
                continue
            node = self.nodes[nodeId]
            if node.backward is None:
                continue
            inputGrads = node.backward(g)
            for inputId, ig in zip(node.inputIds, inputGrads):
                if inputId is None or ig is None:
                    continue
                assert inputId < nodeId, 'cycle in computation record'
                if ig.shape != self.nodes[inputId].shape:
                    raise ShapeError('gradient of %s has shape %s, expected %s'
                                     % (self.nodes[inputId], ig.shape,
                                        self.nodes[inputId].shape))
                if inputId in grads:
                    grads[inputId] = grads[inputId] + ig
                else:
                    grads[inputId] = ig
        logger.debug('backward over %d nodes, %d gradients',
                     loss.nodeId + 1, len(grads))
        return GradientMap(self, grads)


class GradientMap(object):
    '''
    Gradients produced by :meth:`ComputationRecord.backward`, indexed by
    tensor (or node id). Tensors the loss does not depend on get zeros.
    '''

    def __init__(self, record, grads):
        self.record = record
        self.grads = grads

    def __getitem__(self, key):
        if isinstance(key, MDTensor):
            if key.record is not self.record:
                raise MirrorDepthError('tensor is not on this record')
            key = key.nodeId
        g = self.grads.get(key)
        if g is None:
            node = self.record.nodes[key]
            return np.zeros(node.shape)
        return g

    def __contains__(self, key):
        if isinstance(key, MDTensor):
            key = key.nodeId
        return key in self.grads

    def parameters(self):
        'Return ``{parameter name: gradient}`` for parameters on the record'
        ret = {}
        for name, t in self.record.parameterNodes.items():
            g = self.grads.get(t.nodeId)
            if g is None:
                g = np.zeros(t.shape, t.dtype)
            ret[name] = g
        return ret


def apply(kind, inputs, values, backward, name=''):
    '''
    Wrap the result ``values`` of operation ``kind``. If any input is
    tracked the result is appended to that record with ``backward``, a
    function mapping the output gradient to one gradient (or None) per
    input.
    '''
    record = None
    for t in inputs:
        if isinstance(t, MDTensor) and t.record is not None:
            if record is not None and t.record is not record:
                raise MirrorDepthError('%s: inputs belong to different '
                                       'computation records' % kind)
            record = t.record
    if record is None:
        return MDTensor(values, name=name)
    inputIds = tuple(t.nodeId if isinstance(t, MDTensor) else None
                     for t in inputs)
    return record.addNode(kind, inputIds, values, backward, name)


def constant(values, dtype=None):
    'Return an untracked tensor holding ``values``'
    values = np.asarray(values, dtype=dtype)
    return MDTensor(values)


def _checkBinary(kind, a, b):
    if not isinstance(b, MDTensor):
        raise MirrorDepthError('%s needs two tensors' % kind)
    checkSameShape(a, b, kind)
    if a.dtype != b.dtype:
        raise MirrorDepthError('%s: precision mismatch (%s vs %s)'
                               % (kind, a.dtype.name, b.dtype.name))


UNARY = ('abs', 'sigmoid', 'elu', 'neg')
BINARY = ('add', 'sub', 'mul', 'div')
WITH_CONSTANT = ('scale', 'shift')


def elementwise(kind, a, b=None, constant=None):
    '''
    Pointwise operation ``kind`` on ``a`` (and ``b`` for binary kinds).

    Binary kinds ``add``, ``sub``, ``mul``, ``div`` require identical
    shapes. ``scale`` multiplies and ``shift`` adds the real ``constant``.
    ``elu`` uses alpha = 1.
    '''
    x = a.values
    if kind in BINARY:
        _checkBinary(kind, a, b)
        y = b.values
        if kind == 'add':
            out = x + y
            back = lambda g: (g, g)
        elif kind == 'sub':
            out = x - y
            back = lambda g: (g, -g)
        elif kind == 'mul':
            out = x * y
            back = lambda g: (g * y, g * x)
        else:
            out = x / y
            back = lambda g: (g / y, -g * out / y)
        return apply(kind, (a, b), out, back)

    if kind in WITH_CONSTANT:
        if constant is None or not isNumber(constant):
            raise MirrorDepthError('%s needs a real constant' % kind)
        c = x.dtype.type(constant)
        if kind == 'scale':
            out = x * c
            back = lambda g: (g * c,)
        else:
            out = x + c
            back = lambda g: (g,)
        return apply(kind, (a,), out, back)

    if kind == 'abs':
        out = np.abs(x)
        back = lambda g: (g * np.sign(x),)
    elif kind == 'neg':
        out = -x
        back = lambda g: (-g,)
    elif kind == 'sigmoid':
        out = expit(x)
        back = lambda g: (g * out * (1 - out),)
    elif kind == 'elu':
        out = np.where(x > 0, x, np.expm1(np.minimum(x, 0)))
        back = lambda g: (g * np.where(x > 0, x.dtype.type(1), out + 1),)
    else:
        raise MirrorDepthError('unknown elementwise kind "%s"' % kind)
    return apply(kind, (a,), out, back)


def reduce(kind, t):
    '''
    Reduce all elements of ``t`` to a ``[1, 1, 1, 1]`` tensor.
    ``kind`` is ``'sum'`` or ``'mean'``.
    '''
    if t.size == 0:
        raise ShapeError('cannot reduce an empty tensor')
    shape = t.shape
    if kind == 'sum':
        out = np.sum(t.values).reshape(1, 1, 1, 1)
        back = lambda g: (np.full(shape, g.reshape(-1)[0], dtype=g.dtype),)
    elif kind == 'mean':
        n = t.size
        out = (np.sum(t.values) / n).reshape(1, 1, 1, 1).astype(t.dtype)
        back = lambda g: (np.full(shape, g.reshape(-1)[0] / n,
                                  dtype=g.dtype),)
    else:
        raise MirrorDepthError('unknown reduction "%s"' % kind)
    return apply(kind, (t,), out, back)


def concatChannels(tensors):
    '''
    Concatenate tensors along the channel axis, first tensor first.
    '''
    tensors = list(tensors)
    if not tensors:
        raise ShapeError('nothing to concatenate')
    first = tensors[0]
    for t in tensors[1:]:
        checkSpatialMatch(first, t, 'concatChannels')
    if len(tensors) == 1:
        return first
    out = np.concatenate([t.values for t in tensors], axis=1)
    bounds = np.cumsum([0] + [t.shape[1] for t in tensors])

    def back(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]]
                     for i in range(len(tensors)))
    return apply('concat', tensors, out, back)


def spatialSlice(t, rows=None, cols=None):
    '''
    Crop ``t`` to ``rows = (r0, r1)`` and ``cols = (c0, c1)``; None keeps
    the full extent.
    '''
    H, W = t.shape[2], t.shape[3]
    r0, r1 = rows if rows is not None else (0, H)
    c0, c1 = cols if cols is not None else (0, W)
    if not (0 <= r0 < r1 <= H and 0 <= c0 < c1 <= W):
        raise ShapeError('slice rows %s cols %s outside %dx%d'
                         % ((r0, r1), (c0, c1), H, W))
    out = t.values[:, :, r0:r1, c0:c1]
    shape = t.shape

    def back(g):
        full = np.zeros(shape, dtype=g.dtype)
        full[:, :, r0:r1, c0:c1] = g
        return (full,)
    return apply('slice', (t,), out, back)
