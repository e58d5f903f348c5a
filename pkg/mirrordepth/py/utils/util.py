'''
Small helpers shared by the modeling, image and loss modules.

The ``precondition``/``postcondition`` decorators attach checks to an
operation. A precondition receives the same arguments as the operation;
a postcondition receives the result followed by those arguments. Checks
raise one of the :mod:`mirrordepth.py.Errors` exceptions.

**Usage**

>>> from mirrordepth.py.utils.util import precondition
>>> def positive(x):
...     if x <= 0:
...         raise ValueError('x must be positive')
>>> @precondition(positive)
... def half(x):
...     return x / 2.
>>> half(3)
1.5
'''

import functools
from itertools import zip_longest

from mirrordepth.py.Errors import ShapeError

__all__ = ['precondition', 'postcondition', 'conditions',
           'checkSameShape', 'checkSpatialMatch']

DEFAULT_ON = True


def precondition(precondition, use_conditions=DEFAULT_ON):
    return conditions(precondition, None, use_conditions)


def postcondition(postcondition, use_conditions=DEFAULT_ON):
    return conditions(None, postcondition, use_conditions)


class conditions(object):
    __slots__ = ('__precondition', '__postcondition')

    def __init__(self, pre, post, use_conditions=DEFAULT_ON):
        if not use_conditions:
            pre, post = None, None

        self.__precondition = pre
        self.__postcondition = post

    def __call__(self, function):
        # combine recursive wrappers (@precondition + @postcondition == @conditions)
        pres = [self.__precondition]
        posts = [self.__postcondition]

        # unwrap function, collect distinct pre-/post conditions
        while type(function) is FunctionWrapper:
            pres.append(function._pre)
            posts.append(function._post)
            function = function._func

        pres = [p for p in pres if p is not None]
        posts = [p for p in posts if p is not None]

        for pre, post in zip_longest(pres, posts):
            function = FunctionWrapper(pre, post, function)

        return function


class FunctionWrapper(object):
    def __init__(self, precondition, postcondition, function):
        self._pre = precondition
        self._post = postcondition
        self._func = function
        functools.update_wrapper(self, function)

    def __call__(self, *args, **kwargs):
        precondition = self._pre
        postcondition = self._post

        if precondition:
            precondition(*args, **kwargs)
        result = self._func(*args, **kwargs)
        if postcondition:
            postcondition(result, *args, **kwargs)
        return result


DIM_NAMES = ('N', 'C', 'H', 'W')


def checkSameShape(a, b, what=''):
    '''
    Raise a ShapeError naming the first dimension where the shapes of
    ``a`` and ``b`` disagree.
    '''
    sa, sb = tuple(a.shape), tuple(b.shape)
    if sa == sb:
        return
    if len(sa) != len(sb):
        raise ShapeError('%s: rank %d vs %d' % (what, len(sa), len(sb)))
    for i in range(len(sa)):
        if sa[i] != sb[i]:
            name = DIM_NAMES[i] if len(sa) == 4 else str(i)
            raise ShapeError('%s: dimension %s differs (%d vs %d)'
                             % (what, name, sa[i], sb[i]))


def checkSpatialMatch(a, b, what=''):
    'Like :func:`checkSameShape` but ignores the channel dimension'
    for i in (0, 2, 3):
        if a.shape[i] != b.shape[i]:
            raise ShapeError('%s: dimension %s differs (%d vs %d)'
                             % (what, DIM_NAMES[i], a.shape[i], b.shape[i]))
