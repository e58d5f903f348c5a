import unittest
import numpy as np
from numpy.testing import assert_array_equal, assert_allclose

from mirrordepth.py.Errors import NumericError, ShapeError, MirrorDepthError
from mirrordepth.py.modeling.MDTensor import (MDTensor, ComputationRecord,
                                              elementwise, reduce,
                                              concatChannels, spatialSlice)
from mirrordepth.tests.gradcheck import (checkGradients, instanceGenerators,
                                         randomShape)


class TestMDTensor(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(3)
        self.a = rng.uniform(-1, 1, (2, 3, 4, 5))
        self.b = rng.uniform(0.5, 1.5, (2, 3, 4, 5))

    def test_rank(self):
        self.assertRaises(ShapeError, MDTensor, np.zeros((3, 3)))

    def test_nonFinite(self):
        x = np.zeros((1, 1, 2, 2))
        x[0, 0, 1, 1] = np.nan
        self.assertRaises(NumericError, MDTensor, x)
        x[0, 0, 1, 1] = np.inf
        self.assertRaises(NumericError, MDTensor, x)

    def test_integerInputBecomesDouble(self):
        t = MDTensor(np.ones((1, 1, 1, 1), dtype=int))
        self.assertEqual(t.dtype, np.float64)

    def test_untrackedStaysUntracked(self):
        t = MDTensor(self.a) + MDTensor(self.b)
        self.assertFalse(t.isTracked)

    def test_forwardValues(self):
        a, b = MDTensor(self.a), MDTensor(self.b)
        assert_array_equal(elementwise('add', a, b).values, self.a + self.b)
        assert_array_equal(elementwise('sub', a, b).values, self.a - self.b)
        assert_array_equal(elementwise('mul', a, b).values, self.a * self.b)
        assert_array_equal(elementwise('abs', a).values, np.abs(self.a))
        assert_array_equal(elementwise('scale', a, constant=2.5).values,
                           self.a * 2.5)
        assert_allclose(elementwise('sigmoid', a).values,
                        1 / (1 + np.exp(-self.a)))
        elu = elementwise('elu', a).values
        assert_allclose(elu, np.where(self.a > 0, self.a,
                                      np.exp(self.a) - 1))

    def test_shapeMismatchNamesDimension(self):
        a = MDTensor(np.zeros((1, 2, 3, 4)))
        b = MDTensor(np.zeros((1, 2, 3, 5)))
        with self.assertRaises(ShapeError) as cm:
            elementwise('add', a, b)
        self.assertIn('W', str(cm.exception))

    def test_precisionMismatch(self):
        a = MDTensor(np.zeros((1, 1, 2, 2), dtype=np.float32))
        b = MDTensor(np.zeros((1, 1, 2, 2)))
        self.assertRaises(MirrorDepthError, elementwise, 'add', a, b)

    def test_unknownKind(self):
        a = MDTensor(self.a)
        self.assertRaises(MirrorDepthError, elementwise, 'tanh', a)
        self.assertRaises(MirrorDepthError, reduce, 'max', a)

    def test_gradBinary(self):
        for rng in instanceGenerators(10):
            shape = randomShape(rng)
            a = rng.uniform(-1, 1, shape)
            b = rng.uniform(0.5, 1.5, shape)
            for kind in ('add', 'sub', 'mul', 'div'):
                checkGradients(self, lambda x, y: elementwise(kind, x, y),
                               [a, b])

    def test_gradUnary(self):
        for rng in instanceGenerators(11):
            a = rng.uniform(-1, 1, randomShape(rng))
            for kind in ('abs', 'sigmoid', 'elu', 'neg'):
                checkGradients(self, lambda x: elementwise(kind, x), [a])
            checkGradients(self,
                           lambda x: elementwise('scale', x, constant=-3.),
                           [a])
            checkGradients(self,
                           lambda x: elementwise('shift', x, constant=2.),
                           [a])

    def test_gradReduce(self):
        for rng in instanceGenerators(12):
            a = rng.uniform(-1, 1, randomShape(rng))
            checkGradients(self, lambda x: reduce('sum', x), [a])
            checkGradients(self, lambda x: reduce('mean', x), [a])
        r = reduce('mean', MDTensor(self.a))
        self.assertEqual(r.shape, (1, 1, 1, 1))
        self.assertAlmostEqual(r.item(), self.a.mean(), places=14)

    def test_concat(self):
        c = np.ones((2, 1, 4, 5))
        out = concatChannels([MDTensor(self.a), MDTensor(c)])
        self.assertEqual(out.shape, (2, 4, 4, 5))
        assert_array_equal(out.values[:, :3], self.a)
        for rng in instanceGenerators(13):
            N, C, H, W = randomShape(rng)
            x = rng.uniform(-1, 1, (N, C, H, W))
            y = rng.uniform(-1, 1, (N, int(rng.integers(1, 4)), H, W))
            checkGradients(self, lambda u, v: concatChannels([u, v]), [x, y])

    def test_concatSpatialMismatch(self):
        a = MDTensor(np.zeros((1, 1, 4, 4)))
        b = MDTensor(np.zeros((1, 1, 4, 2)))
        self.assertRaises(ShapeError, concatChannels, [a, b])

    def test_spatialSlice(self):
        s = spatialSlice(MDTensor(self.a), rows=(1, 3), cols=(2, 5))
        assert_array_equal(s.values, self.a[:, :, 1:3, 2:5])
        for rng in instanceGenerators(14):
            a = rng.uniform(-1, 1, randomShape(rng))
            checkGradients(self, lambda x: spatialSlice(x, rows=(1, 2),
                                                        cols=(1, 4)), [a])
        self.assertRaises(ShapeError, spatialSlice, MDTensor(self.a),
                          (0, 9), None)

    def test_accumulation(self):
        rec = ComputationRecord()
        x = rec.leaf(np.full((1, 1, 1, 1), 2.0))
        # x used three times: d(x*x + x)/dx = 2x + 1
        loss = reduce('sum', x * x + x)
        g = rec.backward(loss)
        self.assertEqual(g[x][0, 0, 0, 0], 5.0)

    def test_unusedInputGetsZeros(self):
        rec = ComputationRecord()
        x = rec.leaf(np.ones((1, 1, 2, 2)))
        y = rec.leaf(np.ones((1, 1, 2, 2)))
        g = rec.backward(reduce('sum', x))
        self.assertFalse(y in g)
        assert_array_equal(g[y], np.zeros((1, 1, 2, 2)))

    def test_backwardNeedsScalar(self):
        rec = ComputationRecord()
        x = rec.leaf(np.ones((1, 1, 2, 2)))
        self.assertRaises(ShapeError, rec.backward, x * 2.)

    def test_nodeOrder(self):
        rec = ComputationRecord()
        x = rec.leaf(self.a)
        y = elementwise('elu', x) * 3. + x
        reduce('sum', y)
        for k, node in enumerate(rec.nodes):
            for i in node.inputIds:
                self.assertLess(i, k)

    def test_differentRecords(self):
        x = ComputationRecord().leaf(self.a)
        y = ComputationRecord().leaf(self.b)
        self.assertRaises(MirrorDepthError, elementwise, 'add', x, y)

    def test_float32Gradient(self):
        rec = ComputationRecord()
        x = rec.leaf(self.a.astype(np.float32))
        g = rec.backward(reduce('mean', elementwise('sigmoid', x)))
        self.assertEqual(g[x].dtype, np.float32)


if __name__ == '__main__':
    unittest.main()
