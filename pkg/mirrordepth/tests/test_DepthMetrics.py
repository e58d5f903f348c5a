import math
import unittest
import numpy as np
from numpy.testing import assert_array_equal

from mirrordepth.py.Errors import ConfigError, DataError, NumericError
from mirrordepth.py.metrics.DepthMetrics import (CameraCalib, DepthMetrics,
                                                 SUITE_FIELDS,
                                                 disparityToDepth,
                                                 eigenMetrics, silogSuite,
                                                 make3dC1, eigenCropMask,
                                                 centerCropMask, evaluate,
                                                 aggregateMetrics)


def loopEigen(pred, gt):
    n = len(gt)
    absRel = sqRel = se = sle = 0.
    hits = [0, 0, 0]
    for p, g in zip(pred, gt):
        absRel += abs(g - p) / g
        sqRel += (g - p) ** 2 / g
        se += (g - p) ** 2
        sle += (math.log(g) - math.log(p)) ** 2
        r = max(p / g, g / p)
        for k in range(3):
            if r < 1.25 ** (k + 1):
                hits[k] += 1
    return [absRel / n, sqRel / n, math.sqrt(se / n), math.sqrt(sle / n),
            hits[0] / n, hits[1] / n, hits[2] / n]


def loopSilog(pred, gt):
    n = len(gt)
    e = [math.log(p) - math.log(g) for p, g in zip(pred, gt)]
    mean = sum(e) / n
    silog = (sum(x * x for x in e) / n - mean * mean) * 100
    sqRel = sum((g - p) ** 2 / g for p, g in zip(pred, gt)) / n * 100
    absRel = sum(abs(g - p) / g for p, g in zip(pred, gt)) / n * 100
    irmse = math.sqrt(sum((1. / g - 1. / p) ** 2
                          for p, g in zip(pred, gt)) / n) * 1000
    return [silog, sqRel, absRel, irmse]


def loopMake3d(pred, gt):
    pairs = [(p, g) for p, g in zip(pred, gt) if g <= 70]
    n = len(pairs)
    return [sum((g - p) ** 2 / g for p, g in pairs) / n,
            sum(abs(g - p) / g for p, g in pairs) / n,
            math.sqrt(sum((g - p) ** 2 for p, g in pairs) / n),
            sum(abs(math.log10(g) - math.log10(p)) for p, g in pairs) / n]


class TestDisparityToDepth(unittest.TestCase):

    def test_unit(self):
        depth = disparityToDepth(np.array([0.5]), CameraCalib(1., 1.), 1)
        self.assertAlmostEqual(depth[0], 2.)

    def test_kitti(self):
        depth = disparityToDepth(np.array([36. / 1242]), CameraCalib(), 1242)
        self.assertAlmostEqual(depth[0], 10.815, places=12)

    def test_inverse(self):
        d = np.array([0.01, 0.02])
        depth = disparityToDepth(d, CameraCalib(), 100)
        self.assertAlmostEqual(depth[0], 2 * depth[1])

    def test_masked(self):
        d = np.array([0., 0.1])
        mask = np.array([False, True])
        depth = disparityToDepth(d, CameraCalib(), 10, mask)
        self.assertEqual(depth[0], 0.)
        self.assertRaises(DataError, disparityToDepth, d, CameraCalib(), 10)

    def test_calib(self):
        self.assertRaises(ConfigError, CameraCalib(0., 1.).validate)
        self.assertRaises(ConfigError, CameraCalib(1., -1.).validate)


class TestEigen(unittest.TestCase):

    def test_perfect(self):
        gt = np.array([1., 5., 20.])
        m = eigenMetrics(gt, gt)
        self.assertEqual([m.abs_rel, m.sq_rel, m.rmse, m.rmse_log],
                         [0., 0., 0., 0.])
        self.assertEqual([m.delta1, m.delta2, m.delta3], [1., 1., 1.])

    def test_doubled(self):
        gt = np.array([1., 2., 3.])
        m = eigenMetrics(2 * gt, gt)
        self.assertAlmostEqual(m.abs_rel, 1.)
        self.assertEqual(m.delta1, 0.)
        self.assertEqual(m.delta3, 0.)

    def test_logRatio(self):
        gt = np.array([1., 2., 3.])
        m = eigenMetrics(np.e * gt, gt)
        self.assertAlmostEqual(m.rmse_log, 1., places=12)

    def test_cap(self):
        gt = np.array([10., 60.])
        pred = np.array([10., 80.])
        self.assertEqual(eigenMetrics(pred, gt, cap=50.).rmse, 0.)
        self.assertGreater(eigenMetrics(pred, gt).rmse, 0.)

    def test_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            gt = rng.uniform(0.5, 80., 5)
            pred = gt * rng.uniform(0.5, 2., 5)
            m = eigenMetrics(pred, gt)
            got = [m.values()[k] for k in SUITE_FIELDS['eigen']]
            for a, b in zip(got, loopEigen(pred, gt)):
                self.assertAlmostEqual(a, b, delta=1e-12)

    def test_deltaProperties(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            gt = rng.uniform(1., 50., 20)
            pred = gt * np.exp(rng.normal(0, 0.4, 20))
            m = eigenMetrics(pred, gt)
            self.assertTrue(0 <= m.delta1 <= m.delta2 <= m.delta3 <= 1)
            s = eigenMetrics(gt, pred)
            self.assertEqual((m.delta1, m.delta2, m.delta3),
                             (s.delta1, s.delta2, s.delta3))

    def test_nonFinite(self):
        self.assertRaises(NumericError, eigenMetrics, np.array([np.inf, 1.]),
                          np.ones(2))

    def test_emptyMask(self):
        gt = np.ones(4)
        self.assertRaises(DataError, eigenMetrics, gt, gt,
                          np.zeros(4, dtype=bool))

    def test_shapeMismatch(self):
        self.assertRaises(DataError, eigenMetrics, np.ones(3), np.ones(4))


class TestSilog(unittest.TestCase):

    def test_perfect(self):
        gt = np.array([1., 5., 20.])
        self.assertEqual(list(silogSuite(gt, gt).values().values()),
                         [0., 0., 0., 0.])

    def test_twoPixels(self):
        gt = np.array([1., 1.])
        pred = np.array([1., np.e])
        self.assertAlmostEqual(silogSuite(pred, gt).silog, 25., places=10)

    def test_scaleInvariance(self):
        rng = np.random.default_rng(2)
        gt = rng.uniform(1., 50., 30)
        pred = gt * rng.uniform(0.7, 1.3, 30)
        base = silogSuite(pred, gt).silog
        for k in (0.1, 3., 17.):
            self.assertAlmostEqual(silogSuite(k * pred, gt).silog, base,
                                   delta=1e-10)

    def test_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            gt = rng.uniform(0.5, 80., 5)
            pred = gt * rng.uniform(0.5, 2., 5)
            m = silogSuite(pred, gt)
            got = [m.values()[k] for k in SUITE_FIELDS['silog']]
            for a, b in zip(got, loopSilog(pred, gt)):
                self.assertAlmostEqual(a, b, delta=1e-12 * max(1., abs(b)))

    def test_nonPositive(self):
        self.assertRaises(DataError, silogSuite, np.array([0., 1.]),
                          np.ones(2))


class TestMake3d(unittest.TestCase):

    def test_perfect(self):
        gt = np.array([1., 5., 20.])
        self.assertEqual(list(make3dC1(gt, gt).values().values()),
                         [0., 0., 0., 0.])

    def test_tenth(self):
        gt = np.array([1., 5., 20.])
        self.assertAlmostEqual(make3dC1(gt / 10, gt).make3d_log10, 1.,
                               places=12)

    def test_cutoff(self):
        gt = np.array([10., 90.])
        pred = np.array([10., 1.])
        m = make3dC1(pred, gt)
        self.assertEqual(m.make3d_rmse, 0.)
        self.assertRaises(DataError, make3dC1, pred, np.array([71., 90.]))

    def test_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            gt = rng.uniform(0.5, 60., 5)
            pred = gt * rng.uniform(0.5, 2., 5)
            m = make3dC1(pred, gt)
            got = [m.values()[k] for k in SUITE_FIELDS['make3d']]
            for a, b in zip(got, loopMake3d(pred, gt)):
                self.assertAlmostEqual(a, b, delta=1e-12)


class TestCrops(unittest.TestCase):

    def test_kittiCrop(self):
        mask = eigenCropMask(375, 1242)
        rows = np.nonzero(mask.any(axis=1))[0]
        cols = np.nonzero(mask.any(axis=0))[0]
        self.assertEqual((rows[0], rows[-1] + 1), (153, 371))
        self.assertEqual((cols[0], cols[-1] + 1), (44, 1197))
        self.assertEqual(mask.sum(), (371 - 153) * (1197 - 44))

    def test_cropOfCrop(self):
        mask = eigenCropMask(100, 200)
        assert_array_equal(mask & eigenCropMask(100, 200), mask)

    def test_centerCrop(self):
        mask = centerCropMask(10, 40, 2.)
        self.assertEqual(mask.sum(), 10 * 20)
        assert_array_equal(np.nonzero(mask.any(axis=0))[0], np.arange(10, 30))
        tall = centerCropMask(40, 10, 0.5)
        assert_array_equal(np.nonzero(tall.any(axis=1))[0], np.arange(10, 30))
        self.assertRaises(ConfigError, centerCropMask, 10, 10, 0.)


class TestEvaluate(unittest.TestCase):

    def test_dispatch(self):
        gt = np.array([1., 2., 4.])
        for suite, names in SUITE_FIELDS.items():
            m = evaluate(gt, gt, suite)
            self.assertEqual(tuple(m.values().keys()), names)
        self.assertRaises(ConfigError, evaluate, gt, gt, 'kitti')

    def test_aggregate(self):
        rows = [DepthMetrics(abs_rel=0.1, rmse=1.),
                DepthMetrics(abs_rel=0.3, rmse=3.)]
        agg = aggregateMetrics(rows)
        self.assertAlmostEqual(agg.abs_rel, 0.2)
        self.assertAlmostEqual(agg.rmse, 2.)
        self.assertIsNone(agg.silog)
        self.assertRaises(DataError, aggregateMetrics, [])


if __name__ == '__main__':
    unittest.main()
