import unittest
import numpy as np
from numpy.testing import assert_array_equal, assert_allclose

from mirrordepth.py.Errors import ConfigError
from mirrordepth.py.modeling.MDTensor import MDTensor, spatialSlice
from mirrordepth.py.imageops.ImageOps import warpHorizontal, WarpDirection
from mirrordepth.py.losses.PhotometricLoss import LossWeights, imageLoss
from mirrordepth.py.stereo.SyntheticStereo import (SceneConfig, generateScene,
                                                   exactShift, textureSigma,
                                                   TWO_LAYER)


def visibleLoss(sample, dPx, radius):
    'Image loss of a constant disparity on columns with a correspondence'
    W = sample.left.shape[3]
    d = MDTensor(np.full(sample.gt_disparity.shape, float(dPx) / W))
    rec = warpHorizontal(sample.right, d, WarpDirection.RightToLeft)
    c0 = int(np.ceil(max(dPx, sample.disparity_px[0]))) + radius
    cols = (c0, W - radius)
    return imageLoss(spatialSlice(sample.left, cols=cols),
                     spatialSlice(rec, cols=cols), LossWeights()).item()


class TestExactShift(unittest.TestCase):

    def test_zero(self):
        x = np.random.default_rng(0).uniform(size=(1, 3, 4, 8))
        assert_array_equal(exactShift(x, 0), x)

    def test_integer(self):
        row = np.array([1., 2., 3., 4.]).reshape(1, 1, 1, 4)
        assert_array_equal(exactShift(row, 2).ravel(), [3., 4., 4., 4.])

    def test_warpBack(self):
        x = np.random.default_rng(1).uniform(size=(1, 3, 4, 16))
        right = exactShift(x, 3)
        d = MDTensor(np.full((1, 1, 4, 16), 3. / 16))
        back = warpHorizontal(MDTensor(right), d, WarpDirection.RightToLeft)
        assert_array_equal(back.values[..., 3:], x[..., 3:])

    def test_range(self):
        self.assertRaises(ConfigError, exactShift, np.zeros((1, 1, 1, 4)), 4)


class TestGenerateScene(unittest.TestCase):

    def setUp(self):
        self.cfg = SceneConfig()

    def test_deterministic(self):
        a = generateScene(42, self.cfg)
        b = generateScene(42, self.cfg)
        assert_array_equal(a.left.values, b.left.values)
        assert_array_equal(a.right.values, b.right.values)
        c = generateScene(43, self.cfg)
        self.assertFalse(np.array_equal(a.left.values, c.left.values))

    def test_constantPlane(self):
        s = generateScene(0, self.cfg)
        self.assertEqual(s.left.shape, (1, 3, 64, 128))
        gt = s.gt_disparity.values
        self.assertTrue((gt == gt.flat[0]).all())
        dPx = s.disparity_px[0]
        self.assertTrue(2 <= dPx <= 8)
        self.assertAlmostEqual(gt.flat[0], dPx / 128., places=15)
        for t in (s.left, s.right):
            self.assertTrue((t.values >= 0).all() and (t.values <= 1).all())
        self.assertIsNone(s.occlusion)

    def test_integerDisparityReconstructs(self):
        cfg = SceneConfig(disparity_px=[5., 5.])
        s = generateScene(3, cfg)
        rec = warpHorizontal(s.right, s.gt_disparity,
                             WarpDirection.RightToLeft)
        assert_allclose(rec.values[..., 5:], s.left.values[..., 5:],
                        atol=1e-6, rtol=0)

    def test_oracle(self):
        radius = LossWeights().ssim_radius
        for seed in range(3):
            for dPx in (3., 6.):
                cfg = SceneConfig(disparity_px=[dPx, dPx])
                s = generateScene(seed, cfg)
                truth = visibleLoss(s, dPx, radius)
                self.assertLess(truth, 1e-3)
                for off in (-2., -1., 1., 2.):
                    self.assertGreater(visibleLoss(s, dPx + off, radius),
                                       truth)

    def test_depthCue(self):
        near = textureSigma(self.cfg, 8.)
        far = textureSigma(self.cfg, 2.)
        self.assertAlmostEqual(near, 1.6)
        self.assertAlmostEqual(far, 0.4)
        flat = SceneConfig(depth_cued_texture=False)
        self.assertEqual(textureSigma(flat, 8.), flat.texture_sigma)

    def test_twoLayer(self):
        cfg = SceneConfig(mode=TWO_LAYER)
        s = generateScene(5, cfg)
        dBg, dFg = s.disparity_px
        self.assertLess(dBg, dFg)
        gt = s.gt_disparity.values[0, 0] * cfg.width
        assert_allclose(np.unique(np.round(gt, 9)), [dBg, dFg])
        occ = s.occlusion[0, 0]
        self.assertEqual(occ.sum() % (dFg - dBg), 0)
        rows, cols = np.nonzero(occ)
        # occluded pixels sit just left of the foreground, on the background
        assert_allclose(gt[rows, cols], dBg)
        assert_allclose(gt[rows, cols.max() + 1], dFg)
        # everything else in the left view is visible in the right view
        left, right = s.left.values[0], s.right.values[0]
        H, W = occ.shape
        for i in range(H):
            for j in range(W):
                d = int(round(gt[i, j]))
                if occ[i, j] or j - d < 0:
                    continue
                assert_allclose(left[:, i, j], right[:, i, j - d],
                                atol=1e-12)

    def test_invalid(self):
        self.assertRaises(ConfigError, generateScene, 0,
                          SceneConfig(disparity_px=[2., 40.]))
        self.assertRaises(ConfigError, generateScene, 0,
                          SceneConfig(mode='three-layer'))
        self.assertRaises(ConfigError, generateScene, 0,
                          SceneConfig(mode=TWO_LAYER,
                                      disparity_px=[2.2, 2.8]))


if __name__ == '__main__':
    unittest.main()
