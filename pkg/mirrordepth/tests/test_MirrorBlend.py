import unittest
import numpy as np
from numpy.testing import assert_array_equal, assert_allclose

from mirrordepth.py.Errors import ConfigError, ShapeError
from mirrordepth.py.modeling.MDTensor import MDTensor
from mirrordepth.py.imageops.ImageOps import mirror
from mirrordepth.py.network.DispNetLite import NetworkSpec, initParams
from mirrordepth.py.postproc.MirrorBlend import (BlendConfig, blendWeights,
                                                 mirrorBlend, inferWithPp)


def maps(rng, width=40):
    return (MDTensor(rng.uniform(0, 0.3, (1, 1, 6, width))),
            MDTensor(rng.uniform(0, 0.3, (1, 1, 6, width))))


class TestBlendWeights(unittest.TestCase):

    def test_ramps(self):
        wl, wr = blendWeights(100, BlendConfig())
        self.assertEqual(wl[0], 1.)
        self.assertEqual(wl[5], 0.)
        self.assertAlmostEqual(wl[2], 0.6)
        assert_array_equal(wr, wl[::-1])
        self.assertTrue((wl + wr <= 1).all())

    def test_config(self):
        self.assertRaises(ConfigError, BlendConfig(ramp_fraction=0.).validate)
        self.assertRaises(ConfigError,
                          BlendConfig(ramp_fraction=0.5).validate)


class TestMirrorBlend(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.cfg = BlendConfig()

    def test_equalInputs(self):
        d, _ = maps(self.rng)
        out = mirrorBlend(d, d, self.cfg)
        assert_allclose(out.values, d.values, rtol=1e-15, atol=0)

    def test_borders(self):
        d, dm = maps(self.rng)
        out = mirrorBlend(d, dm, self.cfg).values
        assert_array_equal(out[..., 0], dm.values[..., 0])
        assert_array_equal(out[..., -1], d.values[..., -1])

    def test_centerAverage(self):
        d, dm = maps(self.rng)
        out = mirrorBlend(d, dm, self.cfg).values
        mid = slice(5, 35)
        assert_allclose(out[..., mid],
                        (d.values[..., mid] + dm.values[..., mid]) / 2,
                        rtol=1e-15)

    def test_convex(self):
        d, dm = maps(self.rng)
        out = mirrorBlend(d, dm, self.cfg).values
        lo = np.minimum(d.values, dm.values)
        hi = np.maximum(d.values, dm.values)
        self.assertTrue((out >= lo - 1e-15).all())
        self.assertTrue((out <= hi + 1e-15).all())

    def test_shapeMismatch(self):
        d, _ = maps(self.rng)
        other, _ = maps(self.rng, 30)
        self.assertRaises(ShapeError, mirrorBlend, d, other, self.cfg)

    def test_symmetricImage(self):
        spec = NetworkSpec(encoder_channels=[4, 4, 4, 4, 4])
        params = initParams(spec, 2, np.float64)
        x = MDTensor(self.rng.uniform(0, 1, (1, 3, 32, 64)))
        x = (x + mirror(x)) * 0.5
        out = inferWithPp(params, x, spec, self.cfg)
        self.assertEqual(out.shape, (1, 1, 32, 64))
        assert_allclose(mirror(out).values, out.values, rtol=1e-12,
                        atol=1e-15)


if __name__ == '__main__':
    unittest.main()
