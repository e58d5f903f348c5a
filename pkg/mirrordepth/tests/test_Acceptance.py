'''
End-to-end checks on synthetic scenes. The training experiments take
minutes and only run when ``MIRRORDEPTH_SLOW_TESTS`` is set.
'''

import os
import unittest
import numpy as np

from mirrordepth.py.modeling.MDTensor import ComputationRecord
from mirrordepth.py.imageops.ImageOps import mirror
from mirrordepth.py.losses.PhotometricLoss import LossWeights, pyramidLoss
from mirrordepth.py.network.DispNetLite import (NetworkSpec, initParams,
                                                forwardSiamese, inferMono)
from mirrordepth.py.stereo.SyntheticStereo import (SceneConfig, generateScene,
                                                   TWO_LAYER)
from mirrordepth.py.training.AdamOptimizer import AdamConfig
from mirrordepth.py.training.Trainer import TrainConfig, train
from mirrordepth.py.postproc.MirrorBlend import BlendConfig, inferWithPp

SLOW = bool(os.environ.get('MIRRORDEPTH_SLOW_TESTS'))


def lossAndGradients(params, I_l, I_r, spec):
    record = ComputationRecord()
    output = forwardSiamese(params, I_l, I_r, spec, record)
    total, _ = pyramidLoss(I_l, I_r, output, LossWeights())
    return total.item(), record.backward(total).parameters()


class TestMirrorSwap(unittest.TestCase):

    def test_randomInstances(self):
        spec = NetworkSpec(encoder_channels=[4, 4, 4, 4, 4])
        scene = SceneConfig(height=32, width=64, disparity_px=[1.5, 7.])
        for i in range(20):
            params = initParams(spec, 100 + i, np.float64)
            s = generateScene(i, scene)
            a, ga = lossAndGradients(params, s.left, s.right, spec)
            b, gb = lossAndGradients(params, mirror(s.right), mirror(s.left),
                                     spec)
            self.assertLess(abs(a - b) / a, 1e-10)
            for name, g in ga.items():
                scale = np.abs(g).max() + 1e-300
                self.assertLess(np.abs(gb[name] - g).max() / scale, 1e-8,
                                name)


@unittest.skipUnless(SLOW, 'set MIRRORDEPTH_SLOW_TESTS to run')
class TestRecovery(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.scene = SceneConfig(height=64, width=128, disparity_px=[2., 8.])
        cls.cfg = TrainConfig(batch_size=4, steps=2000, seed=0,
                              adam=AdamConfig(learning_rate=1e-3))
        data = [generateScene(i, cls.scene, np.float32) for i in range(32)]
        cls.params, cls.trace = train(data, cls.cfg)

    def test_lossDecreases(self):
        n = len(self.trace) // 10
        first = np.mean([r[1] for r in self.trace[:n]])
        last = np.mean([r[1] for r in self.trace[-n:]])
        self.assertLess(last, first)

    def test_heldOutMonocular(self):
        W = self.scene.width
        c0 = W // 10
        errors = []
        for seed in range(1000, 1008):
            s = generateScene(seed, self.scene, np.float32)
            d = inferMono(self.params, s.left, self.cfg.spec)[0]
            err = np.abs(d.values - s.gt_disparity.values) * W
            errors.append(err[..., c0:].ravel())
        self.assertLess(np.median(np.concatenate(errors)), 1.)

    def test_postProcessingAtLeftBorder(self):
        scene = SceneConfig(height=64, width=128, disparity_px=[2., 8.],
                            mode=TWO_LAYER)
        W = scene.width
        band = slice(0, W // 10)
        plain, blended = [], []
        for seed in range(2000, 2008):
            s = generateScene(seed, scene, np.float32)
            gt = s.gt_disparity.values[..., band]
            d = inferMono(self.params, s.left, self.cfg.spec)[0]
            pp = inferWithPp(self.params, s.left, self.cfg.spec, BlendConfig())
            plain.append(np.abs(d.values[..., band] - gt).mean())
            blended.append(np.abs(pp.values[..., band] - gt).mean())
        self.assertLessEqual(np.mean(blended), np.mean(plain))


if __name__ == '__main__':
    unittest.main()
