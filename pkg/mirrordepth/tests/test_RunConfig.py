import os
import json
import shutil
import tempfile
import unittest

from mirrordepth.py.Errors import ConfigError
from mirrordepth.py.RunConfig import RunConfig, KEY_OWNERS


class TestRunConfig(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def write(self, d, name='run.json'):
        path = os.path.join(self.dir, name)
        with open(path, 'w') as f:
            json.dump(d, f)
        return path

    def test_defaults(self):
        cfg = RunConfig().validate()
        self.assertEqual(cfg.train.batch_size, 8)
        self.assertEqual(cfg.train.weights.alpha_ssim_mix, 0.85)
        self.assertEqual(cfg.train.spec.d_max, 0.3)
        self.assertEqual(cfg.blend.ramp_fraction, 0.05)

    def test_routing(self):
        cfg = RunConfig.fromDict({'alpha_tv': 0.01, 'd_max': 0.2,
                                  'beta1': 0.8, 'augment_enabled': False,
                                  'width': 256, 'ramp_fraction': 0.1})
        self.assertEqual(cfg.train.weights.alpha_tv, 0.01)
        self.assertEqual(cfg.train.spec.d_max, 0.2)
        self.assertEqual(cfg.train.adam.beta1, 0.8)
        self.assertFalse(cfg.train.augment.augment_enabled)
        self.assertEqual(cfg.scene.width, 256)
        self.assertEqual(cfg.blend.ramp_fraction, 0.1)

    def test_integerForFloat(self):
        cfg = RunConfig.fromDict({'alpha_im': 2})
        self.assertIsInstance(cfg.train.weights.alpha_im, float)

    def test_unknownKeys(self):
        with self.assertRaises(ConfigError) as cm:
            RunConfig.fromDict({'stpes': 1, 'lr': 2})
        self.assertIn('lr, stpes', str(cm.exception))

    def test_types(self):
        self.assertRaises(ConfigError, RunConfig.fromDict, {'steps': 1.5})
        self.assertRaises(ConfigError, RunConfig.fromDict, {'steps': True})
        self.assertRaises(ConfigError, RunConfig.fromDict, {'shuffle': 1})
        self.assertRaises(ConfigError, RunConfig.fromDict,
                          {'disparity_px': 4})
        self.assertRaises(ConfigError, RunConfig.fromDict, {'mode': 2})

    def test_validated(self):
        self.assertRaises(ConfigError, RunConfig.fromDict, {'d_max': 2.})
        self.assertRaises(ConfigError, RunConfig.fromDict,
                          {'ramp_fraction': 0.6})
        self.assertRaises(ConfigError, RunConfig.fromDict,
                          {'checkpoint_dir': ''})

    def test_relativePaths(self):
        path = self.write({'data_dir': 'sets/train'})
        cfg = RunConfig.load(path)
        self.assertEqual(cfg.paths.data_dir,
                         os.path.join(self.dir, 'sets', 'train'))
        self.assertEqual(cfg.paths.checkpoint_dir,
                         os.path.join(self.dir, 'checkpoints'))

    def test_badFiles(self):
        self.assertRaises(ConfigError, RunConfig.load,
                          os.path.join(self.dir, 'none.json'))
        path = os.path.join(self.dir, 'bad.json')
        with open(path, 'w') as f:
            f.write('{"steps": ')
        self.assertRaises(ConfigError, RunConfig.load, path)
        self.assertRaises(ConfigError, RunConfig.load, self.write([1, 2]))

    def test_saveLoad(self):
        cfg = RunConfig.fromDict({'steps': 7, 'encoder_channels':
                                  [4, 4, 4, 4, 4], 'mode': 'two-layer'})
        path = os.path.join(self.dir, 'saved.json')
        cfg.save(path)
        with open(path) as f:
            saved = json.load(f)
        self.assertEqual(set(saved), set(KEY_OWNERS))
        again = RunConfig.load(path)
        self.assertEqual(again.train.steps, 7)
        self.assertEqual(again.train.spec.encoder_channels, [4, 4, 4, 4, 4])
        self.assertEqual(again.scene.mode, 'two-layer')

    def test_flatKeysUnique(self):
        self.assertIn('augment_enabled', KEY_OWNERS)
        self.assertNotIn('weights', KEY_OWNERS)
        self.assertNotIn('spec', KEY_OWNERS)


if __name__ == '__main__':
    unittest.main()
