from os.path import join

from setuptools import setup

PROJECT = 'mirrordepth'
VERSION = open(join('mirrordepth', 'VERSION')).read().strip()
DESC = ('Self-supervised monocular depth estimation from rectified stereo '
        'pairs with a mirrored Siamese network')

s_README = open('README.rst').read()

extra_files = ['VERSION']

setup(name=PROJECT,
      version=VERSION,
      description=DESC,
      long_description=s_README,
      license='MIT',
      packages=['mirrordepth', 'mirrordepth.py', 'mirrordepth.py.modeling',
                'mirrordepth.py.imageops', 'mirrordepth.py.losses',
                'mirrordepth.py.network', 'mirrordepth.py.stereo',
                'mirrordepth.py.training', 'mirrordepth.py.postproc',
                'mirrordepth.py.metrics', 'mirrordepth.py.utils',
                'mirrordepth.tests'],
      install_requires=['numpy >= 1.20.0', 'scipy >= 1.6.0'],
      entry_points={'console_scripts':
                    ['mirrordepth = mirrordepth.py.MirrorDepth:main']},
      zip_safe=False,
      package_data={'mirrordepth': extra_files})
