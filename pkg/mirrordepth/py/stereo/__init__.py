from mirrordepth.py.stereo.SyntheticStereo import SceneConfig, StereoSample
from mirrordepth.py.stereo.SyntheticStereo import generateScene, exactShift
