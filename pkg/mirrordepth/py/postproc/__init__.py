from mirrordepth.py.postproc.MirrorBlend import BlendConfig, blendWeights
from mirrordepth.py.postproc.MirrorBlend import mirrorBlend, inferWithPp
