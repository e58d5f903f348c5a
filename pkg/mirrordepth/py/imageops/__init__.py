from mirrordepth.py.imageops.ImageOps import WarpDirection, mirror
from mirrordepth.py.imageops.ImageOps import warpHorizontal
from mirrordepth.py.imageops.ImageOps import gaussianBlur, gaussianKernel
from mirrordepth.py.imageops.ImageOps import downsample2x, upsample2xNearest
from mirrordepth.py.imageops.ImageOps import resizeBilinear
