from mirrordepth.py import Constants
from mirrordepth.py.Errors import (MirrorDepthError, ConfigError, DataError,
                                   ShapeError, NumericError)
