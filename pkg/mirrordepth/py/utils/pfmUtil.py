'''
File formats: PFM for real-valued maps, binary PPM (P6) for RGB images,
and JSON sidecars describing disparity files.

A written PFM is always little-endian (scale ``-1.0``), single channel,
rows stored bottom to top. Big-endian files (positive scale) are read as
well.

**Usage**

>>> import numpy as np
>>> from mirrordepth.py.utils.pfmUtil import pfmHeader
>>> pfmHeader(np.zeros((2, 3), dtype=np.float32))
b'Pf\\n3 2\\n-1.0\\n'

'''

import os
import json
import logging

import numpy as np

from mirrordepth.py import Constants
from mirrordepth.py.Errors import DataError

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = '.json'


def pfmHeader(a):
    height, width = a.shape
    return ('Pf\n%d %d\n-1.0\n' % (width, height)).encode('ascii')


def writePfm(filename, a):
    'Write a 2-D map as a little-endian single-channel PFM'
    a = np.asarray(a)
    if a.ndim == 4 and a.shape[:2] == (1, 1):
        a = a[0, 0]
    if a.ndim != 2:
        raise DataError('PFM maps are single channel 2-D, got shape %s'
                        % (a.shape,))
    with open(filename, 'wb') as f:
        f.write(pfmHeader(a))
        f.write(np.ascontiguousarray(a[::-1], dtype='<f4').tobytes())


def _readToken(data, pos):
    'Next newline-terminated header line, as text'
    end = data.find(b'\n', pos)
    if end < 0:
        raise DataError('malformed PFM header')
    return data[pos:end].decode('ascii', 'replace').strip(), end + 1


def readPfm(filename):
    'Return the 2-D float32 map stored in a single-channel PFM'
    try:
        with open(filename, 'rb') as f:
            data = f.read()
    except (IOError, OSError) as e:
        raise DataError('cannot read %s: %s' % (filename, e))
    magic, pos = _readToken(data, 0)
    if magic != 'Pf':
        raise DataError('%s: malformed PFM header, expected "Pf" and got %r'
                        % (filename, magic[:8]))
    dims, pos = _readToken(data, pos)
    scaleText, pos = _readToken(data, pos)
    try:
        width, height = [int(v) for v in dims.split()]
        scale = float(scaleText)
    except ValueError:
        raise DataError('%s: malformed PFM header' % filename)
    if width < 1 or height < 1 or scale == 0:
        raise DataError('%s: malformed PFM header' % filename)
    dtype = np.dtype('<f4') if scale < 0 else np.dtype('>f4')
    n = width * height
    if len(data) - pos < 4 * n:
        raise DataError('%s: truncated payload (%d of %d bytes)'
                        % (filename, len(data) - pos, 4 * n))
    a = np.frombuffer(data, dtype=dtype, count=n, offset=pos)
    return a.reshape(height, width)[::-1].astype(np.float32)


def writePpm(filename, image):
    '''
    Write a [3, H, W] (or [1, 3, H, W]) image with values in [0, 1] as an
    8-bit binary PPM.
    '''
    image = np.asarray(image)
    if image.ndim == 4:
        image = image[0]
    if image.ndim != 3 or image.shape[0] != 3:
        raise DataError('PPM images need 3 channels, got shape %s'
                        % (image.shape,))
    _, height, width = image.shape
    pixels = np.clip(np.round(image * 255.), 0, 255).astype(np.uint8)
    with open(filename, 'wb') as f:
        f.write(('P6\n%d %d\n255\n' % (width, height)).encode('ascii'))
        f.write(pixels.transpose(1, 2, 0).tobytes())


def readPpm(filename):
    'Return a binary PPM as a [3, H, W] float64 array in [0, 1]'
    try:
        with open(filename, 'rb') as f:
            data = f.read()
    except (IOError, OSError) as e:
        raise DataError('cannot read %s: %s' % (filename, e))
    fields = []
    pos = 0
    # magic, width, height, maxval separated by whitespace and comments
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b'#':
            pos = data.find(b'\n', pos)
            if pos < 0:
                break
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        if end == pos:
            break
        fields.append(data[pos:end])
        pos = end
    if len(fields) < 4 or fields[0] != b'P6':
        raise DataError('%s: not a binary PPM (P6) image' % filename)
    try:
        width, height, maxval = [int(v) for v in fields[1:]]
    except ValueError:
        raise DataError('%s: malformed PPM header' % filename)
    if maxval != 255:
        raise DataError('%s: only 8-bit PPM is supported (maxval %d)'
                        % (filename, maxval))
    pos += 1
    n = width * height * 3
    if len(data) - pos < n:
        raise DataError('%s: truncated payload' % filename)
    pixels = np.frombuffer(data, dtype=np.uint8, count=n, offset=pos)
    return pixels.reshape(height, width, 3).transpose(2, 0, 1) / 255.


def sidecarPath(filename):
    return os.path.splitext(filename)[0] + SIDECAR_SUFFIX


def writeSidecar(filename, d_max=None, **extra):
    'Write the JSON description of the disparity file ``filename``'
    info = {'units': Constants.DISPARITY_UNITS}
    if d_max is not None:
        info['d_max'] = d_max
    info.update(extra)
    with open(sidecarPath(filename), 'w') as f:
        json.dump(info, f, indent=2, sort_keys=True)
        f.write('\n')


def readSidecar(filename):
    '''
    Return the sidecar of disparity file ``filename``; a missing sidecar
    or foreign units raise DataError.
    '''
    path = sidecarPath(filename)
    try:
        with open(path) as f:
            info = json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise DataError('cannot read sidecar %s: %s' % (path, e))
    units = info.get('units')
    if units != Constants.DISPARITY_UNITS:
        raise DataError('%s: disparity units are %r, expected %r'
                        % (path, units, Constants.DISPARITY_UNITS))
    return info
