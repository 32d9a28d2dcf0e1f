"""
IDX files (the MNIST container format) and the digit tensors built from them.

Layout: two zero bytes, a type code byte, a dimension count byte, one big-endian ``uint32`` per dimension, then the
big-endian payload in row-major order. Files ending in ``.gz`` are read and written through gzip.
"""
import gzip
import struct

import numpy as np

from .hadamard import pad_pow2

__all__ = (
    'BadMagicError',
    'IdxError',
    'IdxFile',
    'InsufficientImagesError',
    'TrailingDataError',
    'TruncatedPayloadError',
    'UnsupportedTypeError',

    'build_digit_tensor',
    'load_digit_tensors',
    'read_idx',
    'write_idx',
)

IDX_TYPES = {
    0x08: np.dtype('>u1'),
    0x09: np.dtype('>i1'),
    0x0B: np.dtype('>i2'),
    0x0C: np.dtype('>i4'),
    0x0D: np.dtype('>f4'),
    0x0E: np.dtype('>f8'),
}
IDX_CODES = {dtype.str[1:]: code for code, dtype in IDX_TYPES.items()}


class IdxError(ValueError):
    pass


class BadMagicError(IdxError):
    pass


class UnsupportedTypeError(IdxError):
    pass


class TruncatedPayloadError(IdxError):
    pass


class TrailingDataError(IdxError):
    pass


class InsufficientImagesError(ValueError):
    pass


class IdxFile(object):
    """
    A decoded IDX file.

    Attributes:
        magic (int): The 4-byte magic number as an integer.
        dims (tuple): Dimension sizes.
        payload (numpy.ndarray): Native-endian array of shape ``dims``.
    """

    def __init__(self, magic, dims, payload):
        self.magic = int(magic)
        self.dims = tuple(int(n) for n in dims)
        self.payload = payload

    @property
    def type_code(self):
        return (self.magic >> 8) & 0xFF

    def __eq__(self, other):
        return (
            isinstance(other, IdxFile) and
            self.magic == other.magic and
            self.dims == other.dims and
            np.array_equal(self.payload, other.payload)
        )

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(magic=0x{0.magic:08x}, dims={0.dims!r})'.format(self)


def _open(path, mode):
    if str(path).endswith('.gz'):
        return gzip.open(path, mode)
    return open(path, mode)


def parse_idx(data, name='<bytes>'):
    if len(data) < 4:
        raise TruncatedPayloadError('{}: {} bytes is too short for an IDX header.'.format(name, len(data)))
    zero, code, ndim = struct.unpack('>HBB', data[:4])
    if zero != 0:
        raise BadMagicError('{}: magic number must start with two zero bytes, got 0x{:04x}.'.format(name, zero))
    if code not in IDX_TYPES:
        raise UnsupportedTypeError('{}: unsupported IDX type code 0x{:02x}.'.format(name, code))
    header_size = 4 + 4 * ndim
    if len(data) < header_size:
        raise TruncatedPayloadError('{}: header declares {} dimensions but the file ends early.'.format(name, ndim))
    dims = struct.unpack('>{}I'.format(ndim), data[4:header_size])
    dtype = IDX_TYPES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    available = len(data) - header_size
    if available < expected:
        raise TruncatedPayloadError('{}: payload has {} bytes, dimensions {!r} need {}.'.format(
            name, available, dims, expected))
    if available > expected:
        raise TrailingDataError('{}: {} unexpected bytes after the payload.'.format(name, available - expected))
    payload = np.frombuffer(data, dtype=dtype, offset=header_size).reshape(dims)
    magic = struct.unpack('>I', data[:4])[0]
    return IdxFile(magic, dims, payload.astype(dtype.newbyteorder('=')))


def _payload(value):
    if isinstance(value, IdxFile):
        return value.payload
    return np.asarray(value)


def read_idx(path):
    """
    Read an IDX file (optionally gzipped).

    Raises:
        IdxError: subclasses name the defect (bad magic, unsupported type, truncated payload, trailing bytes).
    """
    with _open(path, 'rb') as fh:
        return parse_idx(fh.read(), name=path)


def write_idx(path, array):
    """
    Write ``array`` (or the payload of an :class:`IdxFile`) as an IDX file; the type code follows the dtype.
    """
    array = _payload(array)
    key = array.dtype.newbyteorder('>').str[1:]
    if key not in IDX_CODES:
        raise UnsupportedTypeError('dtype {} has no IDX type code.'.format(array.dtype))
    code = IDX_CODES[key]
    with _open(path, 'wb') as fh:
        fh.write(struct.pack('>HBB', 0, code, array.ndim))
        fh.write(struct.pack('>{}I'.format(array.ndim), *array.shape))
        fh.write(np.ascontiguousarray(array, dtype=IDX_TYPES[code]).tobytes())


def build_digit_tensor(images, labels, digit, count=100):
    """
    Stack the first ``count`` images labelled ``digit``, scaled to ``[0, 1]`` and zero-padded (bottom/right) to
    power-of-two sides, along a trailing mode: shape ``(rows', cols', count)``.

    Raises:
        InsufficientImagesError: if fewer than ``count`` images carry the label.
    """
    images = _payload(images)
    labels = _payload(labels).ravel()
    if images.ndim != 3:
        raise ValueError('Expected images of shape (N, rows, cols), got {!r}.'.format(images.shape))
    if labels.size != images.shape[0]:
        raise ValueError('Got {} labels for {} images.'.format(labels.size, images.shape[0]))
    (matches,) = np.nonzero(labels == digit)
    if matches.size < count:
        raise InsufficientImagesError('Only {} images labelled {} (need {}).'.format(matches.size, digit, count))
    selected = images[matches[:count]].astype(np.float64) / 255.0
    selected = pad_pow2(pad_pow2(selected, axis=1), axis=2)
    return np.ascontiguousarray(np.moveaxis(selected, 0, -1))


def load_digit_tensors(images_path, labels_path, digits=(4, 9), count=100):
    """
    Read an image/label IDX pair and build one tensor per digit.
    """
    images = read_idx(images_path)
    labels = read_idx(labels_path)
    return tuple(build_digit_tensor(images, labels, digit, count) for digit in digits)
