import zlib

import numpy as np


class cached_property(object):
    def __init__(self, func):
        self.func = func
        self.__doc__ = func.__doc__

    def __get__(self, obj, cls):
        if obj is None:
            return self
        value = obj.__dict__[self.func.__name__] = self.func(obj)
        return value


def is_pow2(n):
    return n >= 1 and not (n & (n - 1))


def next_pow2(n):
    """
    Smallest power of two that is ``>= n`` (``1`` for ``n <= 1``).
    """
    if n <= 1:
        return 1
    return 1 << (int(n) - 1).bit_length()


def frozen(array, dtype=np.float64, ndim=None):
    """
    Return a read-only contiguous copy of ``array``.
    """
    result = np.array(array, dtype=dtype, copy=True, order='C')
    if ndim is not None and result.ndim != ndim:
        raise ValueError('Expected a {}-d array, got shape {!r}.'.format(ndim, result.shape))
    result.setflags(write=False)
    return result


def tag_code(tag):
    if isinstance(tag, str):
        return zlib.crc32(tag.encode('utf-8')) & 0xffffffff
    return int(tag)


def derive_seed(master, tag, J, trial):
    """
    Derive the seed of one trial: ``SeedSequence([master, crc32(tag), J, trial])`` folded into 63 bits.

    Depends only on its arguments, so trials can run in any order or in parallel.
    """
    words = np.random.SeedSequence([int(master), tag_code(tag), int(J), int(trial)]).generate_state(2, dtype=np.uint32)
    return ((int(words[0]) << 32) | int(words[1])) & ((1 << 63) - 1)


def child_seeds(seed, count):
    """
    Split ``seed`` into ``count`` independent :class:`numpy.random.SeedSequence` children.
    """
    if isinstance(seed, np.random.SeedSequence):
        return seed.spawn(count)
    return np.random.SeedSequence(seed).spawn(count)


def make_rng(seed=None):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
