import os
import sys

from colorama import AnsiToWin32
from colorama import Back
from colorama import Fore
from colorama import Style

from . import config

__all__ = 'ColorStream',

COLORS = {
    'INFO': Fore.CYAN,
    'OK': Style.BRIGHT + Fore.GREEN,
    'WARN': Style.BRIGHT + Fore.YELLOW,
    'ERROR': Style.BRIGHT + Fore.RED,
    'KIND': Style.BRIGHT + Fore.MAGENTA,
    'VALUE': Style.BRIGHT + Fore.WHITE,
    'DIM': Style.BRIGHT + Fore.BLACK,
    'RESET': Style.RESET_ALL,
}
for name, group in [
    ('', Style),
    ('fore', Fore),
    ('back', Back),
]:
    for key in dir(group):
        COLORS['{}({})'.format(name, key) if name else key] = getattr(group, key)


class ColorStream(object):
    """
    Writes one-line progress and diagnostic messages, colored when the stream is a terminal.

    Args:
        stream (file-like or str): Stream to write to, or a path opened in append mode. Default: ``sys.stderr``.
        force_colors (bool): Color even when the stream is not a terminal. Default: ``False``.
    """
    _stream_cache = {}
    _stream = None

    def __init__(self,
                 stream=config.Default('stream', None),
                 force_colors=config.Default('force_colors', False)):
        self.force_colors = config.resolve(force_colors)
        stream = config.resolve(stream)
        if stream is None:
            stream = sys.stderr
        self.stream = stream

    def __repr__(self):
        return '{0.__class__.__name__}(stream={0.stream!r}, force_colors={0.force_colors!r})'.format(self)

    @property
    def stream(self):
        return self._stream

    @stream.setter
    def stream(self, value):
        if isinstance(value, str):
            if value in self._stream_cache:
                value = self._stream_cache[value]
            else:
                value = self._stream_cache[value] = open(value, 'a')

        isatty = getattr(value, 'isatty', None)
        if self.force_colors or (isatty and isatty() and os.name != 'java'):
            self._stream = AnsiToWin32(value, strip=False)
            self.colors = COLORS
        else:
            self._stream = value
            self.colors = {key: '' for key in COLORS}

    def output(self, format_str, *args, **kwargs):
        """
        Write ``format_str.format(*args, **COLORS, **kwargs)`` to ``self.stream``.

        Color placeholders: ``{INFO}``, ``{OK}``, ``{WARN}``, ``{ERROR}``, ``{KIND}``, ``{VALUE}``, ``{DIM}``,
        ``{RESET}`` and the colorama names like ``{BRIGHT}``, ``{fore(RED)}`` or ``{back(BLUE)}``.
        """
        self.stream.write(format_str.format(
            *args,
            **dict(self.colors, **kwargs)
        ))
        flush = getattr(self.stream, 'flush', None)
        if flush:
            flush()

    def info(self, message, *args):
        self.output('{INFO}kronsketch:{RESET} ' + message + '\n', *args)

    def warn(self, message, *args):
        self.output('{WARN}WARNING:{RESET} ' + message + '\n', *args)

    def error(self, message, *args):
        self.output('{ERROR}ERROR:{RESET} ' + message + '\n', *args)
