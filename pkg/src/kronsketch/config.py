import ast
import os
import sys

from .const import CONFIG_KEYS

_default_config = {}


class Default(object):
    """
    Placeholder for an option that may be overridden through :func:`kronsketch.load_config` or the
    ``KRONSKETCHCONFIG`` environment variable.
    """
    def __init__(self, key, fallback_value):
        self.key = key
        self.fallback_value = fallback_value

    def resolve(self):
        return _default_config.get(self.key, self.fallback_value)

    def __str__(self):
        return str(self.fallback_value)

    def __repr__(self):
        return repr(self.fallback_value)


def resolve(value):
    if isinstance(value, Default):
        return value.resolve()
    else:
        return value


def _parse_value(text):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config_string(text):
    """
    Parse ``"key=value, key=value"`` into a dict. Values are Python literals, anything else is kept as a string.

    Raises:
        ValueError: if an item has no ``=``.
    """
    options = {}
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        if '=' not in item:
            raise ValueError('Expected key=value, got {!r}.'.format(item))
        key, value = item.split('=', 1)
        options[key.strip().lower()] = _parse_value(value)
    return options


def _prepare_config(**options):
    _default_config.clear()
    for key, value in options.items():
        key = key.lower()
        if key in CONFIG_KEYS:
            _default_config[key] = value
        else:
            sys.stderr.write('Discarded config from KRONSKETCHCONFIG {}={!r}: Unknown option\n'.format(key, value))
    return dict(_default_config)


def load_config(**options):
    """
    Replace the process-wide defaults. Without arguments the ``KRONSKETCHCONFIG`` environment variable is read.

    Returns: the active configuration as a dict.
    """
    try:
        if not options:
            options = parse_config_string(os.environ.get('KRONSKETCHCONFIG', ''))
        return _prepare_config(**options)
    except Exception as exc:
        sys.stderr.write('Failed to load kronsketch config from KRONSKETCHCONFIG {!r}: {!r}\n'.format(
            os.environ.get('KRONSKETCHCONFIG', ''), exc))
        _default_config.clear()
        return {}


def read_config_file(path):
    """
    Read a flat ``key=value`` file. Blank lines and ``#`` comments are skipped; dashes in keys become underscores.
    Values are returned as stripped strings, callers convert them like command line flags.
    """
    options = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ValueError('{}:{}: expected key=value, got {!r}.'.format(path, lineno, line))
            key, value = line.split('=', 1)
            options[key.strip().replace('-', '_')] = value.strip()
    return options
