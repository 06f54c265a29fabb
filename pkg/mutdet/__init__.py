"""__init__.py

Initialize global setup
"""

# get version
try:
    from mutdet._version import version as __version__  # noqa: F401
except ImportError:  # pragma: no cover
    # package is not installed
    raise RuntimeError(
        'MutDet has not been installed correctly. Please run `pip install -e .` or '
        '`python setup.py develop` in the MutDet package folder.'
    ) from None


# initialize settings, define settings API
from typing import Any, Set
from mutdet.config import parse_config, MutDetSettings

_settings: MutDetSettings = parse_config()
_overwritten_settings: Set = set()


def update_settings(**new_config: Any) -> None:
    """Update the global MutDet runtime settings.

    Arguments:

        new_config: Options to override. Have to be valid MutDet settings.

    Example:

        >>> import mutdet
        >>> mutdet.get_settings().LOG_EVERY
        1
        >>> mutdet.update_settings(LOG_EVERY=10)
        >>> mutdet.get_settings().LOG_EVERY
        10

    """
    from mutdet.config import parse_config
    global _settings, _overwritten_settings
    current_config = {k: getattr(_settings, k) for k in _overwritten_settings}
    _settings = parse_config({**current_config, **new_config})
    _overwritten_settings |= set(new_config.keys())


def get_settings() -> MutDetSettings:  # noqa: F821
    """Returns the current set of global runtime settings.

    Example:

        >>> import mutdet
        >>> mutdet.get_settings().PROFILE
        False

    """
    return _settings


del parse_config, MutDetSettings
del Any, Set


# expose API
from mutdet.detector.model import MutDet  # noqa: F401

__all__ = (
    'MutDet',
    'get_settings',
    'update_settings',
)
