"""scripts/click_types.py

Custom click parameter types and utilities.
"""

from typing import Any, Dict
import pathlib

import click


class PathlibPath(click.Path):
    """Converts a string to a pathlib.Path object"""

    def convert(self, *args: Any) -> pathlib.Path:
        return pathlib.Path(super().convert(*args))


class TOMLFile(click.ParamType):
    """Parses a TOML file to a dict"""
    name = 'toml-file'

    def convert(self, value: str, *args: Any) -> Dict[str, Any]:
        import toml
        try:
            return dict(toml.load(value))
        except (OSError, toml.TomlDecodeError) as exc:
            self.fail(f'Could not read TOML file {value}: {exc!s}')


class OnOff(click.Choice):
    """``on`` / ``off`` switch converted to a boolean"""

    def __init__(self) -> None:
        super().__init__(['on', 'off'])

    def convert(self, value: Any, *args: Any) -> bool:
        if isinstance(value, bool):
            return value
        return super().convert(value, *args) == 'on'
