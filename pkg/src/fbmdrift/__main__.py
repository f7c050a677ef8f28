"""Allow ``python -m fbmdrift``."""

from .cli import main_exit

main_exit()
