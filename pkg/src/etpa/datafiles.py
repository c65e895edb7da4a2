"""Location of the shipped data files (Sellmeier sets, sample profiles)."""

import os
from pathlib import Path

ENV_VAR = "ETPA_DATA_DIR"
_PACKAGE_DATA = Path(__file__).resolve().parent / "data"


def data_dir():
    """Directory holding the data files; ``$ETPA_DATA_DIR`` wins when set."""
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return _PACKAGE_DATA


def data_path(name):
    return data_dir() / name


def parse_float_list(text):
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
