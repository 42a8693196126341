"""
CSV emission for every result table.
Floats are written with 17 significant digits so a table re-read from disk
reproduces the in-memory values bit for bit.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, TextIO, Union

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    return FLOAT_FORMAT % value


def frame_to_csv(frame: pd.DataFrame, footer: Optional[str] = None) -> str:
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if footer:
        text += footer.rstrip("\n") + "\n"
    return text


def write_csv(
    frame: pd.DataFrame,
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
    footer: Optional[str] = None,
) -> None:
    """
    Write `frame` as CSV to `path`, or to `stream` (stdout by default).

    Args:
        frame: table to write; its column order is the header order
        path: target file, parent folders are created as needed
        stream: text stream used when no path is given
        footer: optional trailing comment line, e.g. "# v_opt=1,W_opt=1"
    """
    text = frame_to_csv(frame, footer)
    if path is None:
        (stream or sys.stdout).write(text)
        return

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8", newline="\n")
    logger.info(f"Wrote {len(frame)} rows to {target}")
