import csv
import os
from pathlib import Path

from fusionbench.errors import ParseError


def fmt(x) -> str:
    """Numbers in text files carry at most 12 significant digits."""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def read_text(path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except FileNotFoundError:
        raise ParseError(path, None, "file not found") from None
    except UnicodeDecodeError as e:
        raise ParseError(path, None, f"not valid UTF-8 ({e.reason})") from None


def write_text(path, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def split_row(line: str, quotechar: str = '"') -> list[str]:
    return next(csv.reader([line], quotechar=quotechar, skipinitialspace=True))


def join_row(cells) -> str:
    out = []
    for c in cells:
        c = str(c)
        if any(ch in c for ch in ',"\n'):
            c = '"' + c.replace('"', '""') + '"'
        out.append(c)
    return ",".join(out)
