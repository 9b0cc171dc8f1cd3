import os
import tempfile
from pathlib import Path
from typing import Union

import pandas as pd


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def append_csv_rows(path: Union[str, Path], rows: pd.DataFrame) -> Path:
    """Append rows to a CSV file, writing the header only when the file is new."""
    path = Path(path)
    existing = path.read_text(encoding="utf-8") if path.exists() else ""
    body = rows.to_csv(index=False, header=not existing, lineterminator="\n")
    return atomic_write_text(path, existing + body)
