"""Plain-text file formats: z.txt, .col matrix files, b_file and key=value configs."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class FormatError(ValueError):
    pass


def write_z(path, z) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in z))


def read_z(path) -> list[int]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            out.append(int(text))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected an integer, got {text!r}") from None
    if not out:
        raise FormatError(f"{path}: no generating vector components")
    return out


def write_col(path, matrices, s: int, m: int, alpha: int, rows: int) -> None:
    """One line per matrix with its m column integers in decimal; bit k of a column is row k+1."""
    lines = [f"# s={s} m={m} alpha={alpha} rows={rows}\n"]
    lines += [" ".join(str(int(c)) for c in cols) + "\n" for cols in matrices]
    Path(path).write_text("".join(lines))


def read_col(path) -> tuple[list[list[int]], dict]:
    """Matrices and header fields. Without a header, rows is the widest column bit length."""
    header: dict = {}
    mats = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            for tok in text[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    try:
                        header[key] = int(val)
                    except ValueError:
                        raise FormatError(f"{path}:{lineno}: bad header value {tok!r}") from None
            continue
        try:
            cols = [int(t) for t in text.split()]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected column integers") from None
        if any(c < 0 for c in cols):
            raise FormatError(f"{path}:{lineno}: negative column integer")
        if mats and len(cols) != len(mats[0]):
            raise FormatError(f"{path}:{lineno}: expected {len(mats[0])} columns, got {len(cols)}")
        mats.append(cols)
    if not mats:
        raise FormatError(f"{path}: no matrices")
    m = len(mats[0])
    width = max(max(c.bit_length() for c in cols) for cols in mats)
    header.setdefault("m", m)
    header.setdefault("rows", max(width, m))
    if header["m"] != m:
        raise FormatError(f"{path}: header says m={header['m']} but lines have {m} columns")
    if width > header["rows"]:
        raise FormatError(f"{path}: column integers exceed rows={header['rows']}")
    return mats, header


def read_b_file(path) -> np.ndarray:
    """Newline-separated positive numbers (blank lines and # comments ignored)."""
    vals = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            v = float(text)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected a number, got {text!r}") from None
        if not v > 0 or not np.isfinite(v):
            raise FormatError(f"{path}:{lineno}: values must be positive and finite")
        vals.append(v)
    return np.array(vals)


def read_config(path) -> dict[str, str]:
    """``key=value`` lines, UTF-8; ``#`` starts a comment line."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise FormatError(f"{path}:{lineno}: expected key=value")
        key, val = text.split("=", 1)
        key = key.strip().lstrip("-").replace("-", "_")
        out[key] = val.strip().strip('"').strip("'")
    return out


def format_points(points: np.ndarray) -> str:
    return "".join(" ".join(f"{x:.17g}" for x in row) + "\n" for row in points)
