"""Sobol' generating matrices, taken from scipy's bundled Joe-Kuo direction numbers."""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .polylattice import interlace_matrices


def sobol_columns(s: int, m: int, bits: int = 64) -> list[list[int]]:
    """Column-encoded Sobol' matrices (bit k = row k+1), ``bits`` rows, m columns each."""
    if not 1 <= bits <= 64:
        raise ValueError("bits must lie in 1..64")
    if m > bits:
        raise ValueError("need m <= bits")
    engine = qmc.Sobol(s, scramble=False, bits=bits)
    # MSB-aligned direction numbers: entry (d, t) is column t of dimension d
    sv = np.asarray(engine._sv, dtype=np.uint64)
    out = []
    for d in range(s):
        cols = []
        for t in range(m):
            v = int(sv[d, t])
            cols.append(sum(1 << r for r in range(bits) if v >> (bits - 1 - r) & 1))
        out.append(cols)
    return out


def interlaced_sobol(s: int, m: int, alpha: int, bits: int = 64) -> list[list[int]]:
    """Interlace alpha successive Sobol' dimensions into each of s output dimensions.

    Each source matrix keeps ``bits // alpha`` rows so the result fits in ``bits`` rows.
    """
    rows = bits // alpha
    if m > rows:
        raise ValueError("m too large for the requested precision")
    src = sobol_columns(alpha * s, m, rows)
    return interlace_matrices(src, alpha, m, rows)
