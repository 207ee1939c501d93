"""Shared test oracles and raster generators.

The oracles here are deliberately brute force and independent of the
package's compute paths: windowed extrema via numpy sliding windows,
openings via explicit translate enumeration, and per-level run counting
via direct thresholding. Expected values frozen in the test modules
were produced with these.
"""

import numpy as np
import pytest

from demgranulo import _kernels
from demgranulo.dem import Dem


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    _kernels.warmup()


# ---------------------------------------------------------------------------
# Naive reference implementations
# ---------------------------------------------------------------------------


def naive_window_extremum(values, k, minimum):
    """Windowed min/max with pad-0 reads, by sliding-window enumeration."""
    arr = np.asarray(values, dtype=np.int64)
    padded = np.zeros(arr.size + 2 * k, dtype=np.int64)
    padded[k:k + arr.size] = arr
    windows = np.lib.stride_tricks.sliding_window_view(padded, 2 * k + 1)
    return windows.min(axis=1) if minimum else windows.max(axis=1)


def se_translates(se):
    """Offsets of a structuring element as (row, col) int pairs."""
    return [(dy, dx) for dx, dy in sorted(se.offsets)]


def naive_erode(dem, se, minimum=True):
    """Direct per-cell extremum over offsets, pad-0 outside the domain."""
    h, w = dem.height, dem.width
    out = np.zeros((h, w), dtype=np.int64)
    offs = se_translates(se)
    for r in range(h):
        for c in range(w):
            vals = []
            for dr, dc in offs:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and dem.mask[rr, cc]:
                    vals.append(int(dem.values[rr, cc]))
                else:
                    vals.append(0)
            out[r, c] = min(vals) if minimum else max(vals)
    return Dem(np.where(dem.mask, out, 0), dem.mask)


def translate_fit_opening(dem, se):
    """Opening as the explicit supremum over translates inside the domain.

    At each domain cell: the max over all element translates that lie
    entirely on present cells and cover the cell, of the min elevation
    over the translate; 0 when no translate fits.
    """
    h, w = dem.height, dem.width
    offs = se_translates(se)
    out = np.zeros((h, w), dtype=np.int64)
    for yr in range(-max(abs(o[0]) for o in offs) - h, 2 * h + 1):
        for yc in range(-max(abs(o[1]) for o in offs) - w, 2 * w + 1):
            cells = [(yr + dr, yc + dc) for dr, dc in offs]
            if not all(0 <= r < h and 0 <= c < w and dem.mask[r, c]
                       for r, c in cells):
                continue
            m = min(int(dem.values[r, c]) for r, c in cells)
            for r, c in cells:
                if m > out[r, c]:
                    out[r, c] = m
    return Dem(np.where(dem.mask, out, 0), dem.mask)


def binary_open_set(cells, se):
    """Binary opening: union of element translates inside the cell set."""
    offs = se_translates(se)
    cells = set(cells)
    out = set()
    for yr, yc in cells:
        translate = {(yr + dr, yc + dc) for dr, dc in offs}
        if translate <= cells:
            out |= translate
    return out


def threshold_cells(dem, h):
    """Domain cells with elevation >= h."""
    rows, cols = np.nonzero(dem.mask & (dem.values >= h))
    return set(zip(rows.tolist(), cols.tolist()))


def brute_runs_per_line(seq, h):
    """Lengths of maximal runs of values >= h in a masked 1-D sequence.

    ``seq`` holds ints with None for masked cells.
    """
    lengths = []
    run = 0
    for v in seq:
        if v is not None and v >= h:
            run += 1
        else:
            if run:
                lengths.append(run)
            run = 0
    if run:
        lengths.append(run)
    return lengths


# ---------------------------------------------------------------------------
# Generators (plain rng; hypothesis strategies live in the test modules)
# ---------------------------------------------------------------------------


def rng_for(seed):
    return np.random.default_rng(seed)
