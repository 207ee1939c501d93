"""Hot numeric kernels: streaming windowed extrema and peak-slab sweeps.

Every kernel exists in two interchangeable builds operating on the same
numpy arrays: one compiled with numba's @njit and a plain-Python one.
The active build is chosen at import time (set ``DEMGRANULO_NO_NUMBA=1``
to force the pure path) and can be switched at runtime with
:func:`use_numba`, which the benchmark and the backend-equivalence tests
rely on. Both builds are generated from the same source, so they cannot
drift apart.

Conventions baked into every kernel:

* elevation arrays are ``int64`` with ``0`` stored at masked cells;
* reads outside the raster (or at masked cells) yield ``0``, so a
  windowed minimum is ``0`` wherever the window leaves the domain while
  a windowed maximum is unaffected (values are non-negative).
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAS_NUMBA = False

# Direction codes shared with the rest of the package.
ROW = 0
COLUMN = 1
DIAG_DOWN = 2
DIAG_UP = 3

_I64_MAX = np.int64(np.iinfo(np.int64).max)


def _build(jit):
    """Build the kernel set, numba-compiled when ``jit`` is true."""

    if jit:
        wrap = njit(cache=False)
    else:
        def wrap(fn):
            return fn

    @wrap
    def window_extremum(padded, n, k, minimum, out):
        # van Herk / Gil-Werman running extremum. padded has length
        # n + 2k and already contains the boundary pads; out[j] is the
        # extremum of padded[j : j + 2k + 1] for j in [0, n), i.e. the
        # centred window of half-width k on the unpadded line. Block
        # prefix/suffix arrays give O(1) comparisons per sample
        # independent of k.
        m = n + 2 * k
        w = 2 * k + 1
        pre = np.empty(m, dtype=np.int64)
        suf = np.empty(m, dtype=np.int64)
        b = 0
        while b < m:
            e = b + w
            if e > m:
                e = m
            acc = padded[b]
            pre[b] = acc
            for i in range(b + 1, e):
                v = padded[i]
                if minimum:
                    if v < acc:
                        acc = v
                else:
                    if v > acc:
                        acc = v
                pre[i] = acc
            acc = padded[e - 1]
            suf[e - 1] = acc
            for i in range(e - 2, b - 1, -1):
                v = padded[i]
                if minimum:
                    if v < acc:
                        acc = v
                else:
                    if v > acc:
                        acc = v
                suf[i] = acc
            b += w
        for j in range(n):
            a = suf[j]
            c = pre[j + 2 * k]
            if minimum:
                out[j] = a if a < c else c
            else:
                out[j] = a if a > c else c

    @wrap
    def filter_rows(values, k, minimum, out):
        h, w = values.shape
        padded = np.zeros(w + 2 * k, dtype=np.int64)
        for r in range(h):
            for c in range(w):
                padded[k + c] = values[r, c]
            window_extremum(padded, w, k, minimum, out[r])

    @wrap
    def filter_columns(values, k, minimum, out):
        h, w = values.shape
        padded = np.zeros(h + 2 * k, dtype=np.int64)
        line = np.empty(h, dtype=np.int64)
        for c in range(w):
            for r in range(h):
                padded[k + r] = values[r, c]
            window_extremum(padded, h, k, minimum, line)
            for r in range(h):
                out[r, c] = line[r]

    @wrap
    def filter_diagonals(values, k, minimum, anti, out):
        h, w = values.shape
        maxlen = h if h < w else w
        padded = np.zeros(maxlen + 2 * k, dtype=np.int64)
        line = np.empty(maxlen, dtype=np.int64)
        for li in range(h + w - 1):
            if anti:
                # lines of constant r + c, walked with step (+1, -1)
                r0 = li - (w - 1)
                if r0 < 0:
                    r0 = 0
                c0 = li - r0
                rend = li if li < h - 1 else h - 1
                length = rend - r0 + 1
                dc = -1
            else:
                # lines of constant c - r, walked with step (+1, +1)
                d = li - (h - 1)
                r0 = -d if d < 0 else 0
                c0 = d if d > 0 else 0
                la = h - 1 - r0
                lb = w - 1 - c0
                length = (la if la < lb else lb) + 1
                dc = 1
            for i in range(length):
                padded[k + i] = values[r0 + i, c0 + i * dc]
            # pads beyond this line may hold stale samples from a
            # longer previous line; the window reads k cells past it
            for i in range(k + length, length + 2 * k):
                padded[i] = 0
            window_extremum(padded, length, k, minimum, line)
            for i in range(length):
                out[r0 + i, c0 + i * dc] = line[i]

    @wrap
    def offset_extremum(values, off_r, off_c, minimum, out):
        # Direct windowed extremum over an arbitrary offset set, with
        # out-of-raster reads as 0. Used for structuring elements that
        # are neither a line nor a square.
        h, w = values.shape
        m = off_r.shape[0]
        for r in range(h):
            for c in range(w):
                if minimum:
                    acc = _I64_MAX
                else:
                    acc = np.int64(-1)
                for t in range(m):
                    rr = r + off_r[t]
                    cc = c + off_c[t]
                    if rr >= 0 and rr < h and cc >= 0 and cc < w:
                        v = values[rr, cc]
                    else:
                        v = np.int64(0)
                    if minimum:
                        if v < acc:
                            acc = v
                    else:
                        if v > acc:
                            acc = v
                out[r, c] = acc

    @wrap
    def directional_loss(values, direction, loss, stack_pos, stack_lev):
        # Single-pass volume-loss accumulation per scan line. Walks each
        # line once maintaining a stack of (start, level) pairs, exactly
        # like the classic largest-rectangle-in-histogram sweep. Every
        # pop is one maximal slab: a run of `width` cells spanning the
        # levels (base, lev]. Such a slab survives an opening with a
        # segment of length t iff t <= width, so its whole volume
        # width * (lev - base) is lost when the segment first exceeds
        # the width; it is binned at loss[width].
        h, w = values.shape
        if direction == 0:
            nlines = h
        elif direction == 1:
            nlines = w
        else:
            nlines = h + w - 1
        for li in range(nlines):
            if direction == 0:
                r0 = li
                c0 = 0
                dr = 0
                dc = 1
                length = w
            elif direction == 1:
                r0 = 0
                c0 = li
                dr = 1
                dc = 0
                length = h
            elif direction == 2:
                d = li - (h - 1)
                r0 = -d if d < 0 else 0
                c0 = d if d > 0 else 0
                la = h - 1 - r0
                lb = w - 1 - c0
                length = (la if la < lb else lb) + 1
                dr = 1
                dc = 1
            else:
                r0 = li - (w - 1)
                if r0 < 0:
                    r0 = 0
                c0 = li - r0
                rend = li if li < h - 1 else h - 1
                length = rend - r0 + 1
                dr = 1
                dc = -1
            sp = 0
            for idx in range(length + 1):
                if idx < length:
                    v = values[r0 + idx * dr, c0 + idx * dc]
                else:
                    v = np.int64(0)  # sentinel: lines end on masked ground
                start = idx
                while sp > 0 and stack_lev[sp - 1] > v:
                    lev = stack_lev[sp - 1]
                    st = stack_pos[sp - 1]
                    sp -= 1
                    if sp > 0 and stack_lev[sp - 1] > v:
                        base = stack_lev[sp - 1]
                    else:
                        base = v
                    width = idx - st
                    loss[width] += width * (lev - base)
                    start = st
                if v > 0 and (sp == 0 or stack_lev[sp - 1] < v):
                    stack_pos[sp] = start
                    stack_lev[sp] = v
                    sp += 1

    return {
        "window_extremum": window_extremum,
        "filter_rows": filter_rows,
        "filter_columns": filter_columns,
        "filter_diagonals": filter_diagonals,
        "offset_extremum": offset_extremum,
        "directional_loss": directional_loss,
    }


_PURE = _build(False)
_JITTED = _build(True) if HAS_NUMBA else None

_env_off = os.environ.get("DEMGRANULO_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}
_active = _JITTED if (_JITTED is not None and not _env_off) else _PURE


def use_numba(enabled):
    """Select the kernel build at runtime; returns the build in effect."""
    global _active
    if enabled and _JITTED is not None:
        _active = _JITTED
    else:
        _active = _PURE
    return _active is _JITTED


def numba_active():
    return _active is _JITTED


def backends():
    """All available builds, keyed ``pure`` / ``jit`` (``jit`` may be absent)."""
    out = {"pure": _PURE}
    if _JITTED is not None:
        out["jit"] = _JITTED
    return out


# ---------------------------------------------------------------------------
# Array-level wrappers (allocation, dtype and dispatch)
# ---------------------------------------------------------------------------


def _as_int64_2d(values):
    arr = np.ascontiguousarray(values, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    return arr


def directional_extremum(values, direction, k, minimum, kernels=None):
    """Windowed min/max of half-width ``k`` along one scan direction."""
    ks = _active if kernels is None else kernels
    arr = _as_int64_2d(values)
    out = np.empty_like(arr)
    if direction == ROW:
        ks["filter_rows"](arr, k, minimum, out)
    elif direction == COLUMN:
        ks["filter_columns"](arr, k, minimum, out)
    elif direction == DIAG_DOWN:
        ks["filter_diagonals"](arr, k, minimum, False, out)
    elif direction == DIAG_UP:
        ks["filter_diagonals"](arr, k, minimum, True, out)
    else:
        raise ValueError(f"unknown direction code {direction}")
    return out


def offset_extremum(values, offsets_rc, minimum, kernels=None):
    """Windowed min/max over an explicit (row, col) offset list."""
    ks = _active if kernels is None else kernels
    arr = _as_int64_2d(values)
    off = np.asarray(offsets_rc, dtype=np.int64).reshape(-1, 2)
    out = np.empty_like(arr)
    ks["offset_extremum"](arr, np.ascontiguousarray(off[:, 0]),
                          np.ascontiguousarray(off[:, 1]), minimum, out)
    return out


def line_extremum(values, k, minimum, kernels=None):
    """1-D windowed min/max with zero padding, half-width ``k``."""
    ks = _active if kernels is None else kernels
    arr = np.ascontiguousarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D array")
    n = arr.shape[0]
    padded = np.zeros(n + 2 * k, dtype=np.int64)
    padded[k:k + n] = arr
    out = np.empty(n, dtype=np.int64)
    ks["window_extremum"](padded, n, k, minimum, out)
    return out


def max_line_length(shape, direction):
    h, w = shape
    if direction == ROW:
        return w
    if direction == COLUMN:
        return h
    return min(h, w)


def directional_loss(values, direction, kernels=None):
    """Volume lost per run length along one direction, as ``loss[t]``.

    ``loss[t]`` totals ``t * (level span)`` over every maximal slab of
    width ``t``; suffix sums of ``loss`` give the volume surviving an
    opening with a segment of any length.
    """
    ks = _active if kernels is None else kernels
    arr = _as_int64_2d(values)
    maxlen = max_line_length(arr.shape, direction)
    loss = np.zeros(maxlen + 2, dtype=np.int64)
    stack_pos = np.empty(maxlen + 1, dtype=np.int64)
    stack_lev = np.empty(maxlen + 1, dtype=np.int64)
    ks["directional_loss"](arr, direction, loss, stack_pos, stack_lev)
    return loss


def warmup():
    """Trigger JIT compilation of every kernel on a tiny input.

    Covers both the writable and the read-only array signatures; raster
    values are stored read-only, which numba types distinctly.
    """
    tiny = np.arange(9, dtype=np.int64).reshape(3, 3) % 4
    frozen = tiny.copy()
    frozen.flags.writeable = False
    for arr in (tiny, frozen):
        for d in (ROW, COLUMN, DIAG_DOWN, DIAG_UP):
            directional_extremum(arr, d, 1, True)
            directional_extremum(arr, d, 1, False)
            directional_loss(arr, d)
        offset_extremum(arr, [(0, 0), (1, 1), (-1, -1)], True)
        offset_extremum(arr, [(0, 0), (1, 1), (-1, -1)], False)
        line_extremum(arr[0], 1, True)
