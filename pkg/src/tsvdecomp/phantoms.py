"""Synthetic test images with known region masks.

Every phantom is a deterministic function of ``(kind, M, N, seed)``. The
masks are ``boundary`` (a band around the region boundaries), ``texture``
(textured interior) and ``flat`` (homogeneous interior); pixels in none of
them form a don't-care band between the boundary band and the interiors.
"""

import numpy as np

KINDS = ("stripes", "tiles", "two-scale")

BAND = 2       # half-width of the boundary band
MARGIN = 6     # interior pixels are at least this far from a boundary

# carrier periods of the two-scale phantom (frequency ratio 4:1)
COARSE_PERIOD = 16
FINE_PERIOD = 4


def _masks(dist, inside):
    boundary = dist <= BAND
    interior = dist >= MARGIN
    return {"boundary": boundary,
            "texture": interior & inside,
            "flat": interior & ~inside}


def _half_plane(m, n):
    # textured right half; boundaries at column n//2 - 1/2 and at the wrap
    j = np.arange(n)
    half = n // 2
    inside = np.broadcast_to(j >= half, (m, n))
    d = np.minimum(np.abs(j + 0.5 - half), np.minimum(j + 0.5, n - j - 0.5))
    return inside, np.broadcast_to(np.floor(d), (m, n))


def _square(m, n):
    # centred square of half the grid size
    i, j = np.mgrid[:m, :n]
    i0, i1, j0, j1 = m // 4, m - m // 4, n // 4, n - n // 4
    inside = (i >= i0) & (i < i1) & (j >= j0) & (j < j1)
    di = np.minimum(np.abs(i + 0.5 - i0), np.abs(i + 0.5 - i1))
    dj = np.minimum(np.abs(j + 0.5 - j0), np.abs(j + 0.5 - j1))
    ii = (i >= i0) & (i < i1)
    jj = (j >= j0) & (j < j1)
    d = np.where(inside, np.minimum(di, dj),
                 np.where(ii, dj, np.where(jj, di, np.hypot(di, dj))))
    return inside, np.floor(d)


def make_phantom(kind, m=64, n=64, seed=0):
    """Build a phantom image in ``[0, 1]`` and its region masks.

    Parameters
    ----------
    kind : {'stripes', 'tiles', 'two-scale'}
        ``stripes``: flat left half, striped right half (horizontal
        stripes of period 4). ``tiles``: checkerboard patch of period 12 on
        a flat background. ``two-scale``: square patch carrying two
        sinusoidal carriers along the columns with periods 16 and 4.
    m, n : int
        Grid size, at least 32.
    seed : int
        Selects the random phase of the texture.

    Returns
    -------
    f : ndarray, shape (m, n)
    masks : dict of str -> bool ndarray
    """
    if kind not in KINDS:
        raise ValueError(f"unknown phantom kind {kind!r}; expected one of {KINDS}")
    if m < 32 or n < 32:
        raise ValueError("phantoms need m, n >= 32")
    rng = np.random.default_rng(seed)
    i, j = np.mgrid[:m, :n]

    if kind == "stripes":
        inside, dist = _half_plane(m, n)
        phase = rng.integers(0, 4)
        texture = 0.65 + 0.2 * np.sin(2 * np.pi * (i + phase) / 4 + np.pi / 4)
        f = np.where(inside, texture, 0.25)
    elif kind == "tiles":
        inside, dist = _square(m, n)
        pi, pj = rng.integers(0, 12, size=2)
        checker = np.sign(np.sin(2 * np.pi * (i + pi + 0.5) / 12)
                          * np.sin(2 * np.pi * (j + pj + 0.5) / 12))
        f = np.where(inside, 0.6 + 0.2 * checker, 0.3)
    else:
        inside, dist = _square(m, n)
        ph = rng.uniform(0, 2 * np.pi, size=2)
        texture = (0.12 * np.sin(2 * np.pi * j / COARSE_PERIOD + ph[0])
                   + 0.04 * np.sin(2 * np.pi * j / FINE_PERIOD + ph[1]))
        f = np.where(inside, 0.55 + texture, 0.3)
    return np.ascontiguousarray(f, dtype=np.float64), _masks(np.asarray(dist), np.asarray(inside))
