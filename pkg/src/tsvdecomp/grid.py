"""Periodic difference operators on a rectangular grid.

Scalar fields are 2-D float64 arrays of shape ``(M, N)``; vector fields are
arrays of shape ``(2, M, N)`` whose two components live on the same grid.
Axis 1 is the first array index (rows) and axis 2 the second (columns).
Axes 3 and 4 are the diagonals ``(+1, +1)`` and ``(+1, -1)``.
"""

import numpy as np

MIN_SIZE = 4

# unit step (di, dj) of each difference axis
AXIS_STEPS = {1: (1, 0), 2: (0, 1), 3: (1, 1), 4: (1, -1)}


def as_field(a, name="field"):
    """Return `a` as a float64 scalar field, validating shape and finiteness."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < MIN_SIZE or a.shape[1] < MIN_SIZE:
        raise ValueError(f"{name} must be at least {MIN_SIZE}x{MIN_SIZE}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite samples")
    return a


def as_vector_field(a, name="vector field"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3 or a.shape[0] != 2:
        raise ValueError(f"{name} must have shape (2, M, N), got {a.shape}")
    as_field(a[0], name)
    as_field(a[1], name)
    return a


def shift(u, di, dj):
    """Return ``s`` with ``s[i, j] = u[i + di, j + dj]`` (periodic)."""
    return np.roll(u, (-di, -dj), axis=(0, 1))


def diff(u, axis, direction="forward"):
    """Periodic one-step difference of `u` along `axis` (1-4).

    Forward: ``u(x + e) - u(x)``. Backward: ``u(x) - u(x - e)``, where ``e``
    is the unit step of the axis. Diagonal steps are not rescaled.
    """
    try:
        di, dj = AXIS_STEPS[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 1, 2, 3, 4, got {axis!r}") from None
    if direction == "forward":
        return shift(u, di, dj) - u
    if direction == "backward":
        return u - shift(u, -di, -dj)
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def gradient(u):
    """Forward-difference gradient, shape ``(2, M, N)``."""
    return np.stack([diff(u, 1, "forward"), diff(u, 2, "forward")])


def divergence(g):
    """Backward-difference divergence; the negative adjoint of `gradient`."""
    return diff(g[0], 1, "backward") + diff(g[1], 2, "backward")


def laplacian(u):
    """Periodic 5-point Laplacian, equal to ``divergence(gradient(u))``."""
    return (shift(u, 1, 0) + shift(u, -1, 0) + shift(u, 0, 1) + shift(u, 0, -1)
            - 4.0 * u)
