"""Operator-splitting solver for the TSV-weighted decomposition.

The energy minimised in each stage is::

    alpha1 * sum|grad u| + alpha2 * sum|g|^2
        + 1/(2 theta) * sum (u + div(g)/eta - f)^2

with the texture ``v = div(g) / eta``. One iteration is a two-fragment Lie
step: soft shrinkage of ``p`` (the auxiliary for ``grad u``), a
frozen-coefficient solve for ``g`` and the matching ``v``, then a joint
solve for ``(u, v)`` followed by ``p = grad u``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .grid import as_field, as_vector_field, divergence, gradient
from .spectral import SpectralSymbols
from .tsv import TsvParams, WeightField, build_eta, nlm_denoise

log = logging.getLogger(__name__)


class SolverDivergenceError(RuntimeError):
    """Raised when an iterate develops non-finite samples."""


@dataclass(frozen=True)
class SolverParams:
    """Solver parameters.

    ``alpha2 / alpha1`` plays the role of the G-norm trade-off ``lam``.
    ``tol`` enables an optional early exit between restart stages when the
    relative change of ``u`` falls below it; ``None`` runs the full budget.

    With ``stabilize`` set, the frozen coefficient actually used in a stage
    is ``max(c_frozen, (min(1/eta**2) + max(1/eta**2)) / 2)``. The explicit
    remainder of the g-update amplifies high frequencies unless the frozen
    coefficient is at least half the largest ``1/eta**2``; the midpoint
    minimises the worst amplification. The fixed point does not depend on
    the frozen coefficient.
    """

    alpha1: float = 0.03
    alpha2: float = 0.3
    theta: float = 1e-6
    dt: float = 0.08
    c_frozen: float = 1.0
    max_iters: int = 2000
    restart_every: int = 400
    eta_mode: str = "tsv"
    constant_eta: float = 1.0
    tol: float = None
    stabilize: bool = True

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "theta", "dt", "c_frozen", "constant_eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1 or self.restart_every < 1:
            raise ValueError("max_iters and restart_every must be positive")
        if self.restart_every > self.max_iters:
            raise ValueError("restart_every must not exceed max_iters")
        if self.eta_mode not in ("tsv", "constant"):
            raise ValueError(f"eta_mode must be 'tsv' or 'constant', got {self.eta_mode!r}")

    @property
    def lam(self):
        return self.alpha2 / self.alpha1

    def schedule(self):
        """Iteration counts of the restart stages."""
        full, rest = divmod(self.max_iters, self.restart_every)
        return [self.restart_every] * full + ([rest] if rest else [])


@dataclass
class SolverState:
    u: np.ndarray
    v: np.ndarray
    g: np.ndarray
    p: np.ndarray
    iter: int = 0

    @classmethod
    def initial(cls, f):
        """Start at ``u = f``, ``p = grad f``, ``g = 0``, ``v = 0``."""
        f = as_field(f, "f")
        return cls(u=f.copy(), v=np.zeros_like(f), g=np.zeros((2,) + f.shape),
                   p=gradient(f))


class EnergyTrace:
    """Per-iteration energy terms; columns ``iter, tv, g, fid, total``."""

    columns = ("iter", "tv", "g", "fid", "total")

    def __init__(self):
        self._rows = []

    def append(self, iteration, tv, g_term, fid):
        self._rows.append((int(iteration), tv, g_term, fid, tv + g_term + fid))

    def extend(self, other, offset=0):
        for it, tv, g_term, fid, total in other._rows:
            self._rows.append((it + offset, tv, g_term, fid, total))

    def __len__(self):
        return len(self._rows)

    def __getitem__(self, idx):
        return self._rows[idx]

    def __iter__(self):
        return iter(self._rows)

    @property
    def total(self):
        return np.array([r[4] for r in self._rows])

    def as_array(self):
        return np.array(self._rows, dtype=np.float64).reshape(-1, 5)


@dataclass
class DecompositionResult:
    u: np.ndarray
    v_total: np.ndarray
    eta_stages: list
    trace: EnergyTrace
    stage_u: list = field(default_factory=list)
    stage_v: list = field(default_factory=list)


def shrink_p(p, dt, alpha1):
    """Pixelwise isotropic soft shrinkage of the 2-vector field `p`.

    Returns ``max(0, 1 - dt*alpha1/|p|) * p``, with 0 where ``p = 0``.
    """
    p = np.asarray(p, dtype=np.float64)
    norm = np.hypot(p[0], p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        # -inf at p = 0 (nan if also dt*alpha1 = 0); fmax maps both to 0
        scale = np.fmax(1.0 - (dt * alpha1) / norm, 0.0)
    return p * scale


def _check_eta(eta):
    arr = eta.eta if isinstance(eta, WeightField) else np.asarray(eta, dtype=np.float64)
    if not np.all(arr > 0):
        raise ValueError("eta must be strictly positive")
    return arr


def frozen_coefficient(eta, params):
    """Frozen coefficient used for weight `eta` (see `SolverParams`)."""
    if not params.stabilize:
        return params.c_frozen
    q = 1.0 / _check_eta(eta) ** 2
    return max(params.c_frozen, 0.5 * (q.min() + q.max()))


class _Stage:
    # per-stage constants: 1/eta, c - 1/eta^2 and the spectral tables
    def __init__(self, f, eta, params):
        self.f = f
        eta = _check_eta(eta)
        self.inv_eta = 1.0 / eta
        self.params = params
        self.c = frozen_coefficient(eta, params)
        self.c_minus_q = self.c - self.inv_eta ** 2
        self.sym = SpectralSymbols(f.shape, params.dt, params.alpha2,
                                   self.c, params.theta)

    def g_step(self, g, v, div_g=None):
        """Return ``(g_half, v_half, div(g_half))``."""
        if div_g is None:
            div_g = divergence(g)
        w = self.c_minus_q * div_g
        w += self.inv_eta * v
        # b_k = g_k - d_k^+ w
        b = g + w
        b[0] -= np.roll(w, -1, axis=0)
        b[1] -= np.roll(w, -1, axis=1)
        g_half = self.sym.solve_g(b)
        div_half = divergence(g_half)
        return g_half, self.inv_eta * div_half, div_half

    def uv_step(self, state, p_half, v_half):
        u, v = self.sym.solve_uv(divergence(p_half), v_half, self.f)
        return SolverState(u=u, v=v, g=state.g, p=gradient(u), iter=state.iter + 1)

    def energy(self, u, g, grad_u=None, g_texture=None):
        # g_texture = div(g) / eta and grad_u may be passed in when known
        p = self.params
        if grad_u is None:
            grad_u = gradient(u)
        if g_texture is None:
            g_texture = self.inv_eta * divergence(g)
        tv = p.alpha1 * np.hypot(grad_u[0], grad_u[1]).sum()
        g_term = p.alpha2 * np.vdot(g, g)
        res = u + g_texture
        res -= self.f
        fid = np.vdot(res, res) / (2.0 * p.theta)
        return tv, g_term, fid


def g_step(state, eta, params):
    """Frozen-coefficient g update and the matching texture ``v = div(g)/eta``.

    Returns ``(g_half, v_half)``.
    """
    stage = _Stage(state.u, eta, params)
    return stage.g_step(state.g, state.v)[:2]


def uv_step(state, p_half, v_half, f, params):
    """Joint (u, v) solve, then ``p = grad u``; ``g`` is carried unchanged."""
    f = as_field(f, "f")
    stage = _Stage(f, WeightField.constant(f.shape, 1.0), params)
    return stage.uv_step(state, p_half, v_half)


def energy(u, g, f, eta, params):
    """Energy terms ``(tv, g_term, fid, total)`` of the current iterate."""
    tv, g_term, fid = _Stage(as_field(f, "f"), eta, params).energy(u, g)
    return tv, g_term, fid, tv + g_term + fid


def run_stage(f, eta, params, iters, callback=None):
    """Run `iters` splitting iterations on data `f` with fixed weight `eta`.

    Parameters
    ----------
    f : ndarray, shape (M, N)
        Data of this stage.
    eta : WeightField or ndarray
        Positive weight map.
    params : SolverParams
    iters : int
    callback : callable, optional
        Called as ``callback(state)`` after every iteration.

    Returns
    -------
    u, v : ndarray
        Structure and texture after the last iteration.
    trace : EnergyTrace
        One row per iteration, numbered from 1.
    """
    f = as_field(f, "f")
    stage = _Stage(f, eta, params)
    state = SolverState.initial(f)
    trace = EnergyTrace()
    div_g = np.zeros_like(f)
    for _ in range(iters):
        p_half = shrink_p(state.p, params.dt, params.alpha1)
        state.g, v_half, div_g = stage.g_step(state.g, state.v, div_g)
        state = stage.uv_step(state, p_half, v_half)
        # g is unchanged by the (u, v) step, so div(g)/eta is still v_half
        tv, g_term, fid = stage.energy(state.u, state.g, state.p, v_half)
        trace.append(state.iter, tv, g_term, fid)
        if not (np.isfinite(tv + g_term + fid) and np.isfinite(state.v.sum())):
            raise SolverDivergenceError(
                f"non-finite iterate at iteration {state.iter} "
                f"(dt={params.dt}, theta={params.theta}, c={stage.c:g})")
        if callback is not None:
            callback(state)
    return state.u, state.v, trace


def stage_weight(f, tsv_params, params):
    """Weight used for one stage: TSV-based or constant."""
    if params.eta_mode == "constant":
        return WeightField.constant(f.shape, params.constant_eta)
    return build_eta(f, tsv_params)


def decompose(f, tsv_params=None, solver_params=None, denoise=False, nlm=None,
              callback=None):
    """Cartoon + texture decomposition with restarts.

    Stage ``k`` decomposes the previous structure ``u^(k-1)`` (``u^(0) = f``)
    with a weight computed from it; the returned texture is the sum of the
    stage textures. When `denoise` is set, the first weight is computed from
    a non-local-means filtered copy of `f` (the solver still sees `f`).

    Parameters
    ----------
    f : ndarray, shape (M, N)
    tsv_params : TsvParams, optional
    solver_params : SolverParams, optional
    denoise : bool
    nlm : dict, optional
        Keyword arguments for `nlm_denoise`.
    callback : callable, optional
        Called as ``callback(state, stage_index, stage_f)`` after every
        iteration.

    Returns
    -------
    DecompositionResult
    """
    f = as_field(f, "f")
    tsv_params = tsv_params or TsvParams()
    params = solver_params or SolverParams()

    u_prev = f
    v_total = np.zeros_like(f)
    result = DecompositionResult(u=f, v_total=v_total, eta_stages=[], trace=EnergyTrace())
    for k, iters in enumerate(params.schedule()):
        src = u_prev
        if k == 0 and denoise and params.eta_mode == "tsv":
            src = nlm_denoise(f, **(nlm or {}))
        eta = stage_weight(src, tsv_params, params)
        result.eta_stages.append(eta)

        cb = None
        if callback is not None:
            stage_f = u_prev

            def cb(state, k=k, stage_f=stage_f):
                callback(state, k, stage_f)

        u, v, trace = run_stage(u_prev, eta, params, iters, callback=cb)
        result.trace.extend(trace, offset=len(result.trace))
        v_total = v_total + v
        result.stage_u.append(u)
        result.stage_v.append(v)
        log.debug("stage %d: %d iterations, energy %.6g", k + 1, iters, trace.total[-1])

        change = np.linalg.norm(u - u_prev) / max(np.linalg.norm(u_prev), 1e-300)
        u_prev = u
        if params.tol is not None and change < params.tol:
            log.info("stopping after stage %d: relative change %.3g", k + 1, change)
            break

    result.u = u_prev
    result.v_total = v_total
    return result
