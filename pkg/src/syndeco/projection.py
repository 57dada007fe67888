"""KL-projections of a channel onto the nested families.

``ipf_project`` runs iterative proportional fitting on the joint ``q(x, y)``,
starting from ``p(x) / |Y|`` and cycling over the input constraint and the
``(X_I, Y)`` constraints of the requested order.  ``brute_force_project`` is
an independent check that minimises the divergence directly over the
exponential-family coordinates; it is only meant for tiny instances.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    Channel,
    InfiniteDivergenceError,
    SpaceMismatchError,
    channel_divergence_nats,
    kl_nats,
    pushforward,
)
from .hierarchy import cell_groups, constraint_set, pack, subsets_of_order

BRUTE_FORCE_MAX_CELLS = 64


class ConvergenceError(RuntimeError):
    """The solver stopped before its residual reached the tolerance."""

    def __init__(self, message, residual=math.nan, iterations=0, order=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.order = order


class ProjectionInvariantError(RuntimeError):
    """A computed projection broke output preservation or support domination."""


class NonUniqueProjectionWarning(UserWarning):
    """The input distribution has zeros, so the projection may not be unique."""


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and options for iterative scaling.

    ``reduce_support`` finds the support of the limit point with a linear
    program before scaling, which turns the slow approach to a boundary point
    into a fast interior problem on a face.  ``epsilon`` mixes the channel
    with the uniform channel before projecting; it changes the problem and is
    meant for diagnostics only.
    """

    tolerance: float = 1e-10
    max_cycles: int = 100_000
    epsilon: float = 0.0
    reduce_support: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    projected: Channel
    achieved_divergence: float  # nats
    iterations: int
    residual: float
    hit_boundary: bool
    order: int = None

    def divergence(self, base=2):
        return self.achieved_divergence / math.log(base)


def _check_order(p, k, i):
    if p.space != k.space:
        raise SpaceMismatchError(f"{p.space} vs {k.space}")
    n = p.space.n_inputs
    if not 0 <= i <= n:
        raise ValueError(f"order {i} out of range for {n} inputs")


def project_constant(p, k):
    """Projection onto the constant channels: every row becomes ``k_* p``."""
    _check_order(p, k, 0)
    out = pushforward(p, k)
    m = Channel.constant(p.space, out / out.sum())
    _check_invariants(p, k, m, 0.0)
    return ProjectionResult(
        projected=m,
        achieved_divergence=channel_divergence_nats(p, k, m),
        iterations=0,
        residual=0.0,
        hit_boundary=bool(np.any(out == 0)),
        order=0,
    )


def constraint_matrix(groups, offsets):
    """Sparse 0/1 matrix whose rows sum the cells of each marginal cell."""
    from scipy.sparse import coo_matrix

    n_cons, n = groups.shape
    rows = (offsets[:-1, None] + groups).ravel()
    cols = np.tile(np.arange(n), n_cons)
    return coo_matrix((np.ones(rows.size), (rows, cols)), shape=(int(offsets[-1]), n)).tocsr()


def feasible_support(A, b, allowed=None):
    """Cells that are positive for at least one ``q >= 0`` with ``A q = b``.

    The I-projection of a positive starting point has exactly this support,
    and it is the support of every relative-interior point of the polytope.
    Solved as one homogenised linear program: maximise ``sum t`` subject to
    ``A q = lam * b``, ``0 <= t <= min(q, 1)``, ``q, lam >= 0``; any cell that
    can be positive can be scaled up to 1, so ``t`` is 1 exactly on the
    maximal support.  ``allowed`` masks cells that must stay zero.
    """
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix, hstack, identity

    A = csr_matrix(A)
    m_eq, n = A.shape
    if allowed is None:
        allowed = np.ones(n, dtype=bool)
    a_eq = hstack([A, csr_matrix((m_eq, n)), csr_matrix(-np.asarray(b, dtype=float).reshape(-1, 1))]).tocsr()
    a_ub = hstack([-identity(n), identity(n), csr_matrix((n, 1))]).tocsr()
    cost = np.concatenate([np.zeros(n), -np.ones(n), [0.0]])
    bounds = [(0, None if ok else 0) for ok in allowed] + [(0, 1)] * n + [(0, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=np.zeros(m_eq), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"support linear program failed: {res.message}")
    return res.x[n:2 * n] > 0.5


def _joint_problem(p, k, i, cfg):
    rows = k.rows
    if cfg.epsilon > 0:
        rows = (1.0 - cfg.epsilon) * rows + cfg.epsilon / k.space.output_cardinality
        k = Channel(k.space, rows)
    cons = constraint_set(p, k, i)
    groups, targets, offsets = pack(p.space, cons.constraints)
    return k, groups, targets, offsets


def _initial_joint(p):
    ny = p.space.output_cardinality
    return np.repeat(p.table / ny, ny)


def _channel_from_joint(p, q):
    space = p.space
    ny = space.output_cardinality
    q = q.reshape(space.input_size, ny)
    mass = q.sum(axis=1)
    out = q.sum(axis=0)
    rows = np.empty_like(q)
    live = mass > 0
    rows[live] = q[live] / mass[live, None]
    rows[~live] = out / out.sum()
    return Channel(space, rows)


def _check_invariants(p, k, m, residual):
    """Output preservation and support domination."""
    gap = float(np.abs(pushforward(p, m) - pushforward(p, k)).max())
    cap = 1e-9 + p.space.input_size * p.space.output_cardinality * residual
    if gap > cap:
        raise ProjectionInvariantError(f"output distribution moved by {gap:.3e} (allowed {cap:.3e})")
    dominated = (p.table[:, None] * k.rows > 0) & (m.rows <= 0)
    if np.any(dominated):
        x, y = np.argwhere(dominated)[0]
        raise ProjectionInvariantError(f"projection vanishes at ({int(x)}; {int(y)}) where pk > 0")


def ipf_project(p, k, i, cfg=None, backend=None):
    """KL-projection of ``k`` onto the order-``i`` family by iterative scaling.

    Raises :class:`ConvergenceError` when the marginal residual is still above
    ``cfg.tolerance`` after ``cfg.max_cycles`` cycles.
    """
    cfg = cfg or SolverConfig()
    _check_order(p, k, i)
    if not p.strictly_positive:
        warnings.warn(
            "input distribution has zeros; the projection is computed on its support and may not be unique",
            NonUniqueProjectionWarning,
            stacklevel=2,
        )
    kern = _kernels.get_kernels(backend)
    k_target, groups, targets, offsets = _joint_problem(p, k, i, cfg)
    q = _initial_joint(p)
    pk = (p.table[:, None] * k_target.rows).ravel()
    if cfg.reduce_support and np.any((pk == 0) & (q > 0)):
        q[~feasible_support(constraint_matrix(groups, offsets), targets, q > 0)] = 0.0
    cycles, residual = kern.ipf_run(q, groups, targets, offsets, cfg.tolerance, cfg.max_cycles)
    residual = float(residual)
    if not residual <= cfg.tolerance:
        raise ConvergenceError(
            f"iterative scaling at order {i} stopped after {cycles} cycles with residual {residual:.3e}",
            residual=residual,
            iterations=int(cycles),
            order=i,
        )
    m = _channel_from_joint(p, q)
    _check_invariants(p, k_target, m, residual)
    on_support = np.repeat(p.table > 0, p.space.output_cardinality)
    return ProjectionResult(
        projected=m,
        achieved_divergence=channel_divergence_nats(p, k, m),
        iterations=int(cycles),
        residual=residual,
        hit_boundary=bool(np.any(q[on_support] == 0)),
        order=i,
    )


def ipf_trace(p, k, i, cycles, reduce_support=False, backend=None):
    """``D(pk || q)`` in nats after each of ``cycles`` full scaling cycles."""
    _check_order(p, k, i)
    kern = _kernels.get_kernels(backend)
    _, groups, targets, offsets = _joint_problem(p, k, i, SolverConfig())
    q = _initial_joint(p)
    pk = (p.table[:, None] * k.rows).ravel()
    if reduce_support:
        q[~feasible_support(constraint_matrix(groups, offsets), targets, q > 0)] = 0.0
    work = np.empty(int(np.diff(offsets).max()))
    out = []
    for _ in range(cycles):
        kern.ipf_cycle(q, groups, targets, offsets, work)
        out.append(kl_nats(pk, q))
    return out


def generator_layout(space, i):
    """Parameter index of every joint cell for each generator subset of size <= i.

    Returns an ``(n_cells, n_subsets)`` int array and the parameter count.
    """
    cols = []
    n_params = 0
    for size in range(i + 1):
        for subset in subsets_of_order(space.n_inputs, size):
            g = cell_groups(space, subset, True)
            cols.append(g + n_params)
            n_params += int(g.max()) + 1
    return np.stack(cols, axis=1).astype(np.int64), n_params


def exponential_channel(space, theta, layout):
    """Channel with logits ``sum_I f_I(x_I, y)`` normalised per row."""
    logits = np.asarray(theta)[layout].sum(axis=1).reshape(space.input_size, space.output_cardinality)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return Channel(space, w / w.sum(axis=1, keepdims=True))


def brute_force_project(p, k, i, resolution=1e-9, n_starts=3, seed=0, width=4.0, max_sweeps=20_000, backend=None):
    """Minimise ``D_p(k || m)`` over exponential-family channels ``m`` directly.

    Multi-start cyclic coordinate descent over the generator coordinates, each
    coordinate step a golden-section search of half-width ``width`` refined
    to ``resolution``.  Independent of the scaling path; desk scale only.
    """
    _check_order(p, k, i)
    space = p.space
    nx, ny = space.input_size, space.output_cardinality
    if nx * ny > BRUTE_FORCE_MAX_CELLS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_CELLS} cells, got {nx * ny}")
    kern = _kernels.get_kernels(backend)
    layout, n_params = generator_layout(space, i)
    px = np.ascontiguousarray(p.table, dtype=float)
    pk = (px[:, None] * k.rows).ravel()
    rng = np.random.default_rng(seed)
    best = None
    for s in range(n_starts):
        theta = np.zeros(n_params) if s == 0 else rng.uniform(-2.0, 2.0, n_params)
        f, sweeps = kern.expfam_cd(theta, layout, pk, px, nx, ny, width, resolution, 1e-15, max_sweeps)
        if best is None or f < best[0]:
            best = (f, theta.copy(), int(sweeps))
    _, theta, sweeps = best
    m = exponential_channel(space, theta, layout)
    groups, targets, offsets = pack(space, constraint_set(p, k, i).constraints)
    q = (px[:, None] * m.rows).ravel()
    residual = float(_kernels.NUMPY_KERNELS.constraint_residual(q, groups, targets, offsets))
    try:
        achieved = channel_divergence_nats(p, k, m)
    except InfiniteDivergenceError:  # pragma: no cover - softmax rows are positive
        achieved = math.inf
    return ProjectionResult(
        projected=m,
        achieved_divergence=achieved,
        iterations=sweeps,
        residual=residual,
        hit_boundary=bool(np.any(m.rows == 0)),
        order=i,
    )
