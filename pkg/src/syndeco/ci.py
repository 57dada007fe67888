"""The complementary-information (CI) synergy measure for two inputs.

CI subtracts from ``I(Y : X_1, X_2)`` its minimum over the joints sharing
the ``(X_1, Y)`` and ``(X_2, Y)`` marginals (the wedge polytope).  Fixing the
``(X_1, X_2)`` marginal as well (the triangle polytope) gives the pairwise
synergy ``d_2`` instead, so ``d_2 <= CI``.

Also here: the one-parameter channel/input families used to show that CI
overestimates synergy, the alpha-matching that keeps the pairwise marginals
fixed while beta varies, and the resulting lower-bound sweep and heatmap.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from . import _kernels
from .core import Channel, ChannelSpace, InputDistribution, JointDistribution, compose_joint, mutual_information_nats
from .projection import ConvergenceError, feasible_support

FEASIBILITY_TOL = 1e-9


class PolytopeKind(enum.Enum):
    WEDGE = "wedge"
    TRIANGLE = "triangle"


class InfeasibleStartError(ValueError):
    pass


class BracketError(ValueError):
    """The best alpha sits on the search bracket with a non-zero residual."""


@dataclass(frozen=True, eq=False)
class MarginalPolytope:
    kind: PolytopeKind
    shape: tuple  # (|X_1|, |X_2|, |Y|)
    A: np.ndarray
    b: np.ndarray
    null_space_basis: np.ndarray  # rows are directions
    reference: np.ndarray  # flat joint the constraints were read from

    @property
    def dimension(self):
        return self.null_space_basis.shape[0]

    def residual(self, q):
        return float(np.abs(self.A @ np.ravel(q) - self.b).max())


def _indicator_rows(shape, axes):
    coords = np.indices(shape).reshape(len(shape), -1)
    idx = np.ravel_multi_index(tuple(coords[a] for a in axes), tuple(shape[a] for a in axes))
    rows = np.zeros((int(idx.max()) + 1, coords.shape[1]))
    rows[idx, np.arange(coords.shape[1])] = 1.0
    return rows


def _three_way(j):
    if isinstance(j, JointDistribution):
        if j.space.n_inputs != 2:
            raise ValueError(f"polytopes are defined for 2 inputs, got {j.space.n_inputs}")
        return j.tensor
    t = np.asarray(j, dtype=float)
    if t.ndim != 3:
        raise ValueError("expected a joint over (X_1, X_2, Y)")
    return t


def build_polytope(j, kind):
    """Joints over ``(X_1, X_2, Y)`` sharing the pairwise marginals of ``j``.

    WEDGE fixes ``(X_1, Y)`` and ``(X_2, Y)``; TRIANGLE fixes ``(X_1, X_2)`` too.
    The basis spans the directions that stay inside the polytope's face:
    cells that are zero in every feasible joint get no weight.
    """
    kind = PolytopeKind(kind)
    t = _three_way(j)
    shape = t.shape
    blocks = [_indicator_rows(shape, (0, 2)), _indicator_rows(shape, (1, 2))]
    if kind is PolytopeKind.TRIANGLE:
        blocks.append(_indicator_rows(shape, (0, 1)))
    A = np.vstack(blocks)
    ref = t.ravel().copy()
    b = A @ ref
    support = feasible_support(A, b) if np.any(ref == 0) else np.ones(ref.size, dtype=bool)
    reduced = null_space(np.vstack([A[:, support], np.ones((1, int(support.sum())))]))
    basis = np.zeros((reduced.shape[1], ref.size))
    basis[:, support] = reduced.T
    return MarginalPolytope(kind, shape, A, b, np.ascontiguousarray(basis), ref)


@dataclass(frozen=True, eq=False)
class MIMinimum:
    joint: JointDistribution
    value: float  # in ``base``
    cycles: int
    trace: np.ndarray  # objective in nats after each cycle of the winning start

    def __iter__(self):
        return iter((self.joint, self.value))


def _feasible_interval(q, h):
    lo, hi = -np.inf, np.inf
    up = h > 1e-14
    down = h < -1e-14
    if np.any(up):
        lo = float(np.max(-q[up] / h[up]))
    if np.any(down):
        hi = float(np.min(-q[down] / h[down]))
    return lo, hi


def directional_derivatives(q, basis, ny, step=1e-7):
    """Finite-difference slope of ``I`` (nats) along each basis direction, one-sided at the boundary."""
    q = np.ravel(q)
    out = []
    for h in basis:
        lo, hi = _feasible_interval(q, h)
        a = -step if lo <= -step else 0.0
        b = step if hi >= step else 0.0
        if a == b:
            out.append(0.0)
            continue
        f = [mutual_information_nats((q + t * h).clip(min=0.0).reshape(-1, ny)) for t in (a, b)]
        out.append((f[1] - f[0]) / (b - a))
    return np.array(out)


def minimize_mi(poly, start=None, tol=1e-12, n_random_starts=8, seed=0, base=2, max_cycles=10_000,
                extra_starts=(), backend=None):
    """Minimise ``I(Y : X_1, X_2)`` over a polytope by null-space coordinate descent.

    Each step is a golden-section search over the feasible segment along one
    basis direction.  Starts from ``start`` (default: the reference joint),
    any ``extra_starts``, and ``n_random_starts`` random feasible points.
    """
    kern = _kernels.get_kernels(backend)
    n1, n2, ny = poly.shape
    nx = n1 * n2
    q0 = poly.reference if start is None else np.ravel(getattr(start, "table", start)).astype(float)
    if q0.size != poly.reference.size or np.any(q0 < -1e-12) or poly.residual(q0) > FEASIBILITY_TOL:
        raise InfeasibleStartError("start point is not in the polytope")
    q0 = q0.clip(min=0.0)
    starts = [q0] + [np.ravel(getattr(s, "table", s)).astype(float).clip(min=0.0) for s in extra_starts]
    basis = poly.null_space_basis
    rng = np.random.default_rng(seed)
    if basis.shape[0]:
        for _ in range(n_random_starts):
            v = basis.T @ rng.normal(size=basis.shape[0])
            lo, hi = _feasible_interval(q0, v)
            if hi > lo:
                starts.append((q0 + rng.uniform(lo, hi) * v).clip(min=0.0))
    best = None
    for s in starts:
        q = np.ascontiguousarray(s, dtype=float)
        trace = np.full(max_cycles, np.nan)
        if basis.shape[0]:
            f, cycles, converged = kern.nullspace_cd(q, basis, nx, ny, 1e-13, tol, max_cycles, trace)
        else:
            f, cycles, converged = kern.mutual_information(q, nx, ny), 0, True
        if not converged:
            slopes = directional_derivatives(q, basis, ny)
            raise ConvergenceError(
                f"coordinate descent stalled after {cycles} cycles; directional slopes {np.round(slopes, 12).tolist()}",
                iterations=int(cycles),
            )
        if best is None or f < best[0]:
            best = (float(f), q, int(cycles), trace[: int(cycles)])
    f, q, cycles, trace = best
    q = q / q.sum()
    space = ChannelSpace((n1, n2), ny)
    joint = JointDistribution(space, q.reshape(nx, ny))
    return MIMinimum(joint, mutual_information_nats(joint.table) / math.log(base), cycles, trace)


@dataclass(frozen=True)
class CIComparison:
    mutual_information: float
    ci: float
    d2: float
    wedge_minimum: float
    triangle_minimum: float
    base: float = 2.0

    def as_dict(self):
        return dict(self.__dict__)


def compare(p, k, base=2, seed=0, n_random_starts=8):
    """CI and the polytope form of ``d_2`` for one channel."""
    if p.space.n_inputs != 2:
        raise ValueError(f"CI is defined for 2 inputs, got {p.space.n_inputs}")
    j = compose_joint(p, k)
    total = mutual_information_nats(j.table) / math.log(base)
    tri = minimize_mi(build_polytope(j, PolytopeKind.TRIANGLE), base=base, seed=seed, n_random_starts=n_random_starts)
    wedge = minimize_mi(
        build_polytope(j, PolytopeKind.WEDGE), base=base, seed=seed, n_random_starts=n_random_starts,
        extra_starts=[tri.joint],
    )
    return CIComparison(
        mutual_information=total,
        ci=max(total - wedge.value, 0.0),
        d2=max(total - tri.value, 0.0),
        wedge_minimum=wedge.value,
        triangle_minimum=tri.value,
        base=base,
    )


def ci_measure(p, k, base=2, seed=0):
    return compare(p, k, base=base, seed=seed).ci


def d2_via_polytope(p, k, base=2, seed=0):
    j = compose_joint(p, k)
    total = mutual_information_nats(j.table) / math.log(base)
    tri = minimize_mi(build_polytope(j, PolytopeKind.TRIANGLE), base=base, seed=seed)
    return max(total - tri.value, 0.0)


# ---------------------------------------------------------------------------
# one-parameter families

EMBEDDINGS = {"spin": np.array([-1.0, 1.0]), "binary": np.array([0.0, 1.0])}
_FAMILY_SPACE = ChannelSpace((2, 2), 2)


def _values(embedding):
    try:
        return EMBEDDINGS[embedding]
    except KeyError:
        raise ValueError(f"unknown embedding {embedding!r}") from None


def family_channel(beta, embedding="spin"):
    """``k_beta(x; y) ∝ exp(beta * y * (x_1 + x_2))`` over two binary inputs."""
    v = _values(embedding)
    s = (v[:, None] + v[None, :]).ravel()
    logits = beta * s[:, None] * v[None, :]
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return Channel(_FAMILY_SPACE, w / w.sum(axis=1, keepdims=True))


def family_input(alpha, embedding="spin"):
    """``p_alpha(x_1, x_2) ∝ exp(alpha * x_1 * x_2)``."""
    v = _values(embedding)
    e = alpha * np.outer(v, v).ravel()
    w = np.exp(e - e.max())
    return InputDistribution(_FAMILY_SPACE, w / w.sum())


def family_joint(alpha, beta, embedding="spin"):
    return compose_joint(family_input(alpha, embedding), family_channel(beta, embedding))


def _pair_marginals(alpha, beta, embedding):
    t = family_joint(alpha, beta, embedding).tensor
    return np.concatenate([t.sum(axis=1).ravel(), t.sum(axis=0).ravel()])


def golden_section(f, a, b, xtol=1e-12):
    """Minimiser of a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    fa, fb = f(a), f(b)
    return min(((c, fc), (d, fd), (a, fa), (b, fb)), key=lambda t: t[1])


def match_alpha(beta, alpha0, beta0, bracket=(0.0, 20.0), embedding="spin", xtol=1e-12):
    """Alpha keeping the ``(X_i, Y)`` marginals of ``p_alpha k_beta`` at their reference values.

    Least squares over ``bracket``; returns ``(alpha, residual)`` where the
    residual is the L2 norm of the marginal mismatch.
    """
    ref = _pair_marginals(alpha0, beta0, embedding)
    lo, hi = bracket
    alpha, residual = golden_section(
        lambda a: float(np.linalg.norm(_pair_marginals(a, beta, embedding) - ref)), lo, hi, xtol
    )
    if residual > 1e-6 and min(alpha - lo, hi - alpha) <= 1e3 * xtol:
        raise BracketError(f"best alpha {alpha:.6g} is on the bracket edge with residual {residual:.3e}")
    return alpha, residual


@dataclass(frozen=True)
class SweepPoint:
    beta: float
    alpha: float
    marginal_residual: float
    mutual_information: float  # bits
    lower_bound: float  # bits, I(beta) - I(beta0)


def default_beta_grid(steps=50, beta_min=0.7, beta_max=3.0):
    return np.linspace(beta_min, beta_max, steps)


def sweep_lower_bound(alpha0=1.0, beta0=0.7, beta_grid=None, embedding="spin", bracket=(0.0, 20.0)):
    """CI lower bound ``I(p_alpha k_beta) - I(p_alpha0 k_beta0)`` along beta, alpha matched."""
    grid = default_beta_grid() if beta_grid is None else np.asarray(beta_grid, dtype=float)
    base_mi = mutual_information_nats(family_joint(alpha0, beta0, embedding).table) / math.log(2)
    points = []
    for beta in grid:
        alpha, res = match_alpha(float(beta), alpha0, beta0, bracket, embedding)
        mi = mutual_information_nats(family_joint(alpha, beta, embedding).table) / math.log(2)
        points.append(SweepPoint(float(beta), float(alpha), float(res), mi, mi - base_mi))
    return points


@dataclass(frozen=True, eq=False)
class Trace:
    reference: tuple  # (alpha0, beta0)
    points: tuple  # (beta, alpha, residual)
    flagged: tuple  # betas whose residual exceeds the cap


@dataclass(frozen=True, eq=False)
class Heatmap:
    alpha_grid: np.ndarray
    beta_grid: np.ndarray
    mi: np.ndarray  # bits, shape (len(alpha_grid), len(beta_grid))
    traces: tuple
    residual_cap: float


DEFAULT_REFERENCES = ((0.5, 0.5), (1.0, 0.7), (2.0, 1.0), (3.0, 1.5))


def heatmap(alpha_grid, beta_grid, references=DEFAULT_REFERENCES, embedding="spin", residual_cap=1e-3):
    """``I(p_alpha k_beta)`` on a grid plus fixed-marginal traces through reference points."""
    alphas = np.asarray(alpha_grid, dtype=float)
    betas = np.asarray(beta_grid, dtype=float)
    mi = np.array(
        [[mutual_information_nats(family_joint(a, b, embedding).table) / math.log(2) for b in betas] for a in alphas]
    )
    traces = []
    for a0, b0 in references:
        pts, flagged = [], []
        for beta in betas:
            try:
                alpha, res = match_alpha(float(beta), a0, b0, (alphas.min(), alphas.max()), embedding)
            except BracketError:
                continue
            pts.append((float(beta), float(alpha), float(res)))
            if res > residual_cap:
                flagged.append(float(beta))
        traces.append(Trace((a0, b0), tuple(pts), tuple(flagged)))
    return Heatmap(alphas, betas, mi, tuple(traces), residual_cap)
