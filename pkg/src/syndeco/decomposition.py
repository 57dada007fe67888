"""Order-by-order split of the input/output mutual information."""
import math
from dataclasses import dataclass

import numpy as np

from .core import JointDistribution, channel_divergence_nats, compose_joint, entropy_nats, mutual_information_nats
from .projection import ConvergenceError, SolverConfig, ipf_project, project_constant

NEGATIVE_SLACK = 1e-9
SUM_RULE_TOL = 1e-6


class DecompositionError(RuntimeError):
    """A level failed to converge, or the result is inconsistent."""

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


@dataclass(frozen=True, eq=False)
class DecompositionProfile:
    d: tuple  # d_1..d_N in ``base``
    total_mutual_information: float
    per_level: tuple  # ProjectionResult for orders 0..N
    sum_residual: float
    base: float = 2.0
    raw_d: tuple = ()  # before clamping roundoff negatives to zero

    @property
    def n_inputs(self):
        return len(self.d)

    def as_dict(self):
        return {
            "base": self.base,
            "mutual_information": self.total_mutual_information,
            "d": list(self.d),
            "sum_residual": self.sum_residual,
            "levels": [
                {
                    "order": r.order,
                    "divergence_from_channel": r.divergence(self.base),
                    "residual": r.residual,
                    "iterations": r.iterations,
                    "hit_boundary": r.hit_boundary,
                }
                for r in self.per_level
            ],
        }


def _clamp(value, order):
    if value < -NEGATIVE_SLACK:
        raise DecompositionError(f"d_{order} = {value:.3e} is negative beyond roundoff", order=order)
    return max(value, 0.0)


def decompose(p, k, cfg=None, base=2):
    """Project ``k`` onto every family and return ``d_i = D_p(pi_i k || pi_{i-1} k)``.

    The ``d_i`` sum to ``I(X : Y)`` under ``pk``; a violation larger than
    ``1e-6`` in ``base`` raises :class:`DecompositionError`.
    """
    cfg = cfg or SolverConfig()
    n = p.space.n_inputs
    levels = [project_constant(p, k)]
    for i in range(1, n + 1):
        try:
            levels.append(ipf_project(p, k, i, cfg))
        except ConvergenceError as exc:
            raise DecompositionError(f"level {i}: {exc}", order=i) from exc
    scale = math.log(base)
    raw = tuple(
        channel_divergence_nats(p, levels[i].projected, levels[i - 1].projected) / scale for i in range(1, n + 1)
    )
    d = tuple(_clamp(v, i) for i, v in enumerate(raw, start=1))
    total = mutual_information_nats(compose_joint(p, k).table) / scale
    gap = abs(sum(d) - total)
    if gap > SUM_RULE_TOL:
        raise DecompositionError(f"sum rule violated by {gap:.3e}")
    return DecompositionProfile(
        d=d, total_mutual_information=total, per_level=tuple(levels), sum_residual=gap, base=base, raw_d=raw
    )


def synergy(p, k, cfg=None, base=2):
    """Two-input synergy: divergence of ``k`` from the split channels."""
    if p.space.n_inputs != 2:
        raise ValueError(f"synergy is defined here for 2 inputs, got {p.space.n_inputs}")
    return ipf_project(p, k, 1, cfg).divergence(base)


def interaction_information(j, base=2):
    """Signed three-way interaction information; positive means synergy.

    ``j`` is a 3-dimensional probability array, or a joint over a two-input
    channel space (read as ``(X_1, X_2, Y)``).
    """
    if isinstance(j, JointDistribution):
        if j.space.n_inputs != 2:
            raise ValueError("interaction information needs exactly three variables")
        t = j.tensor
    else:
        t = np.asarray(j, dtype=float)
        if t.ndim != 3:
            raise ValueError(f"interaction information needs exactly three variables, got {t.ndim}")
        if np.any(t < 0) or abs(t.sum() - 1.0) > 1e-9:
            raise ValueError("not a normalized probability table")
    h = entropy_nats
    value = (
        -h(t)
        + h(t.sum(axis=2))
        + h(t.sum(axis=1))
        + h(t.sum(axis=0))
        - h(t.sum(axis=(1, 2)))
        - h(t.sum(axis=(0, 2)))
        - h(t.sum(axis=(0, 1)))
    )
    return value / math.log(base)
