"""Finite probability primitives: input distributions, channels, joints.

Input tuples ``x = (x_1, ..., x_N)`` are flattened mixed-radix with ``x_1``
most significant, so for two binary inputs the row order is
``(0,0), (0,1), (1,0), (1,1)``.  Joint tables are stored as ``(|X|, |Y|)``
arrays with the same row order.

All logarithms are natural internally; the public functions take a ``base``
(default 2, i.e. bits) applied only to the returned value.
"""
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

CONSTRUCT_TOL = 1e-12
OPERATION_TOL = 1e-9


class ValidationError(ValueError):
    """A table violates a probability invariant."""


class SpaceMismatchError(ValueError):
    """Objects defined over different channel spaces were combined."""


class InfiniteDivergenceError(ArithmeticError):
    """``a(i) > 0`` where ``b(i) == 0``: the divergence is +infinity."""

    def __init__(self, message="infinite divergence", index=None):
        super().__init__(message)
        self.index = index


def _frozen(values, shape=None):
    arr = np.array(values, dtype=np.float64)
    if shape is not None:
        try:
            arr = arr.reshape(shape)
        except ValueError as exc:
            raise ValidationError(f"expected {int(np.prod(shape))} entries, got {arr.size}") from exc
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelSpace:
    """Cardinalities of the inputs ``X_1..X_N`` and of the output ``Y``."""

    input_cardinalities: tuple
    output_cardinality: int

    def __post_init__(self):
        cards = tuple(int(c) for c in self.input_cardinalities)
        object.__setattr__(self, "input_cardinalities", cards)
        object.__setattr__(self, "output_cardinality", int(self.output_cardinality))
        if len(cards) < 1:
            raise ValidationError("a channel space needs at least one input")
        if any(c < 1 for c in cards) or self.output_cardinality < 1:
            raise ValidationError("cardinalities must be positive")

    @property
    def n_inputs(self):
        return len(self.input_cardinalities)

    @property
    def input_size(self):
        return math.prod(self.input_cardinalities)

    @property
    def joint_shape(self):
        """Shape of the joint as an (N + 1)-dimensional array."""
        return self.input_cardinalities + (self.output_cardinality,)

    def flat_index(self, x):
        if len(x) != self.n_inputs:
            raise ValueError(f"expected a {self.n_inputs}-tuple, got {x!r}")
        return int(np.ravel_multi_index(tuple(x), self.input_cardinalities))

    def input_tuple(self, index):
        return tuple(int(v) for v in np.unravel_index(index, self.input_cardinalities))

    def input_tuples(self):
        """All input tuples in flat-index order."""
        return list(itertools.product(*(range(c) for c in self.input_cardinalities)))


def _check_table(arr, what, tol):
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite entries")
    if np.any(arr < 0):
        idx = int(np.flatnonzero(arr.ravel() < 0)[0])
        raise ValidationError(f"{what} has a negative entry at position {idx}")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise ValidationError(f"{what} sums to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class InputDistribution:
    space: ChannelSpace
    table: np.ndarray

    def __post_init__(self):
        table = _frozen(self.table, (self.space.input_size,))
        _check_table(table, "input distribution", CONSTRUCT_TOL)
        object.__setattr__(self, "table", table)

    @classmethod
    def uniform(cls, space):
        return cls(space, np.full(space.input_size, 1.0 / space.input_size))

    @property
    def strictly_positive(self):
        return bool(np.all(self.table > 0))


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic kernel ``k(x; y)``, one row per flattened input."""

    space: ChannelSpace
    rows: np.ndarray

    def __post_init__(self):
        rows = _frozen(self.rows, (self.space.input_size, self.space.output_cardinality))
        if not np.all(np.isfinite(rows)):
            raise ValidationError("channel contains non-finite entries")
        if np.any(rows < 0):
            r = int(np.flatnonzero((rows < 0).any(axis=1))[0])
            raise ValidationError(f"channel row {r} has a negative entry")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > CONSTRUCT_TOL)
        if bad.size:
            r = int(bad[0])
            raise ValidationError(f"channel row {r} sums to {sums[r]!r}, not 1")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_function(cls, space, func):
        """Deterministic channel ``y = func(x)`` for an input tuple ``x``."""
        rows = np.zeros((space.input_size, space.output_cardinality))
        for i, x in enumerate(space.input_tuples()):
            rows[i, func(*x)] = 1.0
        return cls(space, rows)

    @classmethod
    def constant(cls, space, row):
        return cls(space, np.tile(np.asarray(row, dtype=float), (space.input_size, 1)))

    @classmethod
    def normalized(cls, space, weights):
        w = np.asarray(weights, dtype=float).reshape(space.input_size, space.output_cardinality)
        return cls(space, w / w.sum(axis=1, keepdims=True))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability table over ``X x Y`` with shape ``(|X|, |Y|)``."""

    space: ChannelSpace
    table: np.ndarray

    def __post_init__(self):
        table = _frozen(self.table, (self.space.input_size, self.space.output_cardinality))
        _check_table(table, "joint distribution", CONSTRUCT_TOL)
        object.__setattr__(self, "table", table)

    @cached_property
    def tensor(self):
        """The table viewed as an array over ``(X_1, ..., X_N, Y)``."""
        return self.table.reshape(self.space.joint_shape)


def _same_space(*objs):
    first = objs[0].space
    for o in objs[1:]:
        if o.space != first:
            raise SpaceMismatchError(f"{first} vs {o.space}")


def compose_joint(p, k):
    """The joint ``pk(x, y) = p(x) k(x; y)``."""
    _same_space(p, k)
    return JointDistribution(p.space, p.table[:, None] * k.rows)


def pushforward(p, k):
    """The output distribution ``k_* p``."""
    _same_space(p, k)
    return p.table @ k.rows


def marginalize(j, subset, include_output=True):
    """Marginal of ``j`` on the inputs in ``subset`` (0-based), optionally with ``Y``.

    The result has one axis per kept input, in increasing index order, then
    the output axis if ``include_output``.
    """
    n = j.space.n_inputs
    keep = sorted(set(int(s) for s in subset))
    if len(keep) != len(tuple(subset)) or any(s < 0 or s >= n for s in keep):
        raise ValueError(f"invalid input subset {tuple(subset)!r} for {n} inputs")
    drop = [a for a in range(n) if a not in keep]
    if not include_output:
        drop.append(n)
    return j.tensor.sum(axis=tuple(drop))


def _normalized_table(t, what="table"):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or abs(t.sum() - 1.0) > OPERATION_TOL:
        raise ValidationError(f"{what} is not a normalized probability table")
    return t


def entropy_nats(t):
    t = np.asarray(t, dtype=float).ravel()
    t = t[t > 0]
    return float(-(t * np.log(t)).sum())


def entropy(t, base=2):
    """Shannon entropy with ``0 log 0 = 0``."""
    if base <= 1:
        raise ValueError("base must exceed 1")
    return entropy_nats(_normalized_table(t)) / math.log(base)


def kl_nats(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    pos = a > 0
    bad = pos & (b <= 0)
    if np.any(bad):
        raise InfiniteDivergenceError(index=int(np.flatnonzero(bad)[0]))
    return float((a[pos] * np.log(a[pos] / b[pos])).sum())


def kl_divergence(a, b, base=2):
    """``D(a || b)``; raises :class:`InfiniteDivergenceError` on a support violation."""
    return kl_nats(a, b) / math.log(base)


def channel_divergence_nats(p, k, m):
    _same_space(p, k, m)
    w = p.table[:, None] * k.rows
    pos = w > 0
    bad = pos & (m.rows <= 0)
    if np.any(bad):
        x, y = np.argwhere(bad)[0]
        raise InfiniteDivergenceError(
            f"infinite divergence: m({int(x)}; {int(y)}) = 0 where p k > 0", index=(int(x), int(y))
        )
    return float((w[pos] * np.log(k.rows[pos] / m.rows[pos])).sum())


def channel_divergence(p, k, m, base=2):
    """Input-weighted divergence ``D_p(k || m) = sum p(x) k(x;y) log k(x;y)/m(x;y)``."""
    return channel_divergence_nats(p, k, m) / math.log(base)


def mutual_information_nats(table):
    t = np.asarray(table, dtype=float)
    t = t.reshape(t.shape[0], -1)
    px = t.sum(axis=1)
    py = t.sum(axis=0)
    return kl_nats(t, np.outer(px, py))


def mutual_information(j, base=2):
    """``I(X : Y)`` of a joint distribution."""
    table = j.table if isinstance(j, JointDistribution) else _normalized_table(j, "joint")
    return mutual_information_nats(table) / math.log(base)
