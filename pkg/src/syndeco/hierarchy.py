"""Marginal-constraint description of the nested channel families.

The family of order ``i`` contains the channels that factor over input
subsets of size at most ``i``.  A channel's KL-projection onto it is the
joint that keeps the input marginal ``p`` and every ``(X_I, Y)`` marginal of
``pk`` with ``|I| = i``, which is all this module builds.  Smaller subsets
are implied by the larger ones and are not listed.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .core import CONSTRUCT_TOL, ValidationError, compose_joint, marginalize


@dataclass(frozen=True, eq=False)
class MarginalConstraint:
    subset: tuple
    include_output: bool
    target: np.ndarray

    def __post_init__(self):
        target = np.array(self.target, dtype=float)
        if np.any(target < 0) or abs(target.sum() - 1.0) > CONSTRUCT_TOL:
            raise ValidationError(f"constraint target for {self.subset} is not normalized")
        target.setflags(write=False)
        object.__setattr__(self, "subset", tuple(self.subset))
        object.__setattr__(self, "target", target)


@dataclass(frozen=True)
class ConstraintSet:
    order: int
    constraints: tuple

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)


def subsets_of_order(n, i):
    """All size-``i`` subsets of ``range(n)`` in lexicographic order."""
    if not 0 <= i <= n:
        raise ValueError(f"order {i} out of range for {n} inputs")
    return list(itertools.combinations(range(n), i))


def constraint_set(p, k, i):
    """Constraints pinning the projection of ``k`` onto the order-``i`` family.

    The input constraint comes first, then one ``(X_I, Y)`` constraint per
    subset in lexicographic order.
    """
    j = compose_joint(p, k)
    n = p.space.n_inputs
    subsets = subsets_of_order(n, i)
    cons = [MarginalConstraint(tuple(range(n)), False, marginalize(j, range(n), include_output=False))]
    cons.extend(MarginalConstraint(s, True, marginalize(j, s, include_output=True)) for s in subsets)
    return ConstraintSet(i, tuple(cons))


def cell_groups(space, subset, include_output):
    """Flat marginal-cell index of every joint cell ``x * |Y| + y``."""
    shape = space.joint_shape
    axes = list(subset) + ([space.n_inputs] if include_output else [])
    if not axes:
        return np.zeros(space.input_size * space.output_cardinality, dtype=np.int64)
    coords = np.indices(shape).reshape(len(shape), -1)
    return np.ravel_multi_index(tuple(coords[a] for a in axes), tuple(shape[a] for a in axes)).astype(np.int64)


def pack(space, constraints):
    """Flatten a constraint list into the (groups, targets, offsets) kernel layout."""
    groups = np.stack([cell_groups(space, c.subset, c.include_output) for c in constraints])
    targets = np.concatenate([c.target.ravel() for c in constraints])
    offsets = np.zeros(len(constraints) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([c.target.size for c in constraints])
    return groups, targets, offsets
