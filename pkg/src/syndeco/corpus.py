"""Named example channels with their expected decompositions, plus random ensembles."""
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Channel, ChannelSpace, InputDistribution
from .projection import exponential_channel, generator_layout

AND_OR_TOTAL = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))


@dataclass(frozen=True)
class ExpectedValue:
    value: float
    tolerance: float
    provenance: str


@dataclass(frozen=True, eq=False)
class NamedExample:
    name: str
    p: InputDistribution
    k: Channel
    expected: tuple = ()  # ExpectedValue per order, in bits
    predicate: object = None  # callable(d) -> bool for qualitative claims
    predicate_note: str = ""
    boundary: bool = False  # p has zeros
    description: str = field(default="", compare=False)

    def check(self, profile):
        """Failures of ``profile`` (in bits) against the expectation; empty when it passes."""
        d = list(profile.d)
        failures = []
        if self.expected:
            if len(d) != len(self.expected):
                return [f"{self.name}: expected {len(self.expected)} orders, got {len(d)}"]
            for order, (got, want) in enumerate(zip(d, self.expected), start=1):
                if abs(got - want.value) > want.tolerance:
                    failures.append(f"{self.name}: d_{order} = {got:.9f}, expected {want.value} +- {want.tolerance}")
        if self.predicate is not None and not self.predicate(d):
            failures.append(f"{self.name}: d = {d} fails '{self.predicate_note}'")
        return failures


def _bits(values, provenance, tol=1e-6):
    return tuple(ExpectedValue(float(v), tol, provenance) for v in values)


def _binary(n, m=2):
    return ChannelSpace((2,) * n, m)


def _single_node():
    s = _binary(3)
    return NamedExample(
        "single_node",
        InputDistribution.uniform(s),
        Channel.from_function(s, lambda a, b, c: a),
        _bits((1, 0, 0), "reference"),
        description="3 uniform bits, Y copies X_1",
    )


def _split():
    s = _binary(3, 8)
    return NamedExample(
        "split",
        InputDistribution.uniform(s),
        Channel.from_function(s, lambda a, b, c: 4 * a + 2 * b + c),
        _bits((3, 0, 0), "reference"),
        description="3 uniform bits, Y is the whole input tuple",
    )


def _correlated_inputs():
    s = _binary(3)
    p = np.zeros(8)
    p[0] = p[7] = 0.5
    return NamedExample(
        "correlated_inputs",
        InputDistribution(s, p),
        Channel.from_function(s, lambda a, b, c: a),
        _bits((1, 0, 0), "reference"),
        boundary=True,
        description="3 perfectly correlated uniform bits, Y copies X_1",
    )


def _xor_pair():
    s = _binary(2)
    return NamedExample(
        "xor_pair",
        InputDistribution.uniform(s),
        Channel.from_function(s, lambda a, b: a ^ b),
        _bits((0, 1), "reference"),
        description="2 uniform bits, Y = X_1 xor X_2",
    )


def _parity3():
    s = _binary(3)
    return NamedExample(
        "parity3",
        InputDistribution.uniform(s),
        Channel.from_function(s, lambda a, b, c: a ^ b ^ c),
        _bits((0, 0, 1), "reference"),
        description="3 uniform bits, Y = X_1 xor X_2 xor X_3",
    )


def _and_or(name, gate):
    s = _binary(2)

    def mostly_single_node(d):
        return d[0] > 0 and d[1] > 0 and d[0] > d[1] and abs(d[0] + d[1] - AND_OR_TOTAL) <= 1e-6

    return NamedExample(
        name,
        InputDistribution.uniform(s),
        Channel.from_function(s, gate),
        predicate=mostly_single_node,
        predicate_note="d_1 > d_2 > 0 and d_1 + d_2 = h(1/4) (qualitative)",
        description=f"2 uniform bits, Y = {name.split('_')[0].upper()}(X_1, X_2)",
    )


def _xor_loses():
    s = _binary(3)
    p = np.zeros(8)
    for a in (0, 1):
        for b in (0, 1):
            p[s.flat_index((a, b, a ^ b))] = 0.25
    return NamedExample(
        "xor_loses",
        InputDistribution(s, p),
        Channel.from_function(s, lambda a, b, c: a ^ b),
        _bits((1, 0, 0), "reference"),
        boundary=True,
        description="X_1, X_2 uniform, X_3 = X_1 xor X_2 = Y",
    )


def _xor_duplicate():
    s = _binary(3)
    p = np.zeros(8)
    for a in (0, 1):
        for b in (0, 1):
            p[s.flat_index((a, b, a))] = 0.25
    return NamedExample(
        "xor_duplicate",
        InputDistribution(s, p),
        Channel.from_function(s, lambda a, b, c: a ^ b),
        _bits((0, 1, 0), "reference"),
        boundary=True,
        description="X_1, X_2 uniform, X_3 = X_1, Y = X_1 xor X_2",
    )


_REGISTRY = {
    "single_node": _single_node,
    "split": _split,
    "correlated_inputs": _correlated_inputs,
    "xor_pair": _xor_pair,
    "parity3": _parity3,
    "and_gate": lambda: _and_or("and_gate", lambda a, b: a & b),
    "or_gate": lambda: _and_or("or_gate", lambda a, b: a | b),
    "xor_loses": _xor_loses,
    "xor_duplicate": _xor_duplicate,
}

EXAMPLE_NAMES = tuple(_REGISTRY)


def example(name):
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_NAMES)}") from None


def random_channel(space, seed, concentration=1.0):
    """Input distribution and channel rows drawn from a symmetric Dirichlet."""
    if not concentration > 0:
        raise ValueError("concentration must be positive")
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.full(space.input_size, concentration))
    rows = rng.dirichlet(np.full(space.output_cardinality, concentration), size=space.input_size)
    return InputDistribution(space, p), Channel(space, rows)


def random_member_of(space, i, seed, scale=2.0):
    """A channel in the order-``i`` family: random generator coordinates in ``[-scale, scale]``."""
    if not 0 <= i <= space.n_inputs:
        raise ValueError(f"order {i} out of range for {space.n_inputs} inputs")
    layout, n_params = generator_layout(space, i)
    theta = np.random.default_rng(seed).uniform(-scale, scale, n_params)
    return exponential_channel(space, theta, layout)
