"""Sparse QUBO model: energy evaluation, graph statistics, text format.

A QUBO is min over x in {0,1}^n of sum_i c_ii x_i + sum_{i<j} c_ij x_i x_j.
There is no constant term; coefficients are float64 but every reduction in
this package produces small integer multiples of its weight parameter, so
energy comparisons on reduction output are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple


class QuboError(ValueError):
    """Invalid QUBO structure or evaluation input."""


class QuboFormatError(QuboError):
    """Malformed .qubo text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


BitVector = tuple  # 0/1 per bit, length num_bits


@dataclass
class Qubo:
    num_bits: int
    linear: Dict[int, float] = field(default_factory=dict)
    quadratic: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_bits < 0:
            raise QuboError(f"num_bits must be >= 0, got {self.num_bits}")
        for i in self.linear:
            if not 0 <= i < self.num_bits:
                raise QuboError(f"linear index {i} out of range [0, {self.num_bits})")
        for i, j in self.quadratic:
            if i == j:
                raise QuboError(f"quadratic key ({i}, {j}) must have i != j")
            if not (0 <= i < j < self.num_bits):
                raise QuboError(
                    f"quadratic key ({i}, {j}) not canonical (need 0 <= i < j < num_bits)"
                )

    @classmethod
    def from_terms(cls, num_bits, linear, quadratic) -> "Qubo":
        """Canonicalize raw term maps: orient pairs as (min, max), merge
        duplicate orientations additively, drop zero coefficients."""
        lin = {i: float(c) for i, c in linear.items() if c != 0}
        quad = {}
        for (i, j), c in quadratic.items():
            if i == j:
                raise QuboError(f"quadratic key ({i}, {j}) must have i != j")
            key = (i, j) if i < j else (j, i)
            quad[key] = quad.get(key, 0.0) + float(c)
        quad = {k: c for k, c in quad.items() if c != 0}
        return cls(num_bits, lin, quad)

    def coefficient_magnitudes(self):
        return [abs(c) for c in self.linear.values()] + [
            abs(c) for c in self.quadratic.values()
        ]


def energy(q: Qubo, bits) -> float:
    """Evaluate sum_i c_ii x_i + sum_{i<j} c_ij x_i x_j."""
    if len(bits) != q.num_bits:
        raise QuboError(f"bit vector length {len(bits)} != num_bits {q.num_bits}")
    total = 0.0
    for i, c in q.linear.items():
        if bits[i]:
            total += c
    for (i, j), c in q.quadratic.items():
        if bits[i] and bits[j]:
            total += c
    return total


def graph_stats(q: Qubo) -> dict:
    """Node/edge/density/degree summary of the weighted-graph view."""
    degree = {}
    for i, j in q.quadratic:
        degree[i] = degree.get(i, 0) + 1
        degree[j] = degree.get(j, 0) + 1
    edges = len(q.quadratic)
    possible = q.num_bits * (q.num_bits - 1) // 2
    return {
        "nodes": q.num_bits,
        "edges": edges,
        "density": edges / possible if possible else 0.0,
        "max_degree": max(degree.values(), default=0),
    }


def write_qubo(q: Qubo) -> str:
    """Serialize to the .qubo text format.

    Header 'p qubo <num_bits>', then one term per line: 'i i bias' or
    'i j coupling' with i < j. Coefficients use repr() so the round-trip
    is bit-exact. '#' starts a comment.
    """
    lines = [f"p qubo {q.num_bits}"]
    for i in sorted(q.linear):
        lines.append(f"{i} {i} {q.linear[i]!r}")
    for i, j in sorted(q.quadratic):
        lines.append(f"{i} {j} {q.quadratic[(i, j)]!r}")
    return "\n".join(lines) + "\n"


def read_qubo(text: str) -> Qubo:
    num_bits = None
    linear = {}
    quadratic = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("p"):
            if num_bits is not None:
                raise QuboFormatError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 3 or parts[:2] != ["p", "qubo"]:
                raise QuboFormatError(f"malformed header {line!r}", lineno)
            try:
                num_bits = int(parts[2])
            except ValueError:
                raise QuboFormatError(f"malformed header {line!r}", lineno) from None
            continue
        if num_bits is None:
            raise QuboFormatError("coefficient line before 'p qubo' header", lineno)
        parts = line.split()
        if len(parts) != 3:
            raise QuboFormatError(f"expected 'i j coeff', got {line!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            coeff = float(parts[2])
        except ValueError:
            raise QuboFormatError(f"expected 'i j coeff', got {line!r}", lineno) from None
        if not (0 <= i < num_bits and 0 <= j < num_bits):
            raise QuboFormatError(
                f"index out of range [0, {num_bits}) in {line!r}", lineno
            )
        if i == j:
            if i in linear:
                raise QuboFormatError(f"duplicate bias for bit {i}", lineno)
            linear[i] = coeff
        else:
            key = (i, j) if i < j else (j, i)
            if key in quadratic:
                raise QuboFormatError(f"duplicate coupling for pair {key}", lineno)
            quadratic[key] = coeff
    if num_bits is None:
        raise QuboFormatError("missing 'p qubo' header", 1)
    return Qubo.from_terms(num_bits, linear, quadratic)
