"""CNF-to-QUBO reductions and decoding of QUBO solutions back to assignments.

Two families are implemented:

* the independent-set style reduction ("choi"): one bit per literal
  occurrence, negative weight -omega on each, penalty delta on every
  intra-clause pair and on every pair of opposite-polarity occurrences of
  the same variable across clauses. Requires delta > omega; the loosened
  variant fixes delta = omega, which preserves correctness and is the
  tightest admissible penalty.

* the backbone reduction: literal-occurrence bits plus one extra bit per
  variable. Literals couple to their variable's backbone bit instead of to
  each other, which keeps the coupling graph sparse regardless of the
  clause/variable ratio.

For both, a satisfiable formula has minimum energy exactly
-(num_clauses) * omega, and any bit vector attaining it decodes to a
satisfying assignment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

from .cnf import CnfFormula
from .qubo import Qubo


class Variant(str, Enum):
    CHOI = "choi"
    CHOI_LOOSENED = "loosened"
    BACKBONE = "backbone"


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionParams:
    variant: Variant
    omega: float = 1.0
    delta: float = 2.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ReductionError(f"omega must be > 0, got {self.omega}")
        if self.variant == Variant.CHOI and not self.delta > self.omega:
            raise ReductionError(
                f"choi variant requires delta > omega > 0, got "
                f"delta={self.delta}, omega={self.omega}"
            )
        if self.variant == Variant.CHOI_LOOSENED and self.delta != self.omega:
            raise ReductionError(
                f"loosened variant requires delta = omega, got "
                f"delta={self.delta}, omega={self.omega}"
            )

    @classmethod
    def choi(cls, omega=1.0, delta=2.0):
        return cls(Variant.CHOI, omega, delta)

    @classmethod
    def loosened(cls, omega=1.0):
        return cls(Variant.CHOI_LOOSENED, omega, omega)

    @classmethod
    def backbone(cls, omega=1.0):
        return cls(Variant.BACKBONE, omega, omega)


@dataclass(frozen=True)
class VarMap:
    """Bidirectional map between QUBO bits and SAT literal occurrences.

    literal_bits keys are (clause_index, var_index) with 0-based clauses
    and 1-based variables; backbone_bits maps var_index to its extra bit
    and is empty for the choi variants.
    """

    literal_bits: Dict[Tuple[int, int], int]
    backbone_bits: Dict[int, int]

    def bit_to_occurrence(self):
        return {bit: occ for occ, bit in self.literal_bits.items()}


@dataclass(frozen=True)
class ReductionArtifact:
    qubo: Qubo
    map: VarMap
    ground_energy_if_sat: float
    params: ReductionParams
    source: CnfFormula


def _literal_bit_layout(f: CnfFormula):
    """Assign one bit per literal occurrence, clause-major in input order."""
    literal_bits = {}
    bit = 0
    for ci, clause in enumerate(f.clauses):
        for lit in clause:
            literal_bits[(ci, lit.var_index)] = bit
            bit += 1
    return literal_bits, bit


def _occurrences_by_variable(f: CnfFormula):
    """var_index -> list of (clause_index, negated)."""
    occs = {}
    for ci, clause in enumerate(f.clauses):
        for lit in clause:
            occs.setdefault(lit.var_index, []).append((ci, lit.negated))
    return occs


def reduce_choi(f: CnfFormula, params: ReductionParams) -> ReductionArtifact:
    """Independent-set style reduction: -omega per occurrence bit, +delta on
    intra-clause pairs and on conflicting occurrence pairs."""
    if params.variant not in (Variant.CHOI, Variant.CHOI_LOOSENED):
        raise ReductionError(f"variant {params.variant} is not a choi variant")
    literal_bits, num_bits = _literal_bit_layout(f)
    linear = {bit: -params.omega for bit in literal_bits.values()}
    quadratic = {}

    for ci, clause in enumerate(f.clauses):
        bits = [literal_bits[(ci, lit.var_index)] for lit in clause]
        for a in range(len(bits)):
            for b in range(a + 1, len(bits)):
                quadratic[(bits[a], bits[b])] = params.delta

    for var, occs in _occurrences_by_variable(f).items():
        positives = [ci for ci, negated in occs if not negated]
        negatives = [ci for ci, negated in occs if negated]
        for cp in positives:
            for cn in negatives:
                pair = (literal_bits[(cp, var)], literal_bits[(cn, var)])
                quadratic[pair] = params.delta

    return ReductionArtifact(
        qubo=Qubo.from_terms(num_bits, linear, quadratic),
        map=VarMap(literal_bits, {}),
        ground_energy_if_sat=-f.num_clauses * params.omega,
        params=params,
        source=f,
    )


def reduce_backbone(f: CnfFormula, params: ReductionParams) -> ReductionArtifact:
    """Backbone reduction: intra-clause pairs +omega; each positive
    occurrence couples -omega to its variable's backbone bit; each negative
    occurrence carries linear -omega plus coupling +omega to the backbone."""
    if params.variant != Variant.BACKBONE:
        raise ReductionError(f"variant {params.variant} is not backbone")
    literal_bits, next_bit = _literal_bit_layout(f)
    backbone_bits = {v: next_bit + v - 1 for v in range(1, f.num_vars + 1)}
    num_bits = next_bit + f.num_vars
    omega = params.omega
    linear = {}
    quadratic = {}

    for ci, clause in enumerate(f.clauses):
        bits = [literal_bits[(ci, lit.var_index)] for lit in clause]
        for a in range(len(bits)):
            for b in range(a + 1, len(bits)):
                quadratic[(bits[a], bits[b])] = omega
        for lit in clause:
            lbit = literal_bits[(ci, lit.var_index)]
            bbit = backbone_bits[lit.var_index]
            if lit.negated:
                linear[lbit] = -omega
                quadratic[(lbit, bbit)] = omega
            else:
                quadratic[(lbit, bbit)] = -omega

    return ReductionArtifact(
        qubo=Qubo.from_terms(num_bits, linear, quadratic),
        map=VarMap(literal_bits, backbone_bits),
        ground_energy_if_sat=-f.num_clauses * omega,
        params=params,
        source=f,
    )


def reduce_formula(f: CnfFormula, params: ReductionParams) -> ReductionArtifact:
    if params.variant == Variant.BACKBONE:
        return reduce_backbone(f, params)
    return reduce_choi(f, params)


def expected_qubit_count(f: CnfFormula, variant: Variant) -> int:
    occurrences = sum(clause.width for clause in f.clauses)
    if variant == Variant.BACKBONE:
        return occurrences + f.num_vars
    return occurrences


def decode_from_map(f: CnfFormula, varmap: VarMap, bits):
    """Decode a bit vector to an assignment given the formula and bit map.

    Backbone (backbone_bits nonempty): read the assignment directly off the
    backbone bits. Choi variants: a variable becomes true if any selected
    bit is a positive occurrence, false if only negative occurrences are
    selected, false by default otherwise. Also returns the variables whose
    occurrences were selected in both polarities (possible only in
    non-ground samples; the positive polarity wins there).
    """
    if varmap.backbone_bits:
        values = tuple(
            int(bits[varmap.backbone_bits[v]]) for v in range(1, f.num_vars + 1)
        )
        return values, []

    chosen = {}  # var -> set of selected polarities (negated flags)
    for ci, clause in enumerate(f.clauses):
        for lit in clause:
            if bits[varmap.literal_bits[(ci, lit.var_index)]]:
                chosen.setdefault(lit.var_index, set()).add(lit.negated)
    conflicted = sorted(v for v, pols in chosen.items() if len(pols) > 1)
    values = []
    for v in range(1, f.num_vars + 1):
        pols = chosen.get(v)
        if pols is None:
            values.append(0)  # unconstrained variable, fixed default
        elif False in pols:
            values.append(1)  # some positive occurrence selected
        else:
            values.append(0)
    return tuple(values), conflicted


def decode_with_diagnostics(artifact: ReductionArtifact, bits):
    if len(bits) != artifact.qubo.num_bits:
        raise ReductionError(
            f"bit vector length {len(bits)} != num_bits {artifact.qubo.num_bits}"
        )
    return decode_from_map(artifact.source, artifact.map, bits)


def decode(artifact: ReductionArtifact, bits):
    """Assignment read off a QUBO bit vector (see decode_from_map)."""
    return decode_with_diagnostics(artifact, bits)[0]


def varmap_to_json(m: VarMap) -> str:
    payload = {
        "literal_bits": [[ci, var, bit] for (ci, var), bit in sorted(m.literal_bits.items())],
        "backbone_bits": [[var, bit] for var, bit in sorted(m.backbone_bits.items())],
    }
    return json.dumps(payload, indent=2) + "\n"


def varmap_from_json(text: str) -> VarMap:
    payload = json.loads(text)
    literal_bits = {(ci, var): bit for ci, var, bit in payload["literal_bits"]}
    backbone_bits = {var: bit for var, bit in payload["backbone_bits"]}
    return VarMap(literal_bits, backbone_bits)
