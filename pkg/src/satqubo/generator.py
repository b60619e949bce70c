"""Random k-SAT instance generation sweeping the clause/variable ratio.

The clause count stays fixed while the variable count is derived from each
requested ratio alpha = |C|/|V| (round-half-up), which keeps the reduced
QUBO sizes stable across the alpha sweep. Each instance draws k distinct
variables per clause uniformly and a fair coin per polarity, and is
resampled wholesale until every variable is covered by some clause.

Instance streams are splittable: instance (alpha_index, instance_index)
derives its own 64-bit seed from the master seed, so generation order or
parallelism cannot change the output.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Union

import numpy as np

from .cnf import CnfFormula, emit_dimacs, formula_from_ints, parse_dimacs

MAX_COVERAGE_ATTEMPTS = 1000

AlphaLike = Union[Fraction, int, float, str]


class GenerationError(ValueError):
    pass


def as_fraction(alpha: AlphaLike) -> Fraction:
    """Exact ratio from user input; floats go through their string repr so
    that e.g. 4.2 means 21/5."""
    if isinstance(alpha, float):
        return Fraction(str(alpha))
    return Fraction(alpha)


def num_vars_for(num_clauses: int, alpha: Fraction) -> int:
    """|V| = round(|C| / alpha), half up."""
    return int(Fraction(num_clauses) / alpha + Fraction(1, 2))


def format_alpha(alpha: Fraction) -> str:
    return str(float(alpha))


@dataclass(frozen=True)
class GenSpec:
    num_clauses: int
    alpha_values: tuple  # of Fraction
    instances_per_alpha: int
    k: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.num_clauses < 1:
            raise GenerationError(f"num_clauses must be >= 1, got {self.num_clauses}")
        if self.instances_per_alpha < 1:
            raise GenerationError(
                f"instances_per_alpha must be >= 1, got {self.instances_per_alpha}"
            )
        if self.k < 1:
            raise GenerationError(f"k must be >= 1, got {self.k}")
        if not self.alpha_values:
            raise GenerationError("alpha_values must be nonempty")
        object.__setattr__(
            self, "alpha_values", tuple(as_fraction(a) for a in self.alpha_values)
        )
        for alpha in self.alpha_values:
            if alpha <= 0:
                raise GenerationError(f"alpha must be > 0, got {alpha}")
            num_vars = num_vars_for(self.num_clauses, alpha)
            if num_vars < self.k:
                raise GenerationError(
                    f"alpha={alpha} gives {num_vars} variables, fewer than k={self.k}"
                )
            if self.k * self.num_clauses < num_vars:
                raise GenerationError(
                    f"alpha={alpha} gives {num_vars} variables but only "
                    f"{self.k * self.num_clauses} literal slots; coverage unreachable"
                )


@dataclass(frozen=True)
class InstanceRecord:
    id: str
    formula: CnfFormula
    alpha: Fraction  # requested ratio (the bin label); the formula knows its own
    seed_used: int


def sample_formula(rng, num_vars: int, num_clauses: int, k: int,
                   max_attempts: int = MAX_COVERAGE_ATTEMPTS) -> CnfFormula:
    """One uniform random k-CNF over exactly num_vars covered variables."""
    for _ in range(max_attempts):
        clause_vars = np.empty((num_clauses, k), dtype=np.int64)
        for ci in range(num_clauses):
            clause_vars[ci] = rng.choice(num_vars, size=k, replace=False) + 1
        negated = rng.integers(0, 2, size=(num_clauses, k))
        if len(np.unique(clause_vars)) != num_vars:
            continue  # some variable uncovered; resample the whole instance
        signed = np.where(negated == 1, -clause_vars, clause_vars)
        return formula_from_ints(num_vars, signed.tolist())
    raise GenerationError(
        f"no fully covered instance in {max_attempts} attempts "
        f"(num_vars={num_vars}, num_clauses={num_clauses}, k={k})"
    )


def instance_seed(master_seed: int, alpha_index: int, instance_index: int) -> int:
    seq = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(alpha_index, instance_index)
    )
    return int(seq.generate_state(1, np.uint64)[0])


def generate(spec: GenSpec) -> List[InstanceRecord]:
    records = []
    for ai, alpha in enumerate(spec.alpha_values):
        num_vars = num_vars_for(spec.num_clauses, alpha)
        for ii in range(spec.instances_per_alpha):
            seed_used = instance_seed(spec.seed, ai, ii)
            rng = np.random.default_rng(seed_used)
            formula = sample_formula(rng, num_vars, spec.num_clauses, spec.k)
            records.append(
                InstanceRecord(
                    id=f"inst_{format_alpha(alpha)}_{ii}",
                    formula=formula,
                    alpha=alpha,
                    seed_used=seed_used,
                )
            )
    return records


MANIFEST_FIELDS = ["id", "seed", "num_vars", "num_clauses", "alpha"]


def dataset_manifest(records: Sequence[InstanceRecord]) -> str:
    """CSV manifest text for a dataset (header + one row per instance)."""
    if not records:
        raise GenerationError("empty dataset")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_FIELDS)
    for rec in records:
        writer.writerow(
            [
                rec.id,
                rec.seed_used,
                rec.formula.num_vars,
                rec.formula.num_clauses,
                format_alpha(rec.alpha),
            ]
        )
    return buf.getvalue()


def write_dataset(records: Sequence[InstanceRecord], out_dir) -> str:
    """Write manifest.csv plus one DIMACS file per instance; returns the
    manifest path."""
    manifest = dataset_manifest(records)
    os.makedirs(out_dir, exist_ok=True)
    for rec in records:
        path = os.path.join(out_dir, f"{rec.id}.cnf")
        try:
            with open(path, "w") as fh:
                fh.write(emit_dimacs(rec.formula))
        except OSError as exc:
            raise GenerationError(f"cannot write {path}: {exc}") from exc
    manifest_path = os.path.join(out_dir, "manifest.csv")
    try:
        with open(manifest_path, "w") as fh:
            fh.write(manifest)
    except OSError as exc:
        raise GenerationError(f"cannot write {manifest_path}: {exc}") from exc
    return manifest_path


def read_dataset(dataset_dir) -> List[InstanceRecord]:
    manifest_path = os.path.join(dataset_dir, "manifest.csv")
    try:
        with open(manifest_path) as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise GenerationError(f"cannot read {manifest_path}: {exc}") from exc
    records = []
    for row in rows:
        path = os.path.join(dataset_dir, f"{row['id']}.cnf")
        try:
            with open(path) as fh:
                formula = parse_dimacs(fh.read())
        except OSError as exc:
            raise GenerationError(f"cannot read {path}: {exc}") from exc
        records.append(
            InstanceRecord(
                id=row["id"],
                formula=formula,
                alpha=as_fraction(row["alpha"]),
                seed_used=int(row["seed"]),
            )
        )
    if not records:
        raise GenerationError(f"no instances listed in {manifest_path}")
    return records
