"""CNF data model, DIMACS round-trip, assignment checking, and a DPLL oracle.

Variables are 1-based. Internally a literal is the usual signed DIMACS
integer (+v for x_v, -v for its negation), wrapped in a small dataclass at
the API surface.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional


class CnfError(ValueError):
    """Invalid formula, clause, or assignment."""


class DimacsError(CnfError):
    """Malformed DIMACS text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


Assignment = tuple  # bit vector, one 0/1 entry per variable (index var-1)


@dataclass(frozen=True, order=True)
class Literal:
    var_index: int
    negated: bool = False

    def __post_init__(self):
        if self.var_index < 1:
            raise CnfError(f"variable index must be >= 1, got {self.var_index}")

    @classmethod
    def from_dimacs(cls, lit: int) -> "Literal":
        if lit == 0:
            raise CnfError("0 is the clause terminator, not a literal")
        return cls(abs(lit), lit < 0)

    def to_dimacs(self) -> int:
        return -self.var_index if self.negated else self.var_index

    def satisfied_by(self, value: int) -> bool:
        return bool(value) != self.negated

    def __str__(self):
        return str(self.to_dimacs())


@dataclass(frozen=True)
class Clause:
    literals: tuple

    @property
    def width(self) -> int:
        return len(self.literals)

    def variables(self):
        return [lit.var_index for lit in self.literals]

    def __iter__(self):
        return iter(self.literals)


def make_clause(literals: Iterable[Literal]) -> Clause:
    """Normalize a clause: drop duplicate literals, reject tautologies."""
    seen = []
    for lit in literals:
        if Literal(lit.var_index, not lit.negated) in seen:
            raise CnfError(
                f"tautological clause: x{lit.var_index} appears in both polarities"
            )
        if lit not in seen:
            seen.append(lit)
    if not seen:
        raise CnfError("empty clause")
    return Clause(tuple(seen))


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple

    def __post_init__(self):
        if self.num_vars < 0:
            raise CnfError(f"num_vars must be >= 0, got {self.num_vars}")
        for ci, clause in enumerate(self.clauses):
            for lit in clause:
                if lit.var_index > self.num_vars:
                    raise CnfError(
                        f"clause {ci + 1}: variable {lit.var_index} exceeds "
                        f"declared {self.num_vars} variables"
                    )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def alpha(self) -> Fraction:
        """Clause/variable ratio |C|/|V|, kept exact."""
        return Fraction(self.num_clauses, self.num_vars)

    def uncovered_variables(self):
        """Variables that appear in no clause (allowed, but worth flagging)."""
        covered = set()
        for clause in self.clauses:
            covered.update(clause.variables())
        return [v for v in range(1, self.num_vars + 1) if v not in covered]


def formula_from_ints(num_vars: int, clauses: Iterable[Iterable[int]]) -> CnfFormula:
    """Build a formula from signed-integer clauses, e.g. [[1, -2, 3], ...]."""
    built = tuple(
        make_clause(Literal.from_dimacs(lit) for lit in clause) for clause in clauses
    )
    return CnfFormula(num_vars, built)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text.

    Accepts 'c' comment lines, requires a single 'p cnf V C' header, and
    reads 0-terminated clauses (a clause may span lines). Errors carry the
    offending line number.
    """
    num_vars = None
    num_clauses = None
    clauses = []
    pending = []  # literals of the clause currently being read
    pending_line = 0
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("negative counts in header", lineno)
            continue
        if num_vars is None:
            raise DimacsError("clause data before 'p cnf' header", lineno)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"unexpected token {token!r}", lineno) from None
            if lit == 0:
                if not pending:
                    raise DimacsError("empty clause", lineno)
                try:
                    clauses.append(make_clause(pending))
                except CnfError as exc:
                    raise DimacsError(str(exc), lineno) from None
                pending = []
                continue
            if abs(lit) > num_vars:
                raise DimacsError(
                    f"index {abs(lit)} exceeds declared {num_vars} variables", lineno
                )
            if not pending:
                pending_line = lineno
            pending.append(Literal.from_dimacs(lit))

    if pending:
        raise DimacsError("missing clause terminator 0", pending_line)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header", max(last_line, 1))
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"header declares {num_clauses} clauses, found {len(clauses)}",
            max(last_line, 1),
        )
    return CnfFormula(num_vars, tuple(clauses))


def emit_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.num_vars} {f.num_clauses}"]
    for clause in f.clauses:
        lines.append(" ".join(str(lit.to_dimacs()) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def evaluate(f: CnfFormula, assignment) -> bool:
    """True iff every clause has at least one satisfied literal."""
    if len(assignment) != f.num_vars:
        raise CnfError(
            f"assignment length {len(assignment)} != num_vars {f.num_vars}"
        )
    return all(
        any(lit.satisfied_by(assignment[lit.var_index - 1]) for lit in clause)
        for clause in f.clauses
    )


class SatResult(NamedTuple):
    sat: bool
    witness: Optional[tuple]  # 0/1 per variable when sat, else None


def dpll_satisfiable(f: CnfFormula) -> SatResult:
    """Complete DPLL search: unit propagation, pure-literal elimination,
    first-unassigned branching. Ground truth for everything downstream."""
    clauses = [frozenset(lit.to_dimacs() for lit in clause) for clause in f.clauses]
    assignment = {}

    def propagate(clauses, assignment):
        # returns simplified clause list, or None on conflict
        while True:
            unit = None
            simplified = []
            for clause in clauses:
                live = []
                satisfied = False
                for lit in clause:
                    val = assignment.get(abs(lit))
                    if val is None:
                        live.append(lit)
                    elif (lit > 0) == val:
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not live:
                    return None
                if len(live) == 1 and unit is None:
                    unit = live[0]
                simplified.append(frozenset(live))
            if unit is None:
                return simplified
            assignment[abs(unit)] = unit > 0
            clauses = simplified

    def pure_literals(clauses):
        polarity = {}
        for clause in clauses:
            for lit in clause:
                var = abs(lit)
                if var in polarity and polarity[var] != (lit > 0):
                    polarity[var] = None
                elif var not in polarity:
                    polarity[var] = lit > 0
        return {v: p for v, p in polarity.items() if p is not None}

    def search(clauses, assignment):
        clauses = propagate(clauses, assignment)
        if clauses is None:
            return None
        pures = pure_literals(clauses)
        if pures:
            assignment.update(pures)
            clauses = [c for c in clauses if not any(abs(l) in pures for l in c)]
        if not clauses:
            return assignment
        branch_var = min(abs(lit) for clause in clauses for lit in clause)
        for value in (True, False):
            trial = dict(assignment)
            trial[branch_var] = value
            result = search(clauses, trial)
            if result is not None:
                return result
        return None

    model = search(clauses, assignment)
    if model is None:
        return SatResult(False, None)
    witness = tuple(int(model.get(v, False)) for v in range(1, f.num_vars + 1))
    return SatResult(True, witness)
