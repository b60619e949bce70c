"""satqubo: CNF-to-QUBO reductions, samplers, Chimera embedding, benchmarks."""

from .cnf import (
    Assignment,
    Clause,
    CnfError,
    CnfFormula,
    DimacsError,
    Literal,
    SatResult,
    dpll_satisfiable,
    emit_dimacs,
    evaluate,
    formula_from_ints,
    make_clause,
    parse_dimacs,
)
from .qubo import (
    BitVector,
    Qubo,
    QuboError,
    QuboFormatError,
    energy,
    graph_stats,
    read_qubo,
    write_qubo,
)
from .reductions import (
    ReductionArtifact,
    ReductionError,
    ReductionParams,
    VarMap,
    Variant,
    decode,
    decode_from_map,
    decode_with_diagnostics,
    expected_qubit_count,
    reduce_backbone,
    reduce_choi,
    reduce_formula,
    varmap_from_json,
    varmap_to_json,
)
from .samplers import (
    Sample,
    SampleSet,
    SamplerError,
    SamplerParams,
    bits_to_hex,
    default_beta_range,
    hex_to_bits,
    sample_set_to_csv,
    solve_exhaustive,
    solve_sa,
    success_probability,
)
from .generator import (
    GenSpec,
    GenerationError,
    InstanceRecord,
    as_fraction,
    dataset_manifest,
    generate,
    num_vars_for,
    read_dataset,
    sample_formula,
    write_dataset,
)
from .embedding import (
    ChimeraGraph,
    Embedding,
    EmbeddingError,
    build_chimera,
    chain_stats,
    default_chain_strength,
    embed,
    embedding_from_json,
    embedding_to_json,
    flatten,
    unembed,
    verify_embedding,
)

__version__ = "0.1.0"
