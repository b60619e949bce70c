"""Samplers over QUBOs: exhaustive exact solver and simulated annealing.

The exhaustive solver is the ground-truth oracle for small problems. The
simulated-annealing sampler is a deterministic, classical stand-in for an
annealing device: `sweeps` plays the role of anneal time and `num_reads`
the sample size. It is an analogy, not a physical model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .qubo import Qubo, QuboError, energy


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class SamplerParams:
    num_reads: int = 100
    sweeps: int = 1000
    beta_range: Optional[Tuple[float, float]] = None  # None = auto from coefficients
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1:
            raise SamplerError(f"num_reads must be >= 1, got {self.num_reads}")
        if self.sweeps < 1:
            raise SamplerError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.beta_range is not None:
            b0, b1 = self.beta_range
            if not (0 < b0 < b1):
                raise SamplerError(
                    f"beta_range must satisfy 0 < initial < final, got {self.beta_range}"
                )


class Sample(NamedTuple):
    bits: tuple
    energy: float
    occurrences: int


@dataclass
class SampleSet:
    samples: List[Sample]
    sampler_label: str
    params: dict = field(default_factory=dict)

    @property
    def num_reads(self) -> int:
        return sum(s.occurrences for s in self.samples)

    def best(self) -> Sample:
        return self.samples[0]


def _aggregate(q: Qubo, bit_vectors, label: str, params: dict) -> SampleSet:
    """Merge duplicate bit vectors, recompute exact energies, sort."""
    counts = {}
    for bits in bit_vectors:
        counts[bits] = counts.get(bits, 0) + 1
    samples = [Sample(bits, energy(q, bits), occ) for bits, occ in counts.items()]
    samples.sort(key=lambda s: (s.energy, s.bits))
    return SampleSet(samples, label, params)


def solve_exhaustive(q: Qubo, *, bit_cap: int = 30) -> SampleSet:
    """Enumerate all 2^num_bits states; return every global minimizer.

    States are scanned in batches as dense 0/1 matrices so the energy scan
    is two BLAS products per batch. Refuses num_bits > bit_cap.
    """
    n = q.num_bits
    if n > bit_cap:
        raise SamplerError(f"num_bits {n} exceeds exhaustive cap {bit_cap}")
    if n == 0:
        return SampleSet([Sample((), 0.0, 1)], "exhaustive", {"bit_cap": bit_cap})

    lin = np.zeros(n)
    for i, c in q.linear.items():
        lin[i] = c
    upper = np.zeros((n, n))
    for (i, j), c in q.quadratic.items():
        upper[i, j] = c

    shifts = np.arange(n, dtype=np.int64)
    best_energy = math.inf
    best_codes: List[np.ndarray] = []
    batch = 1 << min(n, 17)
    for start in range(0, 1 << n, batch):
        codes = np.arange(start, min(start + batch, 1 << n), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(np.float64)
        energies = bits @ lin + ((bits @ upper) * bits).sum(axis=1)
        batch_min = energies.min()
        if batch_min < best_energy:
            best_energy = batch_min
            best_codes = [codes[energies == batch_min]]
        elif batch_min == best_energy:
            best_codes.append(codes[energies == best_energy])

    minimizers = np.concatenate(best_codes)
    vectors = [
        tuple(int((code >> b) & 1) for b in range(n)) for code in minimizers
    ]
    return _aggregate(q, vectors, "exhaustive", {"bit_cap": bit_cap})


def default_beta_range(q: Qubo) -> Tuple[float, float]:
    """Inverse-temperature range derived from coefficient magnitudes:
    hot enough to accept any single-flip uphill move with probability 1/2,
    cold enough to freeze the smallest coefficient scale."""
    mags = q.coefficient_magnitudes()
    if not mags:
        return (0.1, 1.0)
    hot = math.log(2.0) / max(mags)
    cold = math.log(100.0 * max(q.num_bits, 1)) / min(mags)
    if cold <= hot:
        cold = 2.0 * hot
    return (hot, cold)


def solve_sa(q: Qubo, params: SamplerParams) -> SampleSet:
    """Simulated annealing: num_reads independent restarts, each doing
    `sweeps` full single-bit-flip Metropolis sweeps under a geometric beta
    schedule.

    Each read draws its initial state and acceptance randomness from its
    own stream (seed spawn key (1, read)), so reads can run in parallel
    with results identical to this serial implementation. The per-sweep
    proposal order is a random permutation shared by all reads, drawn from
    a separate stream (spawn key (0,)). Returned energies are recomputed
    exactly from the final states.
    """
    n = q.num_bits
    reads = params.num_reads
    if n == 0:
        return _aggregate(q, [()] * reads, "sa", _params_echo(params, (0.1, 1.0)))

    beta_range = params.beta_range or default_beta_range(q)
    betas = np.geomspace(beta_range[0], beta_range[1], params.sweeps)

    order_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=params.seed, spawn_key=(0,))
    )
    read_rngs = [
        np.random.default_rng(
            np.random.SeedSequence(entropy=params.seed, spawn_key=(1, r))
        )
        for r in range(reads)
    ]

    # neighbor structure: index and coupling arrays per bit
    nbr_idx = [[] for _ in range(n)]
    nbr_w = [[] for _ in range(n)]
    for (i, j), c in q.quadratic.items():
        nbr_idx[i].append(j)
        nbr_w[i].append(c)
        nbr_idx[j].append(i)
        nbr_w[j].append(c)
    nbr_idx = [np.array(ix, dtype=np.intp) for ix in nbr_idx]
    nbr_w = [np.array(w) for w in nbr_w]
    lin = np.zeros(n)
    for i, c in q.linear.items():
        lin[i] = c

    x = np.empty((reads, n), dtype=np.int8)
    for r, rng in enumerate(read_rngs):
        x[r] = rng.integers(0, 2, n, dtype=np.int8)
    # local fields: h[r, i] = sum_j c_ij x[r, j]
    coupling = np.zeros((n, n))
    for (i, j), c in q.quadratic.items():
        coupling[i, j] = c
        coupling[j, i] = c
    h = x.astype(np.float64) @ coupling

    # acceptance uniforms are consumed proposal-by-proposal per read;
    # generated in sweep chunks to bound memory
    chunk_sweeps = max(1, int(8_000_000 / max(reads * n, 1)))
    uniforms = None
    pos = 0

    for s in range(params.sweeps):
        if uniforms is None or pos >= uniforms.shape[1]:
            take = min(chunk_sweeps, params.sweeps - s)
            uniforms = np.empty((reads, take * n))
            for r, rng in enumerate(read_rngs):
                uniforms[r] = rng.random(take * n)
            pos = 0
        beta = betas[s]
        order = order_rng.permutation(n)
        for b in order:
            xb = x[:, b]
            d_energy = (1 - 2 * xb) * (lin[b] + h[:, b])
            u = uniforms[:, pos]
            pos += 1
            accept = u < np.exp(-beta * np.maximum(d_energy, 0.0))
            if not accept.any():
                continue
            delta = np.where(accept, 1 - 2 * xb, 0).astype(np.int8)
            x[:, b] = xb + delta
            if len(nbr_idx[b]):
                h[:, nbr_idx[b]] += delta[:, None].astype(np.float64) * nbr_w[b][None, :]

    vectors = [tuple(int(v) for v in x[r]) for r in range(reads)]
    return _aggregate(q, vectors, "sa", _params_echo(params, beta_range))


def _params_echo(params: SamplerParams, beta_range) -> dict:
    return {
        "num_reads": params.num_reads,
        "sweeps": params.sweeps,
        "beta_range": tuple(beta_range),
        "seed": params.seed,
    }


def success_probability(sample_set: SampleSet, ground: float, tol: float = 1e-9) -> float:
    """Fraction of reads at (or numerically below) the ground energy."""
    total = sample_set.num_reads
    if total == 0:
        raise SamplerError("empty sample set")
    hits = sum(s.occurrences for s in sample_set.samples if s.energy <= ground + tol)
    return hits / total


def bits_to_hex(bits) -> str:
    """Bit vector -> hex string; bit i is the 2^i digit position."""
    code = 0
    for i, b in enumerate(bits):
        if b:
            code |= 1 << i
    width = max(1, (len(bits) + 3) // 4)
    return format(code, f"0{width}x")


def hex_to_bits(text: str, num_bits: int) -> tuple:
    code = int(text, 16)
    return tuple((code >> i) & 1 for i in range(num_bits))


def sample_set_to_csv(sample_set: SampleSet) -> str:
    """CSV serialization: read_index,energy,occurrences,bits-as-hex."""
    lines = ["read_index,energy,occurrences,bits-as-hex"]
    for idx, s in enumerate(sample_set.samples):
        lines.append(f"{idx},{s.energy!r},{s.occurrences},{bits_to_hex(s.bits)}")
    return "\n".join(lines) + "\n"
