"""Monte Carlo oracle: sample Gaussian/Wishart/Haar ensembles, evaluate
trace-invariants numerically, estimate moments and classical cumulants with
jackknife error bars, and check the microscopic cumulant formula.

Sampling is counter-based: sample blocks are keyed by (seed, stream index)
through the Philox bit generator, so runs are reproducible and independent
of how blocks are distributed over threads; estimator states merge through
(count, mean, M2) accumulators.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import errors
from .invariants import DenseTensor, PermTuple, eval_trace_invariant
from .partitions import enumerate_partitions, moebius_partition
from .perms import Perm
from .transforms import EntryPattern

BLOCK = 2048


def load_run_config(path: str) -> dict:
    """Flat key=value run configuration: integer values for N, D, samples,
    seed, n_max; `classes` names a file with one class text per line."""
    out: dict = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in ("N", "D", "samples", "seed", "n_max", "threads"):
                out[key] = int(value)
            elif key == "sigmas":
                out[key] = float(value)
            else:
                out[key] = value
    return out


def _generator(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def sample_ginibre(
    N: int, D: int, covariance: float = 1.0, seed: int = 0, stream: int = 0
) -> DenseTensor:
    """A pure Gaussian tensor with E[T Tbar] = C N^(1-D) per matched index."""
    errors.check("tensor entries", N**D, errors.cap_contract())
    rng = _generator(seed, stream)
    scale = math.sqrt(covariance * float(N) ** (1 - D) / 2.0)
    shape = (N,) * D
    arr = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return DenseTensor(arr, D, 0)


def conjugate(t: DenseTensor) -> DenseTensor:
    return DenseTensor(t.array.conj(), t.in_slots, t.out_slots)


def sample_wishart_tensor(N: int, D: int, seed: int = 0, stream: int = 0) -> DenseTensor:
    """Partial trace of a (D+1)-index Ginibre over its last color:
    W = sum_k T_{..k} Tbar_{..k}."""
    errors.check("tensor entries", N ** (D + 1), errors.cap_contract())
    t = sample_ginibre(N, D + 1, 1.0, seed, stream).array
    w = np.tensordot(t, t.conj(), axes=([D], [D]))
    return DenseTensor(w, D, D)


def sample_haar_unitary(N: int, seed: int = 0, stream: int = 0) -> np.ndarray:
    """QR of a complex Gaussian with the phase fixed to the R diagonal."""
    rng = _generator(seed, stream)
    z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def lu_rotate(t: DenseTensor, unitaries: Sequence[np.ndarray]) -> DenseTensor:
    """Apply U_c to output slot c and U_c^dagger to input slot c."""
    arr = t.array
    rank = t.out_slots + t.in_slots
    for c, u in enumerate(unitaries[: t.out_slots]):
        arr = np.tensordot(u, arr, axes=([1], [c]))
        arr = np.moveaxis(arr, 0, c)
    for c, u in enumerate(unitaries[: t.in_slots]):
        slot = t.out_slots + c
        arr = np.tensordot(arr, u.conj().T, axes=([slot], [0]))
        arr = np.moveaxis(arr, rank - 1, slot)
    return DenseTensor(arr, t.out_slots, t.in_slots)


@dataclass
class Accumulator:
    """Mergeable (count, mean, M2) running statistics over complex samples."""

    count: int = 0
    mean: complex = 0.0
    m2: float = 0.0  # sum of |x - mean|^2

    def add(self, value: complex) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += (delta.conjugate() * (value - self.mean)).real

    def merge(self, other: "Accumulator") -> "Accumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        total = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / total
        m2 = self.m2 + other.m2 + abs(delta) ** 2 * self.count * other.count / total
        return Accumulator(total, mean, m2)

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return float("inf")
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


@dataclass
class Estimate:
    mean: complex
    stderr: float
    samples: int

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - target) <= sigmas * max(self.stderr, 1e-300)


@dataclass
class EnsembleConfig:
    """What to sample: kind in {"ginibre", "wishart"}, at size N with D
    colors; `covariance` applies to the Ginibre case."""

    kind: str
    N: int
    D: int
    covariance: float = 1.0
    seed: int = 0

    def draw(self, stream: int) -> list[DenseTensor]:
        if self.kind == "ginibre":
            t = sample_ginibre(self.N, self.D, self.covariance, self.seed, stream)
            return [t, conjugate(t)]
        if self.kind == "wishart":
            return [sample_wishart_tensor(self.N, self.D, self.seed, stream)]
        raise ValueError(f"unknown ensemble {self.kind!r}")


def _map_blocks(task: Callable[[int, int], Accumulator], samples: int, threads: int | None):
    blocks = [(b, min(BLOCK, samples - b * BLOCK)) for b in range((samples + BLOCK - 1) // BLOCK)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda args: task(*args), blocks))
    else:
        results = [task(*args) for args in blocks]
    acc = Accumulator()
    for r in results:
        acc = acc.merge(r)
    return acc


def estimate_moment(
    s: PermTuple,
    flavor: str,
    config: EnsembleConfig,
    samples: int,
    threads: int | None = None,
) -> Estimate:
    """Unbiased Monte Carlo mean of Tr_s over the ensemble."""

    def task(block: int, size: int) -> Accumulator:
        acc = Accumulator()
        for i in range(size):
            tensors = config.draw(block * BLOCK + i)
            if flavor == "pure":
                acc.add(eval_trace_invariant(s, "pure", tensors))
            else:
                acc.add(eval_trace_invariant(s, "mixed", tensors[:1]))
        return acc

    acc = _map_blocks(task, samples, threads)
    return Estimate(acc.mean, acc.stderr, acc.count)


def estimate_classical_cumulant(
    components: Sequence[PermTuple],
    flavor: str,
    config: EnsembleConfig,
    samples: int,
    threads: int | None = None,
) -> Estimate:
    """Plug-in classical cumulant of the component traces, with a jackknife
    standard error: the cumulant is the Moebius sum over partitions of
    products of block-moment means."""
    q = len(components)
    parts = enumerate_partitions(q)

    def draw_products(block: int, size: int) -> np.ndarray:
        out = np.empty((size, 2**q - 1), dtype=complex)
        for i in range(size):
            tensors = config.draw(block * BLOCK + i)
            values = []
            for comp in components:
                if flavor == "pure":
                    values.append(eval_trace_invariant(comp, "pure", tensors))
                else:
                    values.append(eval_trace_invariant(comp, "mixed", tensors[:1]))
            col = 0
            for mask in range(1, 2**q):
                prod = 1.0 + 0.0j
                for j in range(q):
                    if mask >> j & 1:
                        prod *= values[j]
                out[i, col] = prod
                col += 1
        return out

    chunks = []
    blocks = [(b, min(BLOCK, samples - b * BLOCK)) for b in range((samples + BLOCK - 1) // BLOCK)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda args: draw_products(*args), blocks))
    else:
        chunks = [draw_products(*args) for args in blocks]
    data = np.concatenate(chunks, axis=0)
    point, stderr, n = _plugin_cumulant_jackknife(data, q, parts)
    return Estimate(point, stderr, n)


def lu_invariance_residual(
    s: PermTuple, flavor: str, N: int, seed: int = 0
) -> float:
    """|Tr_s(rotated) - Tr_s(original)| for one sampled tensor and one
    sampled local unitary."""
    D = s.D
    us = [sample_haar_unitary(N, seed, stream=100 + c) for c in range(D)]
    if flavor == "pure":
        t = sample_ginibre(N, D, 1.0, seed, stream=0)
        rotated = t.array
        for c, u in enumerate(us):
            rotated = np.moveaxis(np.tensordot(u, rotated, axes=([1], [c])), 0, c)
        before = eval_trace_invariant(s, "pure", [t, conjugate(t)])
        rt = DenseTensor(rotated, D, 0)
        after = eval_trace_invariant(s, "pure", [rt, conjugate(rt)])
    else:
        w = sample_wishart_tensor(N, D, seed, stream=0)
        before = eval_trace_invariant(s, "mixed", [w])
        after = eval_trace_invariant(s, "mixed", [lu_rotate(w, us)])
    return abs(after - before)


def check_microscopic_cumulant(
    pattern: EntryPattern,
    config: EnsembleConfig,
    samples: int,
    exact_value: complex,
    sigmas: float = 3.0,
    threads: int | None = None,
) -> tuple[Estimate, bool]:
    """Monte Carlo joint cumulant of the prescribed entry pattern against
    the exact finite free cumulant evaluated at numeric N.

    The index assignment i_c(s) = s needs N >= n distinct values.
    """
    s = pattern.perms
    n, D = s.n, s.D
    if config.N < n:
        raise ValueError("need N >= n distinct index values")
    assignment = [list(range(n)) for _ in range(D)]

    if pattern.flavor == "mixed":
        q = n

        def entry_values(tensors):
            A = tensors[0].array
            vals = []
            for slot in range(1, n + 1):
                idx = tuple(pattern.output_indices(slot, assignment))
                jdx = tuple(pattern.input_indices(slot, assignment))
                vals.append(A[idx + jdx])
            return vals
    else:
        q = 2 * n

        def entry_values(tensors):
            T, Tbar = tensors[0].array, tensors[1].array
            vals = []
            for slot in range(1, n + 1):
                vals.append(T[tuple(pattern.output_indices(slot, assignment))])
            for slot in range(1, n + 1):
                vals.append(Tbar[tuple(pattern.input_indices(slot, assignment))])
            return vals

    parts = enumerate_partitions(q)

    def draw_products(block: int, size: int) -> np.ndarray:
        out = np.empty((size, 2**q - 1), dtype=complex)
        for i in range(size):
            vals = entry_values(config.draw(block * BLOCK + i))
            for col, mask in enumerate(range(1, 2**q)):
                prod = 1.0 + 0.0j
                for j in range(q):
                    if mask >> j & 1:
                        prod *= vals[j]
                out[i, col] = prod
        return out

    blocks = [(b, min(BLOCK, samples - b * BLOCK)) for b in range((samples + BLOCK - 1) // BLOCK)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda args: draw_products(*args), blocks))
    else:
        chunks = [draw_products(*args) for args in blocks]
    data = np.concatenate(chunks, axis=0)
    point, stderr, nsamp = _plugin_cumulant_jackknife(data, q, parts)
    est = Estimate(point, stderr, nsamp)
    ok = abs(est.mean - exact_value) <= sigmas * max(est.stderr, 1e-300)
    return est, ok


def _plugin_cumulant_jackknife(data: np.ndarray, q: int, parts) -> tuple[complex, float, int]:
    """Plug-in partition-sum cumulant from per-sample subset products, with
    a vectorized leave-one-out jackknife standard error."""
    n = data.shape[0]
    sums = data.sum(axis=0)

    def col(block: frozenset) -> int:
        m = 0
        for j in block:
            m |= 1 << (j - 1)
        return m - 1

    def evaluate(means: np.ndarray) -> np.ndarray:
        # means: (..., 2^q - 1); returns the partition sum along the last axis
        total = np.zeros(means.shape[:-1], dtype=complex)
        for pi in parts:
            term = np.full(means.shape[:-1], complex(moebius_partition(pi)))
            for b in pi.blocks:
                term = term * means[..., col(frozenset(b))]
            total = total + term
        return total

    point = complex(evaluate(sums / n))
    loo_means = (sums[None, :] - data) / (n - 1)
    loo = evaluate(loo_means)
    jack_var = (n - 1) / n * np.sum(np.abs(loo - loo.mean()) ** 2)
    return point, math.sqrt(float(jack_var.real)), n
