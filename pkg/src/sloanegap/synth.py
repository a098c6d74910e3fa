"""Random arithmetic-function cloud: the complexity-driven control.

A sampled function is a chain of 1..5 levels; each level applies a
unary op g (identity with probability 0.8, squaring with 0.2), then a
binary op from {add, multiply, subtract} against a constant k drawn
uniformly from 1..9, operand order g(x) op k.  Depth is drawn in
proportion to the number of distinct parameterizations per depth,
54^depth (9 constants x 3 binary ops x 2 unary ops per level).

Each sampled function is evaluated exactly at n = 1..terms and the
values falling in [1, v_max] are aggregated into an occurrence table,
giving a cloud to contrast with a real snapshot.  Sampling is
counter-based: function i derives all of its draws from mix64(seed, i),
so results are independent of chunking or scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import PowerLawFit, fit_power_law
from .gap import GapParams, gap_score
from .ingest import OccurrenceTable

BINARY_OPS = ("add", "multiply", "subtract")
UNARY_OPS = ("identity", "square")
MAX_DEPTH = 5
CONSTANT_CHOICES = 9
SQUARE_PROBABILITY = 0.2

# 9 constants x 3 binary ops x 2 unary ops
PARAMS_PER_LEVEL = CONSTANT_CHOICES * len(BINARY_OPS) * len(UNARY_OPS)


@dataclass(frozen=True)
class Level:
    constant: int
    binary_op: str
    unary_op: str

    def __post_init__(self):
        if not 1 <= self.constant <= CONSTANT_CHOICES:
            raise ValueError(f"constant must be in 1..{CONSTANT_CHOICES}")
        if self.binary_op not in BINARY_OPS:
            raise ValueError(f"unknown binary op {self.binary_op!r}")
        if self.unary_op not in UNARY_OPS:
            raise ValueError(f"unknown unary op {self.unary_op!r}")


@dataclass(frozen=True)
class ExprNode:
    """A sampled function as its level chain, applied innermost first."""

    levels: tuple

    def __post_init__(self):
        if not 1 <= len(self.levels) <= MAX_DEPTH:
            raise ValueError(f"depth must be in 1..{MAX_DEPTH}")

    @property
    def depth(self) -> int:
        return len(self.levels)


def depth_weights(max_depth: int = MAX_DEPTH) -> np.ndarray:
    """Probability of each depth 1..max_depth, proportional to 54^depth."""
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    raw = np.array([float(PARAMS_PER_LEVEL) ** i for i in range(1, max_depth + 1)])
    return raw / raw.sum()


def eval_expr(expr: ExprNode, n: int) -> int:
    """Exact arbitrary-precision evaluation at a positive integer n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = n
    for level in expr.levels:
        g = x * x if level.unary_op == "square" else x
        if level.binary_op == "add":
            x = g + level.constant
        elif level.binary_op == "multiply":
            x = g * level.constant
        else:
            x = g - level.constant
    return x


def sample_function(rng: np.random.Generator, max_depth: int = MAX_DEPTH) -> ExprNode:
    """Draw one random function from the model via a numpy Generator."""
    cum = np.cumsum(depth_weights(max_depth))
    depth = 1 + int(np.searchsorted(cum, rng.random(), side="right"))
    depth = min(depth, max_depth)
    levels = []
    for _ in range(depth):
        constant = int(rng.integers(1, CONSTANT_CHOICES + 1))
        binary_op = BINARY_OPS[int(rng.integers(len(BINARY_OPS)))]
        unary_op = "square" if rng.random() < SQUARE_PROBABILITY else "identity"
        levels.append(Level(constant, binary_op, unary_op))
    return ExprNode(tuple(levels))


# --- counter-based sampling -------------------------------------------------
#
# splitmix64: function i's seed is the i-th output of the stream started
# at the run seed, and draw j of function i is the j-th output of the
# stream started at that per-function seed.  Everything is a pure
# function of (seed, i, j).

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


_U64 = 0xFFFFFFFFFFFFFFFF


def _mix64(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def mix_seed(seed: int, i) -> np.uint64:
    """Per-function seed: output i of the splitmix64 stream at `seed`."""
    base = np.uint64(seed & _U64)
    with np.errstate(over="ignore"):
        step = (np.asarray(i, dtype=np.uint64) + np.uint64(1)) * _GOLDEN
        return _mix64(base + step)


def _uniform(state, j: int):
    """Draw j of each state as a float64 in [0, 1)."""
    step = np.uint64(((j + 1) * int(_GOLDEN)) & _U64)
    with np.errstate(over="ignore"):
        raw = _mix64(state + step)
    return (raw >> np.uint64(11)).astype(np.float64) * (2.0**-53)


@dataclass
class FunctionParams:
    """Vectorized model parameters for a block of function indices.

    Arrays have one row per function and max_depth columns; only the
    first `depth` columns of a row are meaningful.
    """

    depth: np.ndarray
    constants: np.ndarray
    binary_codes: np.ndarray
    square_flags: np.ndarray


def sample_parameter_arrays(
    seed: int,
    count: int,
    max_depth: int = MAX_DEPTH,
    start_index: int = 0,
) -> FunctionParams:
    """Parameters of functions start_index..start_index+count-1 of a run."""
    idx = np.arange(start_index, start_index + count, dtype=np.uint64)
    state = mix_seed(seed, idx)
    cum = np.cumsum(depth_weights(max_depth))
    depth = 1 + np.searchsorted(cum, _uniform(state, 0), side="right")
    depth = np.minimum(depth, max_depth).astype(np.int64)
    constants = np.empty((count, max_depth), dtype=np.int64)
    binary_codes = np.empty((count, max_depth), dtype=np.int64)
    square_flags = np.empty((count, max_depth), dtype=bool)
    for level in range(max_depth):
        constants[:, level] = 1 + np.floor(
            _uniform(state, 1 + 3 * level) * CONSTANT_CHOICES
        ).astype(np.int64)
        binary_codes[:, level] = np.floor(
            _uniform(state, 2 + 3 * level) * len(BINARY_OPS)
        ).astype(np.int64)
        square_flags[:, level] = _uniform(state, 3 + 3 * level) < SQUARE_PROBABILITY
    return FunctionParams(depth, constants, binary_codes, square_flags)


def simulated_expression(seed: int, i: int, max_depth: int = MAX_DEPTH) -> ExprNode:
    """The exact ExprNode that simulate(seed, ...) uses for function i."""
    params = sample_parameter_arrays(seed, 1, max_depth, start_index=i)
    depth = int(params.depth[0])
    levels = tuple(
        Level(
            constant=int(params.constants[0, level]),
            binary_op=BINARY_OPS[int(params.binary_codes[0, level])],
            unary_op="square" if params.square_flags[0, level] else "identity",
        )
        for level in range(depth)
    )
    return ExprNode(levels)


@dataclass
class SimulationResult:
    """Aggregated occurrence counts of one simulation run."""

    seed: int
    num_functions: int
    terms_per_function: int
    v_max: int
    total_values: int
    counted: int
    discarded: int
    table: OccurrenceTable = field(repr=False)

    def __post_init__(self):
        if self.total_values != self.num_functions * self.terms_per_function:
            raise ValueError("total_values must equal num_functions * terms_per_function")
        if self.counted + self.discarded != self.total_values:
            raise ValueError("counted + discarded must equal total_values")

    @property
    def counts(self) -> dict:
        """Nonzero occurrence counts as a value -> count map."""
        values = np.nonzero(self.table.counts)[0]
        return {int(v): int(self.table.counts[v]) for v in values}


# Values whose magnitude stays within float64's exact-integer range can
# never be miscounted: a value re-entering [1, v_max] shrinks by at most
# the constant per level, so any trajectory ending in range stays far
# below 2^53 and the float evaluation is exact.
_CHUNK = 1 << 19


def simulate(
    seed: int,
    num_functions: int,
    terms_per_function: int = 20,
    v_max: int = 10000,
) -> SimulationResult:
    """Sample functions, evaluate each at n = 1..terms, count in-range values."""
    if num_functions < 1:
        raise ValueError(f"num_functions must be >= 1, got {num_functions}")
    if terms_per_function < 1:
        raise ValueError("terms_per_function must be >= 1")
    if v_max < 1:
        raise ValueError("v_max must be >= 1")
    counts = np.zeros(v_max + 1, dtype=np.int64)
    counted = 0
    offset = 0
    while offset < num_functions:
        block = min(_CHUNK, num_functions - offset)
        params = sample_parameter_arrays(seed, block, MAX_DEPTH, start_index=offset)
        k = params.constants.astype(np.float64)
        with np.errstate(over="ignore"):
            for n in range(1, terms_per_function + 1):
                x = np.full(block, float(n))
                for level in range(MAX_DEPTH):
                    active = params.depth > level
                    g = np.where(params.square_flags[:, level], x * x, x)
                    code = params.binary_codes[:, level]
                    kl = k[:, level]
                    y = np.where(
                        code == 0, g + kl, np.where(code == 1, g * kl, g - kl)
                    )
                    x = np.where(active, y, x)
                in_range = (x >= 1.0) & (x <= float(v_max))
                values = x[in_range].astype(np.int64)
                counts += np.bincount(values, minlength=v_max + 1)
                counted += int(values.size)
        offset += block
    total = num_functions * terms_per_function
    table = OccurrenceTable(
        n_max=v_max,
        counts=counts,
        total_terms_seen=total,
        snapshot_label=f"synthetic(seed={seed}, functions={num_functions})",
    )
    return SimulationResult(
        seed=seed,
        num_functions=num_functions,
        terms_per_function=terms_per_function,
        v_max=v_max,
        total_values=total,
        counted=counted,
        discarded=total - counted,
        table=table,
    )


@dataclass
class GapComparison:
    """Gap presence of a real cloud versus a synthetic one."""

    gap_score_real: float
    gap_score_synth: float
    ratio: float
    fit_real: PowerLawFit
    fit_synth: PowerLawFit

    def to_json_dict(self) -> dict:
        return {
            "gap_score_real": self.gap_score_real,
            "gap_score_synth": self.gap_score_synth,
            "ratio": self.ratio if math.isfinite(self.ratio) else None,
            "fit_real": self.fit_real.to_json_dict(),
            "fit_synth": self.fit_synth.to_json_dict(),
        }


def compare_gap(
    real: OccurrenceTable,
    synthetic: SimulationResult,
    params: GapParams | None = None,
) -> GapComparison:
    """Score both clouds with the same window parameters and fit both."""
    if params is None:
        params = GapParams()
    score_real = gap_score(real, params)
    score_synth = gap_score(synthetic.table, params)
    if score_real == score_synth:
        ratio = 1.0
    elif score_synth == 0.0:
        ratio = math.inf
    else:
        ratio = score_real / score_synth
    return GapComparison(
        gap_score_real=score_real,
        gap_score_synth=score_synth,
        ratio=ratio,
        fit_real=fit_power_law(real, (1, real.n_max)),
        fit_synth=fit_power_law(synthetic.table, (1, synthetic.v_max)),
    )
