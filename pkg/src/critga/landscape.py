"""Fitness landscapes over fixed-length binary genotypes.

Genotypes are ``numpy.uint8`` vectors of zeros and ones. Populations are
stored as ``(m, n)`` matrices, one genotype per row, so every landscape
provides a vectorised :meth:`FitnessLandscape.evaluate_many` next to the
scalar :meth:`FitnessLandscape.evaluate`.

Built-in kinds all have the all-ones genotype as unique global optimum.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, UnsupportedQueryError

MAX_GENOTYPE_LENGTH = 64
MAX_CUSTOM_LENGTH = 20
DEFAULT_SAFETY_FACTOR = 2.0


class LandscapeKind(str, enum.Enum):
    SHARP_PEAK = "sharp_peak"
    ROYAL_ROAD = "royal_road"
    DECEPTIVE_TRAP = "deceptive_trap"
    CUSTOM = "custom"


def genotype_from_str(bits: str) -> np.ndarray:
    """Parse ``"0110"`` into a uint8 genotype."""
    if not bits or any(ch not in "01" for ch in bits):
        raise ConfigurationError(f"not a bitstring: {bits!r}")
    return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")


def genotype_to_str(g: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(g).ravel())


def _as_genotype(g) -> np.ndarray:
    if isinstance(g, str):
        return genotype_from_str(g)
    arr = np.asarray(g)
    if arr.ndim != 1:
        raise ConfigurationError(f"genotype must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ConfigurationError("genotype entries must be 0 or 1")
    return arr.astype(np.uint8, copy=False)


@dataclass(frozen=True, eq=False)
class FitnessLandscape:
    """Immutable map from genotypes in {0,1}^n to strictly positive fitness.

    Use the constructors :func:`sharp_peak`, :func:`royal_road`,
    :func:`deceptive_trap` and :func:`custom_landscape` (or
    :func:`load_custom_landscape`) rather than instantiating directly.
    """

    kind: LandscapeKind
    n: int
    sigma: float | None = None
    block: int | None = None
    table: np.ndarray | None = field(default=None, repr=False)
    ratio_bound: float | None = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GENOTYPE_LENGTH:
            raise ConfigurationError(
                f"genotype length must be in 1..{MAX_GENOTYPE_LENGTH}, got {self.n}", "landscape.n"
            )
        if self.kind is LandscapeKind.SHARP_PEAK:
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 1:
                raise ConfigurationError(f"peak height must be finite and > 1, got {self.sigma}", "landscape.sigma")
        elif self.kind in (LandscapeKind.ROYAL_ROAD, LandscapeKind.DECEPTIVE_TRAP):
            b = self.block
            if b is None or b < 1 or self.n % b:
                raise ConfigurationError(
                    f"block size must divide n={self.n}, got {b}", "landscape.block"
                )
        elif self.kind is LandscapeKind.CUSTOM:
            if self.table is None or self.table.shape != (1 << self.n,):
                raise ConfigurationError("custom landscape needs a table of 2**n entries", "landscape.table")
            if not np.all(np.isfinite(self.table)) or np.any(self.table <= 0):
                raise ConfigurationError("custom fitness values must be finite and > 0", "landscape.table")
            if self.ratio_bound is None:
                raise ConfigurationError("custom landscape requires an explicit ratio_bound", "landscape.ratio_bound")
            ratio = float(self.table.max() / self.table.min())
            if not self.ratio_bound > ratio:
                raise ConfigurationError(
                    f"ratio_bound {self.ratio_bound} must exceed max/min fitness ratio {ratio}",
                    "landscape.ratio_bound",
                )

    # -- queries ---------------------------------------------------------

    @property
    def class_symmetric(self) -> bool:
        """True when fitness depends only on the Hamming distance to the master."""
        return self.kind is LandscapeKind.SHARP_PEAK

    @property
    def integer_valued(self) -> bool:
        """True when every fitness value is an integer, so exact comparison is safe."""
        if self.kind is LandscapeKind.SHARP_PEAK:
            return float(self.sigma).is_integer()
        if self.kind is LandscapeKind.CUSTOM:
            return bool(np.all(self.table == np.round(self.table)))
        return True

    @property
    def max_fitness(self) -> float:
        if self.kind is LandscapeKind.SHARP_PEAK:
            return float(self.sigma)
        if self.kind is LandscapeKind.ROYAL_ROAD:
            return 1.0 + self.n // self.block
        if self.kind is LandscapeKind.DECEPTIVE_TRAP:
            return float((self.n // self.block) * (self.block + 1))
        return float(self.table.max())

    @property
    def min_fitness(self) -> float:
        if self.kind is LandscapeKind.DECEPTIVE_TRAP:
            # every block scores at least 1 (ones == b - 1)
            return float(self.n // self.block)
        if self.kind is LandscapeKind.CUSTOM:
            return float(self.table.min())
        return 1.0

    def evaluate(self, g) -> float:
        """Fitness of a single genotype (array of 0/1 or bitstring)."""
        g = _as_genotype(g)
        if g.shape[0] != self.n:
            raise ConfigurationError(f"genotype length {g.shape[0]} does not match landscape n={self.n}")
        return float(self.evaluate_many(g[None, :])[0])

    def evaluate_many(self, genomes: np.ndarray) -> np.ndarray:
        """Fitness of every row of an ``(m, n)`` 0/1 matrix."""
        genomes = np.asarray(genomes)
        if genomes.ndim != 2 or genomes.shape[1] != self.n:
            raise ConfigurationError(
                f"expected genotypes of length {self.n}, got array of shape {genomes.shape}"
            )
        m = genomes.shape[0]
        if self.kind is LandscapeKind.SHARP_PEAK:
            on_peak = genomes.all(axis=1)
            return np.where(on_peak, float(self.sigma), 1.0)
        if self.kind is LandscapeKind.ROYAL_ROAD:
            blocks = genomes.reshape(m, -1, self.block).all(axis=2)
            return 1.0 + blocks.sum(axis=1, dtype=np.float64)
        if self.kind is LandscapeKind.DECEPTIVE_TRAP:
            b = self.block
            ones = genomes.reshape(m, -1, b).sum(axis=2, dtype=np.int64)
            score = np.where(ones < b, b - ones, b + 1)
            return score.sum(axis=1).astype(np.float64)
        weights = np.left_shift(np.uint64(1), np.arange(self.n - 1, -1, -1, dtype=np.uint64))
        index = genomes.astype(np.uint64) @ weights
        return self.table[index.astype(np.int64)]

    def class_fitness(self) -> np.ndarray:
        """Fitness per error class (Hamming distance 0..n from the master)."""
        if not self.class_symmetric:
            raise UnsupportedQueryError(f"{self.kind.value} landscape is not class-symmetric")
        prof = np.ones(self.n + 1)
        prof[0] = self.sigma
        return prof


def sharp_peak(n: int, sigma: float) -> FitnessLandscape:
    return FitnessLandscape(LandscapeKind.SHARP_PEAK, n, sigma=float(sigma))


def royal_road(n: int, block: int) -> FitnessLandscape:
    return FitnessLandscape(LandscapeKind.ROYAL_ROAD, n, block=block)


def deceptive_trap(n: int, block: int) -> FitnessLandscape:
    return FitnessLandscape(LandscapeKind.DECEPTIVE_TRAP, n, block=block)


def custom_landscape(n: int, entries: dict[str, float], ratio_bound: float) -> FitnessLandscape:
    """Tabulated landscape; genotypes absent from ``entries`` get fitness 1."""
    if not 1 <= n <= MAX_CUSTOM_LENGTH:
        raise ConfigurationError(f"custom landscapes support n in 1..{MAX_CUSTOM_LENGTH}, got {n}", "landscape.n")
    table = np.ones(1 << n)
    for bits, value in entries.items():
        if len(bits) != n:
            raise ConfigurationError(f"entry {bits!r} has length {len(bits)}, expected {n}")
        genotype_from_str(bits)
        table[int(bits, 2)] = float(value)
    table.setflags(write=False)
    return FitnessLandscape(LandscapeKind.CUSTOM, n, table=table, ratio_bound=float(ratio_bound))


def parse_custom_landscape(text: str) -> FitnessLandscape:
    """Parse the line-oriented custom landscape format.

    ::

        n 3
        111 5.0
        011 2.5
        ratio_bound 6

    Blank lines and lines starting with ``#`` are ignored.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ConfigurationError("empty custom landscape file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise ConfigurationError(f"first line must be 'n <int>', got {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError:
        raise ConfigurationError(f"bad genotype length {head[1]!r}") from None
    tail = lines[-1].split()
    if len(lines) < 2 or len(tail) != 2 or tail[0] != "ratio_bound":
        raise ConfigurationError("last line must be 'ratio_bound <real>'")
    try:
        bound = float(tail[1])
    except ValueError:
        raise ConfigurationError(f"bad ratio_bound {tail[1]!r}") from None

    entries: dict[str, float] = {}
    for ln in lines[1:-1]:
        parts = ln.split()
        if len(parts) != 2:
            raise ConfigurationError(f"expected '<bitstring> <fitness>', got {ln!r}")
        bits, value = parts
        if bits in entries:
            raise ConfigurationError(f"duplicate entry for {bits}")
        try:
            entries[bits] = float(value)
        except ValueError:
            raise ConfigurationError(f"bad fitness value {value!r}") from None
    return custom_landscape(n, entries, bound)


def load_custom_landscape(path: str | os.PathLike) -> FitnessLandscape:
    with open(path, encoding="utf-8") as fh:
        return parse_custom_landscape(fh.read())


def format_custom_landscape(landscape: FitnessLandscape) -> str:
    """Inverse of :func:`parse_custom_landscape` (only non-default entries written)."""
    if landscape.kind is not LandscapeKind.CUSTOM:
        raise UnsupportedQueryError("only custom landscapes have a table form")
    n = landscape.n
    out = [f"n {n}"]
    for idx in np.flatnonzero(landscape.table != 1.0):
        out.append(f"{int(idx):0{n}b} {float(landscape.table[idx])!r}")
    out.append(f"ratio_bound {landscape.ratio_bound!r}")
    return "\n".join(out) + "\n"


def evaluate(g, landscape: FitnessLandscape) -> float:
    return landscape.evaluate(g)


def fitness_ratio_bound(landscape: FitnessLandscape, safety_factor: float = DEFAULT_SAFETY_FACTOR) -> float:
    """Upper bound ``c`` on max/min fitness, used to seed the mutation bracket.

    Built-in kinds return ``(max / min) * safety_factor``; custom tables
    return their supplied bound unchanged.
    """
    if landscape.kind is LandscapeKind.CUSTOM:
        return float(landscape.ratio_bound)
    if not safety_factor >= 1:
        raise ConfigurationError(f"safety factor must be >= 1, got {safety_factor}", "landscape.safety_factor")
    return landscape.max_fitness / landscape.min_fitness * safety_factor


def master_genotype(landscape: FitnessLandscape) -> np.ndarray:
    """The unique global optimum (all ones for every built-in kind)."""
    if landscape.kind is LandscapeKind.CUSTOM:
        raise UnsupportedQueryError("custom landscapes do not declare a master genotype")
    return np.ones(landscape.n, dtype=np.uint8)
