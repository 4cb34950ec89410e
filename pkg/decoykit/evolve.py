"""Evolutionary optimization of BitFlip alphabets.

A mutation-only generational search: the elite is carried over unchanged,
the rest of the next generation are mutated winners of size-2 tournaments.
"""

import logging
import math
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np

from .bitflip import DEFAULT_SYMBOLS
from .bitflip import EXHAUSTIVE_MAX_L
from .bitflip import BitFlipAlphabet
from .bitflip import Letter
from .bitflip import validate
from .bitstring import BitString
from .bitstring import RandomSource
from .exceptions import ParameterException
from .exceptions import SearchFailedException

logger = logging.getLogger(__name__)

ELITE_FRACTION = 0.1
MUTATION_ATTEMPTS = 1000


class FitnessConfig:
    """Weights of the fitness terms.

    Example:
        >>> cfg = FitnessConfig(w_capacity=1.0, w_chaff=0.0, w_balance=0.0)
        >>> cfg.w_chaff = 0.5
    """

    def __init__(
        self,
        w_capacity: float = 1.0,
        w_chaff: float = 1.0,
        w_balance: float = 0.0,
        target_chaff_fraction: float = 0.5,
    ):
        self._w_capacity = self._check_weight("w_capacity", w_capacity)
        self._w_chaff = self._check_weight("w_chaff", w_chaff)
        self._w_balance = self._check_weight("w_balance", w_balance)
        self._check_not_all_zero()
        self.target_chaff_fraction = target_chaff_fraction

    @staticmethod
    def _check_weight(name: str, value: float) -> float:
        if value < 0:
            raise ParameterException(f"{name} must be >= 0, got {value}")
        return float(value)

    def _check_not_all_zero(self):
        if self._w_capacity == self._w_chaff == self._w_balance == 0:
            raise ParameterException("at least one fitness weight must be positive")

    @property
    def w_capacity(self) -> float:
        """Weight of the smallest transmitter-set size."""
        return self._w_capacity

    @w_capacity.setter
    def w_capacity(self, value: float):
        old = self._w_capacity
        self._w_capacity = self._check_weight("w_capacity", value)
        try:
            self._check_not_all_zero()
        except ParameterException:
            self._w_capacity = old
            raise

    @property
    def w_chaff(self) -> float:
        """Weight of the closeness of the chaff fraction to its target."""
        return self._w_chaff

    @w_chaff.setter
    def w_chaff(self, value: float):
        old = self._w_chaff
        self._w_chaff = self._check_weight("w_chaff", value)
        try:
            self._check_not_all_zero()
        except ParameterException:
            self._w_chaff = old
            raise

    @property
    def w_balance(self) -> float:
        """Weight of the (negated) variance of the transmitter-set sizes."""
        return self._w_balance

    @w_balance.setter
    def w_balance(self, value: float):
        old = self._w_balance
        self._w_balance = self._check_weight("w_balance", value)
        try:
            self._check_not_all_zero()
        except ParameterException:
            self._w_balance = old
            raise

    @property
    def target_chaff_fraction(self) -> float:
        return self._target_chaff_fraction

    @target_chaff_fraction.setter
    def target_chaff_fraction(self, value: float):
        if not 0.0 < value < 1.0:
            raise ParameterException(f"target_chaff_fraction must be in (0, 1), got {value}")
        self._target_chaff_fraction = float(value)

    def __repr__(self):
        return (
            f"FitnessConfig(w_capacity={self._w_capacity}, w_chaff={self._w_chaff}, "
            f"w_balance={self._w_balance}, target_chaff_fraction={self._target_chaff_fraction})"
        )


class EvolutionReport:
    """Outcome of :func:`evolve_alphabet`."""

    def __init__(
        self, best_per_generation: Sequence[float], final: BitFlipAlphabet, evaluations: int
    ):
        self._best_per_generation = tuple(best_per_generation)
        self._final = final
        self._evaluations = evaluations

    @property
    def best_per_generation(self) -> Sequence[float]:
        """Best fitness seen up to and including each generation."""
        return self._best_per_generation

    @property
    def final(self) -> BitFlipAlphabet:
        return self._final

    @property
    def evaluations(self) -> int:
        return self._evaluations

    def __eq__(self, other):
        return (
            isinstance(other, EvolutionReport)
            and self._best_per_generation == other._best_per_generation
            and self._final == other._final
            and self._evaluations == other._evaluations
        )

    def __repr__(self):
        best = self._best_per_generation[-1] if self._best_per_generation else None
        return (
            f"EvolutionReport(generations={len(self._best_per_generation)}, best={best}, "
            f"evaluations={self._evaluations})"
        )


def fitness(a: BitFlipAlphabet, cfg: FitnessConfig) -> float:
    """Weighted sum of capacity, chaff supply and balance; ``-inf`` if invalid."""
    report = validate(a)
    if not report.is_valid:
        return -math.inf
    counts = np.array(report.transmitter_counts, dtype=float)
    chaff_fraction = report.chaff_size / float(1 << a.l)
    return float(
        cfg.w_capacity * counts.min()
        + cfg.w_chaff * (1.0 - abs(chaff_fraction - cfg.target_chaff_fraction))
        - cfg.w_balance * counts.var()
    )


def mutate(a: BitFlipAlphabet, rng: RandomSource) -> BitFlipAlphabet:
    """Flip one bit of one center, or move one radius by one.

    A bit flip that would duplicate another center is re-rolled.
    """
    centers = {x.s for x in a.letters}
    for _ in range(MUTATION_ATTEMPTS):
        i = rng.index(a.n)
        letter = a.letters[i]
        if rng.random() < 0.5:
            s = letter.s.flip(rng.index(a.l))
            if s in centers:
                continue
            return a.replace_letter(i, Letter(letter.symbol, s, letter.h))
        if letter.h == 0:
            h = 1
        elif letter.h == a.l:
            h = a.l - 1
        else:
            h = letter.h + rng.choice((-1, 1))
        return a.replace_letter(i, Letter(letter.symbol, letter.s, h))
    raise SearchFailedException("no structurally valid mutation", MUTATION_ATTEMPTS)


def _random_individual(n: int, l: int, symbols: str, rng: RandomSource) -> BitFlipAlphabet:
    centers: List[int] = []
    while len(centers) < n:
        value = rng.bits(l)
        if value not in centers:
            centers.append(value)
    return BitFlipAlphabet(
        l,
        [Letter(x, BitString(v, l), rng.integer(0, l + 1)) for x, v in zip(symbols, centers)],
    )


def _tournament(scores: Sequence[float], rng: RandomSource) -> int:
    first, second = rng.index(len(scores)), rng.index(len(scores))
    return first if scores[first] >= scores[second] else second


def evolve_alphabet(
    n: int,
    l: int,
    population: int,
    generations: int,
    cfg: FitnessConfig,
    rng: RandomSource,
    symbols: Optional[str] = None,
) -> EvolutionReport:
    """Evolve an alphabet of ``n`` letters of ``l`` bits.

    Every generation evaluates the whole population, so the report always
    accounts for ``population * generations`` evaluations.
    """
    if population < 2 or generations < 1 or n < 1 or l < 1:
        raise ParameterException(
            "need population >= 2, generations >= 1, n >= 1 and l >= 1, got "
            f"population={population}, generations={generations}, n={n}, l={l}"
        )
    if l > EXHAUSTIVE_MAX_L:
        raise ParameterException(
            f"fitness needs exact enumeration, which supports l <= {EXHAUSTIVE_MAX_L}, got l={l}"
        )
    if n > (1 << l):
        raise ParameterException(f"no alphabet with n={n} distinct centers of l={l} bits")
    if symbols is None:
        symbols = DEFAULT_SYMBOLS[:n]
    if len(symbols) != n:
        raise ParameterException(f"{len(symbols)} symbols given for n={n} letters")

    n_elite = max(1, int(population * ELITE_FRACTION))
    pop = [_random_individual(n, l, symbols, rng) for _ in range(population)]
    best: Optional[BitFlipAlphabet] = None
    best_score = -math.inf
    best_per_generation: List[float] = []
    evaluations = 0

    for generation in range(generations):
        scores = [fitness(a, cfg) for a in pop]
        evaluations += len(pop)
        order = sorted(range(len(pop)), key=lambda k: scores[k], reverse=True)
        if best is None or scores[order[0]] > best_score:
            best, best_score = pop[order[0]], scores[order[0]]
        best_per_generation.append(best_score)
        logger.debug(f"Generation {generation}: best fitness {best_score}")

        if generation == generations - 1:
            break
        elite = [pop[k] for k in order[:n_elite]]
        offspring = [
            mutate(pop[_tournament(scores, rng)], rng) for _ in range(population - n_elite)
        ]
        pop = elite + offspring

    if best_score == -math.inf:
        raise SearchFailedException(
            f"no valid alphabet with n={n}, l={l} among evaluated candidates", evaluations
        )
    logger.info(f"Evolution finished after {evaluations} evaluations, fitness {best_score}")
    return EvolutionReport(best_per_generation, best, evaluations)
