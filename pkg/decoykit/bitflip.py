"""The BitFlip cipher: Hamming-distance keyed polyalphabetic substitution.

A letter ``i`` of an alphabet is a pair ``(s_i, h_i)``. A token ``t`` of
length ``l`` *transmits* letter ``i`` iff ``hamming(s_i, t) == h_i`` and no
other letter ``k`` has ``hamming(s_k, t) == h_k``. Every other token is chaff:
either it matches no letter, or it matches several (ambiguous).
"""

import logging
import math
import string
from collections import Counter
from functools import cached_property
from typing import Dict
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from .bitstring import L_MAX
from .bitstring import BitString
from .bitstring import RandomSource
from .bitstring import hamming
from .bitstring import random_sphere_point
from .bitstring import sphere
from .exceptions import EmptySetException
from .exceptions import LengthMismatchException
from .exceptions import ParameterException
from .exceptions import SearchFailedException
from .exceptions import UnknownSymbolException

logger = logging.getLogger(__name__)

# Up to this token length, transmitter and chaff sets are enumerated exactly.
EXHAUSTIVE_MAX_L = 20

# Bound for rejection sampling when sets are not enumerated.
REJECTION_ATTEMPTS = 10_000

DEFAULT_SYMBOLS = string.ascii_lowercase + string.ascii_uppercase + string.digits + " .,;:!?'-"

RANDOMIZED = "randomized"
DEGENERATE = "degenerate"
MODES = (RANDOMIZED, DEGENERATE)


class Letter:
    """One letter of a BitFlip alphabet: a symbol, its center ``s`` and radius ``h``."""

    def __init__(self, symbol: str, s: BitString, h: int):
        if len(symbol) != 1:
            raise ParameterException(f"letter symbol must be one character, got {symbol!r}")
        self._symbol = symbol
        self._s = s
        self._h = h

    @property
    def symbol(self) -> str:
        return self._symbol

    @property
    def s(self) -> BitString:
        """The letter's center string."""
        return self._s

    @property
    def h(self) -> int:
        """The letter's Hamming radius."""
        return self._h

    def __eq__(self, other):
        return (
            isinstance(other, Letter)
            and self._symbol == other._symbol
            and self._s == other._s
            and self._h == other._h
        )

    def __hash__(self):
        return hash((self._symbol, self._s, self._h))

    def __repr__(self):
        return f"Letter(symbol={self._symbol!r}, s='{self._s}', h={self._h})"


class BitFlipAlphabet:
    """The BitFlip key: ``n`` letters over tokens of ``l`` bits.

    Alphabets are immutable. Structural problems (duplicate centers, radii
    outside ``[0, l]``) do not prevent construction; they are reported by
    :func:`validate`. Only duplicate symbols and wrong center lengths are
    rejected right away.
    """

    def __init__(self, l: int, letters: Sequence[Letter]):
        if not 1 <= l <= L_MAX:
            raise ParameterException(f"token length l must be in [1, {L_MAX}], got {l}")
        if len(letters) < 1:
            raise ParameterException("an alphabet needs at least one letter")
        symbols = [letter.symbol for letter in letters]
        duplicates = sorted({s for s in symbols if symbols.count(s) > 1})
        if duplicates:
            raise ParameterException(f"duplicate alphabet symbols: {duplicates}")
        for i, letter in enumerate(letters):
            if letter.s.length != l:
                raise LengthMismatchException(expected=l, actual=letter.s.length, position=i)
        self._l = l
        self._letters: Tuple[Letter, ...] = tuple(letters)
        self._index_by_symbol: Dict[str, int] = {s: i for i, s in enumerate(symbols)}

    @classmethod
    def from_pairs(cls, l: int, pairs: Sequence[Tuple[str, str, int]]) -> "BitFlipAlphabet":
        """Shorthand: ``[("a", "0000", 1), ("b", "1111", 1)]``."""
        return cls(l, [Letter(sym, BitString.from_str(s), h) for sym, s, h in pairs])

    @property
    def l(self) -> int:
        """Bits per token."""
        return self._l

    @property
    def n(self) -> int:
        """Number of letters."""
        return len(self._letters)

    @property
    def letters(self) -> Tuple[Letter, ...]:
        return self._letters

    @property
    def symbols(self) -> str:
        return "".join(letter.symbol for letter in self._letters)

    def index_of(self, symbol: str) -> int:
        return self._index_by_symbol[symbol]

    def replace_letter(self, i: int, letter: Letter) -> "BitFlipAlphabet":
        """A new alphabet with letter ``i`` replaced."""
        letters = list(self._letters)
        letters[i] = letter
        return BitFlipAlphabet(self._l, letters)

    @property
    def enumerable(self) -> bool:
        """True if transmitter and chaff sets are computed exactly."""
        return self._l <= EXHAUSTIVE_MAX_L

    def matches(self, t: BitString) -> List[int]:
        """Indices of all letters ``i`` with ``hamming(s_i, t) == h_i``."""
        return [i for i, letter in enumerate(self._letters) if hamming(letter.s, t) == letter.h]

    @cached_property
    def _sphere_hits(self) -> Tuple[Tuple[List[int], ...], int]:
        """Per letter, the sorted integer values of its transmitters; and the
        number of ambiguous tokens."""
        self._require_enumerable()
        hits: Counter = Counter()
        spheres: List[List[int]] = []
        for letter in self._letters:
            if 0 <= letter.h <= self._l:
                values = [t.value for t in sphere(letter.s, letter.h)]
            else:
                # No token lies at an out-of-range distance.
                values = []
            spheres.append(values)
            hits.update(values)
        transmitters = tuple(sorted(v for v in values if hits[v] == 1) for values in spheres)
        ambiguous = sum(1 for count in hits.values() if count > 1)
        return transmitters, ambiguous

    @cached_property
    def _chaff_values(self) -> List[int]:
        transmitters, _ = self._sphere_hits
        wheat = set()
        for values in transmitters:
            wheat.update(values)
        return [v for v in range(1 << self._l) if v not in wheat]

    def _transmitter_values(self, i: int) -> List[int]:
        if not 0 <= i < self.n:
            raise IndexError(f"letter index {i} out of range for {self.n} letters")
        return self._sphere_hits[0][i]

    def _require_enumerable(self):
        if not self.enumerable:
            raise ParameterException(
                f"exact enumeration supports l <= {EXHAUSTIVE_MAX_L}, alphabet has l={self._l}"
            )

    def __eq__(self, other):
        return (
            isinstance(other, BitFlipAlphabet)
            and self._l == other._l
            and self._letters == other._letters
        )

    def __hash__(self):
        return hash((self._l, self._letters))

    def __str__(self):
        lines = [f"BitFlipAlphabet (l={self._l}, n={self.n}):"]
        lines.extend([f"\t`{x.symbol}` s={x.s} h={x.h}" for x in self._letters])
        return "\n".join(lines)

    def __repr__(self):
        return f"BitFlipAlphabet(l={self._l}, letters={list(self._letters)!r})"


class ValidationReport:
    """Exact transmitter, chaff and ambiguity counts of an alphabet."""

    def __init__(
        self,
        transmitter_counts: Tuple[int, ...],
        chaff_size: int,
        ambiguous_count: int,
        errors: List[str],
    ):
        self._transmitter_counts = transmitter_counts
        self._chaff_size = chaff_size
        self._ambiguous_count = ambiguous_count
        self._errors = errors

    @property
    def transmitter_counts(self) -> Tuple[int, ...]:
        """Number of transmitters per letter, in alphabet order."""
        return self._transmitter_counts

    @property
    def chaff_size(self) -> int:
        """Number of tokens that decode to no letter or to several."""
        return self._chaff_size

    @property
    def ambiguous_count(self) -> int:
        """Number of tokens matched by two or more letters."""
        return self._ambiguous_count

    @property
    def errors(self) -> List[str]:
        """Structural problems (duplicate centers, radii out of range)."""
        return self._errors

    @property
    def is_valid(self) -> bool:
        return not self._errors and all(c >= 1 for c in self._transmitter_counts)

    def __repr__(self):
        return (
            f"ValidationReport(transmitter_counts={self._transmitter_counts}, "
            f"chaff_size={self._chaff_size}, ambiguous_count={self._ambiguous_count}, "
            f"errors={self._errors})"
        )


class DecodeOutcome:
    """Result of decoding one token: a letter, or one of two kinds of chaff."""

    LETTER = "letter"
    CHAFF_NONE = "chaff-none"
    CHAFF_AMBIGUOUS = "chaff-ambiguous"

    def __init__(self, kind: str, index: Optional[int] = None, match_count: int = 0):
        self._kind = kind
        self._index = index
        self._match_count = match_count

    @classmethod
    def from_matches(cls, matches: List[int]) -> "DecodeOutcome":
        if len(matches) == 1:
            return cls(cls.LETTER, index=matches[0], match_count=1)
        if not matches:
            return cls(cls.CHAFF_NONE, match_count=0)
        return cls(cls.CHAFF_AMBIGUOUS, match_count=len(matches))

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def index(self) -> Optional[int]:
        """The decoded letter index; ``None`` for chaff."""
        return self._index

    @property
    def match_count(self) -> int:
        return self._match_count

    @property
    def is_letter(self) -> bool:
        return self._kind == self.LETTER

    def __eq__(self, other):
        return (
            isinstance(other, DecodeOutcome)
            and self._kind == other._kind
            and self._index == other._index
            and self._match_count == other._match_count
        )

    def __repr__(self):
        if self.is_letter:
            return f"DecodeOutcome(Letter({self._index}))"
        return f"DecodeOutcome({self._kind}, matches={self._match_count})"


class DecodedStream:
    """Plaintext recovered from a token stream, with the number of discarded tokens."""

    def __init__(self, text: str, discarded: int):
        self._text = text
        self._discarded = discarded

    @property
    def text(self) -> str:
        return self._text

    @property
    def discarded(self) -> int:
        return self._discarded

    def __repr__(self):
        return f"DecodedStream(text={self._text!r}, discarded={self._discarded})"


def validate(a: BitFlipAlphabet) -> ValidationReport:
    """Count transmitters per letter, chaff tokens and ambiguous tokens exactly."""
    errors = []
    for i, letter in enumerate(a.letters):
        if not 0 <= letter.h <= a.l:
            errors.append(f"letter {i} (`{letter.symbol}`): h={letter.h} outside [0, {a.l}]")
        for k in range(i):
            if a.letters[k].s == letter.s:
                errors.append(
                    f"letters {k} and {i} (`{a.letters[k].symbol}`, `{letter.symbol}`) "
                    f"share the center {letter.s}"
                )
    transmitters, ambiguous = a._sphere_hits
    counts = tuple(len(values) for values in transmitters)
    chaff_size = (1 << a.l) - sum(counts)
    report = ValidationReport(counts, chaff_size, ambiguous, errors)
    if errors:
        logger.info(f"Alphabet has {len(errors)} structural problems: {errors}")
    return report


def transmitters(a: BitFlipAlphabet, i: int) -> Iterator[BitString]:
    """All tokens transmitting letter ``i``, in ascending order."""
    for value in a._transmitter_values(i):
        yield BitString(value, a.l)


def chaff_set(a: BitFlipAlphabet) -> Iterator[BitString]:
    """All tokens which do not transmit any letter, in ascending order."""
    for value in a._chaff_values:
        yield BitString(value, a.l)


def decode_token(a: BitFlipAlphabet, t: BitString) -> DecodeOutcome:
    """Decode one token; chaff is reported, never raised."""
    if t.length != a.l:
        raise LengthMismatchException(expected=a.l, actual=t.length)
    return DecodeOutcome.from_matches(a.matches(t))


def encode_letter(a: BitFlipAlphabet, i: int, rng: RandomSource) -> BitString:
    """A transmitter of letter ``i``, uniformly chosen."""
    if a.enumerable:
        values = a._transmitter_values(i)
        if not values:
            raise EmptySetException(f"transmitters of letter {i} (`{a.letters[i].symbol}`)")
        return BitString(values[rng.index(len(values))], a.l)

    # Uniform on the sphere, conditioned on being unambiguous,
    # is uniform on the transmitter set.
    letter = a.letters[i]
    if not 0 <= letter.h <= a.l:
        raise EmptySetException(f"transmitters of letter {i} (`{letter.symbol}`)")
    for _ in range(REJECTION_ATTEMPTS):
        t = random_sphere_point(letter.s, letter.h, rng)
        if a.matches(t) == [i]:
            return t
    raise EmptySetException(
        f"transmitters of letter {i} (`{letter.symbol}`), "
        f"none found in {REJECTION_ATTEMPTS} samples"
    )


def smallest_transmitter(a: BitFlipAlphabet, i: int) -> BitString:
    """The fixed token used by the degenerate encoding mode."""
    values = a._transmitter_values(i)
    if not values:
        raise EmptySetException(f"transmitters of letter {i} (`{a.letters[i].symbol}`)")
    return BitString(values[0], a.l)


def chaff_token(a: BitFlipAlphabet, rng: RandomSource) -> BitString:
    """A token which decodes to no letter, uniformly chosen from the chaff set."""
    # Uniform tokens conditioned on being chaff are uniform on the chaff set;
    # a few tries usually suffice, the enumerated set covers dense alphabets.
    attempts = 64 if a.enumerable else REJECTION_ATTEMPTS
    for _ in range(attempts):
        t = BitString(rng.bits(a.l), a.l)
        if len(a.matches(t)) != 1:
            return t
    if not a.enumerable:
        raise EmptySetException(f"chaff set, none found in {REJECTION_ATTEMPTS} samples")
    values = a._chaff_values
    if not values:
        raise EmptySetException("chaff set")
    return BitString(values[rng.index(len(values))], a.l)


def _letter_indices(a: BitFlipAlphabet, msg: str) -> List[int]:
    indices = []
    for position, symbol in enumerate(msg):
        try:
            indices.append(a.index_of(symbol))
        except KeyError:
            raise UnknownSymbolException(symbol, position)
    return indices


def encode_message(
    a: BitFlipAlphabet,
    msg: str,
    chaff_rate: float = 0.0,
    mode: str = RANDOMIZED,
    rng: Optional[RandomSource] = None,
    pad_to: Optional[int] = None,
) -> List[BitString]:
    """Encode ``msg`` into a token stream, interleaving chaff.

    Every stream position is chaff with independent probability
    ``chaff_rate``, including a run of chaff after the last letter (the
    only tokens of an empty message); wheat tokens keep message order.
    ``degenerate`` mode always sends the smallest transmitter of a letter
    (a deliberately weak baseline). ``pad_to`` appends chaff until the
    stream has at least that many tokens.
    """
    if not 0.0 <= chaff_rate < 1.0:
        raise ParameterException(f"chaff_rate must be in [0, 1), got {chaff_rate}")
    if mode not in MODES:
        raise ParameterException(f"unknown encoding mode {mode!r}, expected one of {MODES}")
    needs_rng = mode == RANDOMIZED or chaff_rate > 0 or (pad_to or 0) > 0
    if needs_rng and rng is None:
        raise ParameterException(f"a RandomSource is required for {mode} encoding with chaff")
    indices = _letter_indices(a, msg)

    if mode == DEGENERATE:
        fixed = {i: smallest_transmitter(a, i) for i in set(indices)}

    tokens: List[BitString] = []
    for i in indices:
        while chaff_rate > 0 and rng.random() < chaff_rate:
            tokens.append(chaff_token(a, rng))
        if mode == DEGENERATE:
            tokens.append(fixed[i])
        else:
            tokens.append(encode_letter(a, i, rng))
    while chaff_rate > 0 and rng.random() < chaff_rate:
        tokens.append(chaff_token(a, rng))

    if pad_to is not None:
        while len(tokens) < pad_to:
            tokens.append(chaff_token(a, rng))
    return tokens


def decode_stream(a: BitFlipAlphabet, tokens: Sequence[BitString]) -> DecodedStream:
    """Winnow a token stream: decode the letters, silently discard the chaff."""
    symbols = []
    discarded = 0
    for position, t in enumerate(tokens):
        if t.length != a.l:
            raise LengthMismatchException(expected=a.l, actual=t.length, position=position)
        outcome = DecodeOutcome.from_matches(a.matches(t))
        if outcome.is_letter:
            symbols.append(a.letters[outcome.index].symbol)
        else:
            discarded += 1
    logger.debug(f"Decoded {len(symbols)} letters, discarded {discarded} chaff tokens")
    return DecodedStream("".join(symbols), discarded)


def random_alphabet(
    n: int,
    l: int,
    rng: RandomSource,
    symbols: Optional[str] = None,
    attempts: int = REJECTION_ATTEMPTS,
) -> BitFlipAlphabet:
    """A random VALID alphabet: distinct random centers, uniform radii in ``[0, l]``.

    Candidates are drawn independently and rejected until one validates.
    """
    if symbols is None:
        if n > len(DEFAULT_SYMBOLS):
            raise ParameterException(f"at most {len(DEFAULT_SYMBOLS)} default symbols, n={n}")
        symbols = DEFAULT_SYMBOLS[:n]
    if len(symbols) != n:
        raise ParameterException(f"{len(symbols)} symbols given for n={n} letters")
    if not 1 <= l <= L_MAX or n < 1 or n > (1 << l):
        raise ParameterException(f"no alphabet with n={n} distinct centers of l={l} bits")

    for attempt in range(1, attempts + 1):
        centers = set()
        while len(centers) < n:
            centers.add(rng.bits(l))
        centers = list(centers)
        letters = [
            Letter(symbol, BitString(centers[k], l), rng.integer(0, l + 1))
            for k, symbol in enumerate(symbols)
        ]
        candidate = BitFlipAlphabet(l, letters)
        if not candidate.enumerable or validate(candidate).is_valid:
            logger.debug(f"Sampled a valid alphabet after {attempt} attempts")
            return candidate
    raise SearchFailedException(f"no valid alphabet with n={n}, l={l} sampled", attempts)


def alphabet_key_entropy(n: int, l: int) -> float:
    """Size, in bits, of the space of alphabets with ``n`` ordered letters of ``l`` bits."""
    if n < 1 or l < 1 or n > (1 << l):
        raise ParameterException(f"no alphabet with n={n} distinct centers of l={l} bits")
    centers = sum(math.log2((1 << l) - k) for k in range(n))
    return centers + n * math.log2(l + 1)
