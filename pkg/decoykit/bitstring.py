"""Bit strings, Hamming geometry, hex rendering and the seeded randomness contract.

All textual renderings are most-significant-bit first: index 0 of a
:class:`BitString` is its leftmost bit.
"""

import functools
import itertools
import logging
import math
import os
import re
from typing import Iterable
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import TypeVar

import numpy as np

from .exceptions import FormatException
from .exceptions import LengthMismatchException
from .exceptions import ParameterException

logger = logging.getLogger(__name__)

# Largest token (letter) length accepted by the ciphers. Pads may be longer.
L_MAX = 4096

SEED_ENV_VAR = "DECOYKIT_SEED"

_MAX_SEED = 2**64
_HEX_RE = re.compile(r"^[0-9a-fA-F]*$")

T = TypeVar("T")


@functools.total_ordering
class BitString:
    """An immutable, fixed-length sequence of bits.

    Internally the bits are held as a non-negative integer whose binary
    representation, left-padded to ``length`` digits, is the bit string.
    """

    __slots__ = ("_value", "_length")

    def __init__(self, value: int, length: int):
        if length < 0:
            raise ParameterException(f"BitString length must be >= 0, got {length}")
        if value < 0 or value >> length:
            raise ParameterException(f"Value {value} does not fit into {length} bits")
        self._value = value
        self._length = length

    @classmethod
    def from_str(cls, bits: str) -> "BitString":
        """Parse a string of ``0`` and ``1`` characters, e.g. ``"0101"``."""
        if any(c not in "01" for c in bits):
            raise FormatException(f"Invalid bit string {bits!r}: only `0` and `1` allowed")
        return cls(int(bits, 2) if bits else 0, len(bits))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        """Build from an iterable of 0/1 integers (MSB first)."""
        value = 0
        length = 0
        for bit in bits:
            value = (value << 1) | (1 if bit else 0)
            length += 1
        return cls(value, length)

    @classmethod
    def from_bytes(cls, data: bytes, length: Optional[int] = None) -> "BitString":
        """Interpret ``data`` MSB-first; ``length`` keeps only the leading bits."""
        total = 8 * len(data)
        if length is None:
            length = total
        if length > total:
            raise LengthMismatchException(expected=length, actual=total)
        value = int.from_bytes(data, "big") >> (total - length)
        return cls(value, length)

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(0, length)

    @property
    def value(self) -> int:
        """Integer view: the bits read as an unsigned big-endian number."""
        return self._value

    @property
    def length(self) -> int:
        """Number of bits."""
        return self._length

    def popcount(self) -> int:
        """Number of one-bits."""
        return bin(self._value).count("1")

    def flip(self, position: int) -> "BitString":
        """Copy of this string with the bit at ``position`` inverted."""
        if not 0 <= position < self._length:
            raise IndexError(f"bit position {position} out of range for length {self._length}")
        return BitString(self._value ^ (1 << (self._length - 1 - position)), self._length)

    def to_bytes(self) -> bytes:
        """MSB-first bytes; the last byte is zero-padded on the right."""
        n_bytes = (self._length + 7) // 8
        return (self._value << (8 * n_bytes - self._length)).to_bytes(n_bytes, "big")

    def to_list(self) -> List[int]:
        return [bit for bit in self]

    def __xor__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        if other._length != self._length:
            raise LengthMismatchException(expected=self._length, actual=other._length)
        return BitString(self._value ^ other._value, self._length)

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, index: int) -> int:
        if index < 0:
            index += self._length
        if not 0 <= index < self._length:
            raise IndexError(f"bit index out of range for length {self._length}")
        return (self._value >> (self._length - 1 - index)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self._length - 1, -1, -1):
            yield (self._value >> i) & 1

    def __eq__(self, other):
        return (
            isinstance(other, BitString)
            and self._length == other._length
            and self._value == other._value
        )

    def __lt__(self, other: "BitString") -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        # For equal lengths this is the lexicographic order of the rendering.
        return (self._length, self._value) < (other._length, other._value)

    def __hash__(self):
        return hash((self._length, self._value))

    def __str__(self):
        return format(self._value, f"0{self._length}b") if self._length else ""

    def __repr__(self):
        return f"BitString('{self}')"


class RandomSource:
    """Injected source of randomness.

    With a seed, the source is deterministic: identical seeds yield identical
    output sequences, across runs and platforms (numpy's PCG64 generator).
    Without a seed, the generator is initialized from system entropy.

    A source is single-owner; concurrent users need one source each
    (see :meth:`spawn`).
    """

    SEEDED = "seeded-deterministic"
    SYSTEM = "system-entropy"

    def __init__(self, seed: Optional[int] = None):
        if seed is not None and not 0 <= seed < _MAX_SEED:
            raise ParameterException(f"seed must be a 64-bit unsigned integer, got {seed}")
        self._seed = seed
        self._generator = np.random.Generator(np.random.PCG64(seed))

    @classmethod
    def from_env(cls, seed: Optional[int] = None) -> "RandomSource":
        """Use ``seed`` if given, else ``$DECOYKIT_SEED`` if set, else system entropy."""
        if seed is None:
            env_seed = os.environ.get(SEED_ENV_VAR)
            if env_seed:
                try:
                    seed = int(env_seed)
                except ValueError:
                    raise ParameterException(
                        f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}"
                    )
                logger.info(f"Using seed {seed} from ${SEED_ENV_VAR}")
        return cls(seed)

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    @property
    def mode(self) -> str:
        return self.SYSTEM if self._seed is None else self.SEEDED

    def spawn(self, offset: int) -> "RandomSource":
        """An independent source derived by the splitting rule ``seed + offset``."""
        if self._seed is None:
            return RandomSource(None)
        return RandomSource((self._seed + offset) % _MAX_SEED)

    def bits(self, length: int) -> int:
        """``length`` uniformly random bits, as an integer."""
        if length <= 0:
            return 0
        n_bytes = (length + 7) // 8
        raw = int.from_bytes(self._generator.bytes(n_bytes), "big")
        return raw >> (8 * n_bytes - length)

    def bytes(self, n: int) -> bytes:
        return self._generator.bytes(n) if n > 0 else b""

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in ``[low, high)``."""
        return int(self._generator.integers(low, high))

    def index(self, n: int) -> int:
        """Uniform index into a sequence of length ``n`` (``n >= 1``)."""
        if n < 1:
            raise ParameterException("cannot choose from an empty sequence")
        return int(self._generator.integers(0, n))

    def choice(self, items: Sequence[T]) -> T:
        return items[self.index(len(items))]

    def random(self) -> float:
        """Uniform float in ``[0, 1)``."""
        return float(self._generator.random())

    def sample(self, items: Sequence[T], k: int) -> List[T]:
        """``k`` distinct items, in random order."""
        picks = self._generator.choice(len(items), size=k, replace=False)
        return [items[int(i)] for i in picks]

    def shuffled(self, items: Sequence[T]) -> List[T]:
        return [items[int(i)] for i in self._generator.permutation(len(items))]

    def __repr__(self):
        return f"RandomSource(seed={self._seed})"


def hamming(a: BitString, b: BitString) -> int:
    """Number of positions in which ``a`` and ``b`` differ."""
    if a.length != b.length:
        raise LengthMismatchException(expected=a.length, actual=b.length)
    return bin(a.value ^ b.value).count("1")


def random_bits(length: int, rng: RandomSource) -> BitString:
    """A uniformly random bit string of the given length."""
    if length < 0:
        raise ParameterException(f"length must be >= 0, got {length}")
    return BitString(rng.bits(length), length)


def sphere_size(length: int, radius: int) -> int:
    """Number of strings at Hamming distance exactly ``radius`` from any center."""
    return math.comb(length, radius)


def sphere(center: BitString, radius: int) -> Iterator[BitString]:
    """All strings at Hamming distance exactly ``radius`` from ``center``.

    Strings are produced in order of the flipped positions (lexicographic
    in the tuple of positions), without duplicates.
    """
    if not 0 <= radius <= center.length:
        raise ParameterException(
            f"radius {radius} out of range [0, {center.length}] for sphere center"
        )
    length = center.length
    for positions in itertools.combinations(range(length), radius):
        mask = 0
        for p in positions:
            mask |= 1 << (length - 1 - p)
        yield BitString(center.value ^ mask, length)


def random_sphere_point(center: BitString, radius: int, rng: RandomSource) -> BitString:
    """A uniformly random point on the sphere, without enumerating it."""
    if not 0 <= radius <= center.length:
        raise ParameterException(
            f"radius {radius} out of range [0, {center.length}] for sphere center"
        )
    length = center.length
    mask = 0
    for p in rng.sample(range(length), radius):
        mask |= 1 << (length - 1 - p)
    return BitString(center.value ^ mask, length)


def to_hex(b: BitString) -> str:
    """Lowercase hex rendering with ``ceil(length / 4)`` digits."""
    digits = (b.length + 3) // 4
    if digits == 0:
        return ""
    return format(b.value, f"0{digits}x")


def from_hex(text: str, length: int) -> BitString:
    """Inverse of :func:`to_hex`. The value must fit into ``length`` bits."""
    if not _HEX_RE.match(text):
        raise FormatException(f"Invalid hex digit in {text!r}")
    if length < 0 or length > 4 * len(text):
        raise FormatException(
            f"Length {length} does not fit into {len(text)} hex digits ({4 * len(text)} bits)"
        )
    value = int(text, 16) if text else 0
    if value >> length:
        raise FormatException(f"Hex value {text!r} overflows {length} bits")
    return BitString(value, length)
