"""One-time pads, forged keys and extended terminal lists.

Under a one-time pad every plaintext of the right length is an equally good
explanation of a ciphertext: for any decoy there is a pad that decrypts the
ciphertext to it. An *extended terminal list* collects such decoys together
with their forged pads, so that an attacker who recovers a candidate list
cannot tell the real message from the imitations.
"""

import itertools
import logging
import math
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import Set

import numpy as np

from .bitflip import DEFAULT_SYMBOLS
from .bitflip import BitFlipAlphabet
from .bitflip import Letter
from .bitflip import decode_stream
from .bitflip import validate
from .bitstring import BitString
from .bitstring import RandomSource
from .bitstring import hamming
from .exceptions import EmptySetException
from .exceptions import KeyTooShortException
from .exceptions import LengthMismatchException
from .exceptions import ParameterException

logger = logging.getLogger(__name__)

ENGLISH_REDUNDANCY = 3.2
MIMIC_ENUMERATION_LIMIT = 100_000
FORGE_MAX_L = 10
FORGE_MAX_N = 4
WEIGHT_TOLERANCE = 1e-9


class Pad:
    """A one-time pad and where it came from."""

    GENERATED = "generated"
    FORGED = "forged"

    def __init__(self, bits: BitString, origin: str = GENERATED, seed: Optional[int] = None):
        if bits.length <= 0:
            raise ParameterException("a pad must not be empty")
        if origin not in (self.GENERATED, self.FORGED):
            raise ParameterException(f"unknown pad origin {origin!r}")
        self._bits = bits
        self._origin = origin
        self._seed = seed

    @classmethod
    def generate(cls, n_bytes: int, rng: RandomSource) -> "Pad":
        return cls(BitString.from_bytes(rng.bytes(n_bytes)), cls.GENERATED, rng.seed)

    @classmethod
    def from_bytes(cls, data: bytes, origin: str = GENERATED) -> "Pad":
        return cls(BitString.from_bytes(data), origin)

    @property
    def bits(self) -> BitString:
        return self._bits

    @property
    def length(self) -> int:
        return self._bits.length

    @property
    def origin(self) -> str:
        return self._origin

    @property
    def seed(self) -> Optional[int]:
        """Seed of the generating source, if the pad was generated from one."""
        return self._seed

    def to_bytes(self) -> bytes:
        return self._bits.to_bytes()

    def __eq__(self, other):
        return isinstance(other, Pad) and self._bits == other._bits

    def __hash__(self):
        return hash(self._bits)

    def __repr__(self):
        return f"Pad({self._bits.length} bits, {self._origin})"


def _xor(data: bytes, pad: bytes) -> bytes:
    a = np.frombuffer(data, dtype=np.uint8)
    b = np.frombuffer(pad, dtype=np.uint8)
    return np.bitwise_xor(a, b).tobytes()


def otp_encrypt(p: bytes, k: Pad) -> bytes:
    """``p`` XOR the first ``len(p)`` bytes of the pad."""
    if k.length < 8 * len(p):
        raise KeyTooShortException(required_bits=8 * len(p), available_bits=k.length)
    return _xor(p, k.to_bytes()[: len(p)])


def otp_decrypt(c: bytes, k: Pad) -> bytes:
    """Same as :func:`otp_encrypt`."""
    return otp_encrypt(c, k)


def forge_key(c: bytes, decoy: bytes) -> Pad:
    """The pad under which ``c`` decrypts to ``decoy``."""
    if len(decoy) != len(c):
        raise LengthMismatchException(expected=len(c), actual=len(decoy))
    if not c:
        raise ParameterException("cannot forge a pad for an empty ciphertext")
    return Pad.from_bytes(_xor(c, decoy), Pad.FORGED)


class TerminalEntry:
    """A candidate plaintext, its forged pad, its weight and whether it re-checked."""

    def __init__(
        self, candidate: bytes, key: Pad, weight: Optional[float] = None, verified: bool = False
    ):
        self.candidate = candidate
        self.key = key
        self.weight = weight
        self.verified = verified

    def __eq__(self, other):
        return (
            isinstance(other, TerminalEntry)
            and self.candidate == other.candidate
            and self.key == other.key
            and self.weight == other.weight
            and self.verified == other.verified
        )

    def __repr__(self):
        return (
            f"TerminalEntry(candidate={self.candidate!r}, weight={self.weight}, "
            f"verified={self.verified})"
        )


class TerminalList:
    """Decoy candidates for one ciphertext, each with a pad that produces it.

    Weights are optional; if present, they sum to 1.
    """

    def __init__(self, ciphertext: bytes, entries: Sequence[TerminalEntry]):
        self._ciphertext = ciphertext
        self._entries = tuple(entries)

    @property
    def ciphertext(self) -> bytes:
        return self._ciphertext

    @property
    def entries(self) -> Sequence[TerminalEntry]:
        return self._entries

    @property
    def weighted(self) -> bool:
        return bool(self._entries) and all(e.weight is not None for e in self._entries)

    @property
    def failed_entries(self) -> List[TerminalEntry]:
        """Entries whose pad does not decrypt the ciphertext to the candidate."""
        return [e for e in self._entries if not e.verified]

    def verify(self) -> "TerminalList":
        """A copy with every entry re-checked against the ciphertext."""
        checked = []
        for e in self._entries:
            try:
                ok = otp_decrypt(self._ciphertext, e.key) == e.candidate
            except KeyTooShortException:
                ok = False
            checked.append(TerminalEntry(e.candidate, e.key, e.weight, ok))
        result = TerminalList(self._ciphertext, checked)
        if result.failed_entries:
            logger.warning(f"{len(result.failed_entries)} terminal list entries failed to verify")
        return result

    def prune(self, threshold: float) -> "TerminalList":
        """Drop entries below ``threshold`` and renormalize the remaining weights."""
        if not self.weighted:
            raise ParameterException("only weighted terminal lists can be pruned")
        kept = [e for e in self._entries if e.weight >= threshold]
        total = sum(e.weight for e in kept)
        if total <= 0:
            return TerminalList(self._ciphertext, [])
        return TerminalList(
            self._ciphertext,
            [TerminalEntry(e.candidate, e.key, e.weight / total, e.verified) for e in kept],
        )

    def equivocation(self) -> float:
        """Shannon entropy, in bits, of the candidate distribution (uniform if unweighted)."""
        if not self._entries:
            return 0.0
        if self.weighted:
            weights = np.array([e.weight for e in self._entries], dtype=float)
        else:
            weights = np.full(len(self._entries), 1.0 / len(self._entries))
        weights = weights[weights > 0]
        return float(-(weights * np.log2(weights)).sum())

    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[TerminalEntry]:
        return iter(self._entries)

    def __repr__(self):
        return f"TerminalList({len(self._entries)} entries, {len(self.failed_entries)} failed)"


def build_terminal_list(
    c: bytes, candidates: Sequence[bytes], weights: Optional[Sequence[float]] = None
) -> TerminalList:
    """Forge one pad per candidate and re-check every entry."""
    for i, candidate in enumerate(candidates):
        if len(candidate) != len(c):
            raise LengthMismatchException(expected=len(c), actual=len(candidate), position=i)
    if weights is not None:
        if len(weights) != len(candidates):
            raise LengthMismatchException(expected=len(candidates), actual=len(weights))
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE:
            raise ParameterException(f"weights must be non-negative and sum to 1, got {weights}")
    entries = [
        TerminalEntry(candidate, forge_key(c, candidate), None if weights is None else weights[i])
        for i, candidate in enumerate(candidates)
    ]
    result = TerminalList(c, entries).verify()
    logger.info(f"Built terminal list with {len(result)} entries")
    return result


def _neighborhood_size(length: int, alphabet_size: int, max_edits: int) -> int:
    top = min(max_edits, length)
    return sum(math.comb(length, d) * (alphabet_size - 1) ** d for d in range(1, top + 1))


def _neighbors(text: str, alphabet: str, max_edits: int) -> Iterator[str]:
    for d in range(1, min(max_edits, len(text)) + 1):
        for positions in itertools.combinations(range(len(text)), d):
            choices = [[x for x in alphabet if x != text[p]] for p in positions]
            for replacement in itertools.product(*choices):
                chars = list(text)
                for p, x in zip(positions, replacement):
                    chars[p] = x
                yield "".join(chars)


def mimic_candidates(
    apriori: Sequence[str], n_mimics: int, max_edits: int, rng: RandomSource
) -> List[str]:
    """Imitations of a-priori candidates: each differs from some entry in at most
    ``max_edits`` character substitutions and is not an entry itself.

    Substitutes are drawn from the characters that occur in the a-priori list.
    """
    if n_mimics < 0 or max_edits < 1:
        raise ParameterException("need n_mimics >= 0 and max_edits >= 1")
    if n_mimics == 0:
        return []
    alphabet = "".join(sorted(set("".join(apriori))))
    known = set(apriori)
    space = sum(_neighborhood_size(len(e), len(alphabet), max_edits) for e in set(apriori))

    if space <= MIMIC_ENUMERATION_LIMIT:
        pool: Set[str] = set()
        for entry in sorted(known):
            pool.update(_neighbors(entry, alphabet, max_edits))
        pool -= known
        if len(pool) < n_mimics:
            raise EmptySetException(
                f"mimic neighborhood ({len(pool)} strings for {n_mimics} mimics)"
            )
        return rng.sample(sorted(pool), n_mimics)

    entries = sorted(known)
    mimics: List[str] = []
    seen = set(known)
    for _ in range(100 * n_mimics + 1000):
        entry = rng.choice(entries)
        if not entry:
            continue
        d = rng.integer(1, min(max_edits, len(entry)) + 1)
        chars = list(entry)
        for p in rng.sample(range(len(entry)), d):
            chars[p] = rng.choice([x for x in alphabet if x != entry[p]])
        mimic = "".join(chars)
        if mimic not in seen:
            seen.add(mimic)
            mimics.append(mimic)
            if len(mimics) == n_mimics:
                return mimics
    raise EmptySetException(f"mimic neighborhood, found only {len(mimics)} of {n_mimics}")


def unicity_distance(key_entropy_bits: float, redundancy_bits_per_symbol: float) -> float:
    """Ciphertext length, in symbols, beyond which a unique decryption is expected."""
    if redundancy_bits_per_symbol <= 0:
        raise ParameterException(
            f"redundancy must be positive, got {redundancy_bits_per_symbol}"
        )
    if key_entropy_bits < 0:
        raise ParameterException(f"key entropy must be >= 0, got {key_entropy_bits}")
    return key_entropy_bits / redundancy_bits_per_symbol


def _forge_symbols(decoy: str, n: int, symbols: Optional[str]) -> str:
    ordered = "".join(dict.fromkeys(decoy))
    if len(ordered) > n:
        raise ParameterException(f"decoy uses {len(ordered)} distinct symbols, but n={n}")
    fillers = [x for x in (symbols or DEFAULT_SYMBOLS) if x not in ordered]
    if len(ordered) + len(fillers) < n:
        raise ParameterException(f"not enough symbols for n={n} letters")
    return ordered + "".join(fillers[: n - len(ordered)])


def _decoy_score(letters: Sequence[Letter], tokens: Sequence[BitString], wanted: List[int]) -> int:
    """Number of tokens that decode to exactly their wanted letter."""
    score = 0
    for t, want in zip(tokens, wanted):
        hits = [i for i, x in enumerate(letters) if hamming(x.s, t) == x.h]
        if hits == [want]:
            score += 1
    return score


def _certified(
    l: int, letters: Sequence[Letter], tokens: Sequence[BitString], decoy: str
) -> Optional[BitFlipAlphabet]:
    if len({x.s for x in letters}) != len(letters):
        return None
    alphabet = BitFlipAlphabet(l, letters)
    if not validate(alphabet).is_valid:
        return None
    # Independent re-check through the regular decoder.
    decoded = decode_stream(alphabet, tokens)
    if decoded.text != decoy or decoded.discarded:
        logger.warning("Forged alphabet candidate rejected by the decoder")
        return None
    return alphabet


def forge_bitflip_alphabet(
    tokens: Sequence[BitString],
    decoy: str,
    n: int,
    l: int,
    budget: int,
    rng: RandomSource,
    symbols: Optional[str] = None,
    patience: int = 200,
) -> Optional[BitFlipAlphabet]:
    """Search a valid alphabet under which ``tokens`` decode to ``decoy``.

    Randomized hill-climbing with restarts over ``(s_i, h_i)`` assignments,
    scored by the number of correctly decoding tokens, uses the first half
    of ``budget``. The rest goes to a per-letter sweep: for each letter, all
    ``(s, h)`` consistent with the tokens are listed (``2**l * (l + 1)``
    evaluations per letter) and random combinations are tried. Returns
    ``None`` if nothing was found within ``budget`` candidate evaluations.
    """
    if not 1 <= l <= FORGE_MAX_L or not 1 <= n <= FORGE_MAX_N:
        raise ParameterException(
            f"forging needs 1 <= l <= {FORGE_MAX_L} and 1 <= n <= {FORGE_MAX_N}, got l={l}, n={n}"
        )
    if len(decoy) != len(tokens):
        raise ParameterException(
            f"decoy has {len(decoy)} symbols but there are {len(tokens)} tokens"
        )
    for position, t in enumerate(tokens):
        if t.length != l:
            raise LengthMismatchException(expected=l, actual=t.length, position=position)
    if budget < 1:
        raise ParameterException(f"budget must be positive, got {budget}")

    letter_symbols = _forge_symbols(decoy, n, symbols)
    wanted = [letter_symbols.index(x) for x in decoy]
    evaluations = 0

    # Hill-climbing with restarts.
    climb_budget = budget // 2
    while evaluations < climb_budget:
        letters = [
            Letter(x, BitString(rng.bits(l), l), rng.integer(0, l + 1)) for x in letter_symbols
        ]
        score = _decoy_score(letters, tokens, wanted)
        evaluations += 1
        stale = 0
        while evaluations < climb_budget and stale < patience:
            if score == len(tokens):
                found = _certified(l, letters, tokens, decoy)
                if found is not None:
                    logger.info(f"Forged alphabet by hill-climbing after {evaluations} evaluations")
                    return found
            i = rng.index(n)
            old = letters[i]
            if rng.random() < 0.5:
                s, h = old.s.flip(rng.index(l)), old.h
            else:
                s, h = old.s, min(l, max(0, old.h + rng.choice((-1, 1))))
            candidate = list(letters)
            candidate[i] = Letter(old.symbol, s, h)
            new_score = _decoy_score(candidate, tokens, wanted)
            evaluations += 1
            if new_score >= score:
                stale = 0 if new_score > score else stale + 1
                letters, score = candidate, new_score
            else:
                stale += 1

    # Per-letter sweep.
    sweep_cost = n * (1 << l) * (l + 1)
    if budget - evaluations < sweep_cost:
        logger.info(f"No forged alphabet found within budget {budget}")
        return None
    evaluations += sweep_cost
    options: List[List[Letter]] = []
    for i, x in enumerate(letter_symbols):
        own = [t for t, w in zip(tokens, wanted) if w == i]
        other = [t for t, w in zip(tokens, wanted) if w != i]
        consistent = []
        for value in range(1 << l):
            s = BitString(value, l)
            for h in range(l + 1):
                if all(hamming(s, t) == h for t in own) and all(
                    hamming(s, t) != h for t in other
                ):
                    consistent.append(Letter(x, s, h))
        if not consistent:
            logger.info(f"No (s, h) for letter `{x}` is consistent with the tokens")
            return None
        options.append(consistent)

    while evaluations < budget:
        letters = [rng.choice(o) for o in options]
        evaluations += 1
        found = _certified(l, letters, tokens, decoy)
        if found is not None:
            logger.info(f"Forged alphabet by sweep after {evaluations} evaluations")
            return found
    logger.info(f"No forged alphabet found within budget {budget}")
    return None
