"""Testing BitFlip encoding, decoding and chaff."""

import math
from collections import Counter

import pytest

from decoykit.analysis import chi_square_uniformity
from decoykit.bitflip import DEGENERATE
from decoykit.bitflip import BitFlipAlphabet
from decoykit.bitflip import DecodeOutcome
from decoykit.bitflip import Letter
from decoykit.bitflip import alphabet_key_entropy
from decoykit.bitflip import chaff_token
from decoykit.bitflip import decode_stream
from decoykit.bitflip import decode_token
from decoykit.bitflip import encode_letter
from decoykit.bitflip import encode_message
from decoykit.bitflip import random_alphabet
from decoykit.bitflip import smallest_transmitter
from decoykit.bitflip import transmitters
from decoykit.bitflip import validate
from decoykit.bitstring import BitString
from decoykit.bitstring import RandomSource
from decoykit.exceptions import EmptySetException
from decoykit.exceptions import LengthMismatchException
from decoykit.exceptions import ParameterException
from decoykit.exceptions import UnknownSymbolException
from tests.resources import AMBIGUOUS_ALPHABET
from tests.resources import SEEDS
from tests.resources import SINGLETON_ALPHABET
from tests.resources import SMALL_ALPHABET


@pytest.mark.parametrize(
    "alphabet, token, expected",
    [
        pytest.param(
            SMALL_ALPHABET, "0011", DecodeOutcome(DecodeOutcome.CHAFF_NONE), id="no_match"
        ),
        pytest.param(
            AMBIGUOUS_ALPHABET,
            "0011",
            DecodeOutcome(DecodeOutcome.CHAFF_AMBIGUOUS, match_count=2),
            id="ambiguous",
        ),
        pytest.param(
            SINGLETON_ALPHABET,
            "0",
            DecodeOutcome(DecodeOutcome.LETTER, index=0, match_count=1),
            id="exact_match",
        ),
        pytest.param(
            SMALL_ALPHABET,
            "1110",
            DecodeOutcome(DecodeOutcome.LETTER, index=1, match_count=1),
            id="letter_b",
        ),
    ],
)
def test_decode_token(alphabet, token, expected):
    assert decode_token(alphabet, BitString.from_str(token)) == expected


def test_decode_token_length_mismatch():
    with pytest.raises(LengthMismatchException):
        decode_token(SMALL_ALPHABET, BitString.from_str("000"))


def test_encode_letter_singleton():
    rng = RandomSource(0)
    for _ in range(10):
        assert encode_letter(SINGLETON_ALPHABET, 0, rng) == BitString.from_str("0")


def test_encode_letter_is_uniform():
    rng = RandomSource(1)
    counts = Counter(encode_letter(SMALL_ALPHABET, 0, rng) for _ in range(10_000))
    assert set(counts) == set(transmitters(SMALL_ALPHABET, 0))
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    for count in counts.values():
        assert abs(count - 2500) <= 3 * sigma
    assert chi_square_uniformity(list(counts.values())).passed


def test_encode_letter_invalid_alphabet():
    with pytest.raises(EmptySetException):
        encode_letter(AMBIGUOUS_ALPHABET, 0, RandomSource(0))


@pytest.mark.parametrize("seed", SEEDS)
def test_encode_decode_token_roundtrip(seed):
    rng = RandomSource(seed)
    for _ in range(60):
        a = random_alphabet(rng.integer(1, 5), rng.integer(3, 9), rng)
        i = rng.index(a.n)
        outcome = decode_token(a, encode_letter(a, i, rng))
        assert outcome.is_letter and outcome.index == i


def test_chaff_token_never_decodes():
    rng = RandomSource(2)
    chaff = {BitString.from_str(s) for s in ("0000", "0011", "0101", "0110")}
    chaff |= {BitString.from_str(s) for s in ("1001", "1010", "1100", "1111")}
    for _ in range(10_000):
        t = chaff_token(SMALL_ALPHABET, rng)
        assert t in chaff
        assert not decode_token(SMALL_ALPHABET, t).is_letter


def test_chaff_token_singleton():
    assert chaff_token(SINGLETON_ALPHABET, RandomSource(0)) == BitString.from_str("1")


def test_chaff_token_empty_chaff_set():
    full = BitFlipAlphabet.from_pairs(1, [("a", "0", 0), ("b", "1", 0)])
    with pytest.raises(EmptySetException):
        chaff_token(full, RandomSource(0))


def test_encode_empty_message():
    assert encode_message(SMALL_ALPHABET, "", 0.0, rng=RandomSource(0)) == []


def test_empty_message_can_carry_chaff():
    streams = [
        encode_message(SMALL_ALPHABET, "", 0.9, rng=RandomSource(seed)) for seed in range(20)
    ]
    assert any(streams)
    for tokens in streams:
        assert decode_stream(SMALL_ALPHABET, tokens).text == ""


def test_stream_can_end_with_chaff():
    endings = []
    for seed in range(50):
        tokens = encode_message(SMALL_ALPHABET, "ab", 0.5, rng=RandomSource(seed))
        assert decode_stream(SMALL_ALPHABET, tokens).text == "ab"
        endings.append(decode_stream(SMALL_ALPHABET, tokens[-1:]).discarded)
    assert 0 in endings
    assert 1 in endings


def test_degenerate_mode_repeats_the_smallest_transmitter():
    tokens = encode_message(SMALL_ALPHABET, "aaaa", mode=DEGENERATE)
    assert tokens == [BitString.from_str("0001")] * 4
    assert smallest_transmitter(SMALL_ALPHABET, 1) == BitString.from_str("0111")


def test_encode_message_errors():
    rng = RandomSource(0)
    with pytest.raises(ParameterException):
        encode_message(SMALL_ALPHABET, "ab", 1.0, rng=rng)
    with pytest.raises(ParameterException):
        encode_message(SMALL_ALPHABET, "ab", 0.0, mode="sloppy", rng=rng)
    with pytest.raises(ParameterException):
        encode_message(SMALL_ALPHABET, "ab")
    with pytest.raises(UnknownSymbolException) as e:
        encode_message(SMALL_ALPHABET, "abz", rng=rng)
    assert e.value.position == 2


def test_decode_stream_empty_and_chaff_only():
    rng = RandomSource(4)
    assert decode_stream(SMALL_ALPHABET, []).text == ""
    chaff = [chaff_token(SMALL_ALPHABET, rng) for _ in range(50)]
    decoded = decode_stream(SMALL_ALPHABET, chaff)
    assert decoded.text == ""
    assert decoded.discarded == 50


def test_decode_stream_length_mismatch_reports_position():
    tokens = [BitString.from_str("0001"), BitString.from_str("001")]
    with pytest.raises(LengthMismatchException) as e:
        decode_stream(SMALL_ALPHABET, tokens)
    assert e.value.position == 1


@pytest.mark.parametrize("chaff_rate", [0.0, 0.5, 0.9])
def test_message_roundtrip(chaff_rate):
    rng = RandomSource(100)
    checked = 0
    while checked < 100:
        a = random_alphabet(rng.integer(1, 6), rng.integer(4, 11), rng)
        if chaff_rate > 0 and validate(a).chaff_size == 0:
            continue
        msg = "".join(rng.choice(a.symbols) for _ in range(rng.integer(0, 20)))
        tokens = encode_message(a, msg, chaff_rate, rng=rng)
        decoded = decode_stream(a, tokens)
        assert decoded.text == msg
        assert decoded.discarded == len(tokens) - len(msg)
        checked += 1


def test_pad_to_appends_chaff():
    tokens = encode_message(SMALL_ALPHABET, "ab", rng=RandomSource(8), pad_to=10)
    assert len(tokens) == 10
    assert decode_stream(SMALL_ALPHABET, tokens).text == "ab"


def test_long_tokens_use_sampling():
    l = 24
    a = BitFlipAlphabet(
        l,
        [Letter("a", BitString.zeros(l), 3), Letter("b", BitString((1 << l) - 1, l), 3)],
    )
    assert not a.enumerable
    rng = RandomSource(9)
    tokens = encode_message(a, "abba", 0.5, rng=rng)
    assert decode_stream(a, tokens).text == "abba"
    with pytest.raises(ParameterException):
        validate(a)


def test_alphabet_key_entropy():
    expected = math.log2(16) + math.log2(15) + 2 * math.log2(5)
    assert alphabet_key_entropy(2, 4) == pytest.approx(expected)
    with pytest.raises(ParameterException):
        alphabet_key_entropy(5, 2)
