"""Testing one-time pads, forged keys, terminal lists, mimics and forged BitFlip alphabets."""

import math

import pytest

from decoykit.bitflip import decode_stream
from decoykit.bitflip import encode_message
from decoykit.bitflip import validate
from decoykit.bitstring import BitString
from decoykit.bitstring import RandomSource
from decoykit.equivocation import Pad
from decoykit.equivocation import TerminalEntry
from decoykit.equivocation import TerminalList
from decoykit.equivocation import build_terminal_list
from decoykit.equivocation import forge_bitflip_alphabet
from decoykit.equivocation import forge_key
from decoykit.equivocation import mimic_candidates
from decoykit.equivocation import otp_decrypt
from decoykit.equivocation import otp_encrypt
from decoykit.equivocation import unicity_distance
from decoykit.exceptions import EmptySetException
from decoykit.exceptions import KeyTooShortException
from decoykit.exceptions import LengthMismatchException
from decoykit.exceptions import ParameterException
from tests.resources import SMALL_ALPHABET

SEVEN_CANDIDATES = [
    b"attack at dawn",
    b"attack at dusk",
    b"retreat at ten",
    b"hold the ridge",
    b"meet me at six",
    b"send more ammo",
    b"all is quiet!!",
]


def test_otp_identity_pad():
    p = b"plaintext"
    assert otp_encrypt(p, Pad.from_bytes(bytes(len(p)))) == p


def test_otp_self_cancellation():
    p = b"plaintext"
    assert otp_encrypt(p, Pad.from_bytes(p)) == bytes(len(p))


def test_otp_roundtrip():
    rng = RandomSource(1)
    for _ in range(1000):
        p = rng.bytes(rng.integer(0, 40))
        k = Pad.generate(len(p) + rng.integer(1, 8), rng)
        assert otp_decrypt(otp_encrypt(p, k), k) == p


def test_otp_pad_too_short():
    with pytest.raises(KeyTooShortException):
        otp_encrypt(b"abc", Pad.from_bytes(b"ab"))


def test_pad_origin():
    rng = RandomSource(4)
    assert Pad.generate(4, rng).origin == Pad.GENERATED
    assert Pad.generate(4, rng).seed == 4
    assert forge_key(b"ab", b"cd").origin == Pad.FORGED
    with pytest.raises(ParameterException):
        Pad(BitString(0, 0))


def test_forge_key_with_true_plaintext_recovers_the_key():
    rng = RandomSource(2)
    p = b"the real message"
    k = Pad.generate(len(p), rng)
    c = otp_encrypt(p, k)
    assert forge_key(c, p) == k


def test_forge_key_zero_ciphertext():
    assert forge_key(bytes(5), b"decoy").to_bytes() == b"decoy"


def test_forge_key_exhaustive_single_byte():
    for c in range(256):
        for decoy in range(256):
            pad = forge_key(bytes([c]), bytes([decoy]))
            assert otp_decrypt(bytes([c]), pad) == bytes([decoy])


def test_forge_key_random_sizes():
    rng = RandomSource(3)
    for _ in range(200):
        size = rng.integer(1, 100)
        c, decoy = rng.bytes(size), rng.bytes(size)
        assert otp_decrypt(c, forge_key(c, decoy)) == decoy


def test_forge_key_length_mismatch():
    with pytest.raises(LengthMismatchException):
        forge_key(b"abc", b"ab")


def test_seven_candidates():
    rng = RandomSource(5)
    c = otp_encrypt(SEVEN_CANDIDATES[0], Pad.generate(14, rng))
    terminal_list = build_terminal_list(c, SEVEN_CANDIDATES)
    assert len(terminal_list) == 7
    assert terminal_list.failed_entries == []
    for entry in terminal_list:
        assert otp_decrypt(c, entry.key) == entry.candidate
    assert terminal_list.equivocation() == pytest.approx(math.log2(7))


def test_singleton_terminal_list_holds_the_true_key():
    rng = RandomSource(6)
    p = b"hello"
    k = Pad.generate(5, rng)
    terminal_list = build_terminal_list(otp_encrypt(p, k), [p])
    assert [e.key for e in terminal_list] == [k]


def test_exhaustive_single_byte_terminal_list():
    terminal_list = build_terminal_list(b"\x5a", [bytes([v]) for v in range(256)])
    assert len(terminal_list) == 256
    assert not terminal_list.failed_entries
    assert terminal_list.equivocation() == pytest.approx(8.0)


def test_terminal_list_length_mismatch_is_indexed():
    with pytest.raises(LengthMismatchException) as e:
        build_terminal_list(b"abc", [b"abd", b"ab"])
    assert e.value.position == 1


@pytest.mark.parametrize(
    "weights",
    [
        pytest.param([0.5, 0.6], id="sum_above_one"),
        pytest.param([1.5, -0.5], id="negative"),
        pytest.param([1.0], id="count"),
    ],
)
def test_terminal_list_weight_validation(weights):
    with pytest.raises((ParameterException, LengthMismatchException)):
        build_terminal_list(b"ab", [b"cd", b"ef"], weights)


def test_prune_renormalizes():
    terminal_list = build_terminal_list(b"xy", [b"ab", b"cd", b"ef"], [0.6, 0.3, 0.1])
    pruned = terminal_list.prune(0.2)
    assert [e.candidate for e in pruned] == [b"ab", b"cd"]
    assert [e.weight for e in pruned] == pytest.approx([2 / 3, 1 / 3])
    assert terminal_list.prune(0.7).entries == ()
    with pytest.raises(ParameterException):
        build_terminal_list(b"xy", [b"ab"]).prune(0.5)


def test_weighted_equivocation():
    terminal_list = build_terminal_list(b"x", [b"a", b"b"], [0.5, 0.5])
    assert terminal_list.equivocation() == pytest.approx(1.0)
    assert TerminalList(b"x", []).equivocation() == 0.0


def test_verify_flags_broken_entries():
    entry = TerminalEntry(b"ab", Pad.from_bytes(b"\x00\x00"))
    short = TerminalEntry(b"ab", Pad.from_bytes(b"\x00"))
    checked = TerminalList(b"ab", [entry, short]).verify()
    assert [e.verified for e in checked] == [True, False]
    assert len(checked.failed_entries) == 1


def _substitutions(a, b):
    return sum(1 for x, y in zip(a, b) if x != y)


def test_single_mimic():
    mimics = mimic_candidates(["Hi Stella"], 1, 1, RandomSource(7))
    assert len(mimics) == 1
    assert len(mimics[0]) == len("Hi Stella")
    assert _substitutions(mimics[0], "Hi Stella") == 1


@pytest.mark.parametrize("max_edits", [1, 2, 3])
def test_mimic_validity(max_edits):
    apriori = ["attack at dawn", "attack at dusk", "hold the ridge"]
    mimics = mimic_candidates(apriori, 50, max_edits, RandomSource(max_edits))
    assert len(set(mimics)) == 50
    for mimic in mimics:
        assert mimic not in apriori
        assert any(
            len(mimic) == len(e) and _substitutions(mimic, e) <= max_edits for e in apriori
        )


def test_mimics_are_reproducible():
    first = mimic_candidates(["Hi Stella"], 5, 2, RandomSource(8))
    assert first == mimic_candidates(["Hi Stella"], 5, 2, RandomSource(8))


def test_no_mimics():
    assert mimic_candidates(["Hi Stella"], 0, 1, RandomSource(0)) == []


def test_exhausted_mimic_space():
    with pytest.raises(EmptySetException):
        mimic_candidates(["aaa"], 1, 1, RandomSource(0))


@pytest.mark.parametrize(
    "entropy, redundancy, expected",
    [
        pytest.param(0, 3.2, 0.0, id="no_key"),
        pytest.param(128, 3.2, 40.0, id="128_bit_key"),
        pytest.param(64, 3.2, 20.0, id="64_bit_key"),
    ],
)
def test_unicity_distance(entropy, redundancy, expected):
    assert unicity_distance(entropy, redundancy) == pytest.approx(expected)


def test_unicity_distance_errors():
    with pytest.raises(ParameterException):
        unicity_distance(128, 0)
    with pytest.raises(ParameterException):
        unicity_distance(-1, 3.2)


def test_forge_alphabet_for_the_true_message():
    rng = RandomSource(9)
    tokens = encode_message(SMALL_ALPHABET, "abba", rng=rng)
    forged = forge_bitflip_alphabet(tokens, "abba", 2, 4, 100_000, rng)
    assert forged is not None
    assert validate(forged).is_valid
    assert decode_stream(forged, tokens).text == "abba"


def test_forge_alphabet_swaps_letter_roles():
    token = BitString.from_str("1000")
    forged = forge_bitflip_alphabet([token], "b", 2, 4, 10_000, RandomSource(10))
    assert forged is not None
    assert decode_stream(forged, [token]).text == "b"


def test_forge_alphabet_not_found_is_none():
    token = BitString.from_str("1000")
    assert forge_bitflip_alphabet([token, token], "ab", 2, 4, 1, RandomSource(11)) is None


@pytest.mark.parametrize(
    "tokens, decoy, n, l",
    [
        pytest.param([BitString.from_str("1000")], "ab", 2, 4, id="decoy_too_long"),
        pytest.param([BitString.from_str("1" * 11)], "a", 2, 11, id="token_too_long"),
        pytest.param([BitString.from_str("1000")], "a", 5, 4, id="too_many_letters"),
        pytest.param([BitString.from_str("1000")], "abc", 2, 4, id="too_many_symbols"),
    ],
)
def test_forge_alphabet_parameters(tokens, decoy, n, l):
    with pytest.raises(ParameterException):
        forge_bitflip_alphabet(tokens, decoy, n, l, 100, RandomSource(0))
