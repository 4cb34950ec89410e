"""Testing the chaff strategies, including a custom one."""

from typing import List

import pytest

from decoykit.bitstring import RandomSource
from decoykit.chaff import BitComplement
from decoykit.chaff import ChaffStrategy
from decoykit.chaff import DecoyText
from decoykit.chaff import RandomPayload
from decoykit.exceptions import ParameterException
from decoykit.packet import Granularity
from decoykit.packet import generate_key
from decoykit.winnow import chaff_stream
from decoykit.winnow import split_message
from decoykit.winnow import winnow
from tests.resources import DECOY_CANDIDATES


class ConstantChaff(ChaffStrategy):
    """Always the same chaff payload."""

    def chaff_payloads(
        self, serial: int, payload: bytes, granularity: Granularity, rng: RandomSource
    ) -> List[bytes]:
        return [b"?" * len(payload)] * self.chaff_per_wheat


def test_custom_strategy():
    rng = RandomSource(1)
    key = generate_key(rng)
    stream = chaff_stream(key, split_message(b"abc"), ConstantChaff(), rng)
    assert sorted(p.payload for p in stream) == [b"?", b"?", b"?", b"a", b"b", b"c"]
    assert winnow(key, stream).message == b"abc"
    assert ConstantChaff.name() == "ConstantChaff"


def test_abstract_strategy_cannot_be_instantiated():
    with pytest.raises(TypeError):
        ChaffStrategy()


@pytest.mark.parametrize("strategy_type", [BitComplement, RandomPayload])
def test_chaff_per_wheat_must_be_positive(strategy_type):
    with pytest.raises(ParameterException):
        strategy_type(chaff_per_wheat=0)


@pytest.mark.parametrize(
    "granularity, payload, expected",
    [
        pytest.param(Granularity.bit(), b"\x01", b"\x00", id="bit"),
        pytest.param(Granularity.nibble(), b"\x04", b"\x0b", id="nibble"),
        pytest.param(Granularity.byte(), b"\x0f", b"\xf0", id="byte"),
        pytest.param(Granularity.block(2), b"\x00\xff", b"\xff\x00", id="block"),
    ],
)
def test_bit_complement(granularity, payload, expected):
    strategy = BitComplement(chaff_per_wheat=2)
    assert strategy.chaff_payloads(1, payload, granularity, RandomSource(0)) == [expected] * 2


def test_random_payload_sizes():
    rng = RandomSource(2)
    strategy = RandomPayload(chaff_per_wheat=3)
    for payload in strategy.chaff_payloads(1, b"abcd", Granularity.block(4), rng):
        assert len(payload) == 4
    for payload in strategy.chaff_payloads(1, b"\x01", Granularity.nibble(), rng):
        assert len(payload) == 1 and payload[0] <= 0xF


def test_decoy_text_cycles_and_restarts():
    strategy = DecoyText(DECOY_CANDIDATES, chaff_per_wheat=2)
    rng = RandomSource(3)
    strategy.begin_stream([1, 2])
    first = strategy.chaff_payloads(1, b"x", Granularity.byte(), rng)
    second = strategy.chaff_payloads(2, b"y", Granularity.byte(), rng)
    assert first == [b"Hi John", b"Are you going"]
    assert second == [b"to the movie", b"Hi John"]
    strategy.begin_stream([1])
    assert strategy.chaff_payloads(1, b"x", Granularity.byte(), rng)[0] == b"Hi John"


def test_decoy_text_needs_candidates():
    with pytest.raises(ParameterException):
        DecoyText([])


def test_decoy_text_serials():
    shared = DecoyText(DECOY_CANDIDATES)
    assert shared.chaff_serial(5, 0) == 5
    distinct = DecoyText(DECOY_CANDIDATES, chaff_per_wheat=2, distinct_serials=True)
    distinct.begin_stream([1, 4])
    assert [distinct.chaff_serial(1, j) for j in range(2)] == [2, 3]
