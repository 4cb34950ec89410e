"""Chaffing and winnowing: confidentiality without encryption.

The sender cuts the message into serial-numbered packets, tags each with a
MAC and mixes in chaff packets carrying bogus tags. The receiver keeps the
packets whose tag verifies and reassembles them by serial.
"""

import logging
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from .bitstring import BitString
from .bitstring import RandomSource
from .chaff.strategy import ChaffStrategy
from .exceptions import FormatException
from .exceptions import MessageTooLongException
from .exceptions import ParameterException
from .packet import MAX_SERIAL
from .packet import Granularity
from .packet import Packet
from .packet import WinnowKey
from .packet import make_packet

logger = logging.getLogger(__name__)

Wheat = Tuple[int, bytes]

MAX_GAP_RANGES = 64


class WinnowReport:
    """What the receiver saw while winnowing.

    ``gaps`` counts the expected serials up to the largest kept one that
    carried no valid packet; ``gap_ranges`` lists them as inclusive
    ``(first, last)`` serial ranges, at most :data:`MAX_GAP_RANGES` of them.
    Expected serials are ``1, 1 + stride, 1 + 2 * stride, ...``.
    ``conflict_serials`` are serials with two or more distinct valid
    payloads (the first one in stream order was used).
    """

    def __init__(
        self,
        kept: int = 0,
        discarded: int = 0,
        gaps: int = 0,
        gap_ranges: Optional[List[Tuple[int, int]]] = None,
        conflict_serials: Optional[List[int]] = None,
    ):
        self.kept = kept
        self.discarded = discarded
        self.gaps = gaps
        self.gap_ranges = gap_ranges or []
        self.conflict_serials = conflict_serials or []

    @property
    def conflicts(self) -> int:
        return len(self.conflict_serials)

    def __eq__(self, other):
        return isinstance(other, WinnowReport) and vars(self) == vars(other)

    def __repr__(self):
        return (
            f"WinnowReport(kept={self.kept}, discarded={self.discarded}, "
            f"gaps={self.gaps}, conflicts={self.conflicts})"
        )


class WinnowResult:
    def __init__(self, message: bytes, report: WinnowReport):
        self.message = message
        self.report = report

    def __repr__(self):
        return f"WinnowResult(message={self.message!r}, report={self.report!r})"


def split_message(msg: bytes, granularity: Optional[Granularity] = None) -> List[Wheat]:
    """Cut ``msg`` into ``(serial, payload)`` pairs, serials counting from 1."""
    granularity = granularity or Granularity.byte()
    unit = granularity.unit_bits
    units = -(-8 * len(msg) // unit)
    if units > MAX_SERIAL:
        raise MessageTooLongException(units, MAX_SERIAL)

    if granularity.is_sub_byte:
        bits = BitString.from_bytes(msg)
        values = []
        for start in range(0, bits.length, unit):
            values.append((bits.value >> (bits.length - start - unit)) & granularity.mask)
        return [(serial, bytes([v])) for serial, v in enumerate(values, start=1)]

    size = unit // 8
    return [
        (serial, bytes(msg[start : start + size]))
        for serial, start in enumerate(range(0, len(msg), size), start=1)
    ]


def join_payloads(
    payloads: Sequence[bytes], granularity: Optional[Granularity] = None, strict: bool = True
) -> bytes:
    """Inverse of :func:`split_message` on the payloads, in serial order.

    With ``strict=False`` malformed sub-byte payloads are masked to the unit
    width and trailing bits short of a full byte are dropped instead of
    raising a :class:`FormatException`.
    """
    granularity = granularity or Granularity.byte()
    if not granularity.is_sub_byte:
        if strict:
            size = granularity.unit_bits // 8
            for i, p in enumerate(payloads):
                if len(p) > size or (len(p) < size and i != len(payloads) - 1) or not p:
                    raise FormatException(
                        f"payload {i} has {len(p)} bytes, expected {size} at {granularity}"
                    )
        return b"".join(payloads)

    unit = granularity.unit_bits
    value = 0
    n_bits = 0
    for i, p in enumerate(payloads):
        if strict and (len(p) != 1 or p[0] > granularity.mask):
            raise FormatException(f"payload {i} ({p!r}) is not a single {granularity} unit")
        unit_value = (p[0] if p else 0) & granularity.mask
        value = (value << unit) | unit_value
        n_bits += unit
    if n_bits % 8:
        if strict:
            raise FormatException(f"{n_bits} message bits do not form whole bytes")
        value >>= n_bits % 8
        n_bits -= n_bits % 8
    return value.to_bytes(n_bits // 8, "big")


def spread_serials(wheat: Sequence[Wheat], stride: int) -> List[Wheat]:
    """Renumber wheat to serials ``1, 1 + stride, 1 + 2 * stride, ...``, leaving
    room for decoys on their own serials in between."""
    if stride < 1:
        raise ParameterException(f"stride must be positive, got {stride}")
    spread = [(1 + i * stride, payload) for i, (_, payload) in enumerate(wheat)]
    if spread and spread[-1][0] > MAX_SERIAL:
        raise MessageTooLongException(spread[-1][0], MAX_SERIAL)
    return spread


def chaff_stream(
    key: WinnowKey,
    wheat: Sequence[Wheat],
    strategy: ChaffStrategy,
    rng: RandomSource,
    granularity: Optional[Granularity] = None,
) -> List[Packet]:
    """Tag the wheat and mix in the strategy's chaff.

    Every wheat packet is followed by its ``chaff_per_wheat`` chaff packets,
    each with a uniformly random tag; the order inside each such group is
    shuffled. A random tag is valid with probability ``2**-tau``; this is
    not prevented.
    """
    granularity = granularity or Granularity.byte()
    strategy.begin_stream([serial for serial, _ in wheat])
    stream: List[Packet] = []
    for serial, payload in wheat:
        group = [make_packet(key, serial, payload)]
        chaff = strategy.chaff_payloads(serial, payload, granularity, rng)
        for index, chaff_payload in enumerate(chaff):
            chaff_serial = strategy.chaff_serial(serial, index)
            group.append(Packet(chaff_serial, chaff_payload, rng.bytes(key.tag_bytes)))
        stream.extend(rng.shuffled(group))
    logger.info(
        f"Chaffed {len(wheat)} wheat packets into {len(stream)} packets "
        f"using {strategy.name()}"
    )
    return stream


def find_gaps(serials: Sequence[int], stride: int = 1) -> Tuple[int, List[Tuple[int, int]]]:
    """Count the expected serials missing below ``max(serials)``.

    Walks the sorted serials once, so the cost does not depend on how large
    the serials are. Serials off the ``1 + k * stride`` grid are ignored.
    Returns the gap count and the first :data:`MAX_GAP_RANGES` gap ranges.
    """
    if stride < 1:
        raise ParameterException(f"stride must be positive, got {stride}")
    count = 0
    ranges: List[Tuple[int, int]] = []
    previous = -1
    for index in sorted({(s - 1) // stride for s in serials if s >= 1 and (s - 1) % stride == 0}):
        if index > previous + 1:
            count += index - previous - 1
            if len(ranges) < MAX_GAP_RANGES:
                ranges.append((1 + (previous + 1) * stride, 1 + (index - 1) * stride))
        previous = index
    return count, ranges


def winnow(
    key: WinnowKey,
    stream: Iterable[Packet],
    granularity: Optional[Granularity] = None,
    stride: int = 1,
) -> WinnowResult:
    """Keep the packets that authenticate under ``key`` and reassemble them.

    ``stride`` is the spacing of the wheat serials (see
    :func:`spread_serials`); only serials on that grid count as gaps.
    Never raises on bad data: conflicts and gaps go to the report.
    """
    granularity = granularity or Granularity.byte()
    report = WinnowReport()
    chosen: Dict[int, bytes] = {}
    conflicts = set()
    for packet in stream:
        if not packet.is_valid(key):
            report.discarded += 1
            continue
        report.kept += 1
        if packet.serial not in chosen:
            chosen[packet.serial] = packet.payload
        elif chosen[packet.serial] != packet.payload:
            conflicts.add(packet.serial)

    report.conflict_serials = sorted(conflicts)
    report.gaps, report.gap_ranges = find_gaps(list(chosen), stride)
    if report.conflicts:
        logger.warning(f"Winnowing found conflicting valid payloads at {report.conflict_serials}")
    if report.gaps:
        logger.warning(
            f"Winnowing found {report.gaps} missing serials, first ranges {report.gap_ranges[:3]}"
        )

    message = join_payloads([chosen[s] for s in sorted(chosen)], granularity, strict=False)
    return WinnowResult(message, report)
