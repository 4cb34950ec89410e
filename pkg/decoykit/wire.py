"""Binary wire format of packet streams.

Each packet is laid out as::

    magic 0x43 0x57 | version 0x01 | serial (u32 BE) | payload length (u16 BE)
    | payload | tag length in bytes (u8) | tag

A stream is the plain concatenation of packets; all packets of a stream
carry tags of the same width. Payloads travel in the clear.
"""

import logging
import struct
from typing import List
from typing import Optional
from typing import Sequence

from .exceptions import ParameterException
from .exceptions import WireFormatException
from .packet import TAG_BITS
from .packet import Packet

logger = logging.getLogger(__name__)

MAGIC = b"CW"
VERSION = 1

_HEADER_STRUCT = struct.Struct("!2sBIH")
_TAG_LEN_STRUCT = struct.Struct("!B")


def encode_packet(packet: Packet) -> bytes:
    return (
        _HEADER_STRUCT.pack(MAGIC, VERSION, packet.serial, len(packet.payload))
        + packet.payload
        + _TAG_LEN_STRUCT.pack(len(packet.mac))
        + packet.mac
    )


def encode_stream(packets: Sequence[Packet]) -> bytes:
    """Serialize a stream; all packets must share one tag width."""
    widths = {p.tau for p in packets}
    if len(widths) > 1:
        raise ParameterException(f"stream mixes tag widths {sorted(widths)}")
    return b"".join(encode_packet(p) for p in packets)


def decode_stream(data: bytes, tau: Optional[int] = None) -> List[Packet]:
    """Parse a stream. If ``tau`` is given, every tag must have that width;
    otherwise the first packet fixes it.

    Raises :class:`WireFormatException` carrying the byte offset of the first
    malformed field.
    """
    packets: List[Packet] = []
    offset = 0
    expected_tag_len = None if tau is None else tau // 8
    while offset < len(data):
        if len(data) - offset < _HEADER_STRUCT.size:
            raise WireFormatException("truncated packet header", offset)
        magic, version, serial, payload_len = _HEADER_STRUCT.unpack_from(data, offset)
        if magic != MAGIC:
            raise WireFormatException(f"invalid magic {magic.hex()}", offset)
        if version != VERSION:
            raise WireFormatException(f"unsupported version {version}", offset + 2)

        position = offset + _HEADER_STRUCT.size
        if len(data) - position < payload_len:
            raise WireFormatException(f"truncated payload (declared {payload_len} bytes)", position)
        payload = data[position : position + payload_len]
        position += payload_len

        if position >= len(data):
            raise WireFormatException("missing tag length", position)
        (tag_len,) = _TAG_LEN_STRUCT.unpack_from(data, position)
        if 8 * tag_len not in TAG_BITS:
            raise WireFormatException(f"invalid tag length {tag_len}", position)
        if expected_tag_len is None:
            expected_tag_len = tag_len
        elif tag_len != expected_tag_len:
            raise WireFormatException(
                f"tag length {tag_len} differs from the stream's {expected_tag_len}", position
            )
        position += 1
        if len(data) - position < tag_len:
            raise WireFormatException("truncated tag", position)
        mac = data[position : position + tag_len]
        position += tag_len

        packets.append(Packet(serial, payload, mac))
        offset = position
    logger.debug(f"Decoded {len(packets)} packets from {len(data)} bytes")
    return packets
