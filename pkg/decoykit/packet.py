"""Authenticated packets for chaffing and winnowing.

A packet is a ``(serial, payload, mac)`` triple sent in the clear. Only the
holder of the shared secret can tell valid packets (wheat) from packets
with a random tag (chaff).
"""

import hashlib
import hmac
import logging
from typing import Optional

from .bitstring import RandomSource
from .exceptions import ParameterException

logger = logging.getLogger(__name__)

SECRET_BYTES = 32
TAG_BITS = (16, 32, 64, 160)
DEFAULT_TAU = 64
MAX_SERIAL = 2**32 - 1
MAX_PAYLOAD = 2**16 - 1


class WinnowKey:
    """The shared secret and the tag width ``tau`` in bits."""

    def __init__(self, secret: bytes, tau: int = DEFAULT_TAU):
        self.secret = secret
        self.tau = tau

    @property
    def secret(self) -> bytes:
        return self._secret

    @secret.setter
    def secret(self, value: bytes):
        if len(value) != SECRET_BYTES:
            raise ParameterException(
                f"secret must be exactly {SECRET_BYTES} bytes, got {len(value)}"
            )
        self._secret = bytes(value)

    @property
    def tau(self) -> int:
        """Tag width in bits, one of 16, 32, 64 or 160."""
        return self._tau

    @tau.setter
    def tau(self, value: int):
        if value not in TAG_BITS:
            raise ParameterException(f"tau must be one of {TAG_BITS}, got {value}")
        self._tau = value

    @property
    def tag_bytes(self) -> int:
        return self._tau // 8

    def __eq__(self, other):
        return (
            isinstance(other, WinnowKey)
            and hmac.compare_digest(self._secret, other._secret)
            and self._tau == other._tau
        )

    def __repr__(self):
        # Never render the secret.
        return f"WinnowKey(tau={self._tau})"


class Packet:
    """One ``(serial, payload, mac)`` triple."""

    def __init__(self, serial: int, payload: bytes, mac: bytes):
        if not 0 <= serial <= MAX_SERIAL:
            raise ParameterException(f"serial {serial} does not fit into 32 bits")
        if len(payload) > MAX_PAYLOAD:
            raise ParameterException(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
        if 8 * len(mac) not in TAG_BITS:
            raise ParameterException(f"tag of {len(mac)} bytes is not a valid tag width")
        self._serial = serial
        self._payload = bytes(payload)
        self._mac = bytes(mac)

    @property
    def serial(self) -> int:
        return self._serial

    @property
    def payload(self) -> bytes:
        return self._payload

    @property
    def mac(self) -> bytes:
        return self._mac

    @property
    def tau(self) -> int:
        return 8 * len(self._mac)

    def is_valid(self, key: WinnowKey) -> bool:
        """True iff the tag authenticates serial and payload under ``key``."""
        if self.tau != key.tau:
            return False
        return hmac.compare_digest(self._mac, mac_tag(key, self._serial, self._payload))

    def __eq__(self, other):
        return isinstance(other, Packet) and (self._serial, self._payload, self._mac) == (
            other._serial,
            other._payload,
            other._mac,
        )

    def __hash__(self):
        return hash((self._serial, self._payload, self._mac))

    def __str__(self):
        return f"({self._serial},{self._payload!r},{self._mac.hex()})"

    def __repr__(self):
        return f"Packet(serial={self._serial}, payload={self._payload!r}, mac={self._mac.hex()})"


def hmac_sha1_prefix(secret: bytes, data: bytes, tau: int) -> bytes:
    """The leftmost ``tau`` bits of HMAC-SHA1(secret, data)."""
    if tau not in TAG_BITS:
        raise ParameterException(f"tau must be one of {TAG_BITS}, got {tau}")
    return hmac.new(secret, data, hashlib.sha1).digest()[: tau // 8]


def mac_tag(key: WinnowKey, serial: int, payload: bytes) -> bytes:
    """Tag over the 4-byte big-endian serial followed by the payload."""
    return hmac_sha1_prefix(key.secret, serial.to_bytes(4, "big") + bytes(payload), key.tau)


def make_packet(key: WinnowKey, serial: int, payload: bytes) -> Packet:
    """A valid (wheat) packet."""
    return Packet(serial, payload, mac_tag(key, serial, payload))


def forgery_probability(tau: int) -> float:
    """Chance that a uniformly random ``tau``-bit tag is valid: ``2**-tau``."""
    if tau < 1:
        raise ParameterException(f"tau must be >= 1, got {tau}")
    return 2.0**-tau


def generate_key(rng: RandomSource, tau: Optional[int] = None) -> WinnowKey:
    """A fresh key with a secret drawn from ``rng``."""
    return WinnowKey(rng.bytes(SECRET_BYTES), DEFAULT_TAU if tau is None else tau)


class Granularity:
    """How a message is cut into packet payloads.

    ``bit`` and ``nibble`` payloads are a single byte holding the unit value;
    ``byte`` payloads are one byte; ``block(k)`` payloads are ``k`` bytes
    (the last block may be shorter).
    """

    BIT = "bit"
    NIBBLE = "nibble"
    BYTE = "byte"
    BLOCK = "block"

    _UNIT_BITS = {BIT: 1, NIBBLE: 4, BYTE: 8}

    def __init__(self, kind: str, block_size: Optional[int] = None):
        if kind == self.BLOCK:
            if block_size is None or not 1 <= block_size <= MAX_PAYLOAD:
                raise ParameterException(
                    f"block granularity needs a size in [1, {MAX_PAYLOAD}], got {block_size}"
                )
        elif kind in self._UNIT_BITS:
            if block_size is not None:
                raise ParameterException(f"`{kind}` granularity takes no block size")
        else:
            raise ParameterException(f"unknown granularity `{kind}`")
        self._kind = kind
        self._block_size = block_size

    @classmethod
    def bit(cls) -> "Granularity":
        return cls(cls.BIT)

    @classmethod
    def nibble(cls) -> "Granularity":
        return cls(cls.NIBBLE)

    @classmethod
    def byte(cls) -> "Granularity":
        return cls(cls.BYTE)

    @classmethod
    def block(cls, size: int) -> "Granularity":
        return cls(cls.BLOCK, size)

    @classmethod
    def parse(cls, text: str) -> "Granularity":
        """Parse ``bit``, ``nibble``, ``byte`` or ``block:K``."""
        kind, _, size = text.partition(":")
        if kind == cls.BLOCK:
            try:
                return cls.block(int(size))
            except ValueError:
                raise ParameterException(f"invalid block size in granularity `{text}`")
        if size:
            raise ParameterException(f"`{kind}` granularity takes no block size")
        return cls(kind)

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def block_size(self) -> Optional[int]:
        return self._block_size

    @property
    def unit_bits(self) -> int:
        """Message bits carried by one full payload."""
        if self._kind == self.BLOCK:
            return 8 * self._block_size
        return self._UNIT_BITS[self._kind]

    @property
    def is_sub_byte(self) -> bool:
        return self.unit_bits < 8

    @property
    def mask(self) -> int:
        """All-ones value of a sub-byte unit, ``0xff`` otherwise."""
        return (1 << self.unit_bits) - 1 if self.is_sub_byte else 0xFF

    def __eq__(self, other):
        return (
            isinstance(other, Granularity)
            and self._kind == other._kind
            and self._block_size == other._block_size
        )

    def __hash__(self):
        return hash((self._kind, self._block_size))

    def __str__(self):
        if self._kind == self.BLOCK:
            return f"{self.BLOCK}:{self._block_size}"
        return self._kind

    def __repr__(self):
        return f"Granularity('{self}')"
