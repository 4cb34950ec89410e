from typing import List

from decoykit.bitstring import RandomSource
from decoykit.chaff.strategy import ChaffStrategy
from decoykit.packet import Granularity


class BitComplement(ChaffStrategy):
    """Chaff carries the bitwise complement of the wheat payload.

    At bit granularity this is the classic scheme: every serial is sent once
    as 0 and once as 1, and only the tag tells which one counts.
    """

    # docstr-coverage: inherited
    def chaff_payloads(
        self, serial: int, payload: bytes, granularity: Granularity, rng: RandomSource
    ) -> List[bytes]:
        mask = granularity.mask
        complement = bytes(b ^ mask for b in payload)
        return [complement] * self.chaff_per_wheat
