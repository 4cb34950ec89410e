from typing import List

from decoykit.bitstring import RandomSource
from decoykit.chaff.strategy import ChaffStrategy
from decoykit.packet import Granularity


class RandomPayload(ChaffStrategy):
    """Chaff carries uniformly random payloads of the wheat payload's size."""

    # docstr-coverage: inherited
    def chaff_payloads(
        self, serial: int, payload: bytes, granularity: Granularity, rng: RandomSource
    ) -> List[bytes]:
        if granularity.is_sub_byte:
            return [
                bytes([rng.integer(0, granularity.mask + 1)])
                for _ in range(self.chaff_per_wheat)
            ]
        return [rng.bytes(len(payload)) for _ in range(self.chaff_per_wheat)]
