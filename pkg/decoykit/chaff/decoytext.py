import logging
from typing import List
from typing import Sequence
from typing import Set

from decoykit.bitstring import RandomSource
from decoykit.chaff.strategy import ChaffStrategy
from decoykit.exceptions import ParameterException
from decoykit.packet import MAX_SERIAL
from decoykit.packet import Granularity

logger = logging.getLogger(__name__)


class DecoyText(ChaffStrategy):
    """Chaff carries plausible decoy texts, so that a reader without the key
    faces several meaningful candidate messages instead of noise.

    Candidates are used in turn, continuing across wheat packets. With
    ``distinct_serials``, the ``j``-th chaff of wheat serial ``s`` (counting
    from 1) is sent under serial ``s + j`` instead of ``s``; the wheat serials
    must leave room for that (see :func:`decoykit.winnow.spread_serials`) and
    the receiver should winnow with the same stride.
    """

    def __init__(
        self,
        candidates: Sequence[str],
        chaff_per_wheat: int = 1,
        distinct_serials: bool = False,
        encoding: str = "utf-8",
    ):
        super().__init__(chaff_per_wheat=chaff_per_wheat)
        if len(candidates) < 1:
            raise ParameterException("DecoyText needs at least one candidate text")
        self._candidates = [c.encode(encoding) for c in candidates]
        self._distinct_serials = distinct_serials
        self._counter = 0
        self._wheat_serials: Set[int] = set()

    @property
    def candidates(self) -> List[bytes]:
        return list(self._candidates)

    @property
    def distinct_serials(self) -> bool:
        return self._distinct_serials

    # docstr-coverage: inherited
    def begin_stream(self, wheat_serials: Sequence[int]) -> None:
        self._counter = 0
        self._wheat_serials = set(wheat_serials)

    # docstr-coverage: inherited
    def chaff_serial(self, wheat_serial: int, index: int) -> int:
        if not self._distinct_serials:
            return wheat_serial
        serial = wheat_serial + index + 1
        if serial > MAX_SERIAL or serial in self._wheat_serials:
            raise ParameterException(
                f"decoy serial {serial} for wheat serial {wheat_serial} is not free; "
                "spread the wheat serials further apart"
            )
        return serial

    # docstr-coverage: inherited
    def chaff_payloads(
        self, serial: int, payload: bytes, granularity: Granularity, rng: RandomSource
    ) -> List[bytes]:
        payloads = []
        for _ in range(self.chaff_per_wheat):
            payloads.append(self._candidates[self._counter % len(self._candidates)])
            self._counter += 1
        return payloads
