import abc
import logging
from typing import List
from typing import Sequence

from decoykit.bitstring import RandomSource
from decoykit.exceptions import ParameterException
from decoykit.packet import Granularity

logger = logging.getLogger(__name__)


class ChaffStrategy(abc.ABC):
    """Decides which chaff accompanies each wheat packet.

    Abstract class. Subclasses implement :meth:`chaff_payloads`; strategies
    that place chaff on serials other than the wheat serial also override
    :meth:`chaff_serial`.

    A strategy may keep per-stream state. :meth:`begin_stream` is called once
    before the first wheat packet of every stream; a strategy instance
    must therefore not be shared by concurrently built streams.
    """

    def __init__(self, chaff_per_wheat: int = 1):
        """
        :param chaff_per_wheat: Number of chaff packets sent along each wheat packet.
        """
        self.chaff_per_wheat = chaff_per_wheat

    @property
    def chaff_per_wheat(self) -> int:
        return self._chaff_per_wheat

    @chaff_per_wheat.setter
    def chaff_per_wheat(self, value: int):
        if value < 1:
            raise ParameterException(f"chaff_per_wheat must be positive, got {value}")
        self._chaff_per_wheat = value

    @classmethod
    def name(cls) -> str:
        """Identifier of the strategy, e.g. for logging."""
        return cls.__name__

    def begin_stream(self, wheat_serials: Sequence[int]) -> None:
        """Reset per-stream state. Does nothing by default."""

    def chaff_serial(self, wheat_serial: int, index: int) -> int:
        """Serial of the ``index``-th chaff packet of a wheat packet. Defaults to
        the wheat serial, so chaff and wheat are indistinguishable by serial."""
        return wheat_serial

    @abc.abstractmethod
    def chaff_payloads(
        self, serial: int, payload: bytes, granularity: Granularity, rng: RandomSource
    ) -> List[bytes]:
        """Exactly ``chaff_per_wheat`` chaff payloads for one wheat packet."""
        raise NotImplementedError("called abstract method")
