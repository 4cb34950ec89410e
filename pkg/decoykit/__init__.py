import decoykit.chaff
import decoykit.exceptions
from decoykit.bitflip import BitFlipAlphabet
from decoykit.bitmap import MapKey
from decoykit.bitstring import BitString
from decoykit.bitstring import RandomSource
from decoykit.entrypoint import parse_file
from decoykit.entrypoint import parse_string
from decoykit.entrypoint import write_file
from decoykit.entrypoint import write_string
from decoykit.packet import WinnowKey
from decoykit.writer import KeyFileFormat

__version__ = "1.0.0b1"
