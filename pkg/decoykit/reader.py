import logging
import re
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Set
from typing import Tuple
from typing import Union

from .bitflip import BitFlipAlphabet
from .bitflip import Letter
from .bitmap import MapKey
from .bitmap import Vertex
from .bitstring import from_hex
from .exceptions import DecoyKitException
from .exceptions import FormatException
from .packet import SECRET_BYTES
from .packet import WinnowKey

logger = logging.getLogger(__name__)

BITFLIP_HEADER = "bitflip v1"
BITMAP_HEADER = "bitmap v1"
WINNOW_HEADER = "winnow v1"

Key = Union[BitFlipAlphabet, MapKey, WinnowKey]

_INT_RE = re.compile(r"^(0|[1-9][0-9]*)$")
_LETTER_TAIL_RE = re.compile(r"^ s=([0-9a-fA-F]+) h=(\S+)$")


class KeyReader:
    """Parses the text of a key file into a key object.

    For each key text, a new KeyReader object should be created.
    The first line that is neither blank nor a ``#`` comment is the header,
    which selects the key kind. Every parsing problem raises a
    :class:`FormatException` carrying the 1-based line number."""

    def __init__(self, text: str):
        self.text = text
        self._lines: List[Tuple[int, str]] = []
        for number, line in enumerate(text.splitlines(), start=1):
            if line.strip() == "" or line.startswith("#"):
                continue
            self._lines.append((number, line))
        self._position = 0
        self._current_line: Optional[int] = None

    def _next_line(self) -> Optional[str]:
        if self._position >= len(self._lines):
            self._current_line = None
            return None
        self._current_line, line = self._lines[self._position]
        self._position += 1
        return line

    def _fail(self, reason: str) -> FormatException:
        return FormatException(reason, line=self._current_line)

    def _expect_assignment(self, name: str) -> str:
        line = self._next_line()
        if line is None:
            raise FormatException(f"Unexpectedly reached end of file, expected `{name}=`.")
        prefix = f"{name}="
        if not line.startswith(prefix) or len(line) == len(prefix):
            raise self._fail(f"Expected `{name}=<value>`, found {line!r}")
        return line[len(prefix) :].strip()

    def _parse_int(self, text: str, what: str) -> int:
        if not _INT_RE.match(text):
            raise self._fail(f"Invalid {what} {text!r}: expected a non-negative integer")
        return int(text)

    def read(self) -> Key:
        header = self._next_line()
        if header is None:
            raise FormatException("Empty key file.")
        parsers: Dict[str, Callable[[], Key]] = {
            BITFLIP_HEADER: self._read_bitflip,
            BITMAP_HEADER: self._read_bitmap,
            WINNOW_HEADER: self._read_winnow,
        }
        parser = parsers.get(header.strip())
        if parser is None:
            raise self._fail(f"Unknown key file header {header!r}")
        key = parser()
        logger.debug(f"Read key file with header `{header.strip()}`")
        return key

    def _read_bitflip(self) -> BitFlipAlphabet:
        l = self._parse_int(self._expect_assignment("l"), "token length")
        letters = []
        while (line := self._next_line()) is not None:
            # The symbol is the single character after "letter ", which may be a space.
            if not line.startswith("letter ") or len(line) < 9:
                raise self._fail(f"Expected `letter <symbol> s=<hex> h=<int>`, found {line!r}")
            symbol = line[7]
            match = _LETTER_TAIL_RE.match(line[8:].rstrip("\r"))
            if match is None:
                raise self._fail(f"Malformed letter line {line!r}")
            hex_digits, h_text = match.groups()
            if len(hex_digits) != (l + 3) // 4:
                raise self._fail(
                    f"Center of letter {symbol!r} has {len(hex_digits)} hex digits, "
                    f"expected {(l + 3) // 4} for l={l}"
                )
            try:
                s = from_hex(hex_digits, l)
            except FormatException as e:
                raise self._fail(e.abort_reason)
            letters.append(Letter(symbol, s, self._parse_int(h_text, "radius")))
        try:
            return BitFlipAlphabet(l, letters)
        except DecoyKitException as e:
            raise FormatException(f"Invalid alphabet: {e}")

    def _read_bitmap(self) -> MapKey:
        start = self._expect_assignment("start")
        separator = self._expect_assignment("sep")
        vertices: List[Vertex] = []
        ids: Set[str] = set()
        edges: List[Tuple[str, str, str]] = []
        edge_lines: List[Tuple[int, str, str, str]] = []
        used: Set[Tuple[str, str]] = set()
        while (line := self._next_line()) is not None:
            parts = line.split()
            if parts[0] == "vertex" and len(parts) == 4 and parts[2] == "station":
                vertex_id, symbol = parts[1], parts[3]
                if len(symbol) != 1:
                    raise self._fail(f"Station symbol must be one character, found {symbol!r}")
                vertex = Vertex(vertex_id, symbol)
            elif parts[0] == "vertex" and len(parts) == 3 and parts[2] == "junction":
                vertex_id = parts[1]
                vertex = Vertex(vertex_id)
            elif parts[0] == "edge" and len(parts) == 4:
                source, label, target = parts[1:]
                if (source, label) in used:
                    raise self._fail(f"Vertex `{source}` has a second road labeled `{label}`")
                used.add((source, label))
                edges.append((source, label, target))
                edge_lines.append((self._current_line, source, label, target))
                continue
            else:
                raise self._fail(f"Expected a `vertex` or `edge` line, found {line!r}")
            if vertex_id in ids:
                raise self._fail(f"Duplicate vertex id `{vertex_id}`")
            ids.add(vertex_id)
            vertices.append(vertex)

        for number, source, label, target in edge_lines:
            for vertex_id in (source, target):
                if vertex_id not in ids:
                    raise FormatException(
                        f"Road `{label}` uses unknown vertex `{vertex_id}`", line=number
                    )
        if start not in ids:
            raise FormatException(f"Start vertex `{start}` is not declared")
        try:
            return MapKey(vertices, edges, start, separator)
        except DecoyKitException as e:
            raise FormatException(f"Invalid map key: {e}")

    def _read_winnow(self) -> WinnowKey:
        secret_hex = self._expect_assignment("secret")
        if len(secret_hex) != 2 * SECRET_BYTES or not re.match(r"^[0-9a-fA-F]+$", secret_hex):
            raise self._fail(f"Secret must be {2 * SECRET_BYTES} hex digits")
        tau = self._parse_int(self._expect_assignment("tau"), "tag width")
        extra = self._next_line()
        if extra is not None:
            raise self._fail(f"Unexpected line {extra!r} after the winnow key")
        try:
            return WinnowKey(bytes.fromhex(secret_hex), tau)
        except DecoyKitException as e:
            raise FormatException(f"Invalid winnow key: {e}")
