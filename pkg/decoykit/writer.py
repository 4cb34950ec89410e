import json
from typing import List
from typing import Optional
from typing import Sequence

from .bitflip import BitFlipAlphabet
from .bitmap import MapKey
from .bitstring import to_hex
from .equivocation import TerminalList
from .evolve import EvolutionReport
from .exceptions import ParameterException
from .packet import WinnowKey
from .reader import BITFLIP_HEADER
from .reader import BITMAP_HEADER
from .reader import WINNOW_HEADER
from .reader import Key


def _treat_bitflip(key: BitFlipAlphabet, key_format: "KeyFileFormat") -> List[str]:
    res = [BITFLIP_HEADER, "\n", f"l={key.l}\n"]
    for letter in key.letters:
        res.append(f"letter {letter.symbol} s={to_hex(letter.s)} h={letter.h}\n")
    return res


def _treat_bitmap(key: MapKey, key_format: "KeyFileFormat") -> List[str]:
    res = [BITMAP_HEADER, "\n", f"start={key.start}\n", f"sep={key.separator}\n"]
    for vertex in sorted(key.vertices.values(), key=lambda v: v.id):
        if vertex.is_station:
            res.append(f"vertex {vertex.id} station {vertex.symbol}\n")
        else:
            res.append(f"vertex {vertex.id} junction\n")
    for source, label, target in key.edges:
        res.append(f"edge {source} {label} {target}\n")
    return res


def _treat_winnow(key: WinnowKey, key_format: "KeyFileFormat") -> List[str]:
    return [WINNOW_HEADER, "\n", f"secret={key.secret.hex()}\n", f"tau={key.tau}\n"]


def _treat_key(key: Key, key_format: "KeyFileFormat") -> List[str]:
    if isinstance(key, BitFlipAlphabet):
        return _treat_bitflip(key, key_format)
    elif isinstance(key, MapKey):
        return _treat_bitmap(key, key_format)
    elif isinstance(key, WinnowKey):
        return _treat_winnow(key, key_format)
    raise ValueError(f"Unknown key type: {type(key)}")


def write(key: Key, key_format: Optional["KeyFileFormat"] = None) -> str:
    """Serialize a key to the text of a key file.

    Note: This is not the exposed writing entrypoint.
    The exposed entrypoint is `decoykit.write_string` (in entrypoint.py).

    :param key: Key to serialize.
    :param key_format: Customized key file format to use (optional)."""
    if key_format is None:
        key_format = KeyFileFormat()
    pieces = []
    if key_format.comment is not None:
        pieces.extend(f"# {line}\n" for line in key_format.comment.splitlines())
    pieces.extend(_treat_key(key, key_format))
    return "".join(pieces)


def write_terminal_list(terminal_list: TerminalList) -> str:
    """One line per entry: quoted candidate, forged pad, weight and verification flag."""
    lines = []
    for entry in terminal_list:
        candidate = json.dumps(entry.candidate.decode("utf-8", errors="backslashreplace"))
        weight = "-" if entry.weight is None else f"{entry.weight:.6f}"
        verified = "verified" if entry.verified else "FAILED"
        lines.append(
            f"candidate={candidate} key={entry.key.to_bytes().hex()} weight={weight} {verified}\n"
        )
    return "".join(lines)


def write_evolution_csv(report: EvolutionReport) -> str:
    """``generation,best_fitness`` rows, one per generation."""
    rows = ["generation,best_fitness\n"]
    rows.extend(f"{g},{best!r}\n" for g, best in enumerate(report.best_per_generation))
    return "".join(rows)


def write_results(lines: Sequence[object]) -> str:
    """Report lines rendered with ``str``, e.g. test results or advantage reports."""
    return "".join(f"{line}\n" for line in lines)


class KeyFileFormat:
    """Definition of optional decorations when writing a key file.

    Without changes, the output is the canonical key file: the header on the
    first line and no decorations.
    """

    def __init__(self):
        self._comment: Optional[str] = None

    @property
    def comment(self) -> Optional[str]:
        """Text written as ``#`` comment lines before the header. Default: None.

        Key readers skip comment lines; the header is then no longer on line 1.
        """
        return self._comment

    @comment.setter
    def comment(self, comment: Optional[str]):
        if comment is not None and comment.strip() == "":
            raise ParameterException("comment must be None or contain visible text")
        self._comment = comment
