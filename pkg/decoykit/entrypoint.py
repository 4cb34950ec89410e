from typing import List
from typing import Optional
from typing import Sequence
from typing import TextIO
from typing import Union

from .bitstring import BitString
from .bitstring import from_hex
from .bitstring import to_hex
from .exceptions import FormatException
from .packet import Packet
from .reader import Key
from .reader import KeyReader
from .wire import decode_stream
from .wire import encode_stream
from .writer import KeyFileFormat
from .writer import write


def parse_string(key_str: str) -> Key:
    """Parse the text of a key file.

    :param key_str: Key file text; the header line selects the key kind.
    :return: A ``BitFlipAlphabet``, ``MapKey`` or ``WinnowKey``.
    """
    return KeyReader(key_str).read()


def parse_file(path: str, encoding: str = "UTF-8") -> Key:
    """Parse a key file

    :param path: Path to the key file
    :param encoding: Encoding of the key file. Default encoding is ``"UTF-8"``.
    :return: The parsed key
    """
    with open(path, encoding=encoding) as f:
        return parse_string(f.read())


def write_string(key: Key, key_format: Optional[KeyFileFormat] = None) -> str:
    """Serialize a key to key file text.

    :param key: Key to serialize.
    :param key_format: Customized key file format to use (optional).
    """
    return write(key, key_format=key_format)


def write_file(
    file: Union[str, TextIO], key: Key, key_format: Optional[KeyFileFormat] = None
) -> None:
    """Write a key to a file.

    :param file: File to write to. Can be a file name or a file object.
    :param key: Key to serialize.
    :param key_format: Customized key file format to use (optional)."""
    key_str = write_string(key, key_format=key_format)
    if isinstance(file, str):
        # Key files are line-oriented and bit-exact; no platform newline translation.
        with open(file, "w", newline="\n") as f:
            f.write(key_str)
    else:
        file.write(key_str)


def parse_tokens(text: str, l: int) -> List[BitString]:
    """Read a token stream: one hex token of ``l`` bits per line."""
    tokens = []
    digits = (l + 3) // 4
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if len(line) != digits:
            raise FormatException(
                f"Token {line!r} has {len(line)} hex digits, expected {digits} for l={l}",
                line=number,
            )
        try:
            tokens.append(from_hex(line, l))
        except FormatException as e:
            raise FormatException(e.abort_reason, line=number)
    return tokens


def write_tokens(tokens: Sequence[BitString]) -> str:
    return "".join(f"{to_hex(t)}\n" for t in tokens)


def parse_labels(text: str) -> List[str]:
    """Read a BitMap ciphertext: whitespace-separated road labels."""
    return text.split()


def write_labels(labels: Sequence[str]) -> str:
    return " ".join(labels) + "\n" if labels else ""


def parse_packets(data: bytes, tau: Optional[int] = None) -> List[Packet]:
    """Read a binary packet stream (see :mod:`decoykit.wire`)."""
    return decode_stream(data, tau)


def write_packets(packets: Sequence[Packet]) -> bytes:
    return encode_stream(packets)
