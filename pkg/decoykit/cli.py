"""The ``decoykit`` command line.

Exit codes: 0 success, 1 usage error, 2 data or format error,
3 verification failure. Diagnostics go to standard error, data to the
output file or standard output.
"""

import argparse
import logging
import socket
import sys
from typing import Any
from typing import BinaryIO
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from . import __version__
from . import analysis
from . import bitflip
from . import bitmap
from . import entrypoint
from . import equivocation
from . import evolve
from . import packet
from . import winnow
from . import writer
from .bitstring import BitString
from .bitstring import RandomSource
from .chaff import BitComplement
from .chaff import DecoyText
from .chaff import RandomPayload
from .chaff import ChaffStrategy
from .exceptions import DecoyKitException
from .exceptions import ParameterException
from .exceptions import VerificationException

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFICATION = 3

COMMANDS = (
    "keygen",
    "encode",
    "decode",
    "chaff",
    "winnow",
    "forge-key",
    "otp",
    "terminal-list",
    "mimic",
    "unicity",
    "evolve",
    "analyze",
    "distinguish",
)
KEY_KINDS = ("bitflip", "bitmap", "winnow")
STRATEGIES = ("complement", "decoy", "random")
_MAX_SEED = 2**64


class UsageError(Exception):
    """The command line could not be parsed."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; usage errors are exit code 1 here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


class CliConfig:
    """One parsed command line: the command, its files, the seed and the
    command-specific options."""

    def __init__(
        self,
        command: str,
        kind: Optional[str] = None,
        key_path: Optional[str] = None,
        input_path: str = "-",
        output_path: str = "-",
        seed: Optional[int] = None,
        verbosity: int = 0,
        options: Optional[Dict[str, Any]] = None,
    ):
        self.command = command
        self.kind = kind
        self.key_path = key_path
        self.input_path = input_path
        self.output_path = output_path
        self.seed = seed
        self.verbosity = verbosity
        self.options = options or {}

    @property
    def command(self) -> str:
        return self._command

    @command.setter
    def command(self, command: str):
        if command not in COMMANDS:
            raise ParameterException(f"unknown command `{command}`")
        self._command = command

    @property
    def seed(self) -> Optional[int]:
        """Seed of the command's randomness; ``None`` falls back to ``$DECOYKIT_SEED``,
        then to system entropy."""
        return self._seed

    @seed.setter
    def seed(self, seed: Optional[int]):
        if seed is not None and not 0 <= seed < _MAX_SEED:
            raise ParameterException(f"seed must be a 64-bit unsigned integer, got {seed}")
        self._seed = seed

    @property
    def verbosity(self) -> int:
        """-1 quiet, 0 default, 1 verbose."""
        return self._verbosity

    @verbosity.setter
    def verbosity(self, verbosity: int):
        if verbosity not in (-1, 0, 1):
            raise ParameterException(f"verbosity must be -1, 0 or 1, got {verbosity}")
        self._verbosity = verbosity

    def rng(self) -> RandomSource:
        return RandomSource.from_env(self._seed)

    def __eq__(self, other):
        return isinstance(other, CliConfig) and vars(self) == vars(other)

    def __repr__(self):
        return (
            f"CliConfig(command={self._command!r}, kind={self.kind!r}, "
            f"key_path={self.key_path!r}, input_path={self.input_path!r}, "
            f"output_path={self.output_path!r}, seed={self._seed}, options={self.options!r})"
        )


def _seed_type(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if not 0 <= value < _MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _rate_type(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid rate {text!r}")
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError("rate must be in [0, 1)")
    return value


def _stride_type(text: str) -> int:
    if not text.isdigit() or int(text) < 1:
        raise argparse.ArgumentTypeError(f"stride must be a positive integer, got {text!r}")
    return int(text)


def _granularity_type(text: str) -> packet.Granularity:
    try:
        return packet.Granularity.parse(text)
    except ParameterException as e:
        raise argparse.ArgumentTypeError(str(e))


def _address_type(text: str) -> Tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


def _weights_type(text: str) -> List[float]:
    try:
        return [float(w) for w in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_common(p: argparse.ArgumentParser, key: bool = False, randomized: bool = False):
    p.add_argument("input", nargs="?", help="input file (default: standard input)")
    p.add_argument("--in", dest="in_path", metavar="PATH", help="input file, `-` for stdin")
    p.add_argument("--out", dest="out_path", default="-", metavar="PATH", help="output file")
    if key:
        p.add_argument("--key", required=True, metavar="PATH", help="key file")
    if randomized:
        p.add_argument("--seed", type=_seed_type, help="seed (default: $DECOYKIT_SEED)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="decoykit", description="Decoy-tolerant cryptography toolkit.")
    parser.add_argument("--version", action="version", version=f"decoykit {__version__}")
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    noise.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    keygen = commands.add_parser("keygen", help="generate a key file")
    kinds = keygen.add_subparsers(dest="kind", metavar="KIND", parser_class=_Parser)
    p = kinds.add_parser("bitflip", help="random valid BitFlip alphabet")
    _add_common(p, randomized=True)
    p.add_argument("--n", type=int, default=4, help="number of letters")
    p.add_argument("--l", type=int, default=8, help="token length in bits")
    p.add_argument("--symbols", help="letter symbols (default: a, b, c, ...)")
    p = kinds.add_parser("bitmap", help="random valid map")
    _add_common(p, randomized=True)
    p.add_argument("--symbols-count", type=int, default=len(bitmap.BASE64_SYMBOLS) + 1)
    p.add_argument("--stations", type=int, default=96)
    p.add_argument("--junctions", type=int, default=24)
    p.add_argument("--labels", type=int, default=8)
    p.add_argument("--l-max", type=int, default=bitmap.DEFAULT_L_MAX_PATH)
    p = kinds.add_parser("winnow", help="random winnowing secret")
    _add_common(p, randomized=True)
    p.add_argument("--tau", type=int, choices=packet.TAG_BITS, default=packet.DEFAULT_TAU)

    for name, verb in (("encode", "encode"), ("decode", "decode")):
        sub = commands.add_parser(name, help=f"{verb} with a BitFlip or BitMap key")
        sub_kinds = sub.add_subparsers(dest="kind", metavar="KIND", parser_class=_Parser)
        p = sub_kinds.add_parser("bitflip")
        _add_common(p, key=True, randomized=name == "encode")
        if name == "encode":
            p.add_argument("--chaff-rate", type=_rate_type, default=0.0)
            p.add_argument("--mode", choices=bitflip.MODES, default=bitflip.RANDOMIZED)
            p.add_argument("--pad-to", type=int, help="append chaff up to this many tokens")
        p = sub_kinds.add_parser("bitmap")
        _add_common(p, key=True, randomized=name == "encode")
        if name == "encode":
            p.add_argument("--l-max", type=int, default=bitmap.DEFAULT_L_MAX_PATH)

    p = commands.add_parser("chaff", help="packetize, tag and chaff a message")
    _add_common(p, key=True, randomized=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="complement")
    p.add_argument("--chaff-per-wheat", type=int, default=1)
    p.add_argument("--decoy", action="append", default=[], help="decoy text (repeatable)")
    p.add_argument("--distinct-serials", action="store_true")
    p.add_argument("--granularity", type=_granularity_type, default=packet.Granularity.byte())
    p.add_argument("--connect", type=_address_type, metavar="HOST:PORT")

    p = commands.add_parser("winnow", help="authenticate and reassemble a packet stream")
    _add_common(p, key=True)
    p.add_argument("--granularity", type=_granularity_type, default=packet.Granularity.byte())
    p.add_argument("--listen", type=_address_type, metavar="HOST:PORT")
    p.add_argument("--stride", type=_stride_type, default=1, help="wheat serial spacing")

    p = commands.add_parser("forge-key", help="pad decrypting a ciphertext to a decoy")
    _add_common(p)
    p.add_argument("--decoy", required=True, metavar="PATH", help="decoy plaintext file")

    p = commands.add_parser("otp", help="one-time pad encryption and decryption")
    directions = p.add_subparsers(dest="kind", metavar="DIRECTION", parser_class=_Parser)
    for direction in ("encrypt", "decrypt"):
        d = directions.add_parser(direction)
        _add_common(d)
        d.add_argument("--pad", required=True, metavar="PATH", help="pad file (raw bytes)")

    p = commands.add_parser("terminal-list", help="forge a pad for every candidate")
    _add_common(p)
    p.add_argument("--candidate", action="append", default=[], required=True)
    p.add_argument("--weights", type=_weights_type)
    p.add_argument("--threshold", type=float, help="drop candidates below this weight")

    p = commands.add_parser("mimic", help="imitations of a-priori candidates")
    _add_common(p, randomized=True)
    p.add_argument("--apriori", action="append", default=[], required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--max-edits", type=int, default=1)

    p = commands.add_parser("unicity", help="unicity distance")
    p.add_argument("--out", dest="out_path", default="-", metavar="PATH")
    entropy = p.add_mutually_exclusive_group(required=True)
    entropy.add_argument("--key-entropy", type=float, help="key entropy in bits")
    entropy.add_argument("--bitflip", nargs=2, type=int, metavar=("N", "L"))
    p.add_argument("--redundancy", type=float, default=equivocation.ENGLISH_REDUNDANCY)

    p = commands.add_parser("evolve", help="evolve a BitFlip alphabet")
    _add_common(p, randomized=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--l", type=int, default=8)
    p.add_argument("--population", type=int, default=50)
    p.add_argument("--generations", type=int, default=100)
    p.add_argument("--w-capacity", type=float, default=1.0)
    p.add_argument("--w-chaff", type=float, default=1.0)
    p.add_argument("--w-balance", type=float, default=0.0)
    p.add_argument("--target-chaff", type=float, default=0.5)
    p.add_argument("--csv", metavar="PATH", help="write best fitness per generation")

    p = commands.add_parser("analyze", help="randomness battery over a byte stream")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=analysis.DEFAULT_ALPHA)

    p = commands.add_parser("distinguish", help="distinguisher game against BitFlip")
    p.add_argument("--key", required=True, metavar="PATH")
    p.add_argument("--out", dest="out_path", default="-", metavar="PATH")
    p.add_argument("--seed", type=_seed_type)
    p.add_argument("--msg-a", required=True)
    p.add_argument("--msg-b", required=True)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--mode", choices=bitflip.MODES, default=bitflip.RANDOMIZED)
    return parser


_GLOBAL_OPTIONS = ("command", "kind", "key", "input", "in_path", "out_path", "seed")


def parse_args(argv: Sequence[str]) -> CliConfig:
    """Parse a command line; raises :class:`UsageError` on any usage problem."""
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        raise UsageError("decoykit: error: a command is required")
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        parser.error("a command is required")
    if ns.command in ("keygen", "encode", "decode", "otp") and ns.kind is None:
        parser.error(f"`{ns.command}` needs a subcommand")

    positional = getattr(ns, "input", None)
    in_path = getattr(ns, "in_path", None)
    if positional is not None and in_path is not None:
        parser.error("give the input either positionally or with --in, not both")

    options = {
        k: v
        for k, v in vars(ns).items()
        if k not in _GLOBAL_OPTIONS and k not in ("verbose", "quiet")
    }
    return CliConfig(
        command=ns.command,
        kind=getattr(ns, "kind", None),
        key_path=getattr(ns, "key", None),
        input_path=positional or in_path or "-",
        output_path=getattr(ns, "out_path", "-"),
        seed=getattr(ns, "seed", None),
        verbosity=1 if ns.verbose else (-1 if ns.quiet else 0),
        options=options,
    )


def _read_input(config: CliConfig) -> bytes:
    if config.input_path == "-":
        return sys.stdin.buffer.read()
    with open(config.input_path, "rb") as f:
        return f.read()


def _read_file(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _write_output(config: CliConfig, data: Any):
    if isinstance(data, str):
        data = data.encode("utf-8")
    if config.output_path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(config.output_path, "wb") as f:
            f.write(data)


def _load_key(config: CliConfig, expected: type):
    key = entrypoint.parse_file(config.key_path)
    if not isinstance(key, expected):
        raise ParameterException(
            f"`{config.key_path}` holds a {type(key).__name__}, expected a {expected.__name__}"
        )
    return key


def _cmd_keygen(config: CliConfig) -> int:
    opts = config.options
    rng = config.rng()
    if config.kind == "bitflip":
        key = bitflip.random_alphabet(opts["n"], opts["l"], rng, symbols=opts["symbols"])
    elif config.kind == "bitmap":
        key = bitmap.generate_map(
            opts["symbols_count"],
            opts["stations"],
            opts["junctions"],
            opts["labels"],
            rng,
            l_max=opts["l_max"],
        )
    else:
        key = packet.generate_key(rng, opts["tau"])
    _write_output(config, entrypoint.write_string(key))
    return EXIT_OK


def _cmd_encode(config: CliConfig) -> int:
    opts = config.options
    data = _read_input(config)
    if config.kind == "bitflip":
        key = _load_key(config, bitflip.BitFlipAlphabet)
        text = data.decode("utf-8")
        tokens = bitflip.encode_message(
            key, text, opts["chaff_rate"], opts["mode"], config.rng(), opts["pad_to"]
        )
        _write_output(config, entrypoint.write_tokens(tokens))
    else:
        key = _load_key(config, bitmap.MapKey)
        labels = bitmap.encode_bytes(key, data, config.rng(), opts["l_max"])
        _write_output(config, entrypoint.write_labels(labels))
    return EXIT_OK


def _cmd_decode(config: CliConfig) -> int:
    text = _read_input(config).decode("utf-8")
    if config.kind == "bitflip":
        key = _load_key(config, bitflip.BitFlipAlphabet)
        decoded = bitflip.decode_stream(key, entrypoint.parse_tokens(text, key.l))
        logger.info(f"Discarded {decoded.discarded} chaff tokens")
        _write_output(config, decoded.text)
    else:
        key = _load_key(config, bitmap.MapKey)
        _write_output(config, bitmap.decode_bytes(key, entrypoint.parse_labels(text)))
    return EXIT_OK


def _strategy(opts: Dict[str, Any]) -> ChaffStrategy:
    if opts["strategy"] == "decoy":
        if not opts["decoy"]:
            raise ParameterException("the decoy strategy needs at least one --decoy text")
        return DecoyText(
            opts["decoy"],
            chaff_per_wheat=opts["chaff_per_wheat"],
            distinct_serials=opts["distinct_serials"],
        )
    if opts["strategy"] == "random":
        return RandomPayload(chaff_per_wheat=opts["chaff_per_wheat"])
    return BitComplement(chaff_per_wheat=opts["chaff_per_wheat"])


def _cmd_chaff(config: CliConfig) -> int:
    opts = config.options
    key = _load_key(config, packet.WinnowKey)
    strategy = _strategy(opts)
    wheat = winnow.split_message(_read_input(config), opts["granularity"])
    if opts["distinct_serials"]:
        wheat = winnow.spread_serials(wheat, strategy.chaff_per_wheat + 1)
    stream = winnow.chaff_stream(key, wheat, strategy, config.rng(), opts["granularity"])
    data = entrypoint.write_packets(stream)
    if opts["connect"] is not None:
        with socket.create_connection(opts["connect"]) as conn:
            conn.sendall(data)
            conn.shutdown(socket.SHUT_WR)
        logger.info(f"Sent {len(data)} bytes to {opts['connect'][0]}:{opts['connect'][1]}")
    else:
        _write_output(config, data)
    return EXIT_OK


def _receive(address: Tuple[str, int]) -> bytes:
    with socket.create_server(address) as server:
        conn, peer = server.accept()
        with conn:
            logger.info(f"Accepted connection from {peer[0]}:{peer[1]}")
            chunks = []
            while chunk := conn.recv(65536):
                chunks.append(chunk)
    return b"".join(chunks)


def _cmd_winnow(config: CliConfig) -> int:
    opts = config.options
    key = _load_key(config, packet.WinnowKey)
    data = _receive(opts["listen"]) if opts["listen"] is not None else _read_input(config)
    stream = entrypoint.parse_packets(data, key.tau)
    result = winnow.winnow(key, stream, opts["granularity"], opts["stride"])
    logger.info(f"Winnowing report: {result.report}")
    _write_output(config, result.message)
    return EXIT_OK


def _cmd_forge_key(config: CliConfig) -> int:
    pad = equivocation.forge_key(_read_input(config), _read_file(config.options["decoy"]))
    _write_output(config, pad.to_bytes())
    return EXIT_OK


def _cmd_otp(config: CliConfig) -> int:
    pad = equivocation.Pad.from_bytes(_read_file(config.options["pad"]))
    data = _read_input(config)
    if config.kind == "encrypt":
        _write_output(config, equivocation.otp_encrypt(data, pad))
    else:
        _write_output(config, equivocation.otp_decrypt(data, pad))
    return EXIT_OK


def _cmd_terminal_list(config: CliConfig) -> int:
    opts = config.options
    candidates = [c.encode("utf-8") for c in opts["candidate"]]
    terminal_list = equivocation.build_terminal_list(
        _read_input(config), candidates, opts["weights"]
    )
    if opts["threshold"] is not None:
        terminal_list = terminal_list.prune(opts["threshold"])
    _write_output(config, writer.write_terminal_list(terminal_list))
    logger.info(f"Equivocation: {terminal_list.equivocation():.4f} bits")
    if terminal_list.failed_entries:
        raise VerificationException(
            [f"entry {e.candidate!r} failed to verify" for e in terminal_list.failed_entries]
        )
    return EXIT_OK


def _cmd_mimic(config: CliConfig) -> int:
    opts = config.options
    mimics = equivocation.mimic_candidates(
        opts["apriori"], opts["count"], opts["max_edits"], config.rng()
    )
    _write_output(config, writer.write_results(mimics))
    return EXIT_OK


def _cmd_unicity(config: CliConfig) -> int:
    opts = config.options
    if opts["bitflip"] is not None:
        entropy = bitflip.alphabet_key_entropy(*opts["bitflip"])
    else:
        entropy = opts["key_entropy"]
    distance = equivocation.unicity_distance(entropy, opts["redundancy"])
    _write_output(config, f"{distance:.6f}\n")
    return EXIT_OK


def _cmd_evolve(config: CliConfig) -> int:
    opts = config.options
    cfg = evolve.FitnessConfig(
        opts["w_capacity"], opts["w_chaff"], opts["w_balance"], opts["target_chaff"]
    )
    report = evolve.evolve_alphabet(
        opts["n"], opts["l"], opts["population"], opts["generations"], cfg, config.rng()
    )
    _write_output(config, entrypoint.write_string(report.final))
    if opts["csv"] is not None:
        with open(opts["csv"], "w", newline="\n") as f:
            f.write(writer.write_evolution_csv(report))
    return EXIT_OK


def _cmd_analyze(config: CliConfig) -> int:
    results = analysis.battery(BitString.from_bytes(_read_input(config)), config.options["alpha"])
    _write_output(config, writer.write_results(results))
    return EXIT_OK


def _cmd_distinguish(config: CliConfig) -> int:
    opts = config.options
    key = _load_key(config, bitflip.BitFlipAlphabet)
    report = analysis.distinguisher_experiment(
        key,
        opts["msg_a"],
        opts["msg_b"],
        opts["samples"],
        opts["trials"],
        opts["mode"],
        config.rng(),
    )
    _write_output(config, writer.write_results([report]))
    return EXIT_OK


_HANDLERS: Dict[str, Callable[[CliConfig], int]] = {
    "keygen": _cmd_keygen,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "chaff": _cmd_chaff,
    "winnow": _cmd_winnow,
    "forge-key": _cmd_forge_key,
    "otp": _cmd_otp,
    "terminal-list": _cmd_terminal_list,
    "mimic": _cmd_mimic,
    "unicity": _cmd_unicity,
    "evolve": _cmd_evolve,
    "analyze": _cmd_analyze,
    "distinguish": _cmd_distinguish,
}


def run(config: CliConfig) -> int:
    """Execute a parsed command and map failures to exit codes."""
    try:
        return _HANDLERS[config.command](config)
    except VerificationException as e:
        logger.error(str(e))
        return EXIT_VERIFICATION
    except (DecoyKitException, OSError, UnicodeDecodeError) as e:
        logger.error(str(e))
        return EXIT_DATA


def _configure_logging(verbosity: int):
    level = {-1: logging.ERROR, 0: logging.WARNING, 1: logging.DEBUG}[verbosity]
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(config.verbosity)
    return run(config)
