"""Testing argument parsing, exit codes and file pipelines of the command line."""

import socket
import threading
import time

import pytest

import decoykit
from decoykit.bitstring import RandomSource
from decoykit.cli import EXIT_DATA
from decoykit.cli import EXIT_OK
from decoykit.cli import EXIT_USAGE
from decoykit.cli import CliConfig
from decoykit.cli import UsageError
from decoykit.cli import main
from decoykit.cli import parse_args
from decoykit.exceptions import ParameterException
from decoykit.packet import WinnowKey
from tests.resources import SMALL_ALPHABET


@pytest.fixture
def workdir(tmp_path):
    """A directory holding a BitFlip key, a winnow key and a short message."""
    decoykit.write_file(str(tmp_path / "bitflip.txt"), SMALL_ALPHABET)
    decoykit.write_file(str(tmp_path / "winnow.txt"), WinnowKey(bytes(range(32)), 32))
    (tmp_path / "msg.txt").write_bytes(b"abba\n")
    return tmp_path


@pytest.mark.parametrize(
    "argv, expected",
    [
        pytest.param(
            ["keygen", "winnow", "--seed", "5", "--tau", "32"],
            CliConfig("keygen", "winnow", seed=5, options={"tau": 32}),
            id="keygen",
        ),
        pytest.param(
            ["decode", "bitflip", "--key", "k.txt", "tokens.txt"],
            CliConfig("decode", "bitflip", "k.txt", "tokens.txt"),
            id="positional_input",
        ),
        pytest.param(
            ["decode", "bitflip", "--key", "k.txt", "--in", "tokens.txt", "--out", "o.txt"],
            CliConfig("decode", "bitflip", "k.txt", "tokens.txt", "o.txt"),
            id="in_and_out",
        ),
        pytest.param(
            ["-q", "unicity", "--key-entropy", "64"],
            CliConfig(
                "unicity",
                verbosity=-1,
                options={"key_entropy": 64.0, "bitflip": None, "redundancy": 3.2},
            ),
            id="quiet",
        ),
        pytest.param(
            ["-v", "otp", "encrypt", "--pad", "pad.bin", "p.bin"],
            CliConfig(
                "otp", "encrypt", input_path="p.bin", verbosity=1, options={"pad": "pad.bin"}
            ),
            id="verbose",
        ),
    ],
)
def test_parse_args(argv, expected):
    assert parse_args(argv) == expected


@pytest.mark.parametrize(
    "argv",
    [
        pytest.param([], id="empty"),
        pytest.param(["keygen"], id="missing_kind"),
        pytest.param(["frobnicate"], id="unknown_command"),
        pytest.param(["encode", "bitflip"], id="missing_key"),
        pytest.param(["decode", "bitflip", "--key", "k", "--in", "a", "b"], id="input_twice"),
        pytest.param(["encode", "bitflip", "--key", "k", "--chaff-rate", "1.5"], id="rate"),
        pytest.param(["keygen", "bitflip", "--seed", "18446744073709551616"], id="seed"),
        pytest.param(["chaff", "--key", "k", "--granularity", "block"], id="granularity"),
        pytest.param(["winnow", "--key", "k", "--listen", "no-port"], id="address"),
        pytest.param(["unicity"], id="no_entropy"),
        pytest.param(["-q", "-v", "unicity", "--key-entropy", "1"], id="quiet_and_verbose"),
    ],
)
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_args(argv)


def test_usage_error_exit_code():
    assert main([]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_config_validation():
    with pytest.raises(ParameterException):
        CliConfig("frobnicate")
    with pytest.raises(ParameterException):
        CliConfig("unicity", seed=2**64)
    with pytest.raises(ParameterException):
        CliConfig("unicity", verbosity=2)


def test_config_seed_falls_back_to_environment(monkeypatch):
    monkeypatch.setenv("DECOYKIT_SEED", "12")
    assert CliConfig("unicity").rng().seed == 12
    assert CliConfig("unicity", seed=3).rng().seed == 3


def test_seeded_keygen_is_reproducible(tmp_path):
    outputs = []
    for name in ("first.txt", "second.txt"):
        path = tmp_path / name
        argv = ["keygen", "bitflip", "--seed", "7", "--n", "3", "--l", "6", "--out", str(path)]
        assert main(argv) == EXIT_OK
        outputs.append(path.read_text())
    assert outputs[0] == outputs[1]
    key = decoykit.parse_string(outputs[0])
    assert (key.n, key.l, key.symbols) == (3, 6, "abc")


def test_keygen_winnow(tmp_path):
    path = tmp_path / "w.txt"
    assert main(["keygen", "winnow", "--seed", "1", "--tau", "16", "--out", str(path)]) == 0
    assert decoykit.parse_file(str(path)).tau == 16


@pytest.mark.parametrize("message", [b"abba", b"b", b""])
def test_bitflip_roundtrip_is_byte_exact(workdir, message):
    key, tokens, out = (str(workdir / n) for n in ("bitflip.txt", "tokens.txt", "out.txt"))
    (workdir / "letters.txt").write_bytes(message)
    argv = ["encode", "bitflip", "--key", key, "--seed", "3", "--chaff-rate", "0.5"]
    assert main(argv + ["--out", tokens, str(workdir / "letters.txt")]) == EXIT_OK
    assert main(["decode", "bitflip", "--key", key, "--out", out, tokens]) == EXIT_OK
    assert (workdir / "out.txt").read_bytes() == message


def test_bitflip_encode_rejects_a_trailing_newline(workdir):
    argv = ["encode", "bitflip", "--key", str(workdir / "bitflip.txt"), "--seed", "3"]
    assert main(argv + ["--out", str(workdir / "t.txt"), str(workdir / "msg.txt")]) == EXIT_DATA


def test_decode_with_wrong_token_length(workdir):
    tokens = workdir / "tokens.txt"
    tokens.write_text("01\n")
    key = str(workdir / "bitflip.txt")
    argv = ["decode", "bitflip", "--key", key, "--out", str(workdir / "o"), str(tokens)]
    assert main(argv) == EXIT_DATA


def test_wrong_key_kind(workdir):
    argv = ["decode", "bitflip", "--key", str(workdir / "winnow.txt"), str(workdir / "msg.txt")]
    assert main(argv) == EXIT_DATA


def test_missing_input_file(workdir):
    key = str(workdir / "bitflip.txt")
    assert main(["decode", "bitflip", "--key", key, str(workdir / "missing.txt")]) == EXIT_DATA


@pytest.mark.parametrize("strategy", ["complement", "random"])
def test_chaff_winnow_pipeline(workdir, strategy):
    key, stream, out = (str(workdir / n) for n in ("winnow.txt", "stream.bin", "out.bin"))
    argv = ["chaff", "--key", key, "--seed", "4", "--strategy", strategy, "--out", stream]
    assert main(argv + [str(workdir / "msg.txt")]) == EXIT_OK
    assert main(["winnow", "--key", key, "--out", out, stream]) == EXIT_OK
    assert (workdir / "out.bin").read_bytes() == b"abba\n"


def test_decoy_pipeline_with_distinct_serials(workdir, caplog):
    key, stream, out = (str(workdir / n) for n in ("winnow.txt", "stream.bin", "out.bin"))
    argv = [
        "chaff",
        "--key",
        key,
        "--seed",
        "4",
        "--strategy",
        "decoy",
        "--decoy",
        "xyzzy",
        "--distinct-serials",
        "--out",
        stream,
    ]
    assert main(argv + [str(workdir / "msg.txt")]) == EXIT_OK
    assert main(["winnow", "--key", key, "--out", out, stream]) == EXIT_OK
    assert "missing serials" in caplog.text
    caplog.clear()
    assert main(["winnow", "--key", key, "--stride", "2", "--out", out, stream]) == EXIT_OK
    assert "missing serials" not in caplog.text
    assert (workdir / "out.bin").read_bytes() == b"abba\n"


def test_chaff_connect_into_winnow_listen(workdir):
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    address = f"127.0.0.1:{port}"
    key, out = str(workdir / "winnow.txt"), str(workdir / "out.bin")
    exit_codes = []
    listener = threading.Thread(
        target=lambda: exit_codes.append(
            main(["winnow", "--key", key, "--listen", address, "--out", out])
        ),
        daemon=True,
    )
    listener.start()
    argv = ["chaff", "--key", key, "--seed", "4", "--connect", address]
    argv.append(str(workdir / "msg.txt"))
    for _ in range(100):
        if main(argv) == EXIT_OK:
            break
        time.sleep(0.05)
    listener.join(timeout=10)
    assert exit_codes == [EXIT_OK]
    assert (workdir / "out.bin").read_bytes() == b"abba\n"


def test_decoy_strategy_needs_texts(workdir):
    argv = ["chaff", "--key", str(workdir / "winnow.txt"), "--strategy", "decoy"]
    assert main(argv + ["--out", str(workdir / "s.bin"), str(workdir / "msg.txt")]) == EXIT_DATA


def test_forge_key_and_otp(workdir):
    rng = RandomSource(8)
    (workdir / "plain.bin").write_bytes(b"meet at noon")
    (workdir / "decoy.bin").write_bytes(b"stay at home")
    (workdir / "pad.bin").write_bytes(rng.bytes(12))
    path = {n: str(workdir / f"{n}.bin") for n in ("plain", "decoy", "pad", "c", "forged", "d")}

    assert main(["otp", "encrypt", "--pad", path["pad"], "--out", path["c"], path["plain"]]) == 0
    argv = ["forge-key", "--decoy", path["decoy"], "--out", path["forged"], path["c"]]
    assert main(argv) == 0
    assert main(["otp", "decrypt", "--pad", path["forged"], "--out", path["d"], path["c"]]) == 0
    assert (workdir / "d.bin").read_bytes() == b"stay at home"


def test_forge_key_length_mismatch(workdir):
    (workdir / "decoy.bin").write_bytes(b"too long for the message")
    argv = ["forge-key", "--decoy", str(workdir / "decoy.bin"), str(workdir / "msg.txt")]
    assert main(argv + ["--out", str(workdir / "pad.bin")]) == EXIT_DATA


def test_terminal_list(workdir):
    (workdir / "c.bin").write_bytes(b"xy")
    out = workdir / "list.txt"
    argv = ["terminal-list", "--candidate", "ab", "--candidate", "cd", "--candidate", "ef"]
    argv += ["--weights", "0.6,0.3,0.1", "--threshold", "0.2"]
    assert main(argv + ["--out", str(out), str(workdir / "c.bin")]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines == [
        'candidate="ab" key=191b weight=0.666667 verified',
        'candidate="cd" key=1b1d weight=0.333333 verified',
    ]


def test_terminal_list_rejects_bad_weights(workdir):
    (workdir / "c.bin").write_bytes(b"xy")
    argv = ["terminal-list", "--candidate", "ab", "--weights", "0.5"]
    assert main(argv + ["--out", str(workdir / "l.txt"), str(workdir / "c.bin")]) == EXIT_DATA


def test_mimic(tmp_path):
    out = tmp_path / "mimics.txt"
    argv = ["mimic", "--apriori", "Hi Stella", "--count", "3", "--seed", "2", "--out", str(out)]
    assert main(argv) == EXIT_OK
    mimics = out.read_text().splitlines()
    assert len(set(mimics)) == 3
    assert "Hi Stella" not in mimics


@pytest.mark.parametrize(
    "args, expected",
    [
        pytest.param(["--key-entropy", "128"], "40.000000\n", id="key_entropy"),
        pytest.param(["--key-entropy", "64", "--redundancy", "2"], "32.000000\n", id="redundancy"),
    ],
)
def test_unicity(tmp_path, args, expected):
    out = tmp_path / "u.txt"
    assert main(["unicity", *args, "--out", str(out)]) == EXIT_OK
    assert out.read_text() == expected


def test_unicity_of_a_bitflip_alphabet(tmp_path):
    out = tmp_path / "u.txt"
    assert main(["unicity", "--bitflip", "2", "4", "--out", str(out)]) == EXIT_OK
    assert float(out.read_text()) > 0
    assert main(["unicity", "--key-entropy", "8", "--redundancy", "0"]) == EXIT_DATA


def test_evolve(tmp_path):
    out, csv = tmp_path / "key.txt", tmp_path / "fitness.csv"
    argv = ["evolve", "--n", "2", "--l", "4", "--population", "6", "--generations", "3"]
    argv += ["--seed", "1", "--csv", str(csv), "--out", str(out)]
    assert main(argv) == EXIT_OK
    assert decoykit.parse_file(str(out)).n == 2
    rows = csv.read_text().splitlines()
    assert rows[0] == "generation,best_fitness"
    assert len(rows) == 4


def test_analyze(tmp_path):
    (tmp_path / "data.bin").write_bytes(RandomSource(42).bytes(12_500))
    out = tmp_path / "report.txt"
    assert main(["analyze", "--out", str(out), str(tmp_path / "data.bin")]) == EXIT_OK
    names = [line.split()[0] for line in out.read_text().splitlines()]
    assert names == ["monobit", "runs", "chi_square_bytes"]


def test_analyze_marks_skipped_tests_not_applicable(tmp_path):
    (tmp_path / "data.bin").write_bytes(RandomSource(42).bytes(1000))
    out = tmp_path / "report.txt"
    assert main(["analyze", "--out", str(out), str(tmp_path / "data.bin")]) == EXIT_OK
    verdicts = {line.split()[0]: line.split()[-1] for line in out.read_text().splitlines()}
    assert verdicts["chi_square_bytes"] == "n/a"
    assert verdicts["monobit"] in ("True", "False")


def test_analyze_too_little_data(tmp_path):
    (tmp_path / "data.bin").write_bytes(b"abc")
    assert main(["analyze", "--out", str(tmp_path / "r"), str(tmp_path / "data.bin")]) == EXIT_DATA


def test_distinguish(workdir):
    out = workdir / "adv.txt"
    argv = ["distinguish", "--key", str(workdir / "bitflip.txt"), "--msg-a", "ab"]
    argv += ["--msg-b", "ba", "--trials", "20", "--mode", "degenerate", "--seed", "1"]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    trials, correct, advantage = out.read_text().split()
    assert trials == "20"
    assert 0 <= int(correct) <= 20
    assert 0.0 <= float(advantage) <= 1.0
