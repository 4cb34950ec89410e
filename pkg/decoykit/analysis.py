"""The adversary's bench.

Statistical randomness tests, token frequency analysis, a distinguishing
game against BitFlip encodings and a Monte Carlo check of the packet
forgery bound.
"""

import logging
import math
from collections import Counter
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
from scipy.special import erfc
from scipy.special import gammaincc

from .bitflip import MODES
from .bitflip import BitFlipAlphabet
from .bitflip import encode_message
from .bitstring import BitString
from .bitstring import RandomSource
from .exceptions import InsufficientSampleException
from .exceptions import ParameterException
from .packet import Packet
from .packet import forgery_probability
from .packet import generate_key
from .winnow import winnow

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.001
MIN_TEST_BITS = 100
RUNS_GATE = (0.4, 0.6)
TRAINING_SETS = 200


class TestResult:
    """Outcome of one statistical test; ``passed`` is ``p_value >= alpha``.

    A test whose precondition on the input does not hold reports
    ``applicable=False``; its ``passed`` is ``None`` and it prints ``n/a``.
    """

    # Keep pytest from collecting this class.
    __test__ = False

    def __init__(
        self, name: str, statistic: float, p_value: float, alpha: float, applicable: bool = True
    ):
        self.name = name
        self.statistic = float(statistic)
        self.p_value = min(1.0, max(0.0, float(p_value)))
        self.alpha = alpha
        self.applicable = applicable

    @property
    def passed(self) -> Optional[bool]:
        if not self.applicable:
            return None
        return self.p_value >= self.alpha

    def __str__(self):
        verdict = "n/a" if self.passed is None else self.passed
        return f"{self.name} {self.statistic:.6f} {self.p_value:.6f} {verdict}"

    def __repr__(self):
        return (
            f"TestResult(name={self.name!r}, statistic={self.statistic}, "
            f"p_value={self.p_value}, passed={self.passed})"
        )


class AdvantageReport:
    """Correct guesses of the distinguisher out of ``trials``."""

    def __init__(self, trials: int, correct: int):
        if not 0 <= correct <= trials:
            raise ParameterException(f"correct={correct} out of range for {trials} trials")
        self.trials = trials
        self.correct = correct

    @property
    def advantage(self) -> float:
        """``2 * correct / trials - 1``, clamped at 0."""
        if self.trials == 0:
            return 0.0
        return max(0.0, 2.0 * self.correct / self.trials - 1.0)

    def __str__(self):
        return f"{self.trials} {self.correct} {self.advantage:.6f}"

    def __repr__(self):
        return (
            f"AdvantageReport(trials={self.trials}, correct={self.correct}, "
            f"advantage={self.advantage})"
        )


class FrequencyReport:
    def __init__(self, histogram: Dict[BitString, int], repeat_index: float):
        self.histogram = histogram
        self.repeat_index = repeat_index

    def __repr__(self):
        return (
            f"FrequencyReport({len(self.histogram)} distinct tokens, "
            f"repeat_index={self.repeat_index})"
        )


class ForgeryReport:
    """Accepted random-tag packets versus the expectation ``packets * 2**-tau``."""

    def __init__(self, tau: int, packets: int, accepted: int):
        self.tau = tau
        self.packets = packets
        self.accepted = accepted

    @property
    def expected(self) -> float:
        return self.packets * forgery_probability(self.tau)

    @property
    def sigma(self) -> float:
        p = forgery_probability(self.tau)
        return math.sqrt(self.packets * p * (1.0 - p))

    @property
    def rate(self) -> float:
        return self.accepted / self.packets if self.packets else 0.0

    @property
    def within_bound(self) -> bool:
        """True iff the accepted count lies within three sigma of the expectation."""
        return abs(self.accepted - self.expected) <= 3.0 * self.sigma

    @staticmethod
    def extrapolate(tau: int) -> float:
        return forgery_probability(tau)

    def __repr__(self):
        return (
            f"ForgeryReport(tau={self.tau}, packets={self.packets}, accepted={self.accepted}, "
            f"expected={self.expected:.3f})"
        )


def _bit_array(bits: BitString) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes(), dtype=np.uint8)
    return np.unpackbits(raw)[: bits.length]


def _require_length(test: str, bits: BitString):
    if bits.length < MIN_TEST_BITS:
        raise InsufficientSampleException(test, MIN_TEST_BITS, bits.length)


def monobit_test(bits: BitString, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Frequency test: is the number of ones compatible with a fair coin?"""
    _require_length("monobit", bits)
    n = bits.length
    s = 2 * bits.popcount() - n
    s_obs = abs(s) / math.sqrt(n)
    return TestResult("monobit", s_obs, erfc(s_obs / math.sqrt(2)), alpha)


def runs_test(bits: BitString, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Runs test: are the runs of equal bits as long as a fair coin's?

    Only applicable if the proportion of ones lies in ``[0.4, 0.6]``.
    """
    _require_length("runs", bits)
    arr = _bit_array(bits)
    n = arr.size
    pi = np.count_nonzero(arr) / n
    runs = int(np.count_nonzero(np.diff(arr))) + 1
    if not RUNS_GATE[0] <= pi <= RUNS_GATE[1]:
        return TestResult("runs", runs, 0.0, alpha, applicable=False)
    p_value = erfc(abs(runs - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi)))
    return TestResult("runs", runs, p_value, alpha)


def chi_square_uniformity(
    observed: Sequence[int], alpha: float = DEFAULT_ALPHA, name: str = "chi_square"
) -> TestResult:
    """Goodness of fit of ``observed`` counts against the uniform distribution
    over ``len(observed)`` buckets."""
    counts = np.asarray(observed, dtype=float)
    k = counts.size
    total = counts.sum()
    if k < 1 or total < 5 * k:
        raise InsufficientSampleException(name, 5 * max(k, 1), int(total))
    expected = total / k
    statistic = float(((counts - expected) ** 2 / expected).sum())
    p_value = 1.0 if k == 1 else float(gammaincc((k - 1) / 2.0, statistic / 2.0))
    return TestResult(name, statistic, p_value, alpha)


def battery(bits: BitString, alpha: float = DEFAULT_ALPHA) -> List[TestResult]:
    """Monobit, runs and chi-square over byte values.

    The chi-square test is reported not applicable if there are fewer than
    ``5 * 256`` whole bytes.
    """
    results = [monobit_test(bits, alpha), runs_test(bits, alpha)]
    n_bytes = bits.length // 8
    if n_bytes < 5 * 256:
        results.append(TestResult("chi_square_bytes", 0.0, 0.0, alpha, applicable=False))
    else:
        data = BitString(bits.value >> (bits.length - 8 * n_bytes), 8 * n_bytes).to_bytes()
        counts = np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=256)
        results.append(chi_square_uniformity(counts, alpha, name="chi_square_bytes"))
    return results


def frequency_analysis(tokens: Sequence[BitString]) -> FrequencyReport:
    """Token histogram, and the fraction of adjacent token pairs that are equal."""
    histogram = dict(Counter(tokens))
    if len(tokens) < 2:
        return FrequencyReport(histogram, 0.0)
    repeats = sum(1 for a, b in zip(tokens, tokens[1:]) if a == b)
    return FrequencyReport(histogram, repeats / (len(tokens) - 1))


def repeat_statistic(
    alphabet: BitFlipAlphabet, symbol: str, trials: int, mode: str, rng: RandomSource
) -> float:
    """Repeat index of ``trials`` consecutive encodings of one symbol."""
    tokens = encode_message(alphabet, symbol * trials, 0.0, mode, rng)
    return frequency_analysis(tokens).repeat_index


def _features(
    alphabet: BitFlipAlphabet, msg: str, samples: int, mode: str, rng: RandomSource
) -> np.ndarray:
    """Mean bit value at every (token, bit) position over ``samples`` encodings."""
    rows = []
    for _ in range(samples):
        tokens = encode_message(alphabet, msg, 0.0, mode, rng)
        rows.append(np.concatenate([_bit_array(t) for t in tokens]).astype(float))
    return np.mean(rows, axis=0)


def distinguisher_experiment(
    alphabet: BitFlipAlphabet,
    msg_a: str,
    msg_b: str,
    samples_per_trial: int,
    trials: int,
    mode: str,
    rng: RandomSource,
    training_sets: int = TRAINING_SETS,
) -> AdvantageReport:
    """Play the distinguishing game ``trials`` times.

    The adversary knows the alphabet. It is a nearest-centroid classifier
    over per-position bit frequencies, trained on ``training_sets`` labeled
    encodings of each message drawn from an independent generator. In each
    trial a fair coin picks one message, which is encoded
    ``samples_per_trial`` times; the adversary guesses which one it was.
    Trial ``i`` uses the generator ``rng.spawn(i + 1)``.
    """
    if msg_a == msg_b:
        raise ParameterException("the two messages must differ")
    if len(msg_a) != len(msg_b) or not msg_a:
        raise ParameterException("the messages must be non-empty and of equal length")
    if samples_per_trial < 1 or trials < 1 or training_sets < 1:
        raise ParameterException("samples, trials and training sets must be positive")
    if mode not in MODES:
        raise ParameterException(f"unknown encoding mode {mode!r}, expected one of {MODES}")

    training_rng = rng.spawn(trials + 1)
    centroids = []
    for msg in (msg_a, msg_b):
        sets = [
            _features(alphabet, msg, samples_per_trial, mode, training_rng)
            for _ in range(training_sets)
        ]
        centroids.append(np.mean(sets, axis=0))

    correct = 0
    for trial in range(trials):
        trial_rng = rng.spawn(trial + 1)
        secret = trial_rng.index(2)
        observed = _features(
            alphabet, (msg_a, msg_b)[secret], samples_per_trial, mode, trial_rng
        )
        distances = [float(np.linalg.norm(observed - c)) for c in centroids]
        if distances[0] == distances[1]:
            guess = trial_rng.index(2)
        else:
            guess = int(np.argmin(distances))
        correct += int(guess == secret)

    report = AdvantageReport(trials, correct)
    logger.info(f"Distinguisher in {mode} mode: {report}")
    return report


def forgery_experiment(
    tau: int, packets: int, rng: RandomSource, payload: bytes = b"chaff"
) -> ForgeryReport:
    """Winnow a stream of packets with uniformly random tags and count how
    many the receiver keeps."""
    if packets < 1:
        raise ParameterException(f"packets must be positive, got {packets}")
    key = generate_key(rng, tau)
    size = key.tag_bytes
    tags = rng.bytes(size * packets)
    stream = (
        Packet(serial, payload, tags[(serial - 1) * size : serial * size])
        for serial in range(1, packets + 1)
    )
    report = ForgeryReport(tau, packets, winnow(key, stream).report.kept)
    logger.info(f"Forgery experiment: {report}")
    return report
