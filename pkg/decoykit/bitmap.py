"""The BitMap cipher: plaintext as a walk over a secret map.

A map has *stations*, which carry an alphabet symbol, and *junctions*, which
carry none. Roads are labeled, and the roads leaving a vertex have distinct
labels, so a label sequence is a deterministic walk from the start vertex.
The walk emits the symbol of every station it arrives at.

To send a symbol, the encoder picks one of the road sequences that lead from
the current vertex to a station with that symbol, through junctions only.
Repeated adjacent symbols are broken up by a separator symbol beforehand.
"""

import base64
import binascii
import logging
import string
from collections import deque
from typing import Dict
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import Set
from typing import Tuple

from .bitstring import RandomSource
from .exceptions import FormatException
from .exceptions import InconsistentDecoyException
from .exceptions import InternalStateException
from .exceptions import LengthMismatchException
from .exceptions import NoPathException
from .exceptions import ParameterException
from .exceptions import SearchFailedException
from .exceptions import SeparatorPresentException
from .exceptions import UndefinedTransitionException
from .exceptions import UnknownSymbolException
from .exceptions import VerificationException

logger = logging.getLogger(__name__)

BASE64_SYMBOLS = string.ascii_uppercase + string.ascii_lowercase + string.digits + "+/"
DEFAULT_SEPARATOR = "."
DEFAULT_L_MAX_PATH = 8
GENERATION_ATTEMPTS = 10_000

# A candidate path: the road labels, and the station it ends at.
Path = Tuple[Tuple[str, ...], str]


def _check_token(kind: str, token: str):
    if not token or any(c.isspace() for c in token):
        raise ParameterException(f"{kind} must be non-empty without whitespace, got {token!r}")


class Vertex:
    """A station (``symbol`` set) or a junction (``symbol`` is ``None``)."""

    def __init__(self, vertex_id: str, symbol: Optional[str] = None):
        _check_token("vertex id", vertex_id)
        if symbol is not None and (len(symbol) != 1 or symbol.isspace()):
            raise ParameterException(
                f"station symbol must be one non-whitespace character, got {symbol!r}"
            )
        self._id = vertex_id
        self._symbol = symbol

    @property
    def id(self) -> str:
        return self._id

    @property
    def symbol(self) -> Optional[str]:
        return self._symbol

    @property
    def is_station(self) -> bool:
        return self._symbol is not None

    def __eq__(self, other):
        return isinstance(other, Vertex) and (self._id, self._symbol) == (other._id, other._symbol)

    def __hash__(self):
        return hash((self._id, self._symbol))

    def __repr__(self):
        if self.is_station:
            return f"Vertex({self._id!r}, station {self._symbol!r})"
        return f"Vertex({self._id!r}, junction)"


class MapKey:
    """The BitMap key: vertices, labeled roads, a start vertex and the separator.

    Construction enforces referential integrity and determinism (distinct
    labels per vertex). Symbol coverage and reachability are checked by
    :func:`check_key`, since forged maps may deliberately give them up.
    """

    def __init__(
        self,
        vertices: Sequence[Vertex],
        edges: Sequence[Tuple[str, str, str]],
        start: str,
        separator: str = DEFAULT_SEPARATOR,
        alphabet: Optional[Sequence[str]] = None,
    ):
        if len(separator) != 1 or separator.isspace():
            raise ParameterException(f"separator must be one visible character, got {separator!r}")
        self._vertices: Dict[str, Vertex] = {}
        for v in vertices:
            if v.id in self._vertices:
                raise ParameterException(f"duplicate vertex id `{v.id}`")
            self._vertices[v.id] = v
        if start not in self._vertices:
            raise ParameterException(f"start vertex `{start}` is not a vertex of the map")

        self._transitions: Dict[Tuple[str, str], str] = {}
        self._out: Dict[str, List[Tuple[str, str]]] = {vid: [] for vid in self._vertices}
        for source, label, target in edges:
            _check_token("road label", label)
            for vid in (source, target):
                if vid not in self._vertices:
                    raise ParameterException(f"road `{label}` uses unknown vertex `{vid}`")
            if (source, label) in self._transitions:
                raise ParameterException(f"vertex `{source}` has two roads labeled `{label}`")
            self._transitions[(source, label)] = target
            self._out[source].append((label, target))
        for out in self._out.values():
            out.sort()

        self._start = start
        self._separator = separator
        if alphabet is None:
            alphabet = {v.symbol for v in self._vertices.values() if v.is_station}
            alphabet.add(separator)
        self._alphabet: Tuple[str, ...] = tuple(sorted(set(alphabet)))
        self._paths_cache: Dict[Tuple[str, str, int], List[Path]] = {}

    @property
    def vertices(self) -> Dict[str, Vertex]:
        return dict(self._vertices)

    @property
    def stations(self) -> List[Vertex]:
        return [v for v in self._vertices.values() if v.is_station]

    @property
    def edges(self) -> List[Tuple[str, str, str]]:
        """All roads as ``(from, label, to)``, sorted."""
        return sorted((s, label, t) for (s, label), t in self._transitions.items())

    @property
    def start(self) -> str:
        return self._start

    @property
    def separator(self) -> str:
        return self._separator

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return self._alphabet

    def vertex(self, vertex_id: str) -> Vertex:
        return self._vertices[vertex_id]

    def successor(self, vertex: str, label: str) -> Optional[str]:
        return self._transitions.get((vertex, label))

    def out_edges(self, vertex: str) -> List[Tuple[str, str]]:
        """``(label, to)`` pairs of the roads leaving ``vertex``, sorted by label."""
        return list(self._out[vertex])

    def with_symbols(self, symbols: Mapping[str, str]) -> "MapKey":
        """A copy with some station symbols reassigned; roads stay untouched."""
        vertices = []
        for v in self._vertices.values():
            if v.id in symbols:
                if not v.is_station:
                    raise ParameterException(f"`{v.id}` is a junction and carries no symbol")
                vertices.append(Vertex(v.id, symbols[v.id]))
            else:
                vertices.append(v)
        alphabet = set(self._alphabet) | set(symbols.values())
        return MapKey(vertices, self.edges, self._start, self._separator, alphabet)

    def candidate_paths(self, origin: str, symbol: str, l_max: int) -> List[Path]:
        """All acyclic road sequences of length <= ``l_max`` from ``origin`` to a
        station carrying ``symbol`` whose intermediate vertices are junctions."""
        key = (origin, symbol, l_max)
        if key not in self._paths_cache:
            self._paths_cache[key] = self._enumerate_paths(origin, symbol, l_max)
        return self._paths_cache[key]

    def _enumerate_paths(self, origin: str, symbol: str, l_max: int) -> List[Path]:
        found: List[Path] = []
        stack: List[Tuple[str, Tuple[str, ...], frozenset]] = [(origin, (), frozenset([origin]))]
        while stack:
            vertex, labels, visited = stack.pop()
            for label, target in self._out[vertex]:
                path = labels + (label,)
                target_vertex = self._vertices[target]
                if target_vertex.is_station:
                    if target_vertex.symbol == symbol:
                        found.append((path, target))
                elif target not in visited and len(path) < l_max:
                    stack.append((target, path, visited | {target}))
        found.sort()
        return found

    def __eq__(self, other):
        return (
            isinstance(other, MapKey)
            and self._vertices == other._vertices
            and self._transitions == other._transitions
            and self._start == other._start
            and self._separator == other._separator
            and self._alphabet == other._alphabet
        )

    def __str__(self):
        return (
            f"MapKey (start: `{self._start}`, separator: `{self._separator}`, "
            f"{len(self.stations)} stations, {len(self._vertices) - len(self.stations)} "
            f"junctions, {len(self._transitions)} roads)"
        )

    def __repr__(self):
        return (
            f"MapKey(vertices={list(self._vertices.values())!r}, edges={self.edges!r}, "
            f"start={self._start!r}, separator={self._separator!r})"
        )


def normalize_plaintext(msg: str, separator: str = DEFAULT_SEPARATOR) -> str:
    """Insert the separator between equal adjacent symbols."""
    out: List[str] = []
    for position, symbol in enumerate(msg):
        if symbol == separator:
            raise SeparatorPresentException(separator, position)
        if out and out[-1] == symbol:
            out.append(separator)
        out.append(symbol)
    return "".join(out)


def denormalize(msg: str, separator: str = DEFAULT_SEPARATOR) -> str:
    """Remove all separators."""
    return msg.replace(separator, "")


def reachable_symbols(key: MapKey, origin: str, l_max: Optional[int] = None) -> Set[str]:
    """Symbols of the stations reachable from ``origin`` through junctions only,
    within ``l_max`` roads (unbounded if ``None``)."""
    found: Set[str] = set()
    seen = {origin}
    frontier = deque([(origin, 0)])
    while frontier:
        vertex, depth = frontier.popleft()
        if l_max is not None and depth >= l_max:
            continue
        for _, target in key.out_edges(vertex):
            target_vertex = key.vertex(target)
            if target_vertex.is_station:
                found.add(target_vertex.symbol)
            elif target not in seen:
                seen.add(target)
                frontier.append((target, depth + 1))
    return found


def check_key(key: MapKey, l_max: Optional[int] = None) -> List[str]:
    """All violated key invariants: symbol coverage and (bounded) reachability.

    An empty list means the key is valid. Determinism is enforced on
    construction and cannot be violated."""
    problems = []
    carried = {v.symbol for v in key.stations}
    if key.separator not in key.alphabet:
        problems.append(f"separator {key.separator!r} is not part of the alphabet")
    for symbol in key.alphabet:
        if symbol not in carried:
            problems.append(f"no station carries symbol {symbol!r}")
    origins = [key.start] + sorted(v.id for v in key.stations if v.id != key.start)
    for origin in origins:
        missing = set(key.alphabet) - reachable_symbols(key, origin, l_max)
        if missing:
            bound = "" if l_max is None else f" within {l_max} roads"
            problems.append(f"from `{origin}`, symbols {sorted(missing)} are unreachable{bound}")
    return problems


def encode(
    key: MapKey, msg: str, rng: RandomSource, l_max: int = DEFAULT_L_MAX_PATH
) -> List[str]:
    """Encode a normalized message as a road-label sequence.

    Each symbol is reached by a path chosen uniformly among all candidate
    paths from the current vertex (see :meth:`MapKey.candidate_paths`)."""
    for position, symbol in enumerate(msg):
        if symbol not in key.alphabet:
            raise UnknownSymbolException(symbol, position)
        if position > 0 and msg[position - 1] == symbol:
            raise ParameterException(
                f"message is not normalized: repeated {symbol!r} at position {position}"
            )

    labels: List[str] = []
    current = key.start
    for symbol in msg:
        paths = key.candidate_paths(current, symbol, l_max)
        if not paths:
            raise NoPathException(current, symbol, l_max)
        segment, current = paths[rng.index(len(paths))]
        labels.extend(segment)
    return labels


def station_visits(key: MapKey, labels: Sequence[str]) -> List[str]:
    """Replay the walk; the ids of the stations arrived at, in order."""
    visits = []
    current = key.start
    for position, label in enumerate(labels):
        target = key.successor(current, label)
        if target is None:
            raise UndefinedTransitionException(position, current, label)
        if key.vertex(target).is_station:
            visits.append(target)
        current = target
    return visits


def decode(key: MapKey, labels: Sequence[str]) -> str:
    """Replay the walk from the start vertex and emit the symbol of each station."""
    return "".join(key.vertex(v).symbol for v in station_visits(key, labels))


def encode_bytes(
    key: MapKey, data: bytes, rng: RandomSource, l_max: int = DEFAULT_L_MAX_PATH
) -> List[str]:
    """Map bytes to Base64 payload symbols (padding dropped), normalize and encode."""
    text = base64.b64encode(data).decode("ascii").rstrip("=")
    return encode(key, normalize_plaintext(text, key.separator), rng, l_max)


def decode_bytes(key: MapKey, labels: Sequence[str]) -> bytes:
    """Inverse of :func:`encode_bytes`."""
    text = denormalize(decode(key, labels), key.separator)
    text += "=" * (-len(text) % 4)
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as e:
        raise FormatException(f"decoded walk is not a Base64 payload: {e}")


def forge_decoy_map(key: MapKey, labels: Sequence[str], decoy: str) -> MapKey:
    """A map under which ``labels`` decodes to the normalized ``decoy``.

    Only station symbols change. Forging fails if the decoy needs two
    different symbols on the same station."""
    visits = station_visits(key, labels)
    target = normalize_plaintext(decoy, key.separator)
    if len(target) != len(visits):
        raise LengthMismatchException(expected=len(visits), actual=len(target))

    assignment: Dict[str, str] = {}
    first_visit: Dict[str, int] = {}
    for position, (station, symbol) in enumerate(zip(visits, target)):
        if station in assignment and assignment[station] != symbol:
            raise InconsistentDecoyException(first_visit[station], position)
        assignment.setdefault(station, symbol)
        first_visit.setdefault(station, position)

    forged = key.with_symbols(assignment)
    if decode(forged, labels) != target:
        raise VerificationException([f"forged map does not decode to {target!r}"])
    logger.info(f"Forged decoy map: reassigned {len(assignment)} visited stations")
    return forged


def generate_map(
    n_symbols: int,
    n_stations: int,
    n_junctions: int,
    n_labels: int,
    rng: RandomSource,
    l_max: int = DEFAULT_L_MAX_PATH,
    symbols: Optional[str] = None,
    separator: str = DEFAULT_SEPARATOR,
    attempts: int = GENERATION_ATTEMPTS,
) -> MapKey:
    """A random valid map key.

    ``n_symbols`` counts the separator. Payload symbols default to the first
    ``n_symbols - 1`` Base64 characters. The map starts sparse; roads are then
    added (never removed) until every station and the start reach every
    symbol within ``l_max`` roads. If an origin runs out of free labels the
    construction restarts. Each added road and each restart counts as one
    attempt.
    """
    if n_symbols < 1 or n_stations < n_symbols:
        raise ParameterException(
            f"need n_stations >= n_symbols >= 1, got {n_stations} stations for {n_symbols} symbols"
        )
    if n_labels < 2 or n_junctions < 0 or l_max < 1:
        raise ParameterException("need n_labels >= 2, n_junctions >= 0 and l_max >= 1")
    if symbols is None:
        if n_symbols - 1 > len(BASE64_SYMBOLS):
            raise ParameterException(f"at most {len(BASE64_SYMBOLS) + 1} default symbols")
        symbols = BASE64_SYMBOLS[: n_symbols - 1]
    if len(symbols) != n_symbols - 1 or separator in symbols or len(set(symbols)) != len(symbols):
        raise ParameterException(
            f"need {n_symbols - 1} distinct payload symbols besides the separator"
        )
    alphabet = list(symbols) + [separator]
    labels = [f"r{k}" for k in range(n_labels)]
    station_ids = [f"s{k}" for k in range(n_stations)]
    junction_ids = [f"j{k}" for k in range(n_junctions)]

    used = 0
    while used < attempts:
        used += 1
        station_symbols = rng.shuffled(alphabet) + [
            rng.choice(alphabet) for _ in range(n_stations - n_symbols)
        ]
        stations_by_symbol: Dict[str, List[str]] = {x: [] for x in alphabet}
        for sid, x in zip(station_ids, station_symbols):
            stations_by_symbol[x].append(sid)
        vertices = [Vertex(sid, x) for sid, x in zip(station_ids, station_symbols)]
        vertices += [Vertex(jid) for jid in junction_ids]
        start = rng.choice(junction_ids) if junction_ids else rng.choice(station_ids)

        roads: Dict[str, Dict[str, str]] = {v.id: {} for v in vertices}

        def add_road(source: str, target: str):
            free = [label for label in labels if label not in roads[source]]
            roads[source][rng.choice(free)] = target

        # Sparse skeleton: a small junction mesh, every station hooked into it.
        for jid in junction_ids:
            others = [j for j in junction_ids if j != jid]
            for target in rng.sample(others, min(len(others), 2, n_labels - 1)):
                add_road(jid, target)
        if junction_ids:
            for sid in station_ids:
                add_road(sid, rng.choice(junction_ids))

        origins = [start] + [sid for sid in station_ids if sid != start]
        stuck = False
        for origin in origins:
            while used < attempts:
                key = _assemble(vertices, roads, start, separator, alphabet)
                missing = sorted(set(alphabet) - reachable_symbols(key, origin, l_max))
                if not missing:
                    break
                used += 1
                symbol = rng.choice(missing)
                hosts = _free_hosts(key, roads, origin, l_max, n_labels)
                if not hosts:
                    stuck = True
                    break
                add_road(rng.choice(hosts), rng.choice(stations_by_symbol[symbol]))
            if stuck:
                break
        if stuck:
            logger.debug(f"Map generation ran out of free labels; restarting ({used} attempts)")
            continue

        key = _assemble(vertices, roads, start, separator, alphabet)
        problems = check_key(key, l_max)
        if not problems:
            logger.info(f"Generated a map key in {used} attempts: {key}")
            return key
        if used < attempts:
            raise InternalStateException(f"generated map violates invariants: {problems}")

    raise SearchFailedException("map generation failed", attempts)


def _assemble(
    vertices: List[Vertex],
    roads: Dict[str, Dict[str, str]],
    start: str,
    separator: str,
    alphabet: List[str],
) -> MapKey:
    edges = [(s, label, t) for s, out in roads.items() for label, t in out.items()]
    return MapKey(vertices, edges, start, separator, alphabet)


def _free_hosts(
    key: MapKey, roads: Dict[str, Dict[str, str]], origin: str, l_max: int, n_labels: int
) -> List[str]:
    """Vertices that can take one more road and are reachable from ``origin`` through
    junctions in fewer than ``l_max`` roads: the origin first, else junctions."""
    if len(roads[origin]) < n_labels:
        return [origin]
    hosts = []
    seen = {origin}
    frontier = deque([(origin, 0)])
    while frontier:
        vertex, depth = frontier.popleft()
        for _, target in key.out_edges(vertex):
            if target in seen or key.vertex(target).is_station:
                continue
            seen.add(target)
            if depth + 1 < l_max:
                if len(roads[target]) < n_labels:
                    hosts.append(target)
                frontier.append((target, depth + 1))
    return sorted(hosts)
