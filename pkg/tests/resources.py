import os
from typing import List

import pytest

from decoykit.bitflip import BitFlipAlphabet
from decoykit.bitmap import MapKey
from decoykit.bitmap import Vertex

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")

# Two letters at Hamming radius 1 around complementary centers: 4 transmitters each.
SMALL_ALPHABET = BitFlipAlphabet.from_pairs(4, [("a", "0000", 1), ("b", "1111", 1)])

# Every radius-2 token of one center is also a radius-2 token of the other.
AMBIGUOUS_ALPHABET = BitFlipAlphabet.from_pairs(4, [("a", "0000", 2), ("b", "1111", 2)])

SINGLETON_ALPHABET = BitFlipAlphabet.from_pairs(1, [("a", "0", 0)])

# 70 transmitters per letter, and both transmitter sets have bit mean 0.5 everywhere.
BALANCED_ALPHABET = BitFlipAlphabet.from_pairs(
    8, [("a", "00000000", 4), ("b", "00000001", 4)]
)

SEEDS: List[pytest.param] = [
    pytest.param(seed, id=f"seed_{seed}") for seed in (0, 1, 7, 42, 2023)
]

DECOY_CANDIDATES = ["Hi John", "Are you going", "to the movie"]


def triangle_map() -> MapKey:
    """Junction ``O`` leads to the three stations; every station has one road to each station."""
    vertices = [
        Vertex("O"),
        Vertex("A", "a"),
        Vertex("B", "b"),
        Vertex("S", "."),
    ]
    edges = [
        ("O", "p", "A"),
        ("O", "q", "B"),
        ("O", "r", "S"),
        ("A", "p", "B"),
        ("A", "q", "S"),
        ("B", "p", "A"),
        ("B", "q", "S"),
        ("S", "p", "A"),
        ("S", "q", "B"),
        ("A", "r", "A"),
        ("B", "r", "B"),
        ("S", "r", "S"),
    ]
    return MapKey(vertices, edges, "O")


def hub_map(symbols: str, separator: str = ".") -> MapKey:
    """One junction hub with a road per symbol, and a road back from every station."""
    vertices = [Vertex("hub")]
    edges = []
    for k, symbol in enumerate(symbols + separator):
        vertex_id = f"st{k}"
        vertices.append(Vertex(vertex_id, symbol))
        edges.append(("hub", f"x{k}", vertex_id))
        edges.append((vertex_id, "back", "hub"))
    return MapKey(vertices, edges, "hub", separator)
