import math
import random

import pytest

from linelod.geometry import SourcePolyline


ZIGZAG8 = SourcePolyline(
    points=((0, 0), (1, 3), (2, -1), (4, 4), (5, 1), (6, 5), (7, 2), (8, 0))
)


@pytest.fixture
def zigzag8():
    return ZIGZAG8


def random_polyline(rng: random.Random, k=None, span=100.0, line_type=0) -> SourcePolyline:
    k = k or rng.randint(2, 20)
    pts = []
    x, y = rng.uniform(-span, span), rng.uniform(-span, span)
    for _ in range(k):
        pts.append((x, y))
        x += rng.uniform(0.5, span / 5)
        y += rng.uniform(-span / 5, span / 5)
    return SourcePolyline(points=tuple(pts), line_type=line_type)


def random_scene(rng: random.Random, n_lines=5, k_max=15, span=200.0):
    lines = []
    for _ in range(n_lines):
        lines.append(random_polyline(rng, k=rng.randint(2, k_max), span=span))
    return lines
