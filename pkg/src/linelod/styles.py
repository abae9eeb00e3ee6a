"""Line style profiles: color ramps across the half-width of a line, with a
nine-level averaged pyramid so minified lines sample a prefiltered profile.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .geometry import LineType

BASE_RESOLUTION = 256  # samples across the half-profile at level 0
NUM_LEVELS = 9  # 256 is 2^8, so nine levels down to a single sample

LEVEL_SIZES = [BASE_RESOLUTION >> lvl for lvl in range(NUM_LEVELS)]
LEVEL_OFFSETS = list(np.cumsum([0] + LEVEL_SIZES[:-1]))
TEX_ROWS = sum(LEVEL_SIZES)  # 511


@dataclass
class StyleProfile:
    """Piecewise-linear RGBA stops over u in [0, 1] plus the mip pyramid."""

    id: int
    stops: List[Tuple[float, Tuple[float, float, float, float]]]
    levels: List[np.ndarray] = None  # filled by build()

    def build(self) -> "StyleProfile":
        stops = sorted(self.stops)
        if not stops or stops[0][0] > 0.0 or stops[-1][0] < 1.0:
            raise ValueError("style stops must cover u in [0, 1]")
        us = np.array([s[0] for s in stops])
        cols = np.array([s[1] for s in stops], dtype=np.float64)
        u = (np.arange(BASE_RESOLUTION) + 0.5) / BASE_RESOLUTION
        level0 = np.empty((BASE_RESOLUTION, 4))
        for c in range(4):
            level0[:, c] = np.interp(u, us, cols[:, c])
        self.levels = [level0]
        for _ in range(NUM_LEVELS - 1):
            prev = self.levels[-1]
            self.levels.append((prev[0::2] + prev[1::2]) / 2.0)
        return self


def select_level(texels_per_pixel: float) -> int:
    """Mip level for a given minification ratio, clamped to the pyramid."""
    if texels_per_pixel <= 1.0:
        return 0
    lvl = int(np.floor(np.log2(texels_per_pixel)))
    return min(max(lvl, 0), NUM_LEVELS - 1)


def sample_level(level: np.ndarray, u: float) -> np.ndarray:
    n = len(level)
    if n == 1:
        return level[0]
    x = u * (n - 1)
    i0 = int(x)
    if i0 >= n - 1:
        return level[n - 1]
    f = x - i0
    return (1.0 - f) * level[i0] + f * level[i0 + 1]


def sample_style(profile: StyleProfile, u: float, texels_per_pixel: float) -> np.ndarray:
    """RGBA at normalized distance ``u`` from the line axis."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    return sample_level(profile.levels[select_level(texels_per_pixel)], u)


def pack_styles(profiles: Sequence[StyleProfile]) -> np.ndarray:
    """Dense (n_styles, 511, 4) texture: all pyramid levels concatenated."""
    by_id = {p.id: p for p in profiles}
    n = max(by_id) + 1 if by_id else 1
    tex = np.zeros((n, TEX_ROWS, 4), dtype=np.float64)
    for pid, p in by_id.items():
        for lvl, arr in enumerate(p.levels):
            off = LEVEL_OFFSETS[lvl]
            tex[pid, off : off + len(arr)] = arr
    return tex


def default_style_config() -> dict:
    """Built-in style set: solid core with darker outline, three widths."""
    return {
        "line_types": [
            {
                "id": 0,
                "name": "minor",
                "priority": 0,
                "base_width": 8.0,
                "m_near": 1.0,
                "m_far": 0.5,
                "d_near": 100.0,
                "d_far": 2000.0,
                "style": 0,
            },
            {
                "id": 1,
                "name": "major",
                "priority": 1,
                "base_width": 14.0,
                "m_near": 1.0,
                "m_far": 1.5,
                "d_near": 100.0,
                "d_far": 2000.0,
                "style": 1,
            },
            {
                "id": 2,
                "name": "highway",
                "priority": 2,
                "base_width": 20.0,
                "m_near": 1.0,
                "m_far": 2.5,
                "d_near": 100.0,
                "d_far": 2000.0,
                "style": 2,
            },
        ],
        "styles": [
            {
                "id": 0,
                "stops": [
                    {"u": 0.0, "rgba": [0.85, 0.85, 0.85, 1.0]},
                    {"u": 0.7, "rgba": [0.85, 0.85, 0.85, 1.0]},
                    {"u": 0.75, "rgba": [0.35, 0.35, 0.35, 1.0]},
                    {"u": 1.0, "rgba": [0.35, 0.35, 0.35, 1.0]},
                ],
            },
            {
                "id": 1,
                "stops": [
                    {"u": 0.0, "rgba": [1.0, 0.85, 0.3, 1.0]},
                    {"u": 0.7, "rgba": [1.0, 0.85, 0.3, 1.0]},
                    {"u": 0.75, "rgba": [0.4, 0.25, 0.05, 1.0]},
                    {"u": 1.0, "rgba": [0.4, 0.25, 0.05, 1.0]},
                ],
            },
            {
                "id": 2,
                "stops": [
                    {"u": 0.0, "rgba": [0.95, 0.5, 0.2, 1.0]},
                    {"u": 0.7, "rgba": [0.95, 0.5, 0.2, 1.0]},
                    {"u": 0.75, "rgba": [0.5, 0.15, 0.05, 1.0]},
                    {"u": 1.0, "rgba": [0.5, 0.15, 0.05, 1.0]},
                ],
            },
        ],
    }


def parse_style_config(cfg: dict):
    """Parse a style config dict into line types and built profiles."""
    line_types: Dict[int, LineType] = {}
    for lt in cfg.get("line_types", []):
        line_types[int(lt["id"])] = LineType(
            id=int(lt["id"]),
            priority=int(lt.get("priority", 0)),
            base_width=float(lt.get("base_width", 10.0)),
            style_profile_id=int(lt.get("style", 0)),
            m_near=float(lt.get("m_near", 1.0)),
            m_far=float(lt.get("m_far", 1.0)),
            d_near=float(lt.get("d_near", 0.0)),
            d_far=float(lt.get("d_far", 1.0)),
            name=str(lt.get("name", "")),
        )
    profiles: Dict[int, StyleProfile] = {}
    ids = set()
    for s in cfg.get("styles", []):
        sid = int(s["id"])
        if sid in ids:
            raise ValueError(f"duplicate style id {sid}")
        ids.add(sid)
        stops = [(float(st["u"]), tuple(float(c) for c in st["rgba"])) for st in s["stops"]]
        profiles[sid] = StyleProfile(id=sid, stops=stops).build()
    return line_types, profiles
