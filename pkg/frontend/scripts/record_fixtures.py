#!/usr/bin/env python3
"""Record /meta and /query exchanges for the viewer's replay tests.

Builds a deterministic scene, runs the real HTTP service in-process, and
replays a scripted interaction sequence, saving each request/response pair.
The TypeScript tests assert that the viewer produces byte-identical request
bodies from the same states and draws exactly the recorded responses.

Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""
from __future__ import annotations

import json
import math
import os
import random
import sys

from fastapi.testclient import TestClient

from linelod.geometry import SourcePolyline
from linelod.pipeline import preprocess_scene
from linelod.service import create_app
from linelod.styles import default_style_config

FOV_Y = math.pi / 3
NORTH_UP_YAW = math.pi / 2
VIEW_W, VIEW_H = 960, 640
OUT = os.path.join(os.path.dirname(__file__), "..", "test", "fixtures", "session.json")


def build_scene():
    rng = random.Random(42)
    lines = []
    for _ in range(25):
        x, y = rng.uniform(-120, 120), rng.uniform(-120, 120)
        heading = rng.uniform(0, 2 * math.pi)
        pts = [(x, y)]
        for _ in range(rng.randint(5, 12)):
            heading += rng.uniform(-0.6, 0.6)
            step = rng.uniform(4, 18)
            x += step * math.cos(heading)
            y += step * math.sin(heading)
            pts.append((x, y))
        lines.append(SourcePolyline(points=tuple(pts), line_type=rng.randint(0, 2)))
    return preprocess_scene(lines, style_config=default_style_config())


def body_for_state(state: dict) -> dict:
    """Mirror of queryBodyForState in frontend/src/state.ts."""
    zoom = state["zoom"]
    body = {
        "camera": {
            "x": state["centerX"],
            "y": state["centerY"],
            "height": VIEW_H / (2 * zoom * math.tan(FOV_Y / 2)),
            "yaw": NORTH_UP_YAW,
            "pitch": math.pi / 2 - state["tilt"],
            "fovY": FOV_Y,
            "viewportW": VIEW_W,
            "viewportH": VIEW_H,
        },
        "tolerancePx": state["tolerancePx"],
    }
    lens = state["lens"]
    if lens["enabled"]:
        body["lens"] = {
            "cx": lens["cx"],
            "cy": lens["cy"],
            "radius": lens["radius"],
            "factor": lens["factor"],
        }
    return body


def viewer_state(center=(0.0, 0.0), zoom=2.0, tilt=0.0, tol=1.0, lens=None) -> dict:
    return {
        "centerX": center[0],
        "centerY": center[1],
        "zoom": zoom,
        "tilt": tilt,
        "tolerancePx": tol,
        "lens": lens or {"enabled": False, "cx": 0, "cy": 0, "radius": 30, "factor": 0.2},
        "showStats": True,
        "showDiff": False,
    }


def main() -> int:
    prep = build_scene()
    client = TestClient(create_app(prep.dataset))
    meta = client.get("/meta").json()

    lens_at = {"enabled": True, "cx": 0.0, "cy": 0.0, "radius": 40.0, "factor": 0.2}
    interactions = [
        ("baseline", viewer_state(tol=3.0)),
        ("refine_lens", viewer_state(tol=3.0, lens=dict(lens_at))),
        ("simplify_lens", viewer_state(tol=3.0, lens=dict(lens_at, factor=5.0))),
        ("full_detail", viewer_state(tol=0.0)),
        ("tilted", viewer_state(tol=2.0, tilt=0.8)),
        ("zoom_out", viewer_state(zoom=1.5, tol=1.0)),
        ("zoom_in", viewer_state(zoom=6.0, tol=1.0)),
    ]
    records = []
    for name, state in interactions:
        body = body_for_state(state)
        res = client.post("/query", json=body)
        res.raise_for_status()
        records.append(
            {"name": name, "state": state, "request": body, "response": res.json()}
        )

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as fh:
        json.dump({"viewportW": VIEW_W, "viewportH": VIEW_H, "meta": meta,
                   "interactions": records}, fh, indent=1)
    print(f"wrote {os.path.relpath(OUT)} with {len(records)} interactions")
    return 0


if __name__ == "__main__":
    sys.exit(main())
