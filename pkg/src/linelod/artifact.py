"""Geometry ingestion and the .lcx binary artifact format.

The artifact stores everything the runtime needs: point records with
pre-evaluated error/distance terms, attributed segments, proxy groups,
the spatial indexes, and the style table.  The layout is little-endian
and versioned; writing the same dataset always produces the same bytes.

Point error/distance values are narrowed to f32 with upward-directed
rounding so the stored terms stay conservative.
"""
from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .data import Dataset, Polyline, SegmentArrays
from .deps import ProxyPoint
from .geometry import GeometryError, LineType, SourcePolyline
from .sindex import SegmentIndex
from .styles import default_style_config, parse_style_config

MAGIC = b"LCX1"
VERSION = 1
NO_REF = 0xFFFFFFFF

_HEADER = struct.Struct("<4sIQQQQQII4dIIQ")
_POINT_DT = np.dtype([("x", "<f8"), ("y", "<f8"), ("e", "<f4"), ("d", "<f4")])
_SEG_DT = np.dtype([("a", "<u4"), ("b", "<u4"), ("spl", "<u4"), ("packed", "<u4")])
_PL_DT = np.dtype([("start", "<u4"), ("count", "<u4"), ("lt", "<u4")])


class ArtifactError(ValueError):
    pass


# ---------------------------------------------------------------------------
# ingestion


@dataclass
class IngestResult:
    polylines: List[SourcePolyline]
    warnings: List[str] = field(default_factory=list)


def _clean_coords(coords, warnings, label) -> Optional[Tuple[Tuple[float, float], ...]]:
    pts: List[Tuple[float, float]] = []
    for c in coords:
        if len(c) < 2:
            raise ArtifactError(f"{label}: coordinate with fewer than 2 values")
        x, y = float(c[0]), float(c[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ArtifactError(f"{label}: non-finite coordinate")
        if pts and pts[-1] == (x, y):
            continue  # collapse consecutive duplicates
        pts.append((x, y))
    if len(pts) < 2:
        warnings.append(f"{label}: dropped degenerate part (<2 distinct points)")
        return None
    return tuple(pts)


def ingest_geojson(source: Union[str, dict]) -> IngestResult:
    """Parse GeoJSON LineString/MultiLineString features into polylines.

    ``source`` is a file path or an already-parsed GeoJSON dict.  The
    feature property ``type`` selects the line type id (default 0).
    """
    if isinstance(source, dict):
        doc = source
    else:
        try:
            with open(source) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ArtifactError(f"cannot read GeoJSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArtifactError("GeoJSON root must be an object")

    if doc.get("type") == "FeatureCollection":
        features = doc.get("features", [])
    elif doc.get("type") == "Feature":
        features = [doc]
    else:
        features = [{"type": "Feature", "geometry": doc, "properties": {}}]

    out: List[SourcePolyline] = []
    warnings: List[str] = []
    for i, feat in enumerate(features):
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        props = feat.get("properties") or {}
        line_type = int(props.get("type", 0))
        label = f"feature {i}"
        if gtype == "LineString":
            parts = [geom.get("coordinates", [])]
        elif gtype == "MultiLineString":
            parts = geom.get("coordinates", [])
        else:
            warnings.append(f"{label}: skipped unsupported geometry {gtype!r}")
            continue
        for part in parts:
            pts = _clean_coords(part, warnings, label)
            if pts is not None:
                out.append(SourcePolyline(points=pts, line_type=line_type))
    return IngestResult(polylines=out, warnings=warnings)


# ---------------------------------------------------------------------------
# narrowing


def round_up_f32(values: np.ndarray) -> np.ndarray:
    """Narrow float64 to float32 rounding toward +infinity."""
    with np.errstate(over="ignore"):  # values beyond f32 range become +inf
        f = np.asarray(values, dtype=np.float64).astype(np.float32)
    low = f.astype(np.float64) < values
    f[low] = np.nextafter(f[low], np.float32(np.inf), dtype=np.float32)
    return f


# ---------------------------------------------------------------------------
# writing


def _pack_segments(segs: SegmentArrays) -> np.ndarray:
    n = len(segs)
    rec = np.zeros(n, dtype=_SEG_DT)
    rec["a"] = segs.a.astype(np.uint32)
    rec["b"] = segs.b.astype(np.uint32)
    spl = segs.splitter.astype(np.int64)
    rec["spl"] = np.where(spl < 0, NO_REF, spl).astype(np.uint32)
    gen = segs.generator.astype(np.int64)
    gen_none = gen < 0
    gen_is_b = (~gen_none) & (gen == segs.b)
    bad = (~gen_none) & (gen != segs.a) & (gen != segs.b)
    if bad.any():
        raise ArtifactError("generator must be one of the segment endpoints")
    lt = segs.line_type.astype(np.int64)
    if (lt < 0).any() or (lt > 255).any():
        raise ArtifactError("line type id must fit in 8 bits")
    rec["packed"] = (
        gen_is_b.astype(np.uint32)
        | (gen_none.astype(np.uint32) << 1)
        | (lt.astype(np.uint32) << 2)
    )
    return rec


def _style_blob(dataset: Dataset) -> bytes:
    cfg = dataset.style_config or {}
    styles = cfg.get("styles") or default_style_config()["styles"]
    line_types = [
        {
            "id": lt.id,
            "name": lt.name,
            "priority": lt.priority,
            "base_width": lt.base_width,
            "style": lt.style_profile_id,
            "m_near": lt.m_near,
            "m_far": lt.m_far,
            "d_near": lt.d_near,
            "d_far": lt.d_far,
        }
        for _, lt in sorted(dataset.line_types.items())
    ]
    blob = {"line_types": line_types, "styles": styles}
    return json.dumps(blob, sort_keys=True, separators=(",", ":")).encode()


def _write_index(fh, name: str, idx: SegmentIndex) -> None:
    nb = name.encode()
    fh.write(struct.pack("<B", len(nb)))
    fh.write(nb)
    node_count = len(idx.node_seg_cnt)
    fh.write(
        struct.pack(
            "<IIII4dQQ",
            idx.grid_w,
            idx.grid_h,
            idx.max_depth,
            idx.leaf_capacity,
            *idx.bbox,
            node_count,
            len(idx.seg_refs),
        )
    )
    fh.write(np.ascontiguousarray(idx.cell_root, dtype="<i8").tobytes())
    # address records: four child offsets per node
    fh.write(np.ascontiguousarray(idx.children, dtype="<i8").tobytes())
    # data records: length-prefixed segment id lists, in node order
    for i in range(node_count):
        cnt = int(idx.node_seg_cnt[i])
        off = int(idx.node_seg_off[i])
        fh.write(struct.pack("<I", cnt))
        fh.write(np.ascontiguousarray(idx.seg_refs[off : off + cnt], dtype="<i4").tobytes())


def write_artifact(dataset: Dataset, path: Optional[str] = None) -> bytes:
    """Serialize a dataset; returns the bytes (and writes ``path`` if given)."""
    fh = io.BytesIO()
    index_names = sorted(dataset.indexes)
    primary = dataset.indexes.get("ap_static")
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        len(dataset.points),
        len(dataset.segments),
        len(dataset.orig_segments),
        len(dataset.polylines),
        len(dataset.proxies),
        len(index_names),
        0,
        *dataset.bbox,
        primary.grid_w if primary else 0,
        primary.grid_h if primary else 0,
        0,  # style table offset, patched below
    )
    fh.write(header)

    pts = np.zeros(len(dataset.points), dtype=_POINT_DT)
    pts["x"] = dataset.points[:, 0]
    pts["y"] = dataset.points[:, 1]
    pts["e"] = round_up_f32(dataset.e_star)
    pts["d"] = round_up_f32(dataset.d_star)
    fh.write(pts.tobytes())

    pls = np.zeros(len(dataset.polylines), dtype=_PL_DT)
    for i, pl in enumerate(dataset.polylines):
        pls[i] = (pl.start, pl.count, pl.line_type)
    fh.write(pls.tobytes())

    fh.write(_pack_segments(dataset.segments).tobytes())
    fh.write(_pack_segments(dataset.orig_segments).tobytes())

    for proxy in dataset.proxies:
        members = sorted(proxy.member_ids)
        fh.write(
            struct.pack(
                "<Iddff",
                len(members),
                proxy.position[0],
                proxy.position[1],
                round_up_f32(np.array([proxy.e_star]))[0],
                round_up_f32(np.array([proxy.d_star]))[0],
            )
        )
        fh.write(np.array(members, dtype="<u4").tobytes())

    for name in index_names:
        _write_index(fh, name, dataset.indexes[name])

    style_offset = fh.tell()
    blob = _style_blob(dataset)
    fh.write(struct.pack("<I", len(blob)))
    fh.write(blob)

    data = bytearray(fh.getvalue())
    # patch the style table offset (last u64 of the header)
    struct.pack_into("<Q", data, _HEADER.size - 8, style_offset)
    out = bytes(data)
    if path is not None:
        with open(path, "wb") as f:
            f.write(out)
    return out


# ---------------------------------------------------------------------------
# reading


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ArtifactError("truncated artifact file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))

    def array(self, dtype, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()


def _unpack_segments(rec: np.ndarray, n_points: int) -> SegmentArrays:
    a = rec["a"].astype(np.int32)
    b = rec["b"].astype(np.int32)
    if len(rec) and (int(rec["a"].max()) >= n_points or int(rec["b"].max()) >= n_points):
        raise ArtifactError("segment endpoint out of range")
    spl32 = rec["spl"]
    spl = np.where(spl32 == NO_REF, -1, spl32.astype(np.int64)).astype(np.int32)
    if len(rec) and int(spl.max(initial=-1)) >= n_points:
        raise ArtifactError("segment splitter out of range")
    packed = rec["packed"]
    gen_none = (packed >> 1) & 1
    gen_is_b = packed & 1
    gen = np.where(gen_none == 1, -1, np.where(gen_is_b == 1, b, a)).astype(np.int32)
    lt = ((packed >> 2) & 0xFF).astype(np.int32)
    has_spl = spl >= 0
    if has_spl.any():
        lo = np.minimum(a, b)[has_spl]
        hi = np.maximum(a, b)[has_spl]
        s = spl[has_spl]
        if not ((lo < s) & (s < hi)).all():
            raise ArtifactError("splitter must lie strictly between segment endpoints")
    return SegmentArrays(a=a, b=b, generator=gen, splitter=spl, line_type=lt)


def _read_index(r: _Reader, n_segments: int) -> Tuple[str, SegmentIndex]:
    (name_len,) = r.unpack(struct.Struct("<B"))
    name = r.take(name_len).decode()
    gw, gh, max_depth, leaf_cap, x0, y0, x1, y1, node_count, ref_count = r.unpack(
        struct.Struct("<IIII4dQQ")
    )
    cell_root = r.array("<i8", gw * gh)
    children = r.array("<i8", node_count * 4).reshape(-1, 4)
    if node_count:
        if int(cell_root.max(initial=-1)) >= node_count or int(children.max(initial=-1)) >= node_count:
            raise ArtifactError("quadtree child offset out of range")
    offs = np.zeros(node_count, dtype=np.int64)
    cnts = np.zeros(node_count, dtype=np.int32)
    refs_parts = []
    total = 0
    u32 = struct.Struct("<I")
    for i in range(node_count):
        (cnt,) = r.unpack(u32)
        ids = r.array("<i4", cnt)
        offs[i] = total
        cnts[i] = cnt
        total += cnt
        refs_parts.append(ids)
    if total != ref_count:
        raise ArtifactError("quadtree data records disagree with header reference count")
    refs = np.concatenate(refs_parts) if refs_parts else np.zeros(0, dtype=np.int32)
    if len(refs) and (int(refs.min()) < 0 or int(refs.max()) >= n_segments):
        raise ArtifactError("quadtree segment reference out of range")
    idx = SegmentIndex(
        bbox=(x0, y0, x1, y1),
        grid_w=gw,
        grid_h=gh,
        max_depth=max_depth,
        leaf_capacity=leaf_cap,
        cell_root=cell_root,
        children=children,
        node_seg_off=offs,
        node_seg_cnt=cnts,
        seg_refs=refs.astype(np.int32),
    )
    return name, idx


def read_artifact(source: Union[str, bytes]) -> Dataset:
    """Load an artifact, validating structure and index bounds."""
    data = source if isinstance(source, bytes) else open(source, "rb").read()
    r = _Reader(data)
    try:
        (
            magic,
            version,
            n_points,
            n_segs,
            n_orig,
            n_pls,
            n_proxies,
            n_indexes,
            _reserved,
            bx0,
            by0,
            bx1,
            by1,
            _grid_w,
            _grid_h,
            style_offset,
        ) = r.unpack(_HEADER)
    except ArtifactError:
        raise ArtifactError("truncated artifact file (incomplete header)")
    if magic != MAGIC:
        raise ArtifactError(f"bad magic {magic!r}; not an artifact file")
    if version != VERSION:
        raise ArtifactError(f"unsupported artifact version {version}")

    pts = r.array(_POINT_DT, n_points)
    points = np.stack([pts["x"], pts["y"]], axis=1).astype(np.float64)
    e_star = pts["e"].astype(np.float64)
    d_star = pts["d"].astype(np.float64)

    pl_rec = r.array(_PL_DT, n_pls)
    polylines: List[Polyline] = []
    for start, count, lt in pl_rec.tolist():
        if count < 2 or start + count > n_points:
            raise ArtifactError("polyline range out of bounds")
        polylines.append(Polyline(start=start, count=count, line_type=lt))

    segments = _unpack_segments(r.array(_SEG_DT, n_segs), n_points)
    orig_segments = _unpack_segments(r.array(_SEG_DT, n_orig), n_points)

    eval_pos = points.copy()
    proxies: List[ProxyPoint] = []
    ph = struct.Struct("<Iddff")
    for _ in range(n_proxies):
        cnt, px, py, pe, pd = r.unpack(ph)
        members = r.array("<u4", cnt)
        if len(members) and int(members.max()) >= n_points:
            raise ArtifactError("proxy member out of range")
        ids = frozenset(int(m) for m in members)
        proxies.append(
            ProxyPoint(member_ids=ids, position=(px, py), e_star=float(pe), d_star=float(pd))
        )
        for m in ids:
            eval_pos[m] = (px, py)

    indexes: Dict[str, SegmentIndex] = {}
    for _ in range(n_indexes):
        name, idx = _read_index(r, max(n_segs, n_orig))
        ref_limit = n_orig if name.startswith("orig") else n_segs
        if len(idx.seg_refs) and int(idx.seg_refs.max()) >= ref_limit:
            raise ArtifactError("quadtree segment reference out of range")
        indexes[name] = idx

    if r.pos != style_offset:
        raise ArtifactError("style table offset disagrees with section sizes")
    (blob_len,) = r.unpack(struct.Struct("<I"))
    try:
        cfg = json.loads(r.take(blob_len).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"malformed style table: {exc}") from exc
    line_types, _profiles = parse_style_config(cfg)
    for pl in polylines:
        if pl.line_type not in line_types:
            raise ArtifactError(f"polyline references unknown line type {pl.line_type}")

    return Dataset(
        points=points,
        eval_pos=eval_pos,
        e_star=e_star,
        d_star=d_star,
        polylines=polylines,
        segments=segments,
        orig_segments=orig_segments,
        line_types=line_types,
        proxies=proxies,
        style_config=cfg,
        indexes=indexes,
    )


def stats_report(dataset: Dataset, pipeline_report: Optional[dict] = None) -> dict:
    """Machine-readable count summary in the shape of the dataset table."""
    report = dict(pipeline_report or {})
    report.update(
        {
            "points": len(dataset.points),
            "segs": len(dataset.orig_segments),
            "ap_segs": len(dataset.segments),
            "proxies": len(dataset.proxies),
        }
    )
    for name, idx in sorted(dataset.indexes.items()):
        stats = idx.count_stats()
        report[f"qt_segs_{name}"] = stats["qt_segs"]
        report[f"bytes_{name}"] = stats["bytes"]
    return report
