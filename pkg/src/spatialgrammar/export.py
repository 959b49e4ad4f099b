"""Scene serialization: canonical JSON, OBJ box meshes, and a BEV SVG plot.

The JSON form is the interchange format and is byte-stable: keys sorted,
floats rendered with "%.6f", negative zero normalized.  Schema:

    {grid: {cell_size, rows, cols},
     placements: [{id, identifier, center:[x,y,z], size:[l,w,h], yaw_rad,
                   parent, depth, cell:[i,j]}],
     structural: [... same row shape ...],
     openings: [{id, kind, wall, center:[x,y,z], width, height, sill,
                 cell:[i,j]}]}

OBJ and SVG are one-way debug views; only JSON reimports.
"""

from __future__ import annotations

import json
import math

from .errors import UnsupportedFormat, VocabError
from .geometry import GridSpec, OrientedBox, Vec3, box_corners
from .compiler import CompiledScene, Opening, Placement, Provenance
from .llmsli import Face
from .vocab import Category, Vocabulary

FORMATS = ("json", "obj", "svg")

# face-contact slack when reconstructing support links from plain geometry
_REIMPORT_FACE_TOL = 1e-3


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def canonical_json(value) -> str:
    """Compact JSON with sorted keys and fixed-width floats."""
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        items = sorted(value.items())
        return "{" + ",".join(json.dumps(k) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _placement_row(p: Placement) -> dict:
    return {
        "id": p.id,
        "identifier": p.identifier,
        "center": list(p.box.center.as_tuple()),
        "size": list(p.box.size.as_tuple()),
        "yaw_rad": p.box.yaw,
        "parent": p.parent,
        "depth": p.depth,
        "cell": [p.source.row, p.source.col],
    }


def _opening_row(o: Opening) -> dict:
    return {
        "id": o.id,
        "kind": o.kind,
        "wall": o.wall,
        "center": list(o.center.as_tuple()),
        "width": o.width_m,
        "height": o.height_m,
        "sill": o.sill_m,
        "cell": list(o.cell),
    }


def scene_to_dict(s: CompiledScene) -> dict:
    return {
        "grid": {
            "cell_size": s.grid.cell_size_m,
            "rows": s.grid.rows,
            "cols": s.grid.cols,
        },
        "placements": [_placement_row(p) for p in s.placements],
        "structural": [_placement_row(p) for p in s.structural],
        "openings": [_opening_row(o) for o in s.openings],
    }


def export_scene(s: CompiledScene, format: str = "json") -> bytes:
    if format == "json":
        return (canonical_json(scene_to_dict(s)) + "\n").encode("utf-8")
    if format == "obj":
        return _export_obj(s).encode("utf-8")
    if format == "svg":
        return _export_svg(s).encode("utf-8")
    raise UnsupportedFormat(f"unknown export format {format!r}; expected one of {FORMATS}")


def load_scene_json(data: bytes | str, vocab: Vocabulary | None = None) -> CompiledScene:
    """Rebuild a scene from its JSON export.

    Categories come from the vocabulary when one is supplied; faces are not in
    the schema, so top/bottom support links are re-inferred from face contact.
    Program provenance does not survive the trip.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    doc = json.loads(data)
    grid = GridSpec(
        cell_size_m=float(doc["grid"]["cell_size"]),
        rows=int(doc["grid"]["rows"]),
        cols=int(doc["grid"]["cols"]),
    )
    placements = [_row_to_placement(row, vocab, structural=False) for row in doc["placements"]]
    structural = [_row_to_placement(row, vocab, structural=True) for row in doc["structural"]]
    by_id = {p.id: p for p in placements + structural}
    placements = [_infer_face(p, by_id) for p in placements]
    openings = tuple(
        Opening(
            id=row["id"],
            kind=row["kind"],
            wall=row["wall"],
            center=Vec3(*row["center"]),
            width_m=float(row["width"]),
            height_m=float(row["height"]),
            sill_m=float(row["sill"]),
            cell=(int(row["cell"][0]), int(row["cell"][1])),
        )
        for row in doc["openings"]
    )
    return CompiledScene(
        grid=grid,
        placements=tuple(placements),
        structural=tuple(structural),
        openings=openings,
    )


def _row_to_placement(row: dict, vocab: Vocabulary | None, structural: bool) -> Placement:
    identifier = row["identifier"]
    category = Category.STRUCTURAL
    if not structural:
        category = Category.FLOOR_FURNITURE
        if vocab is not None:
            try:
                category = vocab.lookup(identifier).category
            except VocabError:
                pass  # keep the floor default for identifiers outside the table
    return Placement(
        id=row["id"],
        identifier=identifier,
        category=category,
        box=OrientedBox(
            center=Vec3(*row["center"]),
            size=Vec3(*row["size"]),
            yaw=float(row["yaw_rad"]),
        ),
        parent=row["parent"],
        depth=int(row["depth"]),
        source=Provenance("import", int(row["cell"][0]), int(row["cell"][1]), int(row["depth"])),
    )


def _infer_face(p: Placement, by_id: dict[str, Placement]) -> Placement:
    if p.parent is None or p.parent not in by_id:
        return p
    parent = by_id[p.parent]
    face = None
    if abs(p.box.bottom_z - parent.box.top_z) <= _REIMPORT_FACE_TOL:
        face = Face.TOP
    elif abs(p.box.top_z - parent.box.bottom_z) <= _REIMPORT_FACE_TOL:
        face = Face.BOTTOM
    if face is None:
        return p
    source = Provenance(p.source.block, p.source.row, p.source.col, p.source.depth, face)
    return Placement(p.id, p.identifier, p.category, p.box, p.parent, p.depth, source)


# ---------------------------------------------------------------------------
# OBJ

# triangle fan over box_corners() order: 0-3 bottom CCW, 4-7 top CCW
_BOX_TRIANGLES = (
    (0, 3, 2), (0, 2, 1),  # bottom, facing -z
    (4, 5, 6), (4, 6, 7),  # top
    (1, 2, 6), (1, 6, 5),  # +x
    (0, 4, 7), (0, 7, 3),  # -x
    (2, 3, 7), (2, 7, 6),  # +y
    (0, 1, 5), (0, 5, 4),  # -y
)

_FRAME_BAR_M = 0.05


def _obj_box(lines: list[str], name: str, box: OrientedBox, offset: int) -> int:
    lines.append(f"g {name}")
    for v in box_corners(box):
        lines.append(f"v {_fmt(v.x)} {_fmt(v.y)} {_fmt(v.z)}")
    for a, b, c in _BOX_TRIANGLES:
        lines.append(f"f {offset + a + 1} {offset + b + 1} {offset + c + 1}")
    return offset + 8


def _opening_frame_boxes(o: Opening, walls: dict[str, Placement]) -> list[OrientedBox]:
    wall = walls.get(o.wall)
    # opening plane spans the wall's long axis; frame bars protrude past the faces
    along_x = wall is None or wall.box.size.x >= wall.box.size.y
    depth = (wall.box.size.y if along_x else wall.box.size.x) + 0.02 if wall else 0.22
    bar = _FRAME_BAR_M
    w, h = o.width_m, o.height_m
    c = o.center

    def make(du: float, dz: float, su: float, sz: float) -> OrientedBox:
        dx, dy = (du, 0.0) if along_x else (0.0, du)
        sx, sy = (su, depth) if along_x else (depth, su)
        return OrientedBox(
            center=Vec3(c.x + dx, c.y + dy, c.z + dz),
            size=Vec3(sx, sy, sz),
            yaw=0.0,
        )

    return [
        make(0.0, -(h + bar) / 2.0, w + 2 * bar, bar),  # sill bar
        make(0.0, (h + bar) / 2.0, w + 2 * bar, bar),  # head bar
        make(-(w + bar) / 2.0, 0.0, bar, h),  # jambs
        make((w + bar) / 2.0, 0.0, bar, h),
    ]


def _export_obj(s: CompiledScene) -> str:
    lines = ["# spatialgrammar box scene"]
    offset = 0
    walls = {p.id: p for p in s.structural}
    for p in s.structural + s.placements:
        offset = _obj_box(lines, p.id, p.box, offset)
    for o in s.openings:
        for k, box in enumerate(_opening_frame_boxes(o, walls)):
            offset = _obj_box(lines, f"{o.id}_frame_{k}", box, offset)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG

_SVG_SCALE = 60.0  # px per meter
_SVG_PAD = 40.0

_CATEGORY_FILL = {
    Category.FLOOR_FURNITURE: "#7fb3d5",
    Category.SURFACE_ITEM: "#f5b041",
    Category.WALL_MOUNTED: "#76d7c4",
    Category.CEILING_MOUNTED: "#c39bd3",
    Category.STRUCTURAL: "#7b7d7d",
}


def _export_svg(s: CompiledScene) -> str:
    g = s.grid.cell_size_m
    all_p = list(s.structural) + list(s.placements)
    grid_lo = -g / 2.0
    grid_hi_x = (s.grid.rows - 0.5) * g
    grid_hi_y = (s.grid.cols - 0.5) * g
    xs = [grid_lo, grid_hi_x]
    ys = [grid_lo, grid_hi_y]
    for p in all_p:
        for cx, cy in p.box.footprint_corners():
            xs.append(cx)
            ys.append(cy)
    min_x, max_x = min(xs), max(xs)
    min_y, max_y = min(ys), max(ys)

    def sx(x: float) -> float:
        return _SVG_PAD + (x - min_x) * _SVG_SCALE

    def sy(y: float) -> float:
        # world +y grows to the left of the page so the BEV reads like the grid
        return _SVG_PAD + (max_y - y) * _SVG_SCALE

    width = 2 * _SVG_PAD + (max_x - min_x) * _SVG_SCALE
    height = 2 * _SVG_PAD + (max_y - min_y) * _SVG_SCALE
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i in range(s.grid.rows + 1):
        x = (i - 0.5) * g
        out.append(
            f'<line x1="{_fmt(sx(x))}" y1="{_fmt(sy(grid_lo))}" x2="{_fmt(sx(x))}" '
            f'y2="{_fmt(sy(grid_hi_y))}" stroke="#dddddd" stroke-width="1"/>'
        )
    for j in range(s.grid.cols + 1):
        y = (j - 0.5) * g
        out.append(
            f'<line x1="{_fmt(sx(grid_lo))}" y1="{_fmt(sy(y))}" '
            f'x2="{_fmt(sx(grid_hi_x))}" y2="{_fmt(sy(y))}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
    for p in sorted(all_p, key=lambda q: (q.depth, q.id)):
        pts = " ".join(
            f"{_fmt(sx(cx))},{_fmt(sy(cy))}" for cx, cy in p.box.footprint_corners()
        )
        fill = _CATEGORY_FILL[p.category]
        out.append(
            f'<polygon points="{pts}" fill="{fill}" fill-opacity="0.8" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        hx, hy = p.box.facing()
        cx, cy = p.box.center.x, p.box.center.y
        tip_x, tip_y = cx + hx * p.box.size.x * 0.45, cy + hy * p.box.size.x * 0.45
        out.append(
            f'<line x1="{_fmt(sx(cx))}" y1="{_fmt(sy(cy))}" x2="{_fmt(sx(tip_x))}" '
            f'y2="{_fmt(sy(tip_y))}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(sx(cx))}" y="{_fmt(sy(cy))}" font-size="10" '
            f'text-anchor="middle" font-family="monospace">{p.id}</text>'
        )
    for o in s.openings:
        out.append(
            f'<circle cx="{_fmt(sx(o.center.x))}" cy="{_fmt(sy(o.center.y))}" r="5" '
            f'fill="{"#e74c3c" if o.kind == "door" else "#3498db"}"/>'
        )
        out.append(
            f'<text x="{_fmt(sx(o.center.x) + 8.0)}" y="{_fmt(sy(o.center.y))}" '
            f'font-size="9" font-family="monospace">{o.id}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
