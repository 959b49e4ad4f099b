"""Parser, canonical printer, and closure analysis for the building-shell language.

Structural programs describe walls, doors, and windows on a BEV grid::

    llmslb grid=1m dims=4x4
    main:
    w w w w
    w 0 0 d
    w 0 0 w
    w w c w(AC_on_inner)

Symbols: ``w`` wall, ``d`` door, ``c`` window, ``0`` empty.  Wall cells may
carry ``(NAME_on_inner)`` / ``(NAME_on_outer)`` sub-layouts; the referenced
blocks use the full indoor cell grammar.  Header keys beyond ``grid`` /
``dims``: ``height`` and ``thickness`` of walls, ``door=<W>x<H>m``,
``window=<W>x<H>m``, ``sill=<Z>m`` (window sill), and ``ceiling=<Block>``
naming a block hung from the ceiling plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .errors import DanglingBlockError, OrphanOpeningError, ParseError, RaggedGridError
from .geometry import GridSpec
from .llmsli import (
    MAX_NESTING_DEPTH,
    Face,
    GridBlock,
    Section,
    _fmt_num,
    _parse_dims,
    _parse_floor_value,
    block_from_section,
    check_block_graph,
    format_cell,
    header_pairs,
    parse_cell_token,
    parse_grid_value,
    split_program,
    tokens_with_cols,
)

DEFAULT_WALL_HEIGHT_M = 2.6
DEFAULT_WALL_THICKNESS_M = 0.2


class StructSymbol(str, Enum):
    WALL = "w"
    DOOR = "d"
    WINDOW = "c"


class WallFace(str, Enum):
    INNER = "inner"
    OUTER = "outer"


_WALL_FACE_INDEX = {WallFace.INNER: 0, WallFace.OUTER: 1}
_SLB_FACES = {f.value: f for f in WallFace}
_SLI_FACES = {f.value: f for f in Face}


@dataclass(frozen=True)
class StructCell:
    symbol: StructSymbol
    sublayout_refs: tuple[tuple[str, WallFace], ...] = ()

    def __post_init__(self) -> None:
        if self.sublayout_refs and self.symbol is not StructSymbol.WALL:
            raise ValueError("sub-layouts attach to wall cells only")
        refs = tuple(sorted(self.sublayout_refs, key=lambda r: _WALL_FACE_INDEX[r[1]]))
        object.__setattr__(self, "sublayout_refs", refs)


@dataclass(frozen=True)
class OpeningParams:
    """Default opening geometry; width is absolute meters, not a cell fraction."""

    width_m: float
    height_m: float
    sill_m: float

    def __post_init__(self) -> None:
        if self.width_m <= 0 or self.height_m <= 0 or self.sill_m < 0:
            raise ValueError(f"invalid opening parameters: {self}")


DEFAULT_DOOR = OpeningParams(width_m=0.9, height_m=2.0, sill_m=0.0)
DEFAULT_WINDOW = OpeningParams(width_m=1.2, height_m=1.2, sill_m=0.9)


@dataclass(frozen=True)
class BuildingProgram:
    cell_size_m: float
    cells: tuple[tuple[StructCell | None, ...], ...]
    wall_height_m: float = DEFAULT_WALL_HEIGHT_M
    wall_thickness_m: float = DEFAULT_WALL_THICKNESS_M
    door: OpeningParams = DEFAULT_DOOR
    window: OpeningParams = DEFAULT_WINDOW
    blocks: dict[str, GridBlock] = field(default_factory=dict)
    ceiling_block: str | None = None

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.cell_size_m, len(self.cells), len(self.cells[0]))

    def structural_cells(self) -> Iterator[tuple[int, int, StructCell]]:
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                if cell is not None:
                    yield (i, j, cell)

    def symbol_at(self, i: int, j: int) -> StructSymbol | None:
        if 0 <= i < len(self.cells) and 0 <= j < len(self.cells[0]):
            cell = self.cells[i][j]
            return cell.symbol if cell is not None else None
        return None


# ---------------------------------------------------------------------------
# parsing


def _parse_struct_token(
    tok: str, lineno: int, col: int, refs_out: list
) -> StructCell | None:
    cell = parse_cell_token(tok, lineno, col, _SLB_FACES, refs_out)
    if cell is None:
        return None
    if not isinstance(cell.key, str) or cell.key not in ("w", "d", "c"):
        raise ParseError(
            f"unknown structural symbol {cell.key!r}",
            line=lineno,
            col=col,
            expected=("w", "d", "c", "0"),
        )
    if cell.yaw_deg % 360 != 0 or cell.size_override is not None:
        raise ParseError(
            "structural symbols take no yaw or size annotations", line=lineno, col=col
        )
    symbol = StructSymbol(cell.key)
    if cell.sublayout_refs and symbol is not StructSymbol.WALL:
        raise ParseError("sub-layouts attach to wall cells only", line=lineno, col=col)
    return StructCell(symbol=symbol, sublayout_refs=cell.sublayout_refs)


def parse_llmslb(text: str) -> BuildingProgram:
    """Parse building-shell source text into a BuildingProgram."""
    if not isinstance(text, str):
        raise ParseError("program source must be text", line=1, col=1)
    header, sections = split_program(text, "llmslb")
    pairs = header_pairs(header, "llmslb")
    lineno = header[0]

    known = ("grid", "dims", "height", "thickness", "door", "window", "sill", "ceiling")
    for key in pairs:
        if key not in known:
            raise ParseError(
                f"unknown header key {key!r}", line=lineno, col=pairs[key][1], expected=known
            )
    if "grid" not in pairs:
        raise ParseError("header is missing grid=<size>", line=lineno, col=1, expected=("grid=",))

    g = parse_grid_value(pairs["grid"][0], lineno, pairs["grid"][1])
    dims = _parse_dims(pairs["dims"][0], lineno, pairs["dims"][1]) if "dims" in pairs else None
    height = (
        parse_grid_value(pairs["height"][0], lineno, pairs["height"][1])
        if "height" in pairs
        else DEFAULT_WALL_HEIGHT_M
    )
    thickness = (
        parse_grid_value(pairs["thickness"][0], lineno, pairs["thickness"][1])
        if "thickness" in pairs
        else DEFAULT_WALL_THICKNESS_M
    )
    sill = (
        parse_grid_value(pairs["sill"][0], lineno, pairs["sill"][1])
        if "sill" in pairs
        else DEFAULT_WINDOW.sill_m
    )
    door = DEFAULT_DOOR
    if "door" in pairs:
        w, h = _parse_floor_value(pairs["door"][0], lineno, pairs["door"][1])
        door = OpeningParams(width_m=w, height_m=h, sill_m=0.0)
    window = OpeningParams(DEFAULT_WINDOW.width_m, DEFAULT_WINDOW.height_m, sill)
    if "window" in pairs:
        w, h = _parse_floor_value(pairs["window"][0], lineno, pairs["window"][1])
        window = OpeningParams(width_m=w, height_m=h, sill_m=sill)

    main_sec: Section | None = None
    block_sections: list[Section] = []
    for sec in sections:
        if sec.kind == "main":
            main_sec = sec
        else:
            block_sections.append(sec)
    if main_sec is None:
        raise ParseError("program has no 'main:' section", line=lineno, col=1, expected=("main:",))
    if not main_sec.rows:
        raise ParseError("'main' section has no rows", line=main_sec.line, col=1)

    struct_refs: list = []
    rows: list[tuple[StructCell | None, ...]] = []
    positions: dict[tuple[int, int], tuple[int, int]] = {}
    width: int | None = None
    for row_line, raw in main_sec.rows:
        row: list[StructCell | None] = []
        for tok, col in tokens_with_cols(raw):
            positions[(len(rows), len(row))] = (row_line, col)
            row.append(_parse_struct_token(tok, row_line, col, struct_refs))
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise RaggedGridError(f"row has {len(row)} cells, expected {width}", line=row_line, col=1)
        rows.append(tuple(row))
    if dims is not None and (len(rows), width) != dims:
        raise RaggedGridError(
            f"grid is {len(rows)}x{width} but dims declare {dims[0]}x{dims[1]}",
            line=main_sec.line,
            col=1,
        )

    block_refs: list = []
    blocks: dict[str, GridBlock] = {}
    for sec in block_sections:
        blocks[sec.name] = block_from_section(sec, _SLI_FACES, block_refs)

    for name, _face, ref_line, ref_col in struct_refs:
        if name not in blocks:
            raise DanglingBlockError(
                f"undeclared sub-layout block {name!r}", line=ref_line, col=ref_col
            )
    ceiling = None
    if "ceiling" in pairs:
        ceiling = pairs["ceiling"][0]
        if ceiling not in blocks:
            raise DanglingBlockError(
                f"undeclared ceiling block {ceiling!r}", line=lineno, col=pairs["ceiling"][1]
            )

    depths = check_block_graph(blocks, block_refs, root="main")
    root_refs = [name for name, _f, _l, _c in struct_refs]
    if ceiling is not None:
        root_refs.append(ceiling)
    for name in root_refs:
        if 1 + depths.get(name, 0) > MAX_NESTING_DEPTH:
            raise ParseError(
                f"nesting depth {1 + depths[name]} exceeds the maximum of {MAX_NESTING_DEPTH}"
            )

    program = BuildingProgram(
        cell_size_m=g,
        cells=tuple(rows),
        wall_height_m=height,
        wall_thickness_m=thickness,
        door=door,
        window=window,
        blocks=blocks,
        ceiling_block=ceiling,
    )
    _check_orphan_openings(program, positions)
    return program


def _check_orphan_openings(p: BuildingProgram, positions: dict) -> None:
    runs = wall_runs(p)
    run_of: dict[tuple[int, int], list[Run]] = {}
    for run in runs:
        for cell in run.cells:
            run_of.setdefault(cell, []).append(run)
    for i, j, cell in p.structural_cells():
        if cell.symbol is StructSymbol.WALL:
            continue
        if any(
            p.symbol_at(i + di, j + dj) is StructSymbol.WALL
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))
        ):
            continue
        if any(
            any(p.cells[a][b].symbol is StructSymbol.WALL for a, b in run.cells)
            for run in run_of.get((i, j), ())
        ):
            continue
        line, col = positions.get((i, j), (None, None))
        raise OrphanOpeningError(
            f"{'door' if cell.symbol is StructSymbol.DOOR else 'window'} at cell ({i},{j}) "
            "has no adjacent wall",
            line=line,
            col=col,
        )


# ---------------------------------------------------------------------------
# wall runs


@dataclass(frozen=True)
class Run:
    """A maximal straight stretch of wall-continuing cells.

    axis 0 extends along world x (row index varies), axis 1 along world y.
    Corner cells belong to one run per axis; isolated cells form 1-cell runs.
    """

    axis: int
    cells: tuple[tuple[int, int], ...]


def wall_runs(p: BuildingProgram) -> list[Run]:
    occupied = {(i, j) for i, j, _ in p.structural_cells()}
    n_rows = len(p.cells)
    n_cols = len(p.cells[0]) if p.cells else 0
    runs: list[Run] = []
    covered: set[tuple[int, int]] = set()

    for j in range(n_cols):  # runs along x: scan each column
        i = 0
        while i < n_rows:
            if (i, j) in occupied:
                start = i
                while i < n_rows and (i, j) in occupied:
                    i += 1
                if i - start >= 2:
                    cells = tuple((k, j) for k in range(start, i))
                    runs.append(Run(axis=0, cells=cells))
                    covered.update(cells)
            else:
                i += 1
    for i in range(n_rows):  # runs along y: scan each row
        j = 0
        while j < n_cols:
            if (i, j) in occupied:
                start = j
                while j < n_cols and (i, j) in occupied:
                    j += 1
                if j - start >= 2:
                    cells = tuple((i, k) for k in range(start, j))
                    runs.append(Run(axis=1, cells=cells))
                    covered.update(cells)
            else:
                j += 1
    for cell in sorted(occupied - covered):
        runs.append(Run(axis=0, cells=(cell,)))
    runs.sort(key=lambda r: (r.axis, r.cells[0]))
    return runs


# ---------------------------------------------------------------------------
# closure analysis


@dataclass(frozen=True)
class ClosureDiagnostic:
    """One connected wall component that does not close into a loop."""

    component: tuple[tuple[int, int], ...]
    endpoints: tuple[tuple[int, int], ...]
    gap: tuple[int, int] | None
    message: str


def check_closure(p: BuildingProgram) -> list[ClosureDiagnostic]:
    """Report wall components that are not closed loops.

    Doors and windows continue a wall.  A component is closed when every cell
    has at least two orthogonal neighbors inside the component; cells with
    fewer are reported as open ends, and for a single missing cell the gap is
    named explicitly.
    """
    occupied = {(i, j) for i, j, _ in p.structural_cells()}

    def neighbors(c: tuple[int, int]) -> list[tuple[int, int]]:
        i, j = c
        return [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]

    seen: set[tuple[int, int]] = set()
    diagnostics: list[ClosureDiagnostic] = []
    for start in sorted(occupied):
        if start in seen:
            continue
        component = []
        stack = [start]
        seen.add(start)
        while stack:
            cur = stack.pop()
            component.append(cur)
            for nb in neighbors(cur):
                if nb in occupied and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        component.sort()
        endpoints = tuple(
            c for c in component if sum(1 for nb in neighbors(c) if nb in occupied) < 2
        )
        if not endpoints:
            continue
        gap = None
        if len(endpoints) == 2:
            shared = [
                c
                for c in neighbors(endpoints[0])
                if c in neighbors(endpoints[1]) and c not in occupied
            ]
            if shared:
                gap = sorted(shared)[0]
        message = "wall component is not a closed loop: open ends at " + ", ".join(
            f"({i},{j})" for i, j in endpoints
        )
        if gap is not None:
            message += f"; possible gap at ({gap[0]},{gap[1]})"
        diagnostics.append(
            ClosureDiagnostic(
                component=tuple(component), endpoints=endpoints, gap=gap, message=message
            )
        )
    return diagnostics


# ---------------------------------------------------------------------------
# canonical printing


def format_struct_cell(cell: StructCell | None) -> str:
    if cell is None:
        return "0"
    parts = [cell.symbol.value]
    for name, face in cell.sublayout_refs:
        parts.append(f"({name}_on_{face.value})")
    return "".join(parts)


def print_llmslb(p: BuildingProgram) -> str:
    """Render the canonical text form; parse(print_llmslb(p)) == p."""
    rows, cols = len(p.cells), len(p.cells[0])
    header = (
        f"llmslb grid={_fmt_num(p.cell_size_m)}m dims={rows}x{cols}"
        f" height={_fmt_num(p.wall_height_m)}m thickness={_fmt_num(p.wall_thickness_m)}m"
        f" door={_fmt_num(p.door.width_m)}x{_fmt_num(p.door.height_m)}m"
        f" window={_fmt_num(p.window.width_m)}x{_fmt_num(p.window.height_m)}m"
        f" sill={_fmt_num(p.window.sill_m)}m"
    )
    if p.ceiling_block is not None:
        header += f" ceiling={p.ceiling_block}"
    lines = [header, "main:"]
    for row in p.cells:
        lines.append(" ".join(format_struct_cell(c) for c in row))

    order: list[str] = []
    seen: set[str] = set()
    queue: list[str] = []

    def enqueue(name: str) -> None:
        if name not in seen and name in p.blocks:
            seen.add(name)
            order.append(name)
            queue.append(name)

    for _, _, cell in p.structural_cells():
        for name, _face in cell.sublayout_refs:
            enqueue(name)
    if p.ceiling_block is not None:
        enqueue(p.ceiling_block)
    while queue:
        current = queue.pop(0)
        for _, _, cell in p.blocks[current].occupied():
            for name, _face in cell.sublayout_refs:
                enqueue(name)
    for name in p.blocks:
        if name not in seen:
            order.append(name)

    for name in order:
        block = p.blocks[name]
        lines.append(f"sublayout {name} dims={block.n_rows}x{block.n_cols}:")
        for row in block.rows:
            lines.append(" ".join(format_cell(c) for c in row))
    return "\n".join(lines) + "\n"
