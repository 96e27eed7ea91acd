"""Mask-volume parsing and 8x8 grid quantization.

A mask volume is one 128x128 scene with a binary mask per detected object.
Each mask is reduced to an 8x8 tile grid (tile set when strictly more than a
coverage threshold of its 256 pixels is set) from which the sonifier reads the
object's row set, leftmost column, and width.  Grid rows count from the
BOTTOM: row 1 is the lowest image band, row 8 the top.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classes import DEFAULT_ALLOWLIST
from .errors import DomainError, FormatError, ValidationError

FRAME_SIDE = 128
GRID_SIDE = 8
TILE_SIDE = FRAME_SIDE // GRID_SIDE
TILE_PIXELS = TILE_SIDE * TILE_SIDE
DEFAULT_THRESHOLD = 0.10


@dataclass(frozen=True)
class GridMask:
    """8x8 quantization of one object mask with its derived extent.

    tiles[r][c] uses 0-based indices with r = 0 the BOTTOM row; the public
    rows/col_start/width fields are 1-based and always recomputed from tiles.
    """

    tiles: tuple[tuple[bool, ...], ...]
    rows: frozenset[int] = field(init=False)
    col_start: int = field(init=False)
    width: int = field(init=False)

    def __post_init__(self):
        t = tuple(tuple(bool(v) for v in row) for row in self.tiles)
        if len(t) != GRID_SIDE or any(len(row) != GRID_SIDE for row in t):
            raise DomainError("grid must be 8x8")
        object.__setattr__(self, "tiles", t)
        rows, col_start, width = grid_extent_from_tiles(t)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "col_start", col_start)
        object.__setattr__(self, "width", width)

    def to_lists(self) -> list[list[int]]:
        return [[1 if v else 0 for v in row] for row in self.tiles]


def grid_extent_from_tiles(
    tiles: Sequence[Sequence[bool]],
) -> tuple[frozenset[int], int, int]:
    """Row set, leftmost column, and bounding column span of the set tiles.

    All results are 1-based.  Width spans any interior gaps: an object whose
    quantization splits into columns 2 and 5 still reads as width 4.
    """
    rows = frozenset(r + 1 for r in range(GRID_SIDE) if any(tiles[r]))
    cols = [c + 1 for c in range(GRID_SIDE) if any(tiles[r][c] for r in range(GRID_SIDE))]
    if not rows or not cols:
        raise DomainError("grid has no set tile")
    return rows, cols[0], cols[-1] - cols[0] + 1


def grid_extent(grid: GridMask) -> tuple[frozenset[int], int, int]:
    return grid.rows, grid.col_start, grid.width


def quantize(mask: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> GridMask:
    """Reduce a 128x128 binary mask to the 8x8 tile grid.

    A tile is set iff its covered fraction strictly exceeds the threshold
    (default 0.10, i.e. at least 26 of 256 pixels).  When no tile clears the
    bar, the single tile holding the most set pixels is set instead, ties
    broken by lowest row then lowest column, so every detected object stays
    audible.
    """
    arr = np.asarray(mask)
    if arr.shape != (FRAME_SIDE, FRAME_SIDE):
        raise DomainError(f"mask must be {FRAME_SIDE}x{FRAME_SIDE}, got {arr.shape}")
    if not (0.0 < threshold < 1.0):
        raise DomainError(f"threshold must be in (0, 1), got {threshold}")
    binary = arr.astype(bool)
    if not binary.any():
        raise DomainError("mask has no set pixel")

    # counts[r][c] with r = 0 the bottom grid row; image row 0 is the top.
    per_tile = binary.reshape(GRID_SIDE, TILE_SIDE, GRID_SIDE, TILE_SIDE).sum(axis=(1, 3))
    counts = per_tile[::-1]
    tiles = counts > threshold * TILE_PIXELS
    if not tiles.any():
        flat = int(np.argmax(counts))  # first max in row-major order = lowest
        tiles = np.zeros_like(tiles)   # row, then lowest column
        tiles[flat // GRID_SIDE, flat % GRID_SIDE] = True
    return GridMask(tuple(tuple(bool(v) for v in row) for row in tiles))


@dataclass(frozen=True)
class ObjectMask:
    """One detected object: class identity plus its binary mask.

    Exactly one of mask (pixel level) and grid (pre-quantized) is present.
    """

    class_id: int
    class_name: str
    mask: np.ndarray | None = None
    grid: GridMask | None = None

    def __post_init__(self):
        if (self.mask is None) == (self.grid is None):
            raise DomainError("object needs exactly one of a pixel mask or a grid")
        if self.mask is not None and not np.asarray(self.mask).any():
            raise DomainError(f"mask for {self.class_name!r} has no set pixel")

    def quantized(self, threshold: float = DEFAULT_THRESHOLD) -> GridMask:
        if self.grid is not None:
            return self.grid
        return quantize(self.mask, threshold)


@dataclass(frozen=True)
class MaskVolume:
    frame_width: int
    frame_height: int
    objects: tuple[ObjectMask, ...]

    def __post_init__(self):
        if (self.frame_width, self.frame_height) != (FRAME_SIDE, FRAME_SIDE):
            raise ValidationError(
                f"frame must be {FRAME_SIDE}x{FRAME_SIDE}, "
                f"got {self.frame_width}x{self.frame_height}"
            )


def decode_rle(runs: Sequence[int], width: int = FRAME_SIDE, height: int = FRAME_SIDE) -> np.ndarray:
    """Expand alternating zero/one run lengths (zeros first) to a binary mask."""
    total = width * height
    if not isinstance(runs, (list, tuple)) or not all(
        isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in runs
    ):
        raise ValidationError("mask_rle must be a list of non-negative integers")
    if sum(runs) != total:
        raise ValidationError(f"mask_rle runs sum to {sum(runs)}, expected {total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    for i, run in enumerate(runs):
        if i % 2 == 1:
            flat[pos:pos + run] = True
        pos += run
    return flat.reshape(height, width)


def encode_rle(mask: np.ndarray) -> list[int]:
    """Row-major run lengths, starting with the zero count (possibly 0)."""
    flat = np.asarray(mask).astype(bool).ravel()
    runs: list[int] = []
    value = False
    count = 0
    for bit in flat:
        if bit == value:
            count += 1
        else:
            runs.append(count)
            value = bit
            count = 1
    runs.append(count)
    return runs


def _parse_grid(raw: object) -> GridMask:
    if (
        not isinstance(raw, list)
        or len(raw) != GRID_SIDE
        or any(not isinstance(row, list) or len(row) != GRID_SIDE for row in raw)
        or any(v not in (0, 1) for row in raw for v in row)
    ):
        raise ValidationError("grid must be an 8x8 matrix of 0/1")
    try:
        return GridMask(tuple(tuple(bool(v) for v in row) for row in raw))
    except DomainError as exc:
        raise ValidationError(str(exc)) from exc


def parse_mask_volume(
    document: str | bytes | dict,
    allowlist: Sequence[str] | None = None,
) -> MaskVolume:
    """Validate a mask-volume JSON document against the schema and allowlist.

    Accepts the document as text, bytes, or an already-parsed dict.  Every
    object carries either "mask_rle" (row-major runs, zeros first, summing to
    16384) or a pre-quantized 8x8 "grid" with row 1 at the bottom, and its
    class_name must match allowlist[class_id].
    """
    names = tuple(allowlist) if allowlist is not None else DEFAULT_ALLOWLIST
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FormatError(f"mask volume is not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ValidationError("mask volume must be a JSON object")

    frame = doc.get("frame")
    if not isinstance(frame, dict) or "width" not in frame or "height" not in frame:
        raise ValidationError("field 'frame' must be an object with width and height")
    raw_objects = doc.get("objects")
    if not isinstance(raw_objects, list):
        raise ValidationError("field 'objects' must be a list")

    objects: list[ObjectMask] = []
    for i, entry in enumerate(raw_objects):
        where = f"objects[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where} must be an object")
        class_id = entry.get("class_id")
        if not isinstance(class_id, int) or isinstance(class_id, bool):
            raise ValidationError(f"{where}.class_id must be an integer")
        if not 0 <= class_id < len(names):
            raise ValidationError(f"{where}.class_id {class_id} is not in the allowlist")
        class_name = entry.get("class_name")
        if class_name != names[class_id]:
            raise ValidationError(
                f"{where}.class_name {class_name!r} does not match "
                f"allowlist entry {names[class_id]!r} for id {class_id}"
            )
        has_rle = "mask_rle" in entry
        has_grid = "grid" in entry
        if has_rle == has_grid:
            raise ValidationError(f"{where} needs exactly one of mask_rle or grid")
        try:
            if has_rle:
                mask = decode_rle(entry["mask_rle"])
                objects.append(ObjectMask(class_id=class_id, class_name=class_name, mask=mask))
            else:
                objects.append(
                    ObjectMask(class_id=class_id, class_name=class_name, grid=_parse_grid(entry["grid"]))
                )
        except (ValidationError, DomainError) as exc:
            raise ValidationError(f"{where}: {exc}") from exc

    return MaskVolume(
        frame_width=int(frame["width"]),
        frame_height=int(frame["height"]),
        objects=tuple(objects),
    )


def load_mask_volume(path: str | Path, allowlist: Sequence[str] | None = None) -> MaskVolume:
    return parse_mask_volume(Path(path).read_text(), allowlist)
