"""Shared fixtures and grid-building helpers."""

import json

import numpy as np
import pytest

from gridtone.codebook import published_codebook
from gridtone.maskmodel import GRID_SIDE, TILE_SIDE, GridMask, encode_rle
from gridtone.synth import DEFAULT_CONFIG


@pytest.fixture(scope="session")
def book():
    return published_codebook()


@pytest.fixture(scope="session")
def config():
    return DEFAULT_CONFIG


def grid_for(rows, col_start, width) -> GridMask:
    """Rectangular grid covering the given rows over one column span."""
    tiles = [[False] * GRID_SIDE for _ in range(GRID_SIDE)]
    for r in rows:
        for c in range(col_start - 1, col_start - 1 + width):
            tiles[r - 1][c] = True
    return GridMask(tuple(tuple(row) for row in tiles))


def paint_tile(mask: np.ndarray, grid_row: int, grid_col: int, count: int) -> None:
    """Set the first `count` pixels of one 16x16 tile, row-major.

    grid_row is 1-based from the bottom, matching GridMask indexing.
    """
    top = (GRID_SIDE - grid_row) * TILE_SIDE
    left = (grid_col - 1) * TILE_SIDE
    for k in range(count):
        mask[top + k // TILE_SIDE, left + k % TILE_SIDE] = True


def volume_doc(objects) -> dict:
    """Mask-volume JSON document from (class_id, class_name, mask) triples."""
    return {
        "frame": {"width": 128, "height": 128},
        "objects": [
            {"class_id": cid, "class_name": name, "mask_rle": encode_rle(mask)}
            for cid, name, mask in objects
        ],
    }


def write_volume(path, objects) -> None:
    path.write_text(json.dumps(volume_doc(objects)), encoding="utf-8")
