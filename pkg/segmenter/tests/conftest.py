"""Shared fixtures: sample images and a deterministic stand-in detector."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image, ImageDraw

from segmenter.adapter import DEFAULT_ALLOWLIST, Detection


class ChannelBackend:
    """Backend stand-in that reads instances straight from color channels.

    Pure red, green, and blue regions become person, dog, and cup masks, so
    a test image fully determines the detections without any model.
    """

    label_names = ("__background__",) + DEFAULT_ALLOWLIST

    _CHANNELS = (("person", 0), ("dog", 1), ("cup", 2))

    def __init__(self, score: float = 0.9):
        self.score = score

    def detect(self, image: np.ndarray) -> list[Detection]:
        return [
            Detection(name=name, score=self.score, mask=image[:, :, channel] > 200)
            for name, channel in self._CHANNELS
        ]


class FakeBackend:
    """Backend stand-in returning a fixed detection list."""

    def __init__(self, detections, labels=None):
        self._detections = list(detections)
        self.label_names = (
            tuple(labels) if labels is not None
            else ("__background__",) + DEFAULT_ALLOWLIST
        )

    def detect(self, image: np.ndarray) -> list[Detection]:
        return self._detections


def _draw(path, size, rects):
    """Write a black image with solid color rectangles."""
    image = Image.new("RGB", size, (0, 0, 0))
    draw = ImageDraw.Draw(image)
    for box, color in rects:
        draw.rectangle(box, fill=color)
    image.save(path)
    return path


@pytest.fixture(scope="session")
def sample_images(tmp_path_factory):
    """Three images of different sizes with 1, 2, and 3 color regions."""
    root = tmp_path_factory.mktemp("images")
    red, green, blue = (255, 0, 0), (0, 255, 0), (0, 0, 255)
    return (
        _draw(root / "one.png", (640, 480), [((100, 100, 400, 380), red)]),
        _draw(
            root / "two.png",
            (128, 128),
            [((8, 8, 56, 56), red), ((72, 72, 120, 120), green)],
        ),
        _draw(
            root / "three.png",
            (300, 200),
            [((10, 10, 90, 90), red), ((110, 20, 190, 120), green),
             ((210, 100, 290, 190), blue)],
        ),
    )
