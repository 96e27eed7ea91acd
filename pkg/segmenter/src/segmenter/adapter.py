"""Image to mask-volume conversion around a pretrained instance segmenter.

The pipeline is: read the image, resize it to the 128x128 frame, run the
detector, keep detections that are on the class allowlist and at or above
the confidence threshold, binarize each soft mask at 0.5, and emit one
run-length-encoded layer per surviving detection.

The detector is injectable: anything with a ``label_names`` tuple and a
``detect(image) -> detections`` method works.  The default is torchvision's
Mask R-CNN with ResNet-50 FPN and its published weights; torch is imported
only when that backend is actually constructed, so the rest of the module
(and its tests) run without it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

FRAME_SIDE = 128
MAX_CLASSES = 86
MASK_BINARIZE = 0.5
DEFAULT_CONFIDENCE = 0.7
DEFAULT_MODEL = "maskrcnn_resnet50_fpn"

# The 80 everyday-object labels of the common-objects detection corpus, in
# the canonical order the downstream encoder uses for class ids.
DEFAULT_ALLOWLIST: tuple[str, ...] = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella", "handbag",
    "tie", "suitcase", "frisbee", "skis", "snowboard", "sports ball", "kite",
    "baseball bat", "baseball glove", "skateboard", "surfboard",
    "tennis racket", "bottle", "wine glass", "cup", "fork", "knife", "spoon",
    "bowl", "banana", "apple", "sandwich", "orange", "broccoli", "carrot",
    "hot dog", "pizza", "donut", "cake", "chair", "couch", "potted plant",
    "bed", "dining table", "toilet", "tv", "laptop", "mouse", "remote",
    "keyboard", "cell phone", "microwave", "oven", "toaster", "sink",
    "refrigerator", "book", "clock", "vase", "scissors", "teddy bear",
    "hair drier", "toothbrush",
)


class AdapterError(Exception):
    """Unrecoverable adapter failure: bad image, bad model, bad config."""


@dataclass(frozen=True)
class Detection:
    """One model detection in frame coordinates.

    mask is a 128x128 array; float values are soft scores binarized later,
    bool values are taken as already binary.
    """

    name: str
    score: float
    mask: np.ndarray

    def __post_init__(self):
        shape = np.asarray(self.mask).shape
        if shape != (FRAME_SIDE, FRAME_SIDE):
            raise AdapterError(
                f"detection mask must be {FRAME_SIDE}x{FRAME_SIDE}, got {shape}"
            )


class Backend(Protocol):
    """Minimal detector interface the adapter drives."""

    @property
    def label_names(self) -> tuple[str, ...]: ...

    def detect(self, image: np.ndarray) -> Sequence[Detection]: ...


@dataclass(frozen=True)
class AdapterConfig:
    model: str = DEFAULT_MODEL
    confidence: float = DEFAULT_CONFIDENCE
    allowlist_path: str | Path | None = None
    out_path: str | Path | None = None
    allowlist: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise AdapterError(
                f"confidence must be within [0, 1], got {self.confidence}"
            )
        names = (
            load_allowlist(self.allowlist_path)
            if self.allowlist_path is not None
            else DEFAULT_ALLOWLIST
        )
        object.__setattr__(self, "allowlist", names)


def default_allowlist() -> tuple[str, ...]:
    return DEFAULT_ALLOWLIST


def load_allowlist(path: str | Path) -> tuple[str, ...]:
    """Read an allowlist file: one class name per line, blanks ignored."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise AdapterError(f"cannot read allowlist {path}: {exc}") from exc
    names = [line.strip() for line in text.splitlines()]
    names = [n for n in names if n]
    if not names:
        raise AdapterError(f"allowlist {path} is empty")
    if len(names) > MAX_CLASSES:
        raise AdapterError(
            f"allowlist {path} has {len(names)} classes; at most {MAX_CLASSES} allowed"
        )
    if len(set(names)) != len(names):
        raise AdapterError(f"allowlist {path} contains duplicate class names")
    return tuple(names)


def load_image(path: str | Path) -> np.ndarray:
    """Read an image file and resize it to the 128x128 RGB frame."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - Pillow is a hard dependency
        raise AdapterError(f"Pillow is required to read images: {exc}") from exc
    try:
        with Image.open(path) as handle:
            frame = handle.convert("RGB").resize(
                (FRAME_SIDE, FRAME_SIDE), Image.BILINEAR
            )
    except FileNotFoundError as exc:
        raise AdapterError(f"image {path} not found") from exc
    except OSError as exc:
        raise AdapterError(f"cannot read image {path}: {exc}") from exc
    return np.asarray(frame, dtype=np.uint8)


class TorchvisionBackend:
    """Mask R-CNN with ResNet-50 FPN via torchvision.

    pretrained=True loads the published weights (network access or a local
    cache required); pretrained=False builds the architecture with random
    weights, which keeps the full inference path runnable offline.
    """

    def __init__(self, model: str = DEFAULT_MODEL, pretrained: bool = True):
        if model != DEFAULT_MODEL:
            raise AdapterError(f"unknown model {model!r}; only {DEFAULT_MODEL!r} is supported")
        try:
            import torch
            from torchvision.models.detection import (
                MaskRCNN_ResNet50_FPN_Weights,
                maskrcnn_resnet50_fpn,
            )
        except ImportError as exc:
            raise AdapterError(
                f"torch and torchvision are required for the {model} backend: {exc}"
            ) from exc
        meta = MaskRCNN_ResNet50_FPN_Weights.COCO_V1.meta
        self._labels: tuple[str, ...] = tuple(meta["categories"])
        try:
            if pretrained:
                self._model = maskrcnn_resnet50_fpn(
                    weights=MaskRCNN_ResNet50_FPN_Weights.COCO_V1
                )
            else:
                # No backbone weights either, so construction never touches
                # the network.
                self._model = maskrcnn_resnet50_fpn(weights=None, weights_backbone=None)
        except Exception as exc:
            raise AdapterError(f"cannot load model {model}: {exc}") from exc
        self._model.eval()
        self._torch = torch

    @property
    def label_names(self) -> tuple[str, ...]:
        # Placeholder slots ("N/A", background) stay in the tuple so label
        # ids index it directly; they never match an allowlist name.
        return self._labels

    def detect(self, image: np.ndarray) -> list[Detection]:
        torch = self._torch
        # Copy: arrays backed by image files are often read-only.
        tensor = torch.from_numpy(
            np.array(image, dtype=np.uint8)
        ).permute(2, 0, 1).float() / 255.0
        with torch.no_grad():
            output = self._model([tensor])[0]
        detections: list[Detection] = []
        for label, score, mask in zip(
            output["labels"].tolist(),
            output["scores"].tolist(),
            output["masks"],
        ):
            if not 0 <= label < len(self._labels):
                continue
            detections.append(
                Detection(
                    name=self._labels[label],
                    score=float(score),
                    mask=mask[0].numpy(),
                )
            )
        return detections


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


def build_volume(
    detections: Sequence[Detection],
    allowlist: Sequence[str],
    confidence: float,
) -> dict:
    """Filter, binarize, and pack detections into a mask-volume document.

    Detections below the confidence threshold, off the allowlist, or empty
    after binarization are dropped; backend order is preserved otherwise.
    """
    index = {name: i for i, name in enumerate(allowlist)}
    objects = []
    for det in detections:
        if det.score < confidence or det.name not in index:
            continue
        binary = np.asarray(det.mask)
        if binary.dtype != bool:
            binary = binary > MASK_BINARIZE
        if not binary.any():
            continue
        objects.append(
            {
                "class_id": index[det.name],
                "class_name": det.name,
                "mask_rle": encode_rle(binary),
            }
        )
    return {
        "frame": {"width": FRAME_SIDE, "height": FRAME_SIDE},
        "objects": objects,
    }


def write_volume(document: dict, path: str | Path) -> None:
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise AdapterError(f"cannot write volume to {path}: {exc}") from exc


def segment_image(
    image_path: str | Path,
    config: AdapterConfig = AdapterConfig(),
    backend: Backend | None = None,
) -> dict:
    """Segment one image into a mask-volume document.

    Builds the configured torchvision backend when none is injected.  If
    config.out_path is set the document is also written there as JSON.
    """
    if backend is None:
        backend = TorchvisionBackend(config.model)
    missing = [n for n in config.allowlist if n not in backend.label_names]
    if missing:
        raise AdapterError(
            f"allowlist names not in the model label set: {', '.join(sorted(missing))}"
        )
    image = load_image(image_path)
    document = build_volume(backend.detect(image), config.allowlist, config.confidence)
    if config.out_path is not None:
        write_volume(document, config.out_path)
    return document
