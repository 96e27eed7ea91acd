"""Object-class allowlist.

The encoder only accepts detections whose class is on the allowlist.  The
default list is the 80 everyday-object labels of the common-objects detection
corpus, which covers every class that has a published codeword.  A deployment
can swap in any list of up to 86 names (one per line in a text file).
"""

from __future__ import annotations

from pathlib import Path

from .errors import ValidationError

MAX_CLASSES = 86

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


def load_allowlist(path: str | Path) -> tuple[str, ...]:
    """Read an allowlist file: one class name per line, blanks ignored."""
    names = [line.strip() for line in Path(path).read_text().splitlines()]
    names = [n for n in names if n]
    if not names:
        raise ValidationError(f"allowlist {path} is empty")
    if len(names) > MAX_CLASSES:
        raise ValidationError(
            f"allowlist {path} has {len(names)} classes; at most {MAX_CLASSES} allowed"
        )
    if len(set(names)) != len(names):
        raise ValidationError(f"allowlist {path} contains duplicate class names")
    return tuple(names)
