"""Command line entry point: segment one image into a mask-volume file."""

from __future__ import annotations

import argparse
import sys

from .adapter import DEFAULT_CONFIDENCE, AdapterConfig, AdapterError, segment_image


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segment",
        description="Run instance segmentation and write a mask-volume JSON file.",
    )
    parser.add_argument("--image", required=True, help="input image path")
    parser.add_argument("--out", required=True, help="output mask-volume JSON path")
    parser.add_argument(
        "--allowlist",
        default=None,
        help="class allowlist file, one name per line (default: built-in 80 classes)",
    )
    parser.add_argument(
        "--conf",
        type=float,
        default=DEFAULT_CONFIDENCE,
        help=f"confidence threshold (default {DEFAULT_CONFIDENCE})",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(
            confidence=args.conf,
            allowlist_path=args.allowlist,
            out_path=args.out,
        )
        document = segment_image(args.image, config)
    except AdapterError as exc:
        print(f"segment: {exc}", file=sys.stderr)
        return 1
    print(f"{args.out}: {len(document['objects'])} object(s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
