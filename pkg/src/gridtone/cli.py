"""Command-line entry point tying the modules together.

Subcommands: encode a mask volume to a WAV plus manifest, generate or
validate a codebook, decode a WAV back to object reports, and serve the
trainer over HTTP.  A JSON config file (or the GRIDTONE_CONFIG variable)
supplies synthesis settings and default paths; flags override it.

Exit codes: 0 success, 1 validation or domain error, 2 I/O or file
format error, 3 decode failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import codebook as codebook_mod
from .classes import DEFAULT_ALLOWLIST, load_allowlist
from .decoder import DEFAULT_DECODER, decode_frame
from .errors import (
    CapacityError,
    DecodeError,
    DomainError,
    FormatError,
    ValidationError,
)
from .maskmodel import DEFAULT_THRESHOLD
from .mixer import read_wav
from .pipeline import encode_file, manifest_path_for
from .synth import DEFAULT_CONFIG, SynthConfig

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_DECODE = 3

_SYNTH_KEYS = {
    "sample_rate",
    "frame_seconds",
    "timbre",
    "attack_ms",
    "release_ms",
    "tsm_window",
    "tsm_hop",
    "direct_synthesis",
}
_PATH_KEYS = {"codebook", "allowlist"}
_VALUE_KEYS = {"threshold", "min_distance"}


def load_config_file(path: str | None) -> dict:
    """Read the JSON config document, honoring GRIDTONE_CONFIG as fallback."""
    if path is None:
        path = os.environ.get("GRIDTONE_CONFIG")
    if not path:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"config {path} must hold a JSON object")
    unknown = set(doc) - _SYNTH_KEYS - _PATH_KEYS - _VALUE_KEYS
    if unknown:
        raise ValidationError(f"config {path} has unknown keys: {sorted(unknown)}")
    return doc


def synth_config_from(doc: dict, sample_rate: int | None = None) -> SynthConfig:
    """Default synthesis settings, then config-file keys, then flag override."""
    kwargs = {key: doc[key] for key in _SYNTH_KEYS if key in doc}
    if "timbre" in kwargs:
        kwargs["timbre"] = tuple(float(v) for v in kwargs["timbre"])
    if sample_rate is not None:
        kwargs["sample_rate"] = sample_rate
    if not kwargs:
        return DEFAULT_CONFIG
    return SynthConfig(**kwargs)


def _resolve_codebook(flag: str | None, doc: dict) -> codebook_mod.Codebook:
    path = flag if flag is not None else doc.get("codebook")
    if path is not None:
        return codebook_mod.Codebook.load(path)
    allowlist = doc.get("allowlist")
    names = load_allowlist(allowlist) if allowlist else None
    return codebook_mod.default_codebook(names)


def _resolve_allowlist(doc: dict) -> tuple[str, ...]:
    path = doc.get("allowlist")
    return load_allowlist(path) if path else DEFAULT_ALLOWLIST


def cmd_encode(args: argparse.Namespace) -> int:
    doc = load_config_file(args.config)
    config = synth_config_from(doc, args.sample_rate)
    threshold = args.threshold
    if threshold is None:
        threshold = doc.get("threshold", DEFAULT_THRESHOLD)
    book = _resolve_codebook(args.codebook, doc)
    result = encode_file(
        args.volume,
        book,
        args.out,
        config,
        float(threshold),
        allowlist=_resolve_allowlist(doc),
    )
    manifest = manifest_path_for(args.out)
    print(f"wrote {args.out} and {manifest} ({len(result.streams)} objects)")
    return EXIT_OK


def cmd_codebook_gen(args: argparse.Namespace) -> int:
    doc = load_config_file(args.config)
    classes = _resolve_allowlist(doc)
    min_distance = args.min_distance
    if min_distance is None:
        min_distance = doc.get("min_distance")
    if min_distance is None:
        # No explicit separation requested: take the widest that still fits.
        book = codebook_mod.default_codebook(classes)
    else:
        book = codebook_mod.generate(
            classes,
            int(min_distance),
            seed_entries=codebook_mod.published_codebook(),
        )
    if args.out:
        book.save(args.out)
        print(f"wrote {args.out} ({len(book.entries)} entries, "
              f"min_distance {book.min_distance})")
    else:
        sys.stdout.write(book.to_json())
    return EXIT_OK


def _format_min(value: float) -> str:
    return "inf" if math.isinf(value) else str(int(value))


def cmd_codebook_validate(args: argparse.Namespace) -> int:
    book = codebook_mod.Codebook.load(args.book)
    report = codebook_mod.validate(book, args.min_distance)
    print(f"min={_format_min(report.min_distance_observed)}, "
          f"violations={len(report.violations)}")
    for a, b, d in report.violations:
        print(f"violation: ({a}, {b}) distance={d} < {report.threshold}")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_decode(args: argparse.Namespace) -> int:
    doc = load_config_file(args.config)
    config = synth_config_from(doc, args.sample_rate)
    book = _resolve_codebook(args.codebook, doc)
    audio = read_wav(args.wav)
    if audio.sample_rate != config.sample_rate:
        raise ValidationError(
            f"wav sample rate {audio.sample_rate} does not match configured "
            f"{config.sample_rate}; pass --sample-rate"
        )
    decodings = decode_frame(audio.samples, config, book, DEFAULT_DECODER)
    if not decodings:
        raise DecodeError("frame is silent: nothing to decode")
    report = {
        "objects": [
            {
                "class_name": d.class_name,
                "codeword": "".join(str(v) for v in d.digits),
                "rows": sorted(d.rows),
                "col_start": d.col_start,
                "width": d.width,
                "confidence": round(min(d.confidence), 3),
            }
            for d in decodings
        ]
    }
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve
    from .trainer import Trainer

    doc = load_config_file(args.config)
    config = synth_config_from(doc)
    book = None
    path = args.codebook if args.codebook is not None else doc.get("codebook")
    if path is not None:
        book = codebook_mod.Codebook.load(path)
    trainer = Trainer(codebook=book, config=config, store_path=args.store)
    serve(trainer, args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridtone",
        description="Image-to-audio sonification: masks to notes and back.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_encode = sub.add_parser("encode", help="mask volume JSON -> WAV + manifest")
    p_encode.add_argument("volume", help="mask-volume JSON path")
    p_encode.add_argument("--out", required=True, help="output WAV path")
    p_encode.add_argument("--codebook", help="codebook JSON path")
    p_encode.add_argument("--config", help="config JSON path")
    p_encode.add_argument("--threshold", type=float,
                          help="tile coverage threshold (default 0.10)")
    p_encode.add_argument("--sample-rate", type=int, help="output sample rate")
    p_encode.set_defaults(func=cmd_encode)

    p_book = sub.add_parser("codebook", help="generate or validate codebooks")
    book_sub = p_book.add_subparsers(dest="action", required=True)

    p_gen = book_sub.add_parser("gen", help="generate a codebook for the allowlist")
    p_gen.add_argument("--out", help="output JSON path (default: stdout)")
    p_gen.add_argument("--min-distance", type=int,
                       help="required pairwise separation")
    p_gen.add_argument("--config", help="config JSON path")
    p_gen.set_defaults(func=cmd_codebook_gen)

    p_val = book_sub.add_parser("validate", help="check pairwise separation")
    p_val.add_argument("book", help="codebook JSON path")
    p_val.add_argument("--min-distance", type=int,
                       help="threshold (default: the book's declared value)")
    p_val.set_defaults(func=cmd_codebook_validate)

    p_decode = sub.add_parser("decode", help="WAV -> object report JSON")
    p_decode.add_argument("wav", help="input WAV path")
    p_decode.add_argument("--codebook", help="codebook JSON path")
    p_decode.add_argument("--config", help="config JSON path")
    p_decode.add_argument("--sample-rate", type=int, help="expected sample rate")
    p_decode.set_defaults(func=cmd_decode)

    p_serve = sub.add_parser("serve", help="run the trainer HTTP service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--store", help="append-only session store path")
    p_serve.add_argument("--codebook", help="codebook JSON path")
    p_serve.add_argument("--config", help="config JSON path")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DomainError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DecodeError as exc:
        print(f"decode failure: {exc}", file=sys.stderr)
        return EXIT_DECODE


if __name__ == "__main__":
    sys.exit(main())
