"""osr-export: dump a fine-tuned classifier's features into a feature pack.

Exit codes: 0 success, 2 validation error, 3 export/data error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExportError, JobValidationError
from .extract import export_features
from .job import ExportJob, read_known_classes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osr-export",
        description=(
            "Extract penultimate features, head weights/bias, logits and labels "
            "from a fine-tuned sequence-classification checkpoint and write a "
            "version-1 feature pack."
        ),
    )
    parser.add_argument("--model", required=True, help="checkpoint path or model id")
    parser.add_argument("--dataset", required=True, help="dataset dir, file, or hub name")
    parser.add_argument("--text-field", required=True)
    parser.add_argument("--label-field", required=True)
    parser.add_argument(
        "--known-classes", required=True, metavar="FILE",
        help="file with one known class name per line; order fixes class ids",
    )
    parser.add_argument("--out", required=True, metavar="DIR")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--max-length", type=int, default=128)
    parser.add_argument(
        "--policy", choices=["first", "drop"], default="first",
        help="multi-label documents: keep first listed known class, or drop them",
    )
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = ExportJob(
            model_path=args.model,
            dataset=args.dataset,
            text_field=args.text_field,
            label_field=args.label_field,
            known_classes=read_known_classes(args.known_classes),
            out_dir=args.out,
            batch_size=args.batch_size,
            max_length=args.max_length,
            multi_label_policy=args.policy,
            device=args.device,
        )
        export_features(job)
    except JobValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExportError, OSError) as exc:
        print(f"export error: {exc}", file=sys.stderr)
        return 3
    print(f"exported pack -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
