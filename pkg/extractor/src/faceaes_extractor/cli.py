"""Command-line front end for feature extraction."""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import REGION_MODES, ExtractionError, ExtractionJob, extract_features


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="faceaes-extract",
        description="extract IQ/IA/FA feature blocks from an image folder")
    p.add_argument("--images", required=True, help="directory of input images")
    p.add_argument("--scores", required=True,
                   help="CSV with id,score[,label] rows keyed by filename stem")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--region", choices=list(REGION_MODES), default="whole-image")
    p.add_argument("--detector", choices=["blob", "yunet"], default="blob")
    p.add_argument("--model", default=None,
                   help="face detection ONNX model (required with --detector yunet)")
    p.add_argument("--name", default="extracted", help="dataset name")
    p.add_argument("--image-size", type=int, default=224, dest="image_size")
    p.add_argument("--batch-size", type=int, default=16, dest="batch_size")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    job = ExtractionJob(
        image_dir=args.images,
        scores_path=args.scores,
        out_dir=args.out,
        region_mode=args.region,
        detector=args.detector,
        detector_model=args.model,
        dataset_name=args.name,
        image_size=args.image_size,
        batch_size=args.batch_size,
    )
    try:
        manifest = extract_features(job)
    except (ExtractionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"manifest: {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
