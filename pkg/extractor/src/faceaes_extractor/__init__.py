"""Face-aware CNN feature extraction producing FVEC blocks.

Turns an image folder plus a score file into the three feature blocks
(IQ, IA, FA) and manifest consumed by the faceaes evaluation tool,
optionally cropping each image to its enlarged largest-face box first.
"""

from .backbones import (
    DEFAULT_SEEDS,
    BackboneError,
    ImageBackbone,
    default_backbones,
    make_backbone,
)
from .boxes import Box, clamp, enlarge, largest, pixel_bounds
from .detect import detect_face
from .fvec_io import write_fvec, write_manifest
from .pipeline import (
    ExtractionError,
    ExtractionJob,
    extract_features,
    list_images,
    load_scores,
)

__version__ = "0.1.0"

__all__ = [
    "BackboneError",
    "Box",
    "DEFAULT_SEEDS",
    "ExtractionError",
    "ExtractionJob",
    "ImageBackbone",
    "clamp",
    "default_backbones",
    "detect_face",
    "enlarge",
    "extract_features",
    "largest",
    "list_images",
    "load_scores",
    "make_backbone",
    "pixel_bounds",
    "write_fvec",
    "write_manifest",
]
