"""Image canonicalization and metadata anonymization."""

from __future__ import annotations

import io
import logging
from typing import Iterable, Mapping

from PIL import Image, UnidentifiedImageError

from ..common.errors import UndecodableImage

SUPPORTED_FORMATS = {"PNG", "JPEG"}
CANONICAL_MEDIA_TYPE = "image/png"


class ImageNormalizer:
    """Re-encodes PNG/JPEG input as PNG with the longest side clamped."""

    def __init__(self, max_side: int = 1024):
        self.max_side = max_side

    def normalize(self, data: bytes) -> bytes:
        logger = logging.getLogger(self.__class__.__name__)
        try:
            with Image.open(io.BytesIO(data)) as img:
                if img.format not in SUPPORTED_FORMATS:
                    raise UndecodableImage(f"unsupported image format {img.format}")
                img.load()
                canonical = img.convert("RGBA" if "A" in img.getbands() else "RGB")
        except (UnidentifiedImageError, OSError, SyntaxError) as e:
            logger.error(f"Error decoding image: {e}")
            raise UndecodableImage(str(e)) from e
        width, height = canonical.size
        longest = max(width, height)
        if longest > self.max_side:
            scale = self.max_side / longest
            size = (max(1, round(width * scale)), max(1, round(height * scale)))
            canonical = canonical.resize(size, Image.Resampling.LANCZOS)
        out = io.BytesIO()
        # no ancillary chunks, so identical pixels give identical bytes
        canonical.save(out, format="PNG", optimize=False)
        return out.getvalue()


class MetadataAnonymizer:
    """Drops strip-listed keys (case-insensitive) from source metadata."""

    def __init__(self, strip_keys: Iterable[str]):
        self.strip_keys = frozenset(k.strip().lower() for k in strip_keys)

    def anonymize(self, meta: Mapping[str, object]) -> dict[str, str]:
        return {
            str(k): str(v)
            for k, v in meta.items()
            if str(k).strip().lower() not in self.strip_keys
        }
