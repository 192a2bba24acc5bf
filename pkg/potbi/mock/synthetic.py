"""Seeded synthetic datasets for the mock consortium."""

from __future__ import annotations

import io
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from PIL import Image

from ..catalog.manifest import write_manifest
from ..domain.case import DatasetManifest, LabelTaxonomy, ManifestEntry, digest_bytes
from ..ingestion.normalizer import ImageNormalizer

IMAGE_SIDE = 32


def case_image(index: int, seed: int = 0) -> bytes:
    """A small PNG unique to (index, seed)."""
    rng = random.Random(f"{seed}:{index}")
    img = Image.new("RGB", (IMAGE_SIDE, IMAGE_SIDE), (index % 256, (index // 256) % 256, seed % 256))
    for _ in range(8):
        xy = (rng.randrange(IMAGE_SIDE), rng.randrange(IMAGE_SIDE))
        img.putpixel(xy, (rng.randrange(256), rng.randrange(256), rng.randrange(256)))
    out = io.BytesIO()
    img.save(out, format="PNG")
    return out.getvalue()


@dataclass(frozen=True)
class SyntheticDataset:
    manifest: DatasetManifest
    manifest_path: Path
    truth: dict[str, str]


def write_synthetic_dataset(
    out_dir: str | Path,
    cases: int,
    seed: int = 0,
    taxonomy: Optional[LabelTaxonomy] = None,
    name: str = "synthetic",
) -> SyntheticDataset:
    """Write canonical images, manifest.json and truth.json; ids are content digests."""
    out = Path(out_dir)
    images = out / "images"
    images.mkdir(parents=True, exist_ok=True)
    taxonomy = taxonomy or LabelTaxonomy()
    normalizer = ImageNormalizer()
    rng = random.Random(seed)
    entries = []
    truth: dict[str, str] = {}
    for index in range(cases):
        canonical = normalizer.normalize(case_image(index, seed))
        case_id = digest_bytes(canonical)
        label = rng.choice(taxonomy.labels)
        relative = f"images/case_{index:05d}.png"
        (out / relative).write_bytes(canonical)
        entries.append(ManifestEntry(case_id=case_id, image_path=relative, ground_truth=label))
        truth[case_id] = label
    manifest = DatasetManifest(
        taxonomy=taxonomy,
        entries=tuple(entries),
        name=name,
        version=f"seed-{seed}",
        base_dir=str(out),
    )
    manifest_path = write_manifest(manifest, out / "manifest.json")
    with (out / "truth.json").open("w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return SyntheticDataset(manifest=manifest, manifest_path=manifest_path, truth=truth)
