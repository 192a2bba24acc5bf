"""
Write a seeded synthetic dataset plus symmetric mock profiles and a run config.

    python scripts/generate_synthetic_manifest.py --out build/synthetic --cases 200 --members 5

Then serve the consortium and evaluate against it:

    python -m potbi mock-serve --profiles build/synthetic/profiles.json \
        --truth build/synthetic/truth.json --seed 7 --port 8089
    python -m potbi evaluate --config build/synthetic/config.json \
        --manifest build/synthetic/manifest.json --out build/report
"""

import argparse
import json
from pathlib import Path

from potbi.domain.case import LabelTaxonomy
from potbi.mock.profiles import dump_profiles, symmetric_profile
from potbi.mock.synthetic import write_synthetic_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--out", required=True)
    parser.add_argument("--cases", type=int, default=200)
    parser.add_argument("--members", type=int, default=5)
    parser.add_argument("--accuracy", type=float, default=0.8)
    parser.add_argument("--judge-accuracy", type=float, default=0.9)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--base-url", default="http://127.0.0.1:8089")
    args = parser.parse_args()

    out = Path(args.out)
    taxonomy = LabelTaxonomy()
    dataset = write_synthetic_dataset(out, args.cases, seed=args.seed, taxonomy=taxonomy)
    styles = ["json", "prose", "noisy"]
    profiles = {
        f"vlm-{i + 1:02d}": symmetric_profile(taxonomy.labels, args.accuracy, style=styles[i % 3])
        for i in range(args.members)
    }
    profiles["judge"] = symmetric_profile(taxonomy.labels, args.judge_accuracy)
    dump_profiles(profiles, out / "profiles.json")

    config = {
        "endpoints": [
            {"model_id": name, "base_url": args.base_url, "model_name": name}
            for name in profiles
            if name != "judge"
        ],
        "judge_endpoint": {"model_id": "judge", "base_url": args.base_url, "model_name": "judge"},
        "seed": args.seed,
        "audit_path": str(out / "audit.jsonl"),
        "case_store": str(out / "case_store"),
    }
    with (out / "config.json").open("w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")
    print(f"Wrote {len(dataset.truth)} cases, {len(profiles)} profiles and config to {out}")


if __name__ == "__main__":
    main()
