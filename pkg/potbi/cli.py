"""Command line: python -m potbi <subcommand> ..."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .app import Application
from .catalog.manifest import load_manifest, write_manifest
from .catalog.store import CaseStore
from .common.config import DEFAULT_STRIP_KEYS, load_config
from .common.errors import ConfigError, ParseError, PotbiError, UnknownCase
from .common.telemetry import Telemetry
from .domain.case import LabelTaxonomy
from .ingestion.exporter import export_conversations
from .ingestion.normalizer import ImageNormalizer, MetadataAnonymizer
from .ingestion.service import IngestionService
from .mock.profiles import load_profiles
from .mock.server import serve
from .provenance.audit import verify_audit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PIPELINE = 3
EXIT_AUDIT = 4

logger = logging.getLogger("potbi.cli")


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="RunConfig file (JSON or TOML); defaults to $POTBI_CONFIG")
    parser.add_argument("--quorum", type=float)
    parser.add_argument("--max-parallel", type=int)
    parser.add_argument("--fallback-policy", choices=["fallback_majority", "strict_judge"])
    parser.add_argument("--audit-path")
    parser.add_argument("--seed", type=int)


def _application(args: argparse.Namespace) -> Application:
    return Application.build_default(
        args.config,
        quorum=args.quorum,
        max_parallel=args.max_parallel,
        fallback_policy=args.fallback_policy,
        audit_path=args.audit_path,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="potbi", description="Consortium diagnosis orchestrator")
    parser.add_argument("--version", action="version", version=f"potbi {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="ingest a directory of PNG/JPEG images")
    ingest.add_argument("directory")
    ingest.add_argument("--manifest-out", required=True)
    ingest.add_argument("--config", help="optional RunConfig for taxonomy, strip keys and store")
    ingest.add_argument("--store", help="case store directory (overrides the config)")
    ingest.add_argument("--name", default="")
    ingest.add_argument("--dataset-version", default="")

    export = sub.add_parser("export-conversations", help="write the conversation-format export")
    export.add_argument("--manifest", required=True)
    export.add_argument("--instruction", required=True)
    export.add_argument("--out", required=True)

    diagnose = sub.add_parser("diagnose", help="diagnose one image file or stored case id")
    _add_overrides(diagnose)
    diagnose.add_argument("--case", required=True)

    evaluate = sub.add_parser("evaluate", help="run a labeled manifest and emit the report")
    _add_overrides(evaluate)
    evaluate.add_argument("--manifest", required=True)
    evaluate.add_argument("--out", required=True)

    mock = sub.add_parser("mock-serve", help="serve the mock consortium")
    mock.add_argument("--profiles", required=True)
    mock.add_argument("--truth", required=True, help="JSON map case_id -> label")
    mock.add_argument("--seed", type=int, default=0)
    mock.add_argument("--port", type=int, default=8089)
    mock.add_argument("--host", default="127.0.0.1")
    mock.add_argument("--labels", help="comma-separated taxonomy order for sampling")

    verify = sub.add_parser("audit-verify", help="verify a hash-chained audit log")
    verify.add_argument("--log", required=True)
    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    if args.config:
        config = load_config(args.config)
        taxonomy, strip_keys = config.taxonomy, config.strip_keys
        max_side, store_root = config.max_image_side, config.case_store
    else:
        taxonomy, strip_keys, max_side, store_root = LabelTaxonomy(), DEFAULT_STRIP_KEYS, 1024, "case_store"
    store = CaseStore(args.store or store_root)
    service = IngestionService(
        store, ImageNormalizer(max_side), MetadataAnonymizer(strip_keys), Telemetry()
    )
    records = service.ingest_directory(args.directory, taxonomy)
    manifest_path = Path(args.manifest_out)
    manifest = service.manifest_for(
        records, taxonomy, manifest_path.parent, name=args.name, version=args.dataset_version
    )
    write_manifest(manifest, manifest_path)
    print(json.dumps({"ingested": len(records), "manifest": str(manifest_path)}))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    count = export_conversations(manifest, args.instruction, args.out)
    print(json.dumps({"records": count, "out": args.out}))
    return EXIT_OK


def cmd_diagnose(args: argparse.Namespace) -> int:
    application = _application(args)
    case_path = Path(args.case)
    if case_path.is_file():
        case = application.ingestion_service.ingest_case(
            case_path.read_bytes(), {}, None, application.config.taxonomy
        )
    else:
        stored = application.case_store.get(args.case)
        if stored is None:
            raise UnknownCase(f"{args.case} is neither an image file nor a stored case id")
        case = stored
    final = application.pipeline.run_case(case)
    print(json.dumps(final.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    application = _application(args)
    manifest = load_manifest(args.manifest, application.normalizer)
    report = application.pipeline.run_dataset(manifest, args.out)
    summary = {name: s.accuracy for name, s in sorted(report.per_strategy.items())}
    print(json.dumps({"out": args.out, "accuracy": summary}, indent=2))
    return EXIT_OK


def cmd_mock_serve(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    try:
        with open(args.truth, "r", encoding="utf-8") as fh:
            truth = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"truth file {args.truth} does not parse: {e}") from e
    labels = [s.strip() for s in args.labels.split(",")] if args.labels else None
    handle = serve(profiles, truth, args.seed, port=args.port, host=args.host, labels=labels)
    print(f"mock consortium listening on {handle.base_url}", flush=True)
    handle.wait()
    return EXIT_OK


def cmd_audit_verify(args: argparse.Namespace) -> int:
    result = verify_audit(args.log)
    if result.valid:
        print("valid")
        return EXIT_OK
    print(f"broken at {result.broken_at}: {result.reason}")
    return EXIT_AUDIT


COMMANDS = {
    "ingest": cmd_ingest,
    "export-conversations": cmd_export,
    "diagnose": cmd_diagnose,
    "evaluate": cmd_evaluate,
    "mock-serve": cmd_mock_serve,
    "audit-verify": cmd_audit_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (PotbiError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
