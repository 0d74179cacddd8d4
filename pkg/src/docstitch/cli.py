"""Command-line surface: normalize, process, eval, export, inspect-chunks.

Each pipeline stage is independently runnable for debugging.  Config
precedence is CLI flag > environment > config file > default; the backend
auth token is only ever read from the environment and never logged.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from .errors import ConfigError, ConfigNotFound, DocstitchError, SchemaMismatch
from .evaluation import GoldAnnotations, evaluate
from .exporters import export_json, export_markdown, tree_from_json
from .ingest import normalize_elements
from .model import CanonicalDocument, validate_document
from .pipeline import PipelineConfig, run_pipeline

BACKEND_URL_ENV_VAR = "DOCSTITCH_BACKEND_URL"


def _dump(obj: dict, path: Optional[Path] = None) -> None:
    text = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _read_json(path: Path) -> object:
    if not path.exists():
        raise ConfigNotFound(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path} is not valid JSON: {exc}") from exc


def _load_document(path: Path, profile: str) -> CanonicalDocument:
    """Accept a canonical-document JSON or a raw OCR block list."""
    raw = _read_json(path)
    if isinstance(raw, dict) and "elements" in raw and "doc_id" in raw:
        return CanonicalDocument.from_dict(raw)
    result = normalize_elements(raw, profile, doc_id=path.stem)  # type: ignore[arg-type]
    return result.document


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    raw: dict = {}
    if getattr(args, "config", None):
        loaded = _read_json(Path(args.config))
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        raw = loaded
    cfg = PipelineConfig.from_dict(raw)

    env_url = os.environ.get(BACKEND_URL_ENV_VAR)
    if env_url and not getattr(args, "backend_url", None):
        cfg.backend_url = env_url

    overrides = {
        "profile": getattr(args, "profile", None),
        "stride": getattr(args, "stride", None),
        "threshold": getattr(args, "threshold", None),
        "predictor_mode": getattr(args, "predictor", None),
        "backend_url": getattr(args, "backend_url", None),
        "node_chunk_chars": getattr(args, "node_chunk_chars", None),
        "jobs": getattr(args, "jobs", None),
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    fmt = getattr(args, "format", None)
    if fmt:
        cfg.export_formats = ("json", "markdown") if fmt == "both" else (fmt,)
    cfg.__post_init__()  # re-validate after overrides
    return cfg


def cmd_normalize(args: argparse.Namespace) -> int:
    raw = _read_json(Path(args.input))
    result = normalize_elements(raw, args.profile, doc_id=Path(args.input).stem)  # type: ignore[arg-type]
    if args.out:
        Path(args.out).write_text(result.document.to_json(), encoding="utf-8")
    else:
        sys.stdout.write(result.document.to_json())
    if args.report:
        validation = validate_document(result.document)
        _dump(
            {"normalization": result.report.to_dict(), "validation": validation.to_dict()},
            Path(args.report),
        )
    return 0


def _process_one(path: Path, cfg: PipelineConfig, out_dir: Path) -> dict:
    doc = _load_document(path, cfg.profile)
    result = run_pipeline(doc, cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = doc.doc_id

    if "json" in cfg.export_formats:
        (out_dir / f"{stem}.tree.json").write_text(export_json(result.tree), encoding="utf-8")
    if "markdown" in cfg.export_formats:
        (out_dir / f"{stem}.md").write_text(export_markdown(result.tree), encoding="utf-8")
    _dump(result.resolved.merge_log.to_dict(), out_dir / f"{stem}.merge_log.json")
    _dump(
        {name: plan.to_dict() for name, plan in result.chunk_plans.items()},
        out_dir / f"{stem}.chunks.json",
    )
    _dump(
        {"doc_id": stem, **result.predictions.to_dict()},
        out_dir / f"{stem}.predictions.json",
    )
    _dump(result.report.to_dict(), out_dir / f"{stem}.report.json")
    return {"input": path.name, "doc_id": stem, "warnings": len(result.report.warnings)}


def cmd_process(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    out_dir = Path(args.out_dir)
    inputs = [Path(p) for p in args.input]

    if cfg.jobs > 1 and len(inputs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            summaries = list(pool.map(lambda p: _process_one(p, cfg, out_dir), inputs))
    else:
        summaries = [_process_one(p, cfg, out_dir) for p in inputs]

    _dump({"processed": summaries})
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    pred_raw = _read_json(Path(args.pred))
    gold_raw = _read_json(Path(args.gold))
    if not isinstance(pred_raw, dict) or not isinstance(gold_raw, dict):
        raise SchemaMismatch("prediction and gold files must hold JSON objects")
    gold = GoldAnnotations.from_dict(gold_raw)
    try:
        pred_hierarchy = {int(k): int(v) for k, v in pred_raw.get("hierarchy", {}).items()}
        pred_text = [(int(a), int(b)) for a, b in pred_raw.get("text_pairs", [])]
        pred_assoc = [(int(a), int(b)) for a, b in pred_raw.get("assoc_pairs", [])]
        pred_tables = {
            (int(j["upper_idx"]), int(j["lower_idx"])): [int(v) for v in j["judgement"]]
            for j in pred_raw.get("table_judgements", [])
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad prediction file: {exc}") from exc

    retrieved = None
    if args.retrieved:
        loaded = _read_json(Path(args.retrieved))
        if not isinstance(loaded, list):
            raise SchemaMismatch("retrieved boxes file must hold a JSON array")
        retrieved = [(int(p), [float(v) for v in box]) for p, box in loaded]

    # Judgements align on the gold candidate pairs; a missing prediction is
    # an empty (not-a-continuation) vector.
    aligned_preds = [pred_tables.get((u, l), []) for u, l, _ in gold.table_judgements]
    report = evaluate(
        gold,
        pred_hierarchy=pred_hierarchy if gold.hierarchy else None,
        pred_text_pairs=pred_text,
        pred_assoc_pairs=pred_assoc,
        pred_judgements=aligned_preds if gold.table_judgements else None,
        retrieved_boxes=retrieved,
    )
    _dump(report.to_dict(), Path(args.out) if args.out else None)
    sys.stderr.write(report.as_table() + "\n")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    path = Path(args.tree)
    if not path.exists():
        raise ConfigNotFound(f"file not found: {path}")
    tree = tree_from_json(path.read_text(encoding="utf-8"))
    text = export_markdown(tree) if args.format == "markdown" else export_json(tree)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_inspect_chunks(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    doc = _load_document(Path(args.input), cfg.profile)
    from .pipeline import SUBTASKS, _profile_for
    from .chunking import ChunkPlanConfig, plan_chunks

    plans = {}
    for subtask in SUBTASKS:
        plan = plan_chunks(
            _profile_for(doc, subtask),
            ChunkPlanConfig(stride=cfg.stride, threshold=cfg.threshold),
        )
        plans[subtask] = plan.to_dict()
    _dump(plans, Path(args.out) if args.out else None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docstitch",
        description="Stitch page-level OCR output into a document-level tree.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_norm = sub.add_parser("normalize", help="map raw OCR blocks to the canonical schema")
    p_norm.add_argument("input")
    p_norm.add_argument("--profile", default="generic")
    p_norm.add_argument("--out", default=None)
    p_norm.add_argument("--report", default=None, help="write normalization+validation report JSON")
    p_norm.set_defaults(func=cmd_normalize)

    p_proc = sub.add_parser("process", help="run the full pipeline and write artifacts")
    p_proc.add_argument("input", nargs="+")
    p_proc.add_argument("--config", default=None)
    p_proc.add_argument("--profile", default=None)
    p_proc.add_argument("--stride", type=int, default=None)
    p_proc.add_argument("--threshold", type=int, default=None)
    p_proc.add_argument("--predictor", choices=("rules", "remote"), default=None)
    p_proc.add_argument("--backend-url", dest="backend_url", default=None)
    p_proc.add_argument("--node-chunk-chars", dest="node_chunk_chars", type=int, default=None)
    p_proc.add_argument("--out-dir", dest="out_dir", required=True)
    p_proc.add_argument("--format", choices=("json", "markdown", "both"), default=None)
    p_proc.add_argument("--jobs", type=int, default=None)
    p_proc.set_defaults(func=cmd_process)

    p_eval = sub.add_parser("eval", help="score prediction artifacts against gold annotations")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--gold", required=True)
    p_eval.add_argument("--retrieved", default=None, help="retrieved evidence boxes JSON")
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_exp = sub.add_parser("export", help="re-export a tree JSON artifact")
    p_exp.add_argument("tree")
    p_exp.add_argument("--format", choices=("json", "markdown"), default="markdown")
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(func=cmd_export)

    p_chunks = sub.add_parser("inspect-chunks", help="show the chunk plans for a document")
    p_chunks.add_argument("input")
    p_chunks.add_argument("--config", default=None)
    p_chunks.add_argument("--profile", default=None)
    p_chunks.add_argument("--stride", type=int, default=None)
    p_chunks.add_argument("--threshold", type=int, default=None)
    p_chunks.add_argument("--out", default=None)
    p_chunks.set_defaults(func=cmd_inspect_chunks)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps({"error": exc.to_dict()}) + "\n")
        return 2
    except DocstitchError as exc:
        sys.stderr.write(json.dumps({"error": exc.to_dict()}) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
