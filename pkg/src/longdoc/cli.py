"""Command-line interface: gen, segment, train, eval, compare, serve-info.

Exit codes: 0 success, 2 input error, 3 config/data contract error,
4 remote-provider failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .classifier import ClassifierError, load_checkpoint, save_checkpoint
from .corpus import (
    CorpusError,
    SplitManifest,
    generate_synthetic,
    load_corpus,
    save_corpus,
    split_stratified,
)
from .embed import EmbedError, TransportError
from .metrics import MetricsError
from .pipeline import (
    ConfigError,
    PipelineConfig,
    ProviderSpec,
    build_provider,
    config_hash,
    evaluate_pipeline,
    report_metadata,
    segment_corpus,
    train_pipeline,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONTRACT = 3
EXIT_REMOTE = 4


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    raw: dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CorpusError(f"cannot read config {args.config}: {exc}") from None
    # flag overrides win over the config file
    if getattr(args, "strategy", None):
        raw["strategy"] = args.strategy
    if getattr(args, "workers", None) is not None:
        raw["workers"] = args.workers
    provider = dict(raw.get("provider", {}))
    if getattr(args, "provider", None):
        provider["kind"] = args.provider
    if getattr(args, "remote_url", None):
        provider["kind"] = "remote"
        provider["url"] = args.remote_url
    if provider:
        raw["provider"] = provider
    if getattr(args, "seed", None) is not None:
        train_cfg = dict(raw.get("train", {}))
        train_cfg["seed"] = args.seed
        raw["train"] = train_cfg
    config = PipelineConfig.from_dict(raw)
    if config.strategy == "mmr" and config.mmr is None:
        raise ConfigError("strategy 'mmr' requires an mmr config section")
    return config


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cmd_gen(args: argparse.Namespace) -> int:
    docs, _ = generate_synthetic(
        n_classes=args.classes,
        docs_per_class=args.docs_per_class,
        sentences_per_doc=args.sentences_per_doc,
        signal_ratio=args.signal_ratio,
        seed=args.seed if args.seed is not None else 0,
    )
    save_corpus(docs, args.out)
    print(f"wrote {len(docs)} documents to {args.out}")
    return EXIT_OK


def _cmd_segment(args: argparse.Namespace) -> int:
    config = _load_config(args)
    docs, _ = load_corpus(args.corpus)
    sentences = segment_corpus(docs, config)
    with open(args.out, "w", encoding="utf-8") as fh:
        for doc in docs:
            for s in sentences[doc.doc_id]:
                fh.write(
                    json.dumps(
                        {"doc_id": s.doc_id, "index": s.index, "text": s.text, "tokens": s.token_count},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    print(f"wrote sentences for {len(docs)} documents to {args.out}")
    return EXIT_OK


def _resolve_manifest(args: argparse.Namespace, docs, config: PipelineConfig) -> SplitManifest:
    if args.manifest and Path(args.manifest).exists():
        return SplitManifest.load(args.manifest)
    manifest = split_stratified(docs, seed=config.train.seed)
    if args.manifest:
        manifest.save(args.manifest)
    return manifest


def _cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args)
    docs, vocab = load_corpus(args.corpus)
    if vocab is None:
        raise CorpusError(f"{args.corpus} has no labels; training needs a labeled corpus")
    manifest = _resolve_manifest(args, docs, config)
    result = train_pipeline(docs, vocab, manifest, config)
    provider_name = build_provider(config.provider).info.name
    save_checkpoint(result.head, config.train, provider_name, args.out)
    metadata = report_metadata(config)
    metadata["epochs"] = [
        {"epoch": m.epoch, "train_loss": m.train_loss, "valid_macro_f1": m.valid_macro_f1}
        for m in result.history
    ]
    _write_json(args.metrics_out, metadata)
    print(f"checkpoint written to {args.out}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args)
    docs, vocab = load_corpus(args.corpus)
    if vocab is None:
        raise CorpusError(f"{args.corpus} has no labels; evaluation needs gold labels")
    manifest = SplitManifest.load(args.manifest)
    head, _, _ = load_checkpoint(args.checkpoint)
    # evaluate against the label space the head was trained on
    report, preds = evaluate_pipeline(docs, head.vocab, manifest, head, config, split=args.split)
    payload = report_metadata(config)
    payload["report"] = report.to_dict()
    _write_json(args.out, payload)
    if args.predictions:
        with open(args.predictions, "w", encoding="utf-8") as fh:
            for p in preds:
                fh.write(
                    json.dumps(
                        {
                            "id": p.doc_id,
                            "pred": p.final_class,
                            "dist": [float(x) for x in p.doc_distribution],
                            "strategy": p.strategy,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    print(report.format_table())
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    if len(args.configs) < 2:
        raise ConfigError("compare needs at least 2 config files")
    docs, vocab = load_corpus(args.corpus)
    if vocab is None:
        raise CorpusError(f"{args.corpus} has no labels")
    manifest = SplitManifest.load(args.manifest)
    entries = []
    for path in args.configs:
        config = PipelineConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        result = train_pipeline(docs, vocab, manifest, config)
        report, _ = evaluate_pipeline(docs, vocab, manifest, result.head, config)
        entry = report_metadata(config)
        entry["config_file"] = str(path)
        entry["report"] = report.to_dict()
        entries.append(entry)
    entries.sort(key=lambda e: -e["report"]["macro_f1"])
    payload = {"version": __version__, "ranking": entries}
    _write_json(args.out, payload)
    for rank, entry in enumerate(entries, start=1):
        print(f"{rank}. {entry['strategy']:<10} macro_f1={entry['report']['macro_f1']:.4f}")
    return EXIT_OK


def _cmd_serve_info(args: argparse.Namespace) -> int:
    provider = build_provider(ProviderSpec(kind="remote", url=args.remote_url, dim=0))
    info = provider.info
    print(json.dumps({"name": info.name, "dim": info.dim}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longdoc", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="pipeline config JSON (flags override)")
        p.add_argument("--strategy", choices=("aggregate", "mmr", "truncate"))
        p.add_argument("--seed", type=int)
        p.add_argument("--provider", choices=("reference", "remote"))
        p.add_argument("--remote-url", dest="remote_url")
        p.add_argument("--workers", type=int)

    p = sub.add_parser("gen", help="generate a synthetic labeled corpus")
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--docs-per-class", type=int, default=50)
    p.add_argument("--sentences-per-doc", type=int, default=20)
    p.add_argument("--signal-ratio", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("segment", help="segment a corpus into sentences JSONL")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_segment)

    p = sub.add_parser("train", help="train a classification head")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", help="split manifest JSON; created if missing")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--metrics-out", dest="metrics_out", help="per-epoch metrics JSON")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", default="test", choices=("train", "valid", "test"))
    p.add_argument("--out", help="report JSON path (stdout when omitted)")
    p.add_argument("--predictions", help="per-document predictions JSONL")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("compare", help="train+evaluate several configs and rank them")
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--configs", nargs="+", required=True)
    p.add_argument("--out", help="comparison JSON path")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("serve-info", help="probe a remote embedding provider")
    p.add_argument("--remote-url", dest="remote_url", required=True)
    p.set_defaults(fn=_cmd_serve_info)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (TransportError, EmbedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (ConfigError, ClassifierError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (CorpusError, MetricsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    raise SystemExit(main())
