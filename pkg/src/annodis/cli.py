"""Command-line entry point for the whole pipeline.

Subcommands: ingest, train, ensemble train|sweep, prompts export, eval,
survey build|serve|analyze, synth. Exit codes: 0 success, 1 usage error,
2 data error. All randomness flows from a single --seed flag; a JSON
config file (--config) can pre-set any flag, with explicit flags taking
precedence. Every JSON report embeds the resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import ensemble as ens
from . import evalstats, prompts, survey, synthetic
from .corpus import LabelSchema, ingest, load_jsonl, save_jsonl
from .errors import AnnodisError
from .featurize import FeatureSpace
from .model import (
    TargetKind,
    TrainConfig,
    load_model,
    predict_corpus,
    save_model,
    train,
)

TARGETS = {
    "hard": TargetKind.HARD_MAJORITY,
    "soft": TargetKind.SOFT_DISTRIBUTION,
    "conditioned": TargetKind.CONDITIONED,
}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _schema_from_args(args) -> LabelSchema:
    if args.schema:
        with open(args.schema, encoding="utf-8") as fh:
            doc = json.load(fh)
        return LabelSchema(doc["task_id"], tuple(doc["labels"]))
    if args.labels:
        return LabelSchema(args.task, tuple(t.strip() for t in args.labels.split(",")))
    raise UsageError("either --schema or --labels is required")


def _space_from_args(args) -> FeatureSpace:
    if args.no_char_ngrams:
        return FeatureSpace(args.dim, None, None, not args.keep_case)
    return FeatureSpace(args.dim, args.ngram_min, args.ngram_max, not args.keep_case)


def _train_config(args) -> TrainConfig:
    return TrainConfig(args.learning_rate, args.epochs, args.batch_size, args.l2, args.seed)


def _add_schema_flags(p):
    p.add_argument("--schema", help="JSON file with {task_id, labels}")
    p.add_argument("--labels", help="comma-separated label names (alternative to --schema)")
    p.add_argument("--task", default="task", help="task id used with --labels")


def _add_space_flags(p):
    p.add_argument("--dim", type=int, default=1 << 18, help="hashed feature dimension (power of two)")
    p.add_argument("--ngram-min", type=int, default=3)
    p.add_argument("--ngram-max", type=int, default=5)
    p.add_argument("--no-char-ngrams", action="store_true", help="word features only")
    p.add_argument("--keep-case", action="store_true", help="disable lowercasing")


def _add_train_flags(p):
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)


def _resolved_config(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> Parser:
    parser = Parser(prog="annodis", description=__doc__)
    parser.add_argument("--config", help="JSON file of flag defaults (flags override)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a CSV corpus and write canonical JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--shape", choices=["slots", "identified"], required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--default-split", choices=["train", "validation", "test"])
    _add_schema_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a softmax classifier")
    p.add_argument("--corpus", required=True, help="canonical corpus JSONL")
    p.add_argument("--target", choices=sorted(TARGETS), required=True)
    p.add_argument("--output", required=True, help="model JSON path")
    _add_schema_flags(p)
    _add_space_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ensemble", help="per-stream sub-models")
    esub = p.add_subparsers(dest="subcommand", required=True)
    pe = esub.add_parser("train", help="train one sub-model per label stream")
    pe.add_argument("--corpus", required=True)
    pe.add_argument("--mode", choices=["identified", "slots"], required=True)
    pe.add_argument("--outdir", required=True)
    pe.add_argument("-n", type=int, default=3, help="selection size recorded in the manifest")
    _add_schema_flags(pe)
    _add_space_flags(pe)
    _add_train_flags(pe)
    pe.set_defaults(func=cmd_ensemble_train)
    ps = esub.add_parser("sweep", help="mean test cross entropy per top-n")
    ps.add_argument("--corpus", required=True)
    ps.add_argument("--manifest", required=True)
    ps.add_argument("--n", required=True, help="inclusive range, e.g. 3..5")
    ps.add_argument("--output", required=True, help="CSV path")
    _add_schema_flags(ps)
    ps.set_defaults(func=cmd_ensemble_sweep)

    p = sub.add_parser("prompts", help="instruction dataset export")
    psub = p.add_subparsers(dest="subcommand", required=True)
    pp = psub.add_parser("export")
    pp.add_argument("--corpus", required=True)
    pp.add_argument("--template", required=True)
    pp.add_argument("--output", required=True)
    pp.add_argument("--annotator", help="restrict to one annotator id")
    _add_schema_flags(pp)
    pp.set_defaults(func=cmd_prompts_export)

    p = sub.add_parser("eval", help="cross-entropy report for a trained model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True)
    _add_schema_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("survey", help="preference survey tooling")
    ssub = p.add_subparsers(dest="subcommand", required=True)
    pb = ssub.add_parser("build")
    pb.add_argument("--corpus", required=True)
    pb.add_argument("--baseline", required=True, help="baseline model JSON")
    pb.add_argument("--multilabel", required=True, help="soft-target model JSON")
    pb.add_argument("-k", type=int, default=10)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--output", required=True)
    _add_schema_flags(pb)
    pb.set_defaults(func=cmd_survey_build)
    pv = ssub.add_parser("serve")
    pv.add_argument("--bundle", required=True)
    pv.add_argument("--log", required=True)
    pv.add_argument("--host", default="127.0.0.1")
    pv.add_argument("--port", type=int, default=8000)
    pv.add_argument("--static", help="directory with the survey UI build")
    pv.set_defaults(func=cmd_survey_serve)
    pa = ssub.add_parser("analyze")
    pa.add_argument("--counts", help="baseline,multi_label,no_difference")
    pa.add_argument("--log", help="response JSONL (needs --bundle)")
    pa.add_argument("--bundle")
    pa.add_argument("--output", help="optional JSON report path")
    pa.set_defaults(func=cmd_survey_analyze)

    p = sub.add_parser("synth", help="generate the seeded synthetic corpus")
    p.add_argument("--output", required=True)
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schema-out", help="also write the schema JSON here")
    p.set_defaults(func=cmd_synth)

    return parser


def cmd_ingest(args):
    schema = _schema_from_args(args)
    corpus = ingest(args.input, args.shape, schema, args.default_split)
    save_jsonl(corpus, args.output)
    print(f"wrote {len(corpus.samples)} samples to {args.output}")


def cmd_train(args):
    schema = _schema_from_args(args)
    corpus = load_jsonl(args.corpus, schema)
    kind = TARGETS[args.target]
    config = _train_config(args)
    model = train(corpus, _space_from_args(args), kind, config)
    save_model(model, args.output, config, kind)
    print(f"wrote model to {args.output}")


def cmd_ensemble_train(args):
    import os

    schema = _schema_from_args(args)
    corpus = load_jsonl(args.corpus, schema)
    config = _train_config(args)
    records = ens.train_ensemble(corpus, _space_from_args(args), config, args.mode)
    os.makedirs(args.outdir, exist_ok=True)
    paths = {}
    for record in records:
        path = os.path.join(args.outdir, f"stream_{record.stream_id}.json")
        save_model(record.model, path, config, TargetKind.HARD_MAJORITY)
        paths[record.stream_id] = path
    ens.save_manifest(records, paths, args.n, os.path.join(args.outdir, "manifest.json"))
    print(f"wrote {len(records)} sub-models and manifest to {args.outdir}")


def cmd_ensemble_sweep(args):
    schema = _schema_from_args(args)
    corpus = load_jsonl(args.corpus, schema)
    manifest = ens.load_manifest(args.manifest)
    records = []
    space = None
    for entry in manifest["streams"]:
        model, _, _ = load_model(entry["model_path"])
        space = model.space
        records.append(ens.SubModelRecord(entry["stream_id"], model, entry["validation_accuracy"]))
    lo, hi = args.n.split("..") if ".." in args.n else (args.n, args.n)
    rows = ens.sweep_top_n(records, corpus, (int(lo), int(hi)), space)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("n,mean_cross_entropy\n")
        for n, ce in rows:
            fh.write(f"{n},{ce:.6f}\n")
    print(f"wrote {len(rows)} rows to {args.output}")


def cmd_prompts_export(args):
    schema = _schema_from_args(args)
    corpus = load_jsonl(args.corpus, schema)
    template = prompts.load_template(args.template)
    count = prompts.export_dataset(corpus, template, args.output, args.annotator)
    print(f"wrote {count} records to {args.output}")


def cmd_eval(args):
    schema = _schema_from_args(args)
    corpus = load_jsonl(args.corpus, schema)
    model, _, _ = load_model(args.model)
    test = corpus.split("test")
    report = evalstats.evaluate(predict_corpus(model, test), test, schema)
    doc = report.to_dict()
    doc["config"] = _resolved_config(args)
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"mean cross entropy {report.mean:.4f}, accuracy {report.accuracy_vs_majority:.4f}")


def cmd_survey_build(args):
    schema = _schema_from_args(args)
    corpus = load_jsonl(args.corpus, schema)
    baseline, _, _ = load_model(args.baseline)
    multilabel, _, _ = load_model(args.multilabel)
    bundle = survey.build_bundle(corpus, baseline, multilabel, args.k, args.seed)
    survey.save_bundle(bundle, args.output)
    print(f"wrote bundle of {len(bundle.items)} items to {args.output}")


def cmd_survey_serve(args):
    import uvicorn

    bundle = survey.load_bundle(args.bundle)
    log = survey.ResponseLog(args.log)
    app = survey.create_app(bundle, log, args.static)
    uvicorn.run(app, host=args.host, port=args.port)


def cmd_survey_analyze(args):
    if args.counts:
        parts = [int(x) for x in args.counts.split(",")]
        if len(parts) != 3:
            raise UsageError("--counts needs three comma-separated integers")
        counts = evalstats.PreferenceCounts(*parts)
    elif args.log and args.bundle:
        bundle = survey.load_bundle(args.bundle)
        log = survey.ResponseLog(args.log)
        counts = survey.tally(log.read_all(), bundle)
    else:
        raise UsageError("need --counts or both --log and --bundle")
    result = evalstats.preference_test(counts)
    print(evalstats.render_table(result))
    if args.output:
        doc = result.to_dict()
        doc["config"] = _resolved_config(args)
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_synth(args):
    corpus = synthetic.generate_corpus(args.samples, args.seed)
    save_jsonl(corpus, args.output)
    if args.schema_out:
        with open(args.schema_out, "w", encoding="utf-8") as fh:
            json.dump(
                {"task_id": corpus.schema.task_id, "labels": list(corpus.schema.labels)}, fh
            )
            fh.write("\n")
    print(f"wrote {len(corpus.samples)} synthetic samples to {args.output}")


def _iter_parsers(parser):
    yield parser
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                yield from _iter_parsers(sub)


def _apply_config_file(parser: Parser, argv: list[str]) -> None:
    """Use a JSON file as flag defaults; explicit flags still win."""
    if "--config" not in argv:
        return
    path = argv[argv.index("--config") + 1]
    with open(path, encoding="utf-8") as fh:
        defaults = json.load(fh)
    if not isinstance(defaults, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    mapped = {k.replace("-", "_"): v for k, v in defaults.items()}
    parsers = list(_iter_parsers(parser))
    known = {action.dest for p in parsers for action in p._actions}
    unknown = set(mapped) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for p in parsers:
        local = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in mapped.items() if k in local})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (AnnodisError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
