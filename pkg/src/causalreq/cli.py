"""Command-line entry points for the analysis pipeline and the service.

Subcommands: detect, agreement, prevalence, cue-stats, train, evaluate,
lifecycle, serve. Every run writes a manifest next to its outputs; exit
codes are 0 on success, 1 on validation errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import __version__
from .agreement import AgreementError, agreement_report
from .corpus import CorpusError, load_corpus, random_undersample
from .detector import (
    ClassifierSpec,
    DetectorError,
    load_external_predictions,
    load_model,
    predict,
    rule_based_classify,
    save_model,
    train_classifier,
    write_predictions,
)
from .evaluation import EvaluationError, evaluate, repeated_cv
from .features import featurize
from .lexicon import (
    LexiconError,
    classify_ambiguity,
    default_lexicon,
    domain_cue_tables,
    load_lexicon,
    scan_counts,
)
from .lifecycle import (
    LifecycleError,
    derive_features,
    hypothesis_suite,
    load_requirements,
    preprocess,
    violin_series_csv,
)
from .prevalence import (
    PrevalenceError,
    category_distribution,
    domain_causal_ratios,
    ratio_series_csv,
    stratified_report,
)
from .reports import build_manifest, write_json, write_manifest, write_text

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

_VALIDATION_ERRORS = (
    CorpusError,
    LexiconError,
    DetectorError,
    EvaluationError,
    PrevalenceError,
    LifecycleError,
    AgreementError,
    ValueError,
)


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _load_lexicon(path: Optional[str]):
    return load_lexicon(path) if path else default_lexicon()


def _manifest(args, command: str, inputs: list[str], outputs: list[str], parameters: dict) -> None:
    manifest = build_manifest(
        command=command,
        inputs=inputs,
        outputs=outputs,
        seed=getattr(args, "seed", None),
        parameters=parameters,
    )
    write_manifest(manifest, os.path.join(args.out, "manifest.json"))


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def cmd_detect(args) -> int:
    corpus = load_corpus(args.input, args.format)
    # --out may name the predictions file directly or a directory
    if args.out.endswith(".jsonl"):
        pred_path = args.out
        manifest_dir = os.path.dirname(args.out) or "."
        os.makedirs(manifest_dir, exist_ok=True)
        manifest_path = args.out + ".manifest.json"
    else:
        _outdir(args.out)
        pred_path = os.path.join(args.out, "predictions.jsonl")
        manifest_path = os.path.join(args.out, "manifest.json")
    if args.method == "rule":
        lexicon = _load_lexicon(args.lexicon)
        predictions = [
            rule_based_classify(s.text, lexicon, sentence_id=s.id) for s in corpus.sentences
        ]
    elif args.method == "model":
        if not args.model:
            raise CliError("--model is required with --method model", EXIT_VALIDATION)
        trained = load_model(args.model)
        predictions = predict(
            trained, [s.text for s in corpus.sentences], [s.id for s in corpus.sentences]
        )
    else:
        if not args.predictions:
            raise CliError("--predictions is required with --method external", EXIT_VALIDATION)
        predictions = load_external_predictions(args.predictions, corpus)
    write_predictions(predictions, pred_path)
    manifest = build_manifest(
        command="detect",
        inputs=[args.input, args.lexicon or "", args.model or "", args.predictions or ""],
        outputs=[pred_path],
        seed=args.seed,
        parameters={"method": args.method, "format": args.format},
    )
    write_manifest(manifest, manifest_path)
    print(f"wrote {len(predictions)} predictions to {pred_path}")
    return EXIT_OK


def cmd_agreement(args) -> int:
    corpus = load_corpus(args.corpus, args.format)
    report = agreement_report(corpus)
    _outdir(args.out)
    json_path = os.path.join(args.out, "agreement.json")
    text_path = os.path.join(args.out, "agreement.txt")
    write_json(json_path, report.to_dict())
    write_text(text_path, report.to_text())
    outputs = [json_path, text_path]
    for name in report.categories:
        csv_path = os.path.join(args.out, f"confusion_{name}.csv")
        write_text(csv_path, report.matrices[name].to_csv())
        outputs.append(csv_path)
    if not args.no_figures:
        from .figures import render_agreement_figure

        fig_path = os.path.join(args.out, "agreement.png")
        render_agreement_figure(report, fig_path)
        outputs.append(fig_path)
    _manifest(args, "agreement", [args.corpus], outputs, {"format": args.format})
    print(report.to_text())
    return EXIT_OK


def cmd_prevalence(args) -> int:
    corpus = load_corpus(args.corpus, args.format)
    dist = category_distribution(corpus)
    report = stratified_report(corpus, min_stratum=args.min_stratum, alpha=args.alpha)
    series = domain_causal_ratios(corpus, min_stratum=args.min_stratum)
    _outdir(args.out)
    dist_path = os.path.join(args.out, "distribution.json")
    report_json = os.path.join(args.out, "independence.json")
    report_text = os.path.join(args.out, "independence.txt")
    series_path = os.path.join(args.out, "domain_causal_ratios.csv")
    write_json(dist_path, dist.to_dict())
    write_json(report_json, report.to_dict())
    write_text(report_text, report.to_text())
    write_text(series_path, ratio_series_csv(series))
    outputs = [dist_path, report_json, report_text, series_path]
    for category, rep in report.reports.items():
        table_path = os.path.join(args.out, f"contingency_{category}.csv")
        write_text(table_path, rep.full_table.to_csv())
        outputs.append(table_path)
    if not args.no_figures:
        from .figures import (
            render_category_distribution_figure,
            render_domain_ratio_figure,
            render_significance_figure,
        )

        ratio_fig = os.path.join(args.out, "domain_causal_ratios.png")
        dist_fig = os.path.join(args.out, "distribution.png")
        render_domain_ratio_figure(series, ratio_fig)
        render_category_distribution_figure(dist, dist_fig)
        outputs.extend([ratio_fig, dist_fig])
        causal_rep = report.reports.get("causal")
        if causal_rep:
            sig_fig = os.path.join(args.out, "independence_causal.png")
            render_significance_figure(
                [(r.domain, r.p) for r in causal_rep.results],
                causal_rep.corrected_level,
                sig_fig,
                "Domain vs rest independence (causal)",
            )
            outputs.append(sig_fig)
    _manifest(
        args,
        "prevalence",
        [args.corpus],
        outputs,
        {"min_stratum": args.min_stratum, "alpha": args.alpha},
    )
    print(report.to_text())
    return EXIT_OK


def cmd_cue_stats(args) -> int:
    corpus = load_corpus(args.corpus, args.format)
    lexicon = _load_lexicon(args.lexicon)
    counts = scan_counts(corpus, lexicon)
    lexicon = lexicon.with_counts(counts)
    rows = []
    for entry in lexicon.entries:
        precision = entry.precision
        rows.append(
            {
                "phrase": entry.phrase,
                "canonical": entry.canonical,
                "syntactic_type": entry.syntactic_type,
                "relationship_class": entry.relationship_class,
                "causal": entry.causal_count,
                "not_causal": entry.noncausal_count,
                "precision": precision,
                "ambiguity": (
                    None
                    if precision is None
                    else classify_ambiguity(round(precision, 2), args.threshold)
                ),
            }
        )
    _outdir(args.out)
    json_path = os.path.join(args.out, "cue_stats.json")
    csv_path = os.path.join(args.out, "cue_stats.csv")
    write_json(json_path, {"threshold": args.threshold, "phrases": rows})
    lines = ["phrase,syntactic_type,relationship_class,causal,not_causal,precision,ambiguity"]
    for row in rows:
        precision = "" if row["precision"] is None else f"{row['precision']:.4f}"
        lines.append(
            f"{row['phrase']},{row['syntactic_type']},{row['relationship_class'] or ''},"
            f"{row['causal']},{row['not_causal']},{precision},{row['ambiguity'] or ''}"
        )
    write_text(csv_path, "\n".join(lines))
    outputs = [json_path, csv_path]
    try:
        tables = domain_cue_tables(corpus, min_causal=args.min_causal, lexicon=lexicon)
        tables_path = os.path.join(args.out, "domain_cue_tables.json")
        write_json(
            tables_path,
            {
                domain: {
                    "top_frequency": [[p, f] for p, f in t.top_frequency],
                    "most_precise": [[p, v] for p, v in t.most_precise],
                    "least_precise": [[p, v] for p, v in t.least_precise],
                }
                for domain, t in tables.items()
            },
        )
        outputs.append(tables_path)
    except LexiconError:
        pass  # no domain reaches the causal threshold; the overall stats stand
    _manifest(
        args,
        "cue-stats",
        [args.corpus, args.lexicon or ""],
        outputs,
        {"threshold": args.threshold, "min_causal": args.min_causal},
    )
    print(f"wrote cue statistics for {len(rows)} phrases to {json_path}")
    return EXIT_OK


def _spec_from_args(args) -> ClassifierSpec:
    hyper = json.loads(args.hyperparameters) if args.hyperparameters else {}
    return ClassifierSpec(algorithm=args.algorithm, hyperparameters=hyper, embedding=args.embed)


def cmd_train(args) -> int:
    corpus = load_corpus(args.input, args.format)
    spec = _spec_from_args(args)
    gold = corpus.gold_causal()
    ids = [s.id for s in corpus.sentences if s.id in gold]
    texts = [corpus.sentence(sid).text for sid in ids]
    labels = [gold[sid] for sid in ids]
    features = featurize(texts, spec.embedding)
    model = train_classifier(features, labels, spec, seed=args.seed)
    _outdir(args.out)
    model_path = os.path.join(args.out, "model.json")
    save_model(model, model_path)
    _manifest(
        args,
        "train",
        [args.input],
        [model_path],
        {"algorithm": args.algorithm, "embed": args.embed, "hyperparameters": spec.hyperparameters},
    )
    print(f"trained {args.algorithm} on {len(ids)} sentences -> {model_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.input, args.format)
    if args.undersample:
        corpus = random_undersample(corpus, seed=args.seed)
    spec = _spec_from_args(args)
    lexicon = _load_lexicon(args.lexicon)
    external = None
    if args.predictions:
        external = load_external_predictions(args.predictions, corpus)
    report, plan = repeated_cv(
        corpus,
        spec,
        k=args.folds,
        repetitions=args.repetitions,
        seed=args.seed,
        lexicon=lexicon,
        external_predictions=external,
        pooled=args.pooled,
        allow_unbalanced=args.allow_unbalanced,
    )
    _outdir(args.out)
    json_path = os.path.join(args.out, "evaluation.json")
    text_path = os.path.join(args.out, "evaluation.txt")
    payload = report.to_dict()
    payload["spec"] = spec.to_dict()
    payload["fold_plan"] = {"k": plan.k, "repetitions": plan.repetitions, "seed": plan.seed}
    write_json(json_path, payload)
    write_text(text_path, report.to_text())
    outputs = [json_path, text_path]
    if not args.no_figures:
        from .figures import render_evaluation_figure

        fig_path = os.path.join(args.out, "evaluation.png")
        render_evaluation_figure(report, fig_path, title=f"{args.algorithm} ({args.embed})")
        outputs.append(fig_path)
    _manifest(
        args,
        "evaluate",
        [args.input, args.predictions or ""],
        outputs,
        {
            "algorithm": args.algorithm,
            "embed": args.embed,
            "folds": args.folds,
            "repetitions": args.repetitions,
            "undersample": args.undersample,
        },
    )
    print(report.to_text())
    return EXIT_OK


def cmd_lifecycle(args) -> int:
    records = load_requirements(args.requirements)
    kept, filter_report = preprocess(records, invalid_author=args.invalid_author)
    lexicon = _load_lexicon(args.lexicon)

    def detector(sentence: str) -> bool:
        return rule_based_classify(sentence, lexicon).label

    features = [derive_features(r, detector) for r in kept]
    suite = hypothesis_suite(features, alpha=args.alpha)
    _outdir(args.out)
    json_path = os.path.join(args.out, "lifecycle.json")
    text_path = os.path.join(args.out, "lifecycle.txt")
    violin_path = os.path.join(args.out, "lead_time_violin.csv")
    payload = suite.to_dict()
    payload["preprocessing"] = {
        "input_records": len(records),
        "removed_missing_log": filter_report.removed_missing_log,
        "removed_invalid_author": filter_report.removed_invalid_author,
        "removed_single_entry": filter_report.removed_single_entry,
        "kept": filter_report.kept,
    }
    write_json(json_path, payload)
    write_text(text_path, suite.to_text())
    groups = {
        "causal": [f.lead_time for f in features if f.causal_count > 0],
        "non_causal": [f.lead_time for f in features if f.causal_count == 0],
    }
    write_text(violin_path, violin_series_csv(groups))
    _manifest(
        args,
        "lifecycle",
        [args.requirements],
        [json_path, text_path, violin_path],
        {"alpha": args.alpha, "invalid_author": args.invalid_author},
    )
    print(suite.to_text())
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    corpus = load_corpus(args.corpus, args.format)
    config = ServiceConfig(
        corpus=corpus,
        store_path=args.store,
        lexicon=_load_lexicon(args.lexicon),
        lexicon_path=args.lexicon,
        annotators=args.annotators.split(","),
        unique_per_annotator=args.unique,
        overlap_per_pair=args.overlap,
        seed=args.seed,
        randomize=args.randomize,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalreq",
        description="Analyze causal language in natural-language requirements.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus_flag="--corpus"):
        p.add_argument(corpus_flag, required=True)
        p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("detect", help="classify sentences as causal / not causal")
    common(p, "--input")
    p.add_argument("--method", choices=("rule", "model", "external"), default="rule")
    p.add_argument("--lexicon", help="cue lexicon CSV (default: bundled)")
    p.add_argument("--model", help="trained model file (method=model)")
    p.add_argument("--predictions", help="external predictions JSONL (method=external)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("agreement", help="inter-annotator agreement report")
    common(p)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("prevalence", help="label distributions and stratified tests")
    common(p)
    p.add_argument("--min-stratum", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_prevalence)

    p = sub.add_parser("cue-stats", help="per-phrase precision and ambiguity")
    common(p)
    p.add_argument("--lexicon")
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--min-causal", type=int, default=100)
    p.set_defaults(func=cmd_cue_stats)

    p = sub.add_parser("train", help="train a classifier on a labeled corpus")
    common(p, "--input")
    p.add_argument("--algorithm", required=True)
    p.add_argument("--embed", default="bow")
    p.add_argument("--hyperparameters", help="JSON object of hyperparameters")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="repeated cross-validation of a detector")
    common(p, "--input")
    p.add_argument("--algorithm", required=True)
    p.add_argument("--embed", default="none")
    p.add_argument("--hyperparameters", help="JSON object of hyperparameters")
    p.add_argument("--lexicon")
    p.add_argument("--predictions", help="external predictions JSONL")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--undersample", action="store_true")
    p.add_argument("--pooled", action="store_true")
    p.add_argument("--allow-unbalanced", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("lifecycle", help="requirement life-cycle hypothesis suite")
    p.add_argument("--requirements", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--invalid-author")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_lifecycle)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--store", help="label store path (or CAUSALREQ_STORE)")
    p.add_argument("--lexicon")
    p.add_argument("--annotators", default="a1,a2")
    p.add_argument("--unique", type=int, default=0)
    p.add_argument("--overlap", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--randomize", action="store_true")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
