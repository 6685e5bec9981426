"""Command-line surface: windows, diversity, simulate, casestudy, agreement, synth.

Exit codes: 0 success, 1 internal error, 2 user/input error.  Every command
writes a run manifest next to (or inside) its output; commands never
mutate their inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__, corpus, geometry, labelkit, nbayes, proxigram, stats, synthkit, tsne
from .embedstore import (
    attach_labels,
    read_embv1_file,
    read_labels_file,
    write_labels_file,
)
from .errors import AmbigeoError, UserInputError
from .manifest import write_manifest


def _add_threads_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap on worker threads (default: AMBIGEO_THREADS or 1); "
        "results are identical for any value",
    )


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("AMBIGEO_THREADS")
    return max(1, int(env)) if env else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ambigeo",
        description="Embedding-geometry analytics for lexically ambiguous words.",
    )
    parser.add_argument("--version", action="version", version=f"ambigeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("windows", help="build ~100-word context windows")
    p.add_argument("--corpus", type=Path, required=True, help="directory of .txt documents")
    p.add_argument("--targets", type=Path, required=True, help="file with one target word per line")
    p.add_argument("--size", type=int, default=100, help="target window word count")
    p.add_argument(
        "--pre-segmented",
        action="store_true",
        help="treat each input line as one sentence (skip the heuristic segmenter)",
    )
    p.add_argument("--out", type=Path, required=True, help="output windows JSONL")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("diversity", help="per-word embedding diversity table")
    p.add_argument("--embeddings", type=Path, required=True, help="directory of .emb files")
    p.add_argument("--out", type=Path, required=True, help="output CSV")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("simulate", help="regression/factorial statistics over diversity")
    p.add_argument("--diversity", type=Path, required=True, help="diversity CSV")
    p.add_argument("--conditions", type=Path, required=True, help="CSV word,condition[,n_senses,n_meanings]")
    p.add_argument("--design", choices=("regression", "factorial"), required=True)
    p.add_argument("--out", type=Path, required=True, help="output stats JSON")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("casestudy", help="t-SNE, proxigram, group similarity, classifier")
    p.add_argument("--embeddings", type=Path, required=True, help="EMBV1 file for one word")
    p.add_argument("--labels", type=Path, required=True, help="label JSONL for the same word")
    p.add_argument("--tsne-perplexity", type=float, default=30.0)
    p.add_argument("--tsne-iterations", type=int, default=1000)
    p.add_argument("--tsne-learning-rate", type=float, default=200.0)
    p.add_argument("--tsne-exaggeration", type=float, default=12.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knn", type=int, default=3, help="neighbours per point in the proxigram")
    p.add_argument("--test-fraction", type=float, default=0.5)
    p.add_argument("--stratify", action="store_true", help="stratify the split by label")
    p.add_argument("--ci-level", type=float, default=0.99)
    p.add_argument("--out-dir", type=Path, required=True)
    _add_threads_flag(p)
    p.set_defaults(func=cmd_casestudy)

    p = sub.add_parser("agreement", help="inter-rater agreement and majority labels")
    p.add_argument("--auto", type=Path, required=True, help="auto-translation label JSONL")
    p.add_argument("--rater", type=Path, action="append", required=True, help="rater label JSONL (repeatable)")
    p.add_argument("--min-agree", type=int, default=2)
    p.add_argument("--majority-out", type=Path, default=None, help="write majority ground truth JSONL here")
    p.add_argument("--out", type=Path, required=True, help="agreement report JSON")
    _add_threads_flag(p)
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("synth", help="synthetic ambiguity experiment")
    p.add_argument("--config", type=Path, required=True, help="profiles JSON")
    p.add_argument("--out-dir", type=Path, required=True)
    _add_threads_flag(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AmbigeoError, OSError) as exc:
        print(f"ambigeo: error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # internal failure
        traceback.print_exc()
        return 1


def _params(args) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def cmd_windows(args) -> int:
    _resolve_threads(args)
    corpus_files = sorted(args.corpus.glob("*.txt"))
    if not corpus_files:
        raise UserInputError(f"no .txt files under {args.corpus}")
    targets = [
        line.strip()
        for line in args.targets.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not targets:
        raise UserInputError(f"no target words in {args.targets}")

    windows = []
    for path in corpus_files:
        text = path.read_text(encoding="utf-8")
        if args.pre_segmented:
            doc = corpus.document_from_lines(path.stem, text.splitlines())
        else:
            doc = corpus.document_from_text(path.stem, text)
        for target in targets:
            windows.extend(corpus.build_windows(doc, target, args.size))

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
        count = corpus.write_windows_jsonl(windows, sink)
    write_manifest(
        Path(f"{args.out}.manifest.json"),
        "windows",
        _params(args),
        [*corpus_files, args.targets],
        [args.out],
    )
    print(f"wrote {count} windows to {args.out}")
    return 0


def cmd_diversity(args) -> int:
    _resolve_threads(args)
    emb_files = sorted(args.embeddings.glob("*.emb"))
    if not emb_files:
        raise UserInputError(f"no .emb files under {args.embeddings}")
    records = [geometry.embedding_diversity(read_embv1_file(p)) for p in emb_files]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
        geometry.write_diversity_csv(records, sink)
    write_manifest(
        Path(f"{args.out}.manifest.json"),
        "diversity",
        _params(args),
        emb_files,
        [args.out],
    )
    print(f"wrote {len(records)} diversity records to {args.out}")
    return 0


def _read_conditions(path: Path) -> list[dict]:
    import csv as _csv

    with open(path, "r", encoding="utf-8") as source:
        reader = _csv.DictReader(source)
        if reader.fieldnames is None or "word" not in reader.fieldnames or "condition" not in reader.fieldnames:
            raise UserInputError(
                f"{path}: conditions CSV needs at least word,condition columns"
            )
        return [row for row in reader if row.get("word")]


def cmd_simulate(args) -> int:
    _resolve_threads(args)
    with open(args.diversity, "r", encoding="utf-8") as source:
        diversity = {r.word: r for r in geometry.read_diversity_csv(source)}
    conditions = _read_conditions(args.conditions)

    missing = [row["word"] for row in conditions if row["word"] not in diversity]
    if missing:
        raise UserInputError(
            f"words in conditions but not in diversity table: {', '.join(missing)}"
        )

    if args.design == "regression":
        result = _regression_stats(diversity, conditions)
    else:
        result = _factorial_stats(diversity, conditions)
    result["design"] = args.design
    result["n_words"] = len(conditions)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
        json.dump(result, sink, indent=2)
        sink.write("\n")
    write_manifest(
        Path(f"{args.out}.manifest.json"),
        "simulate",
        _params(args),
        [args.diversity, args.conditions],
        [args.out],
    )
    print(f"wrote {args.design} statistics to {args.out}")
    return 0


def _regression_stats(diversity, conditions) -> dict:
    if any(row.get("n_senses") in (None, "") for row in conditions):
        raise UserInputError("regression design needs an n_senses column")
    has_meanings = all(row.get("n_meanings") not in (None, "") for row in conditions)
    names = ["intercept", "n_senses"] + (["n_meanings"] if has_meanings else [])

    outcome = []
    matrix = []
    for row in conditions:
        outcome.append(diversity[row["word"]].diversity)
        predictors = [1.0, float(row["n_senses"])]
        if has_meanings:
            predictors.append(float(row["n_meanings"]))
        matrix.append(predictors)
    fit = stats.ols(np.asarray(outcome), np.asarray(matrix))
    return {"ols": stats.ols_to_dict(fit, names)}


def _factorial_stats(diversity, conditions) -> dict:
    groups: dict[str, list[float]] = {}
    for row in conditions:
        groups.setdefault(row["condition"], []).append(diversity[row["word"]].diversity)
    if len(groups) < 2:
        raise UserInputError("factorial design needs at least two conditions")
    overall = stats.one_way_anova(list(groups.values()))
    contrasts = {}
    names = list(groups)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            contrasts[f"{a}|{b}"] = stats.anova_to_dict(
                stats.one_way_anova([groups[a], groups[b]])
            )
    return {
        "condition_means": {c: float(np.mean(v)) for c, v in groups.items()},
        "overall": stats.anova_to_dict(overall),
        "contrasts": contrasts,
    }


def cmd_casestudy(args) -> int:
    _resolve_threads(args)
    emb = read_embv1_file(args.embeddings)
    labeling = read_labels_file(args.labels)
    data = attach_labels(emb, labeling)
    if data.set.count < 10:
        raise UserInputError(
            f"embeddings and labels share only {data.set.count} context_ids; need >= 10"
        )
    if len(data.distinct_labels) < 2:
        raise UserInputError("need at least 2 distinct labels after attachment")

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    vectors = np.asarray(data.set.vectors, dtype=np.float64)

    config = tsne.TsneConfig(
        perplexity=args.tsne_perplexity,
        iterations=args.tsne_iterations,
        learning_rate=args.tsne_learning_rate,
        early_exaggeration_factor=args.tsne_exaggeration,
        seed=args.seed,
    )
    result = tsne.tsne_embed(vectors, config)
    with open(out / "tsne.csv", "w", encoding="utf-8", newline="\n") as sink:
        tsne.write_layout_csv(result.layout, data.set.context_ids, sink, data.labels)
    with open(out / "kl.csv", "w", encoding="utf-8", newline="\n") as sink:
        tsne.write_kl_csv(result.kl_trace, sink)

    graph = proxigram.knn_graph(
        vectors, result.layout, args.knn, data.set.context_ids, data.labels
    )
    (out / "proxigram.svg").write_text(proxigram.render_proxigram(graph), encoding="utf-8")
    with open(out / "proxigram.json", "w", encoding="utf-8", newline="\n") as sink:
        proxigram.write_graph_json(graph, sink)

    report = geometry.group_similarity(data, args.ci_level)
    with open(out / "groupsim.json", "w", encoding="utf-8", newline="\n") as sink:
        json.dump(
            {
                "word": data.set.word,
                "within_mean": report.within_mean,
                "between_mean": report.between_mean,
                "per_group_within": report.per_group_within,
                "ci_level": report.ci_level,
                "within_ci": list(report.within_ci),
                "between_ci": list(report.between_ci),
            },
            sink,
            indent=2,
        )
        sink.write("\n")

    pairs = geometry.pairwise_records(data)
    with open(out / "pairs.csv", "w", encoding="utf-8", newline="\n") as sink:
        import csv as _csv

        writer = _csv.writer(sink, lineterminator="\n")
        writer.writerow(["word", "group_status", "similarity"])
        for record in pairs:
            writer.writerow([record.word, record.group_status, repr(record.similarity)])

    if args.stratify:
        plan = nbayes.stratified_split_half(data.labels, args.test_fraction, args.seed)
    else:
        plan = nbayes.split_half(data.set.count, args.test_fraction, args.seed)
    train_idx = list(plan.train_indices)
    test_idx = list(plan.test_indices)
    model = nbayes.fit_gnb(vectors[train_idx], [data.labels[i] for i in train_idx])
    predicted, _ = nbayes.predict_gnb(model, vectors[test_idx])
    truth = [data.labels[i] for i in test_idx]
    report_dict = nbayes.classification_report(model, predicted, truth)
    report_dict.update(
        {
            "word": data.set.word,
            "train_size": len(train_idx),
            "test_size": len(test_idx),
            "test_fraction": args.test_fraction,
            "seed": args.seed,
            "stratified": bool(args.stratify),
        }
    )
    with open(out / "classify.json", "w", encoding="utf-8", newline="\n") as sink:
        json.dump(report_dict, sink, indent=2)
        sink.write("\n")

    outputs = [
        out / name
        for name in (
            "tsne.csv",
            "kl.csv",
            "proxigram.svg",
            "proxigram.json",
            "groupsim.json",
            "pairs.csv",
            "classify.json",
        )
    ]
    write_manifest(
        out / "manifest.json",
        "casestudy",
        _params(args),
        [args.embeddings, args.labels],
        outputs,
    )
    print(f"case study for {data.set.word!r} written to {out}")
    return 0


def cmd_agreement(args) -> int:
    _resolve_threads(args)
    auto = read_labels_file(args.auto)
    raters = [read_labels_file(path) for path in args.rater]
    alphas = labelkit.pairwise_alphas(auto, raters)
    report = {
        "target": auto.target,
        "pairwise": alphas,
        "average": sum(alphas.values()) / len(alphas),
        "min_agree": args.min_agree,
    }

    majority = None
    if len(raters) >= args.min_agree:
        table = labelkit.build_rater_table(raters)
        majority = labelkit.majority_label(table, args.min_agree)
        report["majority_retained"] = len(majority.entries)
    else:
        report["majority_retained"] = None

    if args.majority_out is not None:
        if majority is None:
            raise UserInputError(
                f"majority labels need at least {args.min_agree} rater files"
            )
        args.majority_out.parent.mkdir(parents=True, exist_ok=True)
        write_labels_file(majority, args.majority_out)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
        json.dump(report, sink, indent=2)
        sink.write("\n")
    outputs = [args.out] + ([args.majority_out] if args.majority_out else [])
    write_manifest(
        Path(f"{args.out}.manifest.json"),
        "agreement",
        _params(args),
        [args.auto, *args.rater],
        outputs,
    )
    print(f"agreement report written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    _resolve_threads(args)
    with open(args.config, "r", encoding="utf-8") as source:
        config = json.load(source)
    try:
        words = int(config["words_per_condition"])
        seed = int(config.get("seed", 0))
        profiles = {
            name: synthkit.ClusterSpec(
                n_clusters=int(p["n_clusters"]),
                points_per_cluster=int(p["points_per_cluster"]),
                dim=int(p["dim"]),
                centre_separation=float(p["centre_separation"]),
                within_spread=float(p["within_spread"]),
            )
            for name, p in config["profiles"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise UserInputError(f"{args.config}: bad synth config: {exc}") from exc

    result = synthkit.simulate_ambiguity_experiment(profiles, words, seed)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    records = [r for records in result.diversity.values() for r in records]
    with open(out / "diversity.csv", "w", encoding="utf-8", newline="\n") as sink:
        geometry.write_diversity_csv(records, sink)
    with open(out / "stats.json", "w", encoding="utf-8", newline="\n") as sink:
        json.dump(
            {
                "condition_means": result.condition_means,
                "anova": stats.anova_to_dict(result.anova),
                "welch": {
                    key: {"t": t, "df": df, "p": p}
                    for key, (t, df, p) in result.welch.items()
                },
            },
            sink,
            indent=2,
        )
        sink.write("\n")
    write_manifest(
        out / "manifest.json",
        "synth",
        _params(args),
        [args.config],
        [out / "diversity.csv", out / "stats.json"],
    )
    print(f"synthetic experiment written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
