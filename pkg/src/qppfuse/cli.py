"""Command-line interface for batch experimenters.

Subcommands: index, retrieve, predict-pre, predict-post, fuse, evaluate,
heatmap, experiment. Every subcommand reads the flat key-value config file
given with --config; --seed and --out override the config's seed and
output directory. All outputs are TSV (UTF-8, LF), written under --out.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import fusion
from .corpus import build_index, dump_stats, ingest, load_lexicon, load_queries, save_index
from .evaluation import (
    ReportRow,
    UndefinedMetricError,
    kendall_tau_b,
    pearson,
    predictor_correlation_matrix,
    rmse_single,
    smare,
    write_corr_matrix_tsv,
    write_report_tsv,
)
from .experiment import ExperimentConfig, HarnessError, run_experiment
from .post_retrieval import compute_post_scores
from .pre_retrieval import compute_pre_scores, write_scores_long, write_scores_wide
from .retrieval import retrieve, write_run_file

logger = logging.getLogger(__name__)


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise HarnessError("--config is required")
    config = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    if not config.out:
        raise HarnessError("an output directory is required (config key 'out' or --out)")
    Path(config.out).mkdir(parents=True, exist_ok=True)
    return config


def _build(config: ExperimentConfig):
    docs = ingest(config.docs, config.corpus_format)
    return build_index(docs, config.tokenizer_config())


def cmd_index(config: ExperimentConfig) -> None:
    index = _build(config)
    out = Path(config.out)
    save_index(index, out / "index.bin")
    dump_stats(index, out / "index_stats.txt")
    print(f"indexed {index.n_docs} documents, {len(index.postings)} terms, "
          f"{index.total_tokens} tokens -> {out}")


def _retrieve_all(config: ExperimentConfig):
    index = _build(config)
    queries = load_queries(config.queries, config.tokenizer_config())
    ranked = [retrieve(index, q, k=config.k, mu=config.mu) for q in queries]
    return index, queries, ranked


def cmd_retrieve(config: ExperimentConfig) -> None:
    _, _, ranked = _retrieve_all(config)
    path = Path(config.out) / "run.txt"
    write_run_file(path, (r for r in ranked if len(r) > 0))
    n_degenerate = sum(1 for r in ranked if r.degenerate)
    print(f"wrote {path} ({len(ranked) - n_degenerate} queries, {n_degenerate} degenerate)")


def cmd_predict_pre(config: ExperimentConfig) -> None:
    index = _build(config)
    queries = load_queries(config.queries, config.tokenizer_config())
    lexicon = load_lexicon(config.lexicon) if config.lexicon else None
    scores = {
        q.query_id: compute_pre_scores(index, q, lexicon, distinct=config.distinct_terms)
        for q in queries
    }
    out = Path(config.out)
    write_scores_long(out / "pre_scores.tsv", scores)
    write_scores_wide(out / "pre_scores_wide.tsv", scores)
    print(f"wrote pre-retrieval scores for {len(scores)} queries -> {out}")


def cmd_predict_post(config: ExperimentConfig) -> None:
    index, queries, ranked = _retrieve_all(config)
    scores = {}
    skipped = []
    for query, rl in zip(queries, ranked):
        if rl.degenerate or len(rl) == 0:
            skipped.append(query.query_id)
            continue
        values = compute_post_scores(
            index, query, rl, k_fb=config.k_fb, wig_k=config.wig_k,
            nqc_k=config.nqc_k, uef_m=config.uef_m, mu=config.mu,
            uef_sim=config.uef_sim)
        scores[query.query_id] = {
            k: (float("nan") if v is None else v) for k, v in values.items()
        }
    out = Path(config.out)
    write_scores_long(out / "post_scores.tsv", scores)
    write_scores_wide(out / "post_scores_wide.tsv", scores)
    if skipped:
        logger.warning("skipped degenerate queries: %s", ", ".join(skipped))
    print(f"wrote post-retrieval scores for {len(scores)} queries -> {out}")


def _load_design(config: ExperimentConfig) -> fusion.ScoreTable:
    if not config.design:
        raise HarnessError("this subcommand needs config key 'design' "
                           "(a wide TSV: query_id, predictor columns, AP)")
    return fusion.ScoreTable.read_tsv(config.design)


def cmd_fuse(config: ExperimentConfig) -> None:
    """Fit each configured combiner on the full design matrix and dump models."""
    from .experiment import _fit_combiner  # shared fitting policy

    table = _load_design(config)
    params, _ = fusion.minmax_fit(table)
    normalized = fusion.minmax_apply(table, params)
    out = Path(config.out)
    predictions = {"query_id": table.query_ids}
    for name in config.combiners:
        model = _fit_combiner(name, normalized, config, config.seed)
        model.normalization = params
        fusion.write_model(model, out / f"model_{name}.txt")
        y_hat = fusion.predict(model, table, clamp=config.clamp_predictions)
        predictions[name] = y_hat
    with open(out / "predictions.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_id\t" + "\t".join(config.combiners) + "\n")
        for i, qid in enumerate(table.query_ids):
            cells = "\t".join(f"{predictions[name][i]:.6f}" for name in config.combiners)
            fh.write(f"{qid}\t{cells}\n")
    print(f"fitted {len(config.combiners)} combiners on {table.n_rows} queries -> {out}")


def cmd_evaluate(config: ExperimentConfig) -> None:
    """Per-predictor metrics on a design matrix; RMSE uses leave-one-out fits."""
    table = _load_design(config)
    params, _ = fusion.minmax_fit(table)
    normalized = fusion.minmax_apply(table, params)
    n = table.n_rows
    rows = []
    for name in table.column_names:
        col = normalized.columns[name]
        row = ReportRow(predictor=name)
        try:
            row.tau = kendall_tau_b(col, table.target).coefficient
        except UndefinedMetricError:
            pass
        try:
            res = pearson(col, table.target)
            row.rho, row.ci_low, row.ci_high = res.coefficient, res.ci_low, res.ci_high
        except UndefinedMetricError:
            pass
        row.smare = smare(col, table.target)[0]
        sq_sum = 0.0
        for i in range(n):
            train_idx = [j for j in range(n) if j != i]
            sq_sum += rmse_single(col, table.target, train_idx, [i]) ** 2
        row.rmse = (sq_sum / n) ** 0.5
        rows.append(row)
    path = Path(config.out) / "report.tsv"
    write_report_tsv(path, rows)
    print(f"wrote {path} ({len(rows)} predictors over {n} queries)")


def cmd_heatmap(config: ExperimentConfig) -> None:
    table = _load_design(config)
    corr = predictor_correlation_matrix(table.columns, metric=config.corr_metric)
    path = Path(config.out) / "corr_matrix.tsv"
    write_corr_matrix_tsv(path, corr)
    print(f"wrote {path} ({len(corr.names)}x{len(corr.names)}, {corr.metric})")


def cmd_experiment(config: ExperimentConfig) -> None:
    result = run_experiment(config)
    regime = result.hypothesis.regime if result.hypothesis else "n/a"
    print(f"experiment complete: {len(result.table.query_ids)} queries, "
          f"{len(result.plan.pairs)} splits, regime {regime} -> {config.out}")


COMMANDS = {
    "index": cmd_index,
    "retrieve": cmd_retrieve,
    "predict-pre": cmd_predict_pre,
    "predict-post": cmd_predict_post,
    "fuse": cmd_fuse,
    "evaluate": cmd_evaluate,
    "heatmap": cmd_heatmap,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qppfuse",
        description="Query performance prediction: predictors, fusion, evaluation.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="flat key-value config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args)
        COMMANDS[args.command](config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
