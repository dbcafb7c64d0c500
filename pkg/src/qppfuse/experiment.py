"""Experiment orchestration: configs, seeded splits, and end-to-end runs.

The pipeline indexes the corpus, retrieves, computes AP targets and
predictor columns, then for every train/test split normalizes on train,
fits each combiner (tuning on train only), predicts the test queries, and
evaluates. Metrics are averaged over splits (undefined per-split values are
skipped in the average); the pairwise predictor-correlation matrix and a
hypothesis diagnostic summarize predictor relationships. Every random
choice derives from the root seed, so repeated runs are byte-identical.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fusion
from .corpus import (
    TokenizerConfig,
    build_index,
    ingest,
    load_lexicon,
    load_qrels,
    load_queries,
)
from .evaluation import (
    CorrMatrix,
    ReportRow,
    UndefinedMetricError,
    kendall_tau_b,
    pearson,
    predictor_correlation_matrix,
    rmse_direct,
    single_fit_predictions,
    smare,
    paired_t_one_sided,
    write_corr_matrix_tsv,
    write_report_tsv,
)
from .fusion import ScoreTable, minmax_apply, minmax_fit, predict
from .post_retrieval import POST_PREDICTORS, compute_post_scores
from .pre_retrieval import PRE_PREDICTORS, compute_pre_scores
from .retrieval import average_precision, retrieve, write_run_file
from .seeding import derive_seed

__all__ = [
    "HarnessError",
    "SplitPlan",
    "ExperimentConfig",
    "ExperimentResult",
    "HypothesisReport",
    "COMBINERS",
    "split_random_halves",
    "split_leave_one_out",
    "split_fixed",
    "import_external_scores",
    "build_score_table",
    "run_experiment",
    "hypothesis_report",
]

logger = logging.getLogger(__name__)

COMBINERS = ("OLS", "LASSO-CV", "Ridge-CV", "LARS-Traps", "LARS-CV", "BOLASSO", "E-Net")


class HarnessError(Exception):
    """Configuration or pipeline-stage failure."""


# ---------------------------------------------------------------------------
# split plans

@dataclass(frozen=True)
class SplitPlan:
    protocol: str
    seed: int
    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    def validate(self, query_ids) -> None:
        """Every pair must partition the query set exactly."""
        universe = set(query_ids)
        if len(universe) != len(list(query_ids)):
            raise HarnessError("duplicate query ids")
        for i, (train, test) in enumerate(self.pairs):
            tr, te = set(train), set(test)
            if tr & te:
                raise HarnessError(f"split {i}: train and test overlap")
            if tr | te != universe:
                raise HarnessError(f"split {i}: not a partition of the query set")


def split_random_halves(query_ids, repeats: int = 30, seed: int = 0) -> SplitPlan:
    """``repeats`` independent seeded shuffles; the first ceil(n/2) ids train."""
    ids = list(query_ids)
    n = len(ids)
    if n < 4:
        raise HarnessError(f"need at least 4 queries for half splits, got {n}")
    n_train = math.ceil(n / 2)
    pairs = []
    for r in range(repeats):
        rng = np.random.default_rng(derive_seed(seed, "halves", r))
        perm = rng.permutation(n)
        train = tuple(ids[i] for i in perm[:n_train])
        test = tuple(ids[i] for i in perm[n_train:])
        pairs.append((train, test))
    return SplitPlan("halves", seed, tuple(pairs))


def split_leave_one_out(query_ids) -> SplitPlan:
    ids = list(query_ids)
    if len(ids) < 2:
        raise HarnessError(f"need at least 2 queries, got {len(ids)}")
    pairs = tuple(
        (tuple(q for q in ids if q != held_out), (held_out,))
        for held_out in ids
    )
    return SplitPlan("loo", 0, pairs)


def split_fixed(query_ids, train_ids, test_ids) -> SplitPlan:
    plan = SplitPlan("fixed", 0, ((tuple(train_ids), tuple(test_ids)),))
    plan.validate(query_ids)
    return plan


# ---------------------------------------------------------------------------
# configuration

def _read_id_file(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


@dataclass
class ExperimentConfig:
    """All knobs for one experiment; every field has a documented default."""

    docs: str = ""
    corpus_format: str = "jsonl"
    queries: str = ""
    qrels: str = ""
    lexicon: str = ""
    design: str = ""

    lowercase: bool = True
    split_non_alnum: bool = True
    stopwords_path: str = ""
    stem: bool = False

    mu: float = 1000.0
    k: int = 1000

    distinct_terms: bool = True
    k_fb: int = 100
    wig_k: int = 5
    nqc_k: int = 100
    uef_m: int = 100
    uef_sim: str = "pearson"

    pre_predictors: tuple[str, ...] = PRE_PREDICTORS
    post_predictors: tuple[str, ...] = POST_PREDICTORS
    external_scores: tuple[tuple[str, str], ...] = ()

    combiners: tuple[str, ...] = COMBINERS
    k_folds: int = 5
    grid_size: int = 50
    grid_ratio: float = 1e-4
    enet_alpha: float = 0.5
    bolasso_b: int = 100
    bolasso_threshold: float = 1.0
    n_traps: int = 0  # 0 means one trap per predictor column
    clamp_predictions: bool = False

    protocol: str = "halves"
    repeats: int = 30
    train_file: str = ""
    test_file: str = ""
    tuning_fraction: float = 0.1

    corr_metric: str = "pearson"
    h1_mean: float = 0.5
    h2_mean: float = 0.3
    h3_frac: float = 0.1
    h3_rho: float = -0.1

    seed: int = 42
    out: str = ""

    _KEYS = {
        "corpus.docs": ("docs", str),
        "corpus.format": ("corpus_format", str),
        "corpus.queries": ("queries", str),
        "corpus.qrels": ("qrels", str),
        "corpus.lexicon": ("lexicon", str),
        "design": ("design", str),
        "tokenize.lowercase": ("lowercase", bool),
        "tokenize.split_non_alnum": ("split_non_alnum", bool),
        "tokenize.stopwords": ("stopwords_path", str),
        "tokenize.stem": ("stem", bool),
        "retrieval.mu": ("mu", float),
        "retrieval.k": ("k", int),
        "preret.distinct_terms": ("distinct_terms", bool),
        "postret.k_fb": ("k_fb", int),
        "postret.wig_k": ("wig_k", int),
        "postret.nqc_k": ("nqc_k", int),
        "postret.uef_m": ("uef_m", int),
        "postret.uef_sim": ("uef_sim", str),
        "predictors.pre": ("pre_predictors", "namelist"),
        "predictors.post": ("post_predictors", "namelist"),
        "external.scores": ("external_scores", "pairs"),
        "combiners": ("combiners", "namelist"),
        "fusion.k_folds": ("k_folds", int),
        "fusion.grid_size": ("grid_size", int),
        "fusion.grid_ratio": ("grid_ratio", float),
        "fusion.enet_alpha": ("enet_alpha", float),
        "fusion.bolasso_b": ("bolasso_b", int),
        "fusion.bolasso_threshold": ("bolasso_threshold", float),
        "fusion.n_traps": ("n_traps", int),
        "fusion.clamp_predictions": ("clamp_predictions", bool),
        "split.protocol": ("protocol", str),
        "split.repeats": ("repeats", int),
        "split.train_file": ("train_file", str),
        "split.test_file": ("test_file", str),
        "split.tuning_fraction": ("tuning_fraction", float),
        "corr.metric": ("corr_metric", str),
        "hypothesis.h1_mean": ("h1_mean", float),
        "hypothesis.h2_mean": ("h2_mean", float),
        "hypothesis.h3_frac": ("h3_frac", float),
        "hypothesis.h3_rho": ("h3_rho", float),
        "seed": ("seed", int),
        "out": ("out", str),
    }

    @staticmethod
    def _convert(key, raw, kind):
        raw = raw.strip()
        if kind is bool:
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise HarnessError(f"config key {key}: expected a boolean, got {raw!r}")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "namelist":
            if raw.lower() == "all":
                return "all"
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        if kind == "pairs":
            pairs = []
            for item in (p.strip() for p in raw.split(",") if p.strip()):
                if "=" not in item:
                    raise HarnessError(f"config key {key}: expected NAME=path, got {item!r}")
                name, path = item.split("=", 1)
                pairs.append((name.strip(), path.strip()))
            return tuple(pairs)
        return raw

    @classmethod
    def from_file(cls, path, base_dir=None) -> "ExperimentConfig":
        """Parse a flat dotted-key config file; unknown keys are an error.

        Relative paths resolve against the config file's directory.
        """
        path = Path(path)
        base = Path(base_dir) if base_dir is not None else path.parent
        config = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise HarnessError(f"{path}:{lineno}: expected 'key = value'")
                key, raw = (part.strip() for part in line.split("=", 1))
                if key not in cls._KEYS:
                    raise HarnessError(f"{path}:{lineno}: unknown config key {key!r}")
                attr, kind = cls._KEYS[key]
                value = cls._convert(key, raw, kind)
                if value == "all" and attr == "pre_predictors":
                    value = PRE_PREDICTORS
                elif value == "all" and attr == "post_predictors":
                    value = POST_PREDICTORS
                elif value == "all" and attr == "combiners":
                    value = COMBINERS
                setattr(config, attr, value)
        for attr in ("docs", "queries", "qrels", "lexicon", "design",
                     "stopwords_path", "train_file", "test_file", "out"):
            value = getattr(config, attr)
            if value:
                setattr(config, attr, str((base / value)))
        config.validate()
        return config

    def validate(self) -> None:
        for attr in ("docs", "queries", "qrels", "lexicon", "stopwords_path",
                     "train_file", "test_file", "design"):
            value = getattr(self, attr)
            if value and not Path(value).exists():
                raise HarnessError(f"{attr.replace('_', '.')}: file not found: {value}")
        names = list(self.pre_predictors) + list(self.post_predictors) + [
            n for n, _ in self.external_scores
        ]
        if len(names) != len(set(names)):
            raise HarnessError("predictor names must be unique")
        unknown_pre = set(self.pre_predictors) - set(PRE_PREDICTORS)
        if unknown_pre:
            raise HarnessError(f"unknown pre-retrieval predictors: {sorted(unknown_pre)}")
        unknown_post = set(self.post_predictors) - set(POST_PREDICTORS)
        if unknown_post:
            raise HarnessError(f"unknown post-retrieval predictors: {sorted(unknown_post)}")
        unknown_comb = set(self.combiners) - set(COMBINERS)
        if unknown_comb:
            raise HarnessError(f"unknown combiners: {sorted(unknown_comb)}")
        if self.protocol not in ("halves", "loo", "fixed"):
            raise HarnessError(f"unknown split protocol {self.protocol!r}")
        if self.protocol == "fixed" and not (self.train_file and self.test_file):
            raise HarnessError("fixed protocol needs split.train_file and split.test_file")
        if self.corr_metric not in ("pearson", "kendall"):
            raise HarnessError("corr.metric must be pearson or kendall")

    def tokenizer_config(self) -> TokenizerConfig:
        stopwords = frozenset()
        if self.stopwords_path:
            stopwords = frozenset(_read_id_file(self.stopwords_path))
        return TokenizerConfig(
            lowercase=self.lowercase,
            split_non_alnum=self.split_non_alnum,
            stopwords=stopwords,
            stem=self.stem,
        )

    def resolved_items(self) -> list[tuple[str, str]]:
        """(key, value) pairs for the config dump, in declaration order."""
        out = []
        for key, (attr, kind) in self._KEYS.items():
            value = getattr(self, attr)
            if kind == "namelist":
                value = ",".join(value)
            elif kind == "pairs":
                value = ",".join(f"{n}={p}" for n, p in value)
            elif kind is bool:
                value = "true" if value else "false"
            out.append((key, str(value)))
        return out


# ---------------------------------------------------------------------------
# score-table assembly

def import_external_scores(path, expected_qids) -> dict[str, float]:
    """Load ``query_id<TAB>score`` rows; coverage of the query set must be total."""
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise HarnessError(f"{path}:{lineno}: expected 'query_id<TAB>score'")
            qid, raw = parts
            if qid in scores:
                raise HarnessError(f"{path}:{lineno}: duplicate query_id {qid!r}")
            try:
                scores[qid] = float(raw)
            except ValueError as exc:
                raise HarnessError(f"{path}:{lineno}: non-numeric score {raw!r}") from exc
    expected = set(expected_qids)
    missing = sorted(expected - set(scores))
    if missing:
        raise HarnessError(f"{path}: no score for query ids: {', '.join(missing)}")
    extra = sorted(set(scores) - expected)
    if extra:
        logger.warning("%s: %d score rows for unknown query ids (%s)",
                       path, len(extra), ", ".join(extra[:5]))
    return {qid: scores[qid] for qid in expected_qids}


def build_score_table(config: ExperimentConfig):
    """Index, retrieve, and score every query; returns the table and context.

    Queries that are degenerate, lack relevant documents, or have an
    undefined predictor value are excluded (with reasons).
    """
    tok = config.tokenizer_config()
    docs = ingest(config.docs, config.corpus_format)
    index = build_index(docs, tok)
    queries = load_queries(config.queries, tok)
    qrels = load_qrels(config.qrels)
    lexicon = load_lexicon(config.lexicon) if config.lexicon else None
    if lexicon is None and any(p in ("AvP", "AvNP") for p in config.pre_predictors):
        raise HarnessError("AvP/AvNP require corpus.lexicon")

    excluded: dict[str, str] = {}
    rows: dict[str, dict[str, float]] = {}
    aps: dict[str, float] = {}
    ranked_lists = []
    for query in queries:
        qid = query.query_id
        if query.is_empty:
            excluded[qid] = "empty after tokenization"
            continue
        ranked = retrieve(index, query, k=config.k, mu=config.mu)
        if ranked.degenerate or len(ranked) == 0:
            excluded[qid] = "no query term occurs in the collection"
            continue
        ranked_lists.append(ranked)
        ap = average_precision(ranked, qrels, cutoff=config.k)
        if ap is None:
            excluded[qid] = "no relevant documents in qrels"
            continue
        pre = compute_pre_scores(index, query, lexicon, distinct=config.distinct_terms)
        post = compute_post_scores(
            index, query, ranked,
            k_fb=config.k_fb, wig_k=config.wig_k, nqc_k=config.nqc_k,
            uef_m=config.uef_m, mu=config.mu, uef_sim=config.uef_sim,
        )
        row = {}
        undefined = []
        for name in config.pre_predictors:
            row[name] = pre[name]
        for name in config.post_predictors:
            value = post[name]
            if value is None:
                undefined.append(name)
            else:
                row[name] = value
        if undefined:
            excluded[qid] = f"undefined predictor values: {', '.join(undefined)}"
            continue
        rows[qid] = row
        aps[qid] = ap

    if not rows:
        raise HarnessError("no usable queries remain after exclusions")
    qids = list(rows.keys())
    for name, score_path in config.external_scores:
        column = import_external_scores(score_path, qids)
        for qid in qids:
            rows[qid][name] = column[qid]

    names = list(config.pre_predictors) + list(config.post_predictors) + [
        n for n, _ in config.external_scores
    ]
    columns = {n: np.array([rows[q][n] for q in qids]) for n in names}
    table = ScoreTable(query_ids=qids, columns=columns,
                       target=np.array([aps[q] for q in qids]))
    return table, excluded, ranked_lists, index


# ---------------------------------------------------------------------------
# combiner fitting

def _fit_combiner(name: str, train: ScoreTable, config: ExperimentConfig, seed: int):
    try:
        grid = fusion.lambda_grid(train, num=config.grid_size, ratio=config.grid_ratio)
    except fusion.FusionError:
        grid = None

    def tuning_table() -> ScoreTable:
        # The fixed protocol tunes on a seeded fraction of the train split.
        if config.protocol != "fixed":
            return train
        n_tune = max(int(round(config.tuning_fraction * train.n_rows)), 2 * config.k_folds)
        if n_tune >= train.n_rows:
            return train
        rng = np.random.default_rng(derive_seed(seed, "tuning-sample"))
        idx = np.sort(rng.choice(train.n_rows, size=n_tune, replace=False))
        return train.subset(idx)

    def cv(method: str):
        if grid is None:
            return fusion.RegressionModel(name, float(train.target.mean()),
                                          {n: 0.0 for n in train.column_names})
        tuning = tuning_table()
        best_lam, model = fusion.cv_select(
            tuning, method, lam_grid=grid, k_folds=config.k_folds,
            seed=derive_seed(seed, "cv"), alpha=config.enet_alpha)
        if tuning is not train:
            model = fusion._CV_FITTERS[method](train, best_lam, config.enet_alpha)
        return model

    if name == "OLS":
        return fusion.ols_fit(train)
    if name == "LASSO-CV":
        return cv("lasso")
    if name == "Ridge-CV":
        return cv("ridge")
    if name == "E-Net":
        return cv("enet")
    if name == "LARS-CV":
        return fusion.lars_cv(train, k_folds=config.k_folds, seed=derive_seed(seed, "cv"))
    if name == "LARS-Traps":
        n_traps = config.n_traps if config.n_traps > 0 else len(train.columns)
        return fusion.lars_traps(train, n_traps=n_traps, seed=derive_seed(seed, "traps"))
    if name == "BOLASSO":
        return fusion.bolasso(train, b=config.bolasso_b, threshold=config.bolasso_threshold,
                              k_folds=config.k_folds, lam_grid=grid,
                              seed=derive_seed(seed, "bolasso"))
    raise HarnessError(f"unknown combiner {name!r}")


def _test_metrics(name: str, y_hat, y_test) -> tuple[ReportRow, np.ndarray]:
    row = ReportRow(predictor=name)
    try:
        row.tau = kendall_tau_b(y_hat, y_test).coefficient
    except UndefinedMetricError:
        row.tau = math.nan
    try:
        result = pearson(y_hat, y_test)
        row.rho, row.ci_low, row.ci_high = result.coefficient, result.ci_low, result.ci_high
    except UndefinedMetricError:
        row.rho = row.ci_low = row.ci_high = math.nan
    row.smare = smare(y_hat, y_test)[0]
    row.rmse = rmse_direct(y_hat, y_test)
    return row, (np.asarray(y_hat) - np.asarray(y_test)) ** 2


def split_predictions(table: ScoreTable, train_ids, test_ids,
                      config: ExperimentConfig, seed: int) -> dict[str, np.ndarray]:
    """Test-set predictions per row name (every predictor, then every combiner).

    Columns are min-max normalized on the train rows; single predictors are
    mapped through a one-variable least-squares fit on train.
    """
    pos = {qid: i for i, qid in enumerate(table.query_ids)}
    train_idx = np.array([pos[q] for q in train_ids])
    test_idx = np.array([pos[q] for q in test_ids])
    params, _ = minmax_fit(table.subset(train_idx))
    normalized = minmax_apply(table, params)
    train = normalized.subset(train_idx)
    test = normalized.subset(test_idx)

    predictions = {}
    for name in normalized.column_names:
        predictions[name] = single_fit_predictions(
            normalized.columns[name], normalized.target, train_idx, test_idx)
    for name in config.combiners:
        model = _fit_combiner(name, train, config, derive_seed(seed, name))
        predictions[name] = predict(model, test, clamp=config.clamp_predictions)
    return predictions


def rows_from_predictions(predictions: dict[str, np.ndarray], y_test,
                          combiner_names) -> list[ReportRow]:
    """Metric rows for one evaluation; combiner p-values compare per-query
    squared errors against the best single predictor (lowest RMSE)."""
    combiners = set(combiner_names)
    rows = []
    sq_errors = {}
    for name, y_hat in predictions.items():
        if name in combiners:
            continue
        row, sq = _test_metrics(name, y_hat, y_test)
        rows.append(row)
        sq_errors[name] = sq
    best_single = min(rows, key=lambda r: r.rmse).predictor
    for name in combiner_names:
        row, sq = _test_metrics(name, predictions[name], y_test)
        try:
            row.p_value = paired_t_one_sided(sq, sq_errors[best_single])
        except UndefinedMetricError:
            row.p_value = math.nan
        rows.append(row)
    return rows


def evaluate_split(table: ScoreTable, train_ids, test_ids, config: ExperimentConfig,
                   seed: int) -> list[ReportRow]:
    """Report rows (singles then combiners) for one train/test split."""
    pos = {qid: i for i, qid in enumerate(table.query_ids)}
    test_idx = np.array([pos[q] for q in test_ids])
    predictions = split_predictions(table, train_ids, test_ids, config, seed)
    return rows_from_predictions(predictions, table.target[test_idx], config.combiners)


# ---------------------------------------------------------------------------
# hypothesis diagnostic

@dataclass
class HypothesisReport:
    """Which predictor-correlation regime the data matches, plus the evidence."""

    regime: str  # "H1", "H2", "H3", or "none"
    mean_rho: float
    min_rho: float
    frac_negative: float
    delta_rho: float
    delta_tau: float
    delta_smare: float
    delta_rmse: float
    consistent: bool
    thresholds: dict = field(default_factory=dict)


def _best(rows, metric, lower_is_better=False):
    values = [getattr(r, metric) for r in rows]
    values = [v for v in values if v is not None and not math.isnan(v)]
    if not values:
        return math.nan
    return min(values) if lower_is_better else max(values)


def hypothesis_report(corr_matrix: CorrMatrix, single_rows, combined_rows,
                      h1_mean: float = 0.5, h2_mean: float = 0.3,
                      h3_frac: float = 0.1, h3_rho: float = -0.1) -> HypothesisReport:
    """Classify the predictor-relationship regime under declared thresholds.

    A descriptive diagnostic, not a statistical test: H3 when at least
    ``h3_frac`` of the pairs correlate below ``h3_rho``; otherwise H1 when
    the mean pairwise correlation reaches ``h1_mean``; otherwise H2 when it
    stays below ``h2_mean``.
    """
    off = corr_matrix.offdiagonal()
    if off.size == 0:
        raise HarnessError("correlation matrix has no defined off-diagonal cells")
    mean_rho = float(off.mean())
    min_rho = float(off.min())
    frac_negative = float(np.mean(off < h3_rho))
    if frac_negative >= h3_frac:
        regime = "H3"
    elif mean_rho >= h1_mean:
        regime = "H1"
    elif mean_rho < h2_mean:
        regime = "H2"
    else:
        regime = "none"
    delta_rho = _best(combined_rows, "rho") - _best(single_rows, "rho")
    delta_tau = _best(combined_rows, "tau") - _best(single_rows, "tau")
    delta_smare = _best(combined_rows, "smare", True) - _best(single_rows, "smare", True)
    delta_rmse = _best(combined_rows, "rmse", True) - _best(single_rows, "rmse", True)
    if regime == "H1":
        consistent = delta_rho <= 0.01
    elif regime == "H2":
        consistent = delta_rho > 0.0
    elif regime == "H3":
        consistent = delta_rho < 0.0
    else:
        consistent = True
    return HypothesisReport(
        regime=regime, mean_rho=mean_rho, min_rho=min_rho,
        frac_negative=frac_negative, delta_rho=delta_rho, delta_tau=delta_tau,
        delta_smare=delta_smare, delta_rmse=delta_rmse, consistent=consistent,
        thresholds={"h1_mean": h1_mean, "h2_mean": h2_mean,
                    "h3_frac": h3_frac, "h3_rho": h3_rho},
    )


# ---------------------------------------------------------------------------
# the end-to-end run

@dataclass
class ExperimentResult:
    aggregate: list[ReportRow]
    per_split: list[list[ReportRow]]
    corr_matrix: CorrMatrix | None  # None with fewer than 2 predictors
    hypothesis: HypothesisReport | None
    table: ScoreTable
    excluded: dict[str, str]
    plan: SplitPlan


_METRICS = ("tau", "rho", "ci_low", "ci_high", "smare", "rmse", "p_value")


def _aggregate_rows(per_split: list[list[ReportRow]]) -> list[ReportRow]:
    """Mean of each metric over splits, skipping undefined (NaN/None) values."""
    names = [r.predictor for r in per_split[0]]
    aggregate = []
    for i, name in enumerate(names):
        row = ReportRow(predictor=name)
        for metric in _METRICS:
            values = [getattr(split[i], metric) for split in per_split]
            values = [v for v in values if v is not None and not math.isnan(v)]
            setattr(row, metric, float(np.mean(values)) if values else math.nan)
        aggregate.append(row)
    return aggregate


def make_split_plan(config: ExperimentConfig, query_ids) -> SplitPlan:
    if config.protocol == "halves":
        plan = split_random_halves(query_ids, repeats=config.repeats, seed=config.seed)
    elif config.protocol == "loo":
        plan = split_leave_one_out(query_ids)
    else:
        plan = split_fixed(query_ids, _read_id_file(config.train_file),
                           _read_id_file(config.test_file))
    plan.validate(query_ids)
    return plan


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Full pipeline; writes all artifacts when ``config.out`` is set.

    For the halves and fixed protocols, metrics are computed per split and
    averaged. Leave-one-out instead pools the held-out predictions into one
    vector per method and evaluates once, so correlations are taken over
    the full query set.
    """
    try:
        table, excluded, ranked_lists, _ = build_score_table(config)
    except Exception as exc:
        raise HarnessError(f"score-table stage failed: {exc}") from exc
    plan = make_split_plan(config, table.query_ids)

    if config.protocol == "loo":
        pooled: dict[str, np.ndarray] = {}
        pos = {qid: i for i, qid in enumerate(table.query_ids)}
        for s, (train_ids, test_ids) in enumerate(plan.pairs):
            seed = derive_seed(config.seed, config.protocol, s, "fit")
            try:
                predictions = split_predictions(table, train_ids, test_ids, config, seed)
            except Exception as exc:
                raise HarnessError(f"split {s} failed: {exc}") from exc
            for name, values in predictions.items():
                pooled.setdefault(name, np.zeros(table.n_rows))
                for qid, value in zip(test_ids, values):
                    pooled[name][pos[qid]] = value
        per_split = [rows_from_predictions(pooled, table.target, config.combiners)]
    else:
        per_split = []
        for s, (train_ids, test_ids) in enumerate(plan.pairs):
            seed = derive_seed(config.seed, config.protocol, s, "fit")
            try:
                per_split.append(evaluate_split(table, train_ids, test_ids, config, seed))
            except Exception as exc:
                raise HarnessError(f"split {s} failed: {exc}") from exc
    aggregate = _aggregate_rows(per_split)

    n_singles = len(table.column_names)
    if n_singles >= 2:
        corr = predictor_correlation_matrix(table.columns, metric=config.corr_metric)
        hypothesis = hypothesis_report(
            corr, aggregate[:n_singles], aggregate[n_singles:],
            h1_mean=config.h1_mean, h2_mean=config.h2_mean,
            h3_frac=config.h3_frac, h3_rho=config.h3_rho,
        )
    else:
        corr = None
        hypothesis = None
    result = ExperimentResult(
        aggregate=aggregate, per_split=per_split, corr_matrix=corr,
        hypothesis=hypothesis, table=table, excluded=excluded, plan=plan,
    )
    if config.out:
        write_artifacts(result, ranked_lists, config)
    return result


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.4f}"


def write_split_report_tsv(path, per_split: list[list[ReportRow]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("split\tpredictor\ttau\trho\tci_low\tci_high\tsmare\trmse\tp_value\n")
        for s, rows in enumerate(per_split):
            for row in rows:
                cells = [str(s), row.predictor] + [_fmt(getattr(row, m)) for m in _METRICS]
                fh.write("\t".join(cells) + "\n")


def write_hypothesis_tsv(path, report: HypothesisReport) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("field\tvalue\n")
        fh.write(f"regime\t{report.regime}\n")
        fh.write(f"consistent\t{str(report.consistent).lower()}\n")
        for name in ("mean_rho", "min_rho", "frac_negative",
                     "delta_rho", "delta_tau", "delta_smare", "delta_rmse"):
            fh.write(f"{name}\t{_fmt(getattr(report, name))}\n")
        for key, value in report.thresholds.items():
            fh.write(f"threshold.{key}\t{value}\n")


def write_artifacts(result: ExperimentResult, ranked_lists, config: ExperimentConfig) -> None:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_tsv(out / "report_aggregate.tsv", result.aggregate)
    write_split_report_tsv(out / "report_splits.tsv", result.per_split)
    if result.corr_matrix is not None:
        write_corr_matrix_tsv(out / "corr_matrix.tsv", result.corr_matrix)
    if result.hypothesis is not None:
        write_hypothesis_tsv(out / "hypothesis.tsv", result.hypothesis)
    result.table.write_tsv(out / "score_table.tsv")
    write_run_file(out / "run.txt", ranked_lists)
    with open(out / "excluded.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_id\treason\n")
        for qid, reason in result.excluded.items():
            fh.write(f"{qid}\t{reason}\n")
    with open(out / "config_used.txt", "w", encoding="utf-8", newline="\n") as fh:
        for key, value in config.resolved_items():
            fh.write(f"{key} = {value}\n")
