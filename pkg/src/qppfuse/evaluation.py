"""Prediction-quality metrics: correlations, RMSE, rank error, significance.

Pearson coefficients carry a 95% confidence interval computed with the
Fisher z transform; Kendall's tau is the tie-aware tau-b. sMARE is the mean
absolute rank difference between the predicted and actual query orderings,
scaled by the number of queries. The one-sided paired t-test compares
per-query prediction errors of two methods.
"""

import math
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

__all__ = [
    "UndefinedMetricError",
    "CorrelationResult",
    "CorrMatrix",
    "ReportRow",
    "pearson",
    "kendall_tau_b",
    "rmse_direct",
    "rmse_single",
    "smare",
    "paired_t_one_sided",
    "predictor_correlation_matrix",
    "write_corr_matrix_tsv",
    "write_report_tsv",
]

logger = logging.getLogger(__name__)

Z_95 = 1.959964


class UndefinedMetricError(Exception):
    """The metric is undefined for this input (zero variance, all ties, ...)."""


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    n: int
    ci_low: float | None = None
    ci_high: float | None = None


def pearson(a, b) -> CorrelationResult:
    """Product-moment correlation with a Fisher-z 95% confidence interval."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be 1-d vectors of equal length")
    n = a.size
    if n < 3:
        raise UndefinedMetricError(f"need n >= 3, got {n}")
    ac = a - a.mean()
    bc = b - b.mean()
    denom = math.sqrt(float(ac @ ac) * float(bc @ bc))
    if denom == 0.0:
        raise UndefinedMetricError("zero variance input")
    r = float(ac @ bc) / denom
    r = max(-1.0, min(1.0, r))
    low, high = fisher_ci(r, n)
    return CorrelationResult(r, n, low, high)


def fisher_ci(r: float, n: int, z_quantile: float = Z_95) -> tuple[float, float]:
    """95% interval tanh(atanh(r) +- z/sqrt(n-3)); collapses to [r, r] at |r| = 1."""
    if abs(r) >= 1.0:
        return (r, r)
    z = math.atanh(r)
    if n <= 3:
        return (-1.0, 1.0)
    half = z_quantile / math.sqrt(n - 3)
    return (math.tanh(z - half), math.tanh(z + half))


def kendall_tau_b(a, b) -> CorrelationResult:
    """Tie-aware Kendall's tau from exact integer pair counts.

    tau_b = (C - D) / sqrt((C + D + Ta) * (C + D + Tb)) where Ta / Tb count
    pairs tied only in a / only in b; pairs tied in both count nowhere.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be 1-d vectors of equal length")
    n = a.size
    if n < 2:
        raise UndefinedMetricError(f"need n >= 2, got {n}")
    iu = np.triu_indices(n, k=1)
    da = np.sign(a[:, None] - a[None, :])[iu]
    db = np.sign(b[:, None] - b[None, :])[iu]
    prod = da * db
    c = int(np.count_nonzero(prod > 0))
    d = int(np.count_nonzero(prod < 0))
    t_a = int(np.count_nonzero((da == 0) & (db != 0)))
    t_b = int(np.count_nonzero((db == 0) & (da != 0)))
    denom_sq = (c + d + t_a) * (c + d + t_b)
    if denom_sq == 0:
        raise UndefinedMetricError("all pairs tied in one vector")
    return CorrelationResult((c - d) / math.sqrt(denom_sq), n)


def rmse_direct(y_hat, y) -> float:
    """sqrt(mean squared error); zero iff the vectors are identical."""
    y_hat = np.asarray(y_hat, dtype=float)
    y = np.asarray(y, dtype=float)
    if y_hat.shape != y.shape:
        raise ValueError("length mismatch")
    return float(np.sqrt(np.mean((y_hat - y) ** 2)))


def rmse_single(predictor_col, ap_col, train_idx, test_idx) -> float:
    """Test RMSE of a one-variable least-squares fit (AP ~ predictor) on train.

    A constant predictor on the train rows falls back to an intercept-only
    fit (the train AP mean).
    """
    predictor_col = np.asarray(predictor_col, dtype=float)
    ap_col = np.asarray(ap_col, dtype=float)
    train_idx = np.asarray(train_idx, dtype=int)
    test_idx = np.asarray(test_idx, dtype=int)
    if set(train_idx.tolist()) & set(test_idx.tolist()):
        raise ValueError("train and test index sets overlap")
    x_tr = predictor_col[train_idx]
    y_tr = ap_col[train_idx]
    x_mean = x_tr.mean()
    var = float(((x_tr - x_mean) ** 2).sum())
    if var == 0.0:
        logger.info("constant predictor on the train rows; intercept-only fit")
        slope = 0.0
    else:
        slope = float((x_tr - x_mean) @ (y_tr - y_tr.mean())) / var
    intercept = float(y_tr.mean()) - slope * float(x_mean)
    y_hat = intercept + slope * predictor_col[test_idx]
    return rmse_direct(y_hat, ap_col[test_idx])


def single_fit_predictions(predictor_col, ap_col, train_idx, test_idx) -> np.ndarray:
    """Test-set predictions of the one-variable fit used by :func:`rmse_single`."""
    predictor_col = np.asarray(predictor_col, dtype=float)
    ap_col = np.asarray(ap_col, dtype=float)
    train_idx = np.asarray(train_idx, dtype=int)
    test_idx = np.asarray(test_idx, dtype=int)
    x_tr = predictor_col[train_idx]
    y_tr = ap_col[train_idx]
    x_mean = x_tr.mean()
    var = float(((x_tr - x_mean) ** 2).sum())
    slope = 0.0 if var == 0.0 else float((x_tr - x_mean) @ (y_tr - y_tr.mean())) / var
    intercept = float(y_tr.mean()) - slope * float(x_mean)
    return intercept + slope * predictor_col[test_idx]


def smare(pred_scores, ap) -> tuple[float, np.ndarray]:
    """Scaled mean absolute rank error and the per-query values.

    Both vectors are ranked ascending with average ranks on ties; the
    per-query error is |rank difference| / n.
    """
    pred_scores = np.asarray(pred_scores, dtype=float)
    ap = np.asarray(ap, dtype=float)
    if pred_scores.shape != ap.shape or pred_scores.ndim != 1:
        raise ValueError("inputs must be 1-d vectors of equal length")
    n = pred_scores.size
    if n < 2:
        raise ValueError("need at least 2 queries")
    r_pred = stats.rankdata(pred_scores, method="average")
    r_ap = stats.rankdata(ap, method="average")
    sare = np.abs(r_pred - r_ap) / n
    return float(sare.mean()), sare


def paired_t_one_sided(err_a, err_b) -> float:
    """p-value for the alternative "errors of a are smaller than errors of b".

    Identical error vectors give t = 0, p = 0.5; any other zero-variance
    difference vector leaves the statistic undefined.
    """
    err_a = np.asarray(err_a, dtype=float)
    err_b = np.asarray(err_b, dtype=float)
    if err_a.shape != err_b.shape or err_a.ndim != 1:
        raise ValueError("inputs must be 1-d vectors of equal length")
    n = err_a.size
    if n < 2:
        raise UndefinedMetricError(f"need n >= 2, got {n}")
    d = err_a - err_b
    if np.all(d == 0.0):
        return 0.5
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise UndefinedMetricError("zero-variance differences")
    t = float(d.mean()) / (sd / math.sqrt(n))
    return float(stats.t.cdf(t, df=n - 1))


@dataclass
class CorrMatrix:
    """Symmetric pairwise predictor-correlation matrix with a unit diagonal."""

    names: list[str]
    matrix: np.ndarray
    metric: str
    missing: dict[tuple[str, str], str] = field(default_factory=dict)

    def value(self, a: str, b: str) -> float:
        return float(self.matrix[self.names.index(a), self.names.index(b)])

    def offdiagonal(self) -> np.ndarray:
        """Upper-triangle entries, NaN cells excluded."""
        iu = np.triu_indices(len(self.names), k=1)
        vals = self.matrix[iu]
        return vals[~np.isnan(vals)]


def predictor_correlation_matrix(columns: dict[str, "np.ndarray"], metric: str = "pearson") -> CorrMatrix:
    """Pairwise correlations between predictor score columns.

    Undefined cells (zero variance, all ties) are NaN, with the reason
    recorded per pair.
    """
    if metric not in ("pearson", "kendall"):
        raise ValueError(f"metric must be 'pearson' or 'kendall', got {metric!r}")
    if len(columns) < 2:
        raise ValueError("need at least 2 predictor columns")
    names = list(columns.keys())
    vectors = [np.asarray(columns[n], dtype=float) for n in names]
    corr = pearson if metric == "pearson" else kendall_tau_b
    m = len(names)
    matrix = np.ones((m, m))
    missing: dict[tuple[str, str], str] = {}
    for i in range(m):
        for j in range(i + 1, m):
            try:
                value = corr(vectors[i], vectors[j]).coefficient
            except UndefinedMetricError as exc:
                value = math.nan
                missing[(names[i], names[j])] = str(exc)
            matrix[i, j] = matrix[j, i] = value
    return CorrMatrix(names=names, matrix=matrix, metric=metric, missing=missing)


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.4f}"


def write_corr_matrix_tsv(path, corr: CorrMatrix) -> None:
    """Matrix TSV with a header row/column of predictor names."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("predictor\t" + "\t".join(corr.names) + "\n")
        for i, name in enumerate(corr.names):
            cells = "\t".join(_fmt(float(v)) for v in corr.matrix[i])
            fh.write(f"{name}\t{cells}\n")


@dataclass
class ReportRow:
    """One evaluated predictor or combiner."""

    predictor: str
    tau: float | None = None
    rho: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    smare: float | None = None
    rmse: float | None = None
    p_value: float | None = None


REPORT_COLUMNS = ("predictor", "tau", "rho", "ci_low", "ci_high", "smare", "rmse", "p_value")


def write_report_tsv(path, rows) -> None:
    """Evaluation report TSV, one row per predictor, 4-decimal fixed values."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(REPORT_COLUMNS) + "\n")
        for row in rows:
            cells = [row.predictor] + [
                _fmt(getattr(row, col)) for col in REPORT_COLUMNS[1:]
            ]
            fh.write("\t".join(cells) + "\n")
