"""Min-max normalization and the penalized-regression combiner suite.

Fits are expressed over a ScoreTable (named predictor columns plus the AP
target). Penalty conventions, with the intercept never penalized:

  OLS     minimize ||y - Xb||^2
  Ridge   minimize ||y - Xb||^2 + lam * ||b||^2
  LASSO   minimize (1/2)||y - Xb||^2 + lam * ||b||_1
  E-Net   minimize (1/2)||y - Xb||^2 + lam * (alpha*||b||_1
                                               + (1-alpha)/2 * ||b||_2^2)

so enet(alpha=1) coincides with lasso(lam) and enet(alpha=0) with
ridge(lam). LASSO and E-Net are solved by cyclic coordinate descent with
soft thresholding on the Gram matrix; LARS follows the classic equiangular
path. All fits are deterministic given (table, hyperparameters, seed).
"""

import ast
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .seeding import derive_seed

__all__ = [
    "FusionError",
    "ConvergenceError",
    "ScoreTable",
    "RegressionModel",
    "LarsKnot",
    "minmax_fit",
    "minmax_apply",
    "minmax_fit_apply",
    "ols_fit",
    "ridge_fit",
    "lasso_fit",
    "enet_fit",
    "lasso_kkt_residual",
    "lambda_max",
    "lambda_grid",
    "lars_path",
    "lars_traps",
    "lars_cv",
    "bolasso",
    "cv_select",
    "predict",
    "write_model",
    "read_model",
]

logger = logging.getLogger(__name__)

CD_TOL = 1e-7
CD_MAX_SWEEPS = 10_000
TRAP_PREFIX = "__trap_"


class FusionError(Exception):
    """Invalid table, unfittable design, or missing column."""


class ConvergenceError(FusionError):
    """Coordinate descent did not converge within the sweep budget."""


@dataclass
class ScoreTable:
    """Aligned predictor columns and the AP target for a set of queries."""

    query_ids: list[str]
    columns: dict[str, np.ndarray]
    target: np.ndarray

    def __post_init__(self):
        n = len(self.query_ids)
        self.target = np.asarray(self.target, dtype=float)
        if self.target.shape != (n,):
            raise FusionError("target length does not match query_ids")
        if not np.all(np.isfinite(self.target)):
            raise FusionError("non-finite target values")
        cols = {}
        for name, values in self.columns.items():
            v = np.asarray(values, dtype=float)
            if v.shape != (n,):
                raise FusionError(f"column {name!r} length does not match query_ids")
            if not np.all(np.isfinite(v)):
                raise FusionError(f"non-finite values in column {name!r}")
            cols[name] = v
        self.columns = cols

    @property
    def n_rows(self) -> int:
        return len(self.query_ids)

    @property
    def column_names(self) -> list[str]:
        return list(self.columns.keys())

    def matrix(self, names=None) -> np.ndarray:
        names = self.column_names if names is None else list(names)
        if not names:
            return np.empty((self.n_rows, 0))
        return np.column_stack([self.columns[n] for n in names])

    def subset(self, indices) -> "ScoreTable":
        idx = np.asarray(indices, dtype=int)
        return ScoreTable(
            query_ids=[self.query_ids[i] for i in idx],
            columns={n: v[idx] for n, v in self.columns.items()},
            target=self.target[idx],
        )

    def with_columns(self, names) -> "ScoreTable":
        return ScoreTable(
            query_ids=list(self.query_ids),
            columns={n: self.columns[n] for n in names},
            target=self.target,
        )

    def write_tsv(self, path) -> None:
        """Wide design-matrix TSV: query_id, predictor columns, AP."""
        names = self.column_names
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("query_id\t" + "\t".join(names) + "\tAP\n")
            for i, qid in enumerate(self.query_ids):
                cells = [f"{float(self.columns[n][i])!r}" for n in names]
                fh.write(f"{qid}\t" + "\t".join(cells) + f"\t{float(self.target[i])!r}\n")

    @classmethod
    def read_tsv(cls, path) -> "ScoreTable":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if len(header) < 3 or header[0] != "query_id" or header[-1] != "AP":
                raise FusionError(f"{path}: expected header 'query_id<TAB>...<TAB>AP'")
            names = header[1:-1]
            qids, rows, targets = [], [], []
            for lineno, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != len(header):
                    raise FusionError(f"{path}:{lineno}: wrong column count")
                qids.append(parts[0])
                try:
                    rows.append([float(v) for v in parts[1:-1]])
                    targets.append(float(parts[-1]))
                except ValueError as exc:
                    raise FusionError(f"{path}:{lineno}: non-numeric value") from exc
        data = np.asarray(rows, dtype=float)
        columns = {n: data[:, j] for j, n in enumerate(names)}
        return cls(query_ids=qids, columns=columns, target=np.asarray(targets))


@dataclass
class RegressionModel:
    """A fitted combiner: intercept, named coefficients, and fit metadata."""

    method: str
    intercept: float
    coefficients: dict[str, float]
    hyperparameters: dict = field(default_factory=dict)
    normalization: dict[str, tuple[float, float]] | None = None

    @property
    def support(self) -> set[str]:
        return {c for c, b in self.coefficients.items() if b != 0.0}


# ---------------------------------------------------------------------------
# normalization

def minmax_fit(table: ScoreTable) -> tuple[dict[str, tuple[float, float]], list[str]]:
    """Per-column train min/max; constant columns are reported separately."""
    params = {}
    constant = []
    for name, v in table.columns.items():
        lo, hi = float(v.min()), float(v.max())
        params[name] = (lo, hi)
        if lo == hi:
            constant.append(name)
    if constant:
        logger.warning("constant columns mapped to 0: %s", ", ".join(constant))
    return params, constant


def minmax_apply(table: ScoreTable, params: dict[str, tuple[float, float]], clamp: bool = True) -> ScoreTable:
    """Map columns through stored train min/max; constant columns become 0."""
    columns = {}
    for name, v in table.columns.items():
        lo, hi = params[name]
        if hi == lo:
            columns[name] = np.zeros_like(v)
        else:
            scaled = (v - lo) / (hi - lo)
            columns[name] = np.clip(scaled, 0.0, 1.0) if clamp else scaled
    return ScoreTable(query_ids=list(table.query_ids), columns=columns, target=table.target.copy())


def minmax_fit_apply(train: ScoreTable, test: ScoreTable):
    """Fit min/max on train and apply to both; test values are clamped to [0,1]."""
    params, constant = minmax_fit(train)
    return minmax_apply(train, params), minmax_apply(test, params), params, constant


# ---------------------------------------------------------------------------
# dense least-squares fits

def _centered(table: ScoreTable):
    x = table.matrix()
    y = table.target
    x_mean = x.mean(axis=0) if x.size else np.zeros(x.shape[1])
    y_mean = float(y.mean())
    return x - x_mean, y - y_mean, x_mean, y_mean


def _as_model(method, table, beta, x_mean, y_mean, **hyper) -> RegressionModel:
    intercept = y_mean - float(x_mean @ beta)
    coefficients = {n: float(b) for n, b in zip(table.column_names, beta)}
    return RegressionModel(method=method, intercept=intercept, coefficients=coefficients, hyperparameters=hyper)


def ols_fit(table: ScoreTable) -> RegressionModel:
    """Least squares; requires n > m, warns and uses the pseudo-inverse on rank deficiency."""
    n, m = table.n_rows, len(table.columns)
    if n <= m:
        raise FusionError(f"need more rows than columns for OLS (n={n}, m={m})")
    xc, yc, x_mean, y_mean = _centered(table)
    if m and np.linalg.matrix_rank(xc) < m:
        logger.warning("rank-deficient design; using the minimum-norm solution")
    beta = np.linalg.lstsq(xc, yc, rcond=None)[0] if m else np.zeros(0)
    return _as_model("OLS", table, beta, x_mean, y_mean)


def ridge_fit(table: ScoreTable, lam: float) -> RegressionModel:
    """Ridge on as-given columns; lam=0 reproduces OLS."""
    if lam < 0:
        raise FusionError("lam must be >= 0")
    xc, yc, x_mean, y_mean = _centered(table)
    m = xc.shape[1]
    if m == 0:
        return _as_model("Ridge", table, np.zeros(0), x_mean, y_mean, lam=lam)
    gram = xc.T @ xc + lam * np.eye(m)
    try:
        beta = np.linalg.solve(gram, xc.T @ yc)
    except np.linalg.LinAlgError:
        beta = np.linalg.lstsq(xc, yc, rcond=None)[0]
    return _as_model("Ridge", table, beta, x_mean, y_mean, lam=lam)


def _soft(z: float, threshold: float) -> float:
    if z > threshold:
        return z - threshold
    if z < -threshold:
        return z + threshold
    return 0.0


def _cd_sweeps(gram, corr, l1, l2, beta, max_sweeps, tol) -> int:
    """Cyclic soft-threshold sweeps in place; -1 when the budget runs out."""
    m = corr.size
    q = np.zeros(m)
    for j in range(m):
        if beta[j] != 0.0:
            for k in range(m):
                q[k] += gram[k, j] * beta[j]
    for sweep in range(max_sweeps):
        max_delta = 0.0
        for j in range(m):
            g_jj = gram[j, j]
            denom = g_jj + l2
            if denom <= 0.0:
                new = 0.0
            else:
                z = corr[j] - q[j] + g_jj * beta[j]
                if z > l1:
                    new = (z - l1) / denom
                elif z < -l1:
                    new = (z + l1) / denom
                else:
                    new = 0.0
            delta = new - beta[j]
            if delta != 0.0:
                for k in range(m):
                    q[k] += gram[k, j] * delta
                beta[j] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta < tol:
            return sweep + 1
    return -1


try:  # the jitted kernel cuts fit times by ~100x; plain Python works too
    from numba import njit

    _cd_sweeps = njit(cache=True)(_cd_sweeps)
except ImportError:  # pragma: no cover - exercised only without numba
    pass


def _cd_solve(gram, corr, lam, alpha, beta0=None):
    """Cyclic coordinate descent for the elastic-net objective on a Gram matrix.

    Returns the coefficient vector; raises ConvergenceError if the largest
    coefficient change has not dropped below CD_TOL within the sweep budget.
    """
    m = corr.size
    beta = np.zeros(m) if beta0 is None else beta0.copy()
    sweeps = _cd_sweeps(np.ascontiguousarray(gram), np.ascontiguousarray(corr),
                        lam * alpha, lam * (1.0 - alpha), beta, CD_MAX_SWEEPS, CD_TOL)
    if sweeps < 0:
        raise ConvergenceError(f"coordinate descent did not converge in {CD_MAX_SWEEPS} sweeps")
    return beta


def enet_fit(table: ScoreTable, lam: float, alpha: float) -> RegressionModel:
    """Elastic net via coordinate descent; alpha=1 is LASSO, alpha=0 is Ridge."""
    if lam < 0:
        raise FusionError("lam must be >= 0")
    if not 0.0 <= alpha <= 1.0:
        raise FusionError("alpha must be in [0, 1]")
    xc, yc, x_mean, y_mean = _centered(table)
    m = xc.shape[1]
    if m == 0:
        return _as_model("E-Net", table, np.zeros(0), x_mean, y_mean, lam=lam, alpha=alpha)
    beta = _cd_solve(xc.T @ xc, xc.T @ yc, lam, alpha)
    return _as_model("E-Net", table, beta, x_mean, y_mean, lam=lam, alpha=alpha)


def lasso_fit(table: ScoreTable, lam: float) -> RegressionModel:
    model = enet_fit(table, lam, alpha=1.0)
    model.method = "LASSO"
    model.hyperparameters = {"lam": lam}
    return model


def lasso_kkt_residual(table: ScoreTable, model: RegressionModel, lam: float, alpha: float = 1.0) -> float:
    """Largest violation of the stationarity conditions at the fitted point.

    For active columns |x_j'r - lam*(1-alpha)*b_j| must equal lam*alpha; for
    inactive columns it must not exceed it.
    """
    x = table.matrix()
    residual = table.target - predict(model, table)
    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)
    worst = 0.0
    for j, name in enumerate(table.column_names):
        g = float(x[:, j] @ residual) - l2 * model.coefficients[name]
        if model.coefficients[name] != 0.0:
            worst = max(worst, abs(abs(g) - l1))
        else:
            worst = max(worst, max(0.0, abs(g) - l1))
    return worst


def lambda_max(table: ScoreTable) -> float:
    """Smallest lam for which the LASSO solution is all-zero."""
    xc, yc, _, _ = _centered(table)
    if xc.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(xc.T @ yc)))


def lambda_grid(table: ScoreTable, num: int = 50, ratio: float = 1e-4) -> np.ndarray:
    """Log-spaced grid from ratio*lambda_max up to lambda_max, descending."""
    lam_hi = lambda_max(table)
    if lam_hi <= 0.0:
        raise FusionError("lambda_max is zero; the target is constant or orthogonal")
    return np.geomspace(lam_hi, ratio * lam_hi, num=num)


# ---------------------------------------------------------------------------
# least-angle regression

class LarsKnot(NamedTuple):
    column: str
    coefficients: dict[str, float]
    intercept: float


def lars_path(table: ScoreTable) -> list[LarsKnot]:
    """Equiangular path; one knot per entering column, final knot = OLS.

    Columns are standardized internally (centered, unit L2 norm) and the
    reported coefficients are mapped back to the original scale. Constant
    or exactly collinear columns never enter (a warning is logged, ties
    break by column order).
    """
    names = table.column_names
    x = table.matrix()
    y = table.target
    n, m = x.shape
    if m == 0:
        return []
    x_mean = x.mean(axis=0)
    y_mean = float(y.mean())
    xc = x - x_mean
    norms = np.sqrt((xc**2).sum(axis=0))
    usable = norms > 0
    if not np.all(usable):
        bad = [names[j] for j in range(m) if not usable[j]]
        logger.warning("constant columns never enter the path: %s", ", ".join(bad))
    xs = np.zeros_like(xc)
    xs[:, usable] = xc[:, usable] / norms[usable]
    ys = y - y_mean

    active: list[int] = []
    excluded = {j for j in range(m) if not usable[j]}
    beta_s = np.zeros(m)
    mu = np.zeros(n)
    knots: list[LarsKnot] = []

    def record(entering: int):
        beta = np.zeros(m)
        beta[usable] = beta_s[usable] / norms[usable]
        intercept = y_mean - float(x_mean @ beta)
        knots.append(LarsKnot(names[entering], {nm: float(b) for nm, b in zip(names, beta)}, intercept))

    while len(active) + len(excluded) < m:
        c = xs.T @ (ys - mu)
        inactive = [j for j in range(m) if j not in active and j not in excluded]
        c_max = max(abs(c[j]) for j in inactive)
        if active:
            c_max = max(c_max, max(abs(c[j]) for j in active))
        if c_max < 1e-12:
            if active and inactive:
                x_active = xs[:, active]
                collinear = []
                for j in inactive:
                    sol = np.linalg.lstsq(x_active, xs[:, j], rcond=None)[0]
                    if float(np.sum((xs[:, j] - x_active @ sol) ** 2)) < 1e-10:
                        collinear.append(names[j])
                if collinear:
                    logger.warning("collinear columns never entered (ties break "
                                   "by column order): %s", ", ".join(collinear))
                others = [names[j] for j in inactive if names[j] not in collinear]
                if others:
                    logger.info("columns uncorrelated with the residual never "
                                "entered: %s", ", ".join(others))
            break
        entering = max(inactive, key=lambda j: (abs(c[j]), -j))
        trial = active + [entering]
        gram = xs[:, trial].T @ xs[:, trial]
        signs = np.sign(c[trial])
        signs[signs == 0] = 1.0
        try:
            ginv_s = np.linalg.solve(gram, signs)
        except np.linalg.LinAlgError:
            logger.warning("column %r is collinear with the active set; skipped", names[entering])
            excluded.add(entering)
            continue
        denom = float(signs @ ginv_s)
        if denom <= 0:
            logger.warning("column %r is collinear with the active set; skipped", names[entering])
            excluded.add(entering)
            continue
        active = trial
        a_a = 1.0 / math.sqrt(denom)
        w = a_a * ginv_s
        u = xs[:, active] @ w
        c_max = float(np.max(np.abs(c[active])))
        gamma_full = c_max / a_a
        gamma = gamma_full
        corr_u = xs.T @ u
        for j in range(m):
            if j in active or j in excluded:
                continue
            for candidate in (
                (c_max - c[j]) / (a_a - corr_u[j]) if a_a != corr_u[j] else math.inf,
                (c_max + c[j]) / (a_a + corr_u[j]) if a_a != -corr_u[j] else math.inf,
            ):
                if 1e-15 < candidate < gamma:
                    gamma = candidate
        beta_s[active] += gamma * w
        mu += gamma * u
        record(entering)
    return knots


def _ols_on(table: ScoreTable, names, method: str, **hyper) -> RegressionModel:
    sub = table.with_columns(names)
    model = ols_fit(sub) if names else RegressionModel("OLS", float(table.target.mean()), {})
    full = {n: model.coefficients.get(n, 0.0) for n in table.column_names}
    return RegressionModel(method=method, intercept=model.intercept, coefficients=full, hyperparameters=hyper)


def lars_traps(table: ScoreTable, n_traps: int | None = None, seed: int = 0) -> RegressionModel:
    """LARS with random probe columns; OLS on the columns that entered before any probe.

    A probe entering first yields a flagged intercept-only model.
    """
    m = len(table.columns)
    if n_traps is None:
        n_traps = m
    if n_traps < 1:
        raise FusionError("n_traps must be >= 1")
    rng = np.random.default_rng(seed)
    traps = rng.standard_normal((table.n_rows, n_traps))
    columns = dict(table.columns)
    for i in range(n_traps):
        columns[f"{TRAP_PREFIX}{i}"] = traps[:, i]
    augmented = ScoreTable(query_ids=list(table.query_ids), columns=columns, target=table.target)
    selected: list[str] = []
    for knot in lars_path(augmented):
        if knot.column.startswith(TRAP_PREFIX):
            break
        selected.append(knot.column)
    hyper = {"n_traps": n_traps, "seed": seed, "trap_entered_first": not selected}
    if not selected:
        logger.info("a probe column entered first; returning an intercept-only model")
    return _ols_on(table, selected, "LARS-Traps", **hyper)


def lars_cv(table: ScoreTable, k_folds: int = 5, seed: int = 0) -> RegressionModel:
    """Path-prefix length chosen by k-fold CV (ties favor the shorter prefix)."""
    m = len(table.columns)
    folds = _make_folds(table.n_rows, k_folds, seed)
    mse = np.zeros(m + 1)
    for val_idx, train_idx in folds:
        train, val = table.subset(train_idx), table.subset(val_idx)
        path = lars_path(train)
        for length in range(m + 1):
            if length == 0 or not path:
                y_hat = np.full(val.n_rows, train.target.mean())
            else:
                knot = path[min(length, len(path)) - 1]
                model = RegressionModel("LARS", knot.intercept, knot.coefficients)
                y_hat = predict(model, val)
            mse[length] += float(np.mean((y_hat - val.target) ** 2))
    best = int(np.argmin(mse))  # argmin takes the first = shortest prefix on ties
    path = lars_path(table)
    steps = min(best, len(path))
    if steps == 0:
        return RegressionModel("LARS-CV", float(table.target.mean()),
                               {n: 0.0 for n in table.column_names},
                               hyperparameters={"n_steps": 0, "k_folds": k_folds, "seed": seed})
    knot = path[steps - 1]
    return RegressionModel("LARS-CV", knot.intercept, dict(knot.coefficients),
                           hyperparameters={"n_steps": steps, "k_folds": k_folds, "seed": seed})


# ---------------------------------------------------------------------------
# cross-validation and bootstrap selection

def _make_folds(n: int, k_folds: int, seed: int):
    """Seeded partition into k folds; yields (val_idx, train_idx) pairs."""
    if k_folds < 2:
        raise FusionError("k_folds must be >= 2")
    if n // k_folds < 2:
        raise FusionError(f"folds of {n} rows into {k_folds} would have fewer than 2 rows")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k_folds)
    out = []
    for i, val_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        out.append((np.sort(val_idx), np.sort(train_idx)))
    return out


_CV_FITTERS = {
    "lasso": lambda tbl, lam, alpha: lasso_fit(tbl, lam),
    "ridge": lambda tbl, lam, alpha: ridge_fit(tbl, lam),
    "enet": lambda tbl, lam, alpha: enet_fit(tbl, lam, alpha),
}


def cv_select(table: ScoreTable, method: str, lam_grid=None, k_folds: int = 5,
              seed: int = 0, alpha: float = 0.5):
    """Pick lam by mean validation MSE over seeded folds; ties favor larger lam.

    Returns (best_lam, model refit on the full table). Coordinate-descent
    methods walk the grid from the largest lam down with warm starts.
    """
    if method not in _CV_FITTERS:
        raise FusionError(f"unknown CV method {method!r}")
    fitter = _CV_FITTERS[method]
    grid = lambda_grid(table) if lam_grid is None else np.asarray(lam_grid, dtype=float)
    if grid.size == 0:
        raise FusionError("empty lambda grid")
    grid = np.sort(grid)[::-1]
    folds = _make_folds(table.n_rows, k_folds, seed)
    cd_alpha = 1.0 if method == "lasso" else alpha
    mean_mse = np.zeros(grid.size)
    for val_idx, train_idx in folds:
        train, val = table.subset(train_idx), table.subset(val_idx)
        if method == "ridge":
            for gi, lam in enumerate(grid):
                y_hat = predict(ridge_fit(train, float(lam)), val)
                mean_mse[gi] += float(np.mean((y_hat - val.target) ** 2))
        else:
            xc, yc, x_mean, y_mean = _centered(train)
            gram, corr = xc.T @ xc, xc.T @ yc
            x_val = val.matrix()
            beta = np.zeros(xc.shape[1])
            for gi, lam in enumerate(grid):
                try:
                    beta = _cd_solve(gram, corr, float(lam), cd_alpha, beta0=beta)
                except ConvergenceError:
                    # a lam whose fold fit diverges is not selectable
                    mean_mse[gi] = math.inf
                    continue
                intercept = y_mean - float(x_mean @ beta)
                y_hat = intercept + x_val @ beta
                mean_mse[gi] += float(np.mean((y_hat - val.target) ** 2))
    best_idx = int(np.argmin(mean_mse))  # first index = largest lam on ties
    best_lam = float(grid[best_idx])
    return best_lam, fitter(table, best_lam, alpha)


def bolasso(table: ScoreTable, b: int = 100, threshold: float = 1.0,
            k_folds: int = 5, lam_grid=None, seed: int = 0) -> RegressionModel:
    """Bootstrap LASSO support selection followed by an OLS refit.

    Each of the ``b`` bootstrap resamples gets its own CV-selected lam; a
    column is kept when it is active in at least threshold*b supports.
    """
    if b < 2:
        raise FusionError("need at least 2 bootstrap samples")
    if not 0.0 < threshold <= 1.0:
        raise FusionError("threshold must be in (0, 1]")
    n = table.n_rows
    counts = {name: 0 for name in table.column_names}
    for i in range(b):
        rng = np.random.default_rng(derive_seed(seed, "bootstrap", i))
        sample = table.subset(rng.integers(0, n, size=n))
        if lambda_max(sample) <= 0.0:
            continue  # resampled target is flat; the support is empty
        try:
            _, model = cv_select(sample, "lasso", lam_grid=lam_grid, k_folds=k_folds,
                                 seed=derive_seed(seed, "cv", i))
        except ConvergenceError:
            # duplicated rows can make a resample too degenerate to fit;
            # it then contributes no support
            logger.info("bootstrap %d skipped: coordinate descent diverged", i)
            continue
        for name in model.support:
            counts[name] += 1
    needed = threshold * b - 1e-9
    kept = [name for name in table.column_names if counts[name] >= needed]
    hyper = {"b": b, "threshold": threshold, "seed": seed,
             "support_counts": dict(counts)}
    return _ols_on(table, kept, "BOLASSO", **hyper)


# ---------------------------------------------------------------------------
# prediction and model I/O

def predict(model: RegressionModel, table: ScoreTable, clamp: bool = False) -> np.ndarray:
    """intercept + sum of coefficient * column, optionally clamped to [0, 1].

    The model's stored normalization parameters, when present, are applied
    to the table first.
    """
    missing = [c for c in model.coefficients if c not in table.columns]
    if missing:
        raise FusionError(f"table lacks model columns: {', '.join(missing)}")
    if model.normalization is not None:
        table = minmax_apply(table.with_columns(list(model.coefficients)), model.normalization)
    y_hat = np.full(table.n_rows, model.intercept)
    for name, beta in model.coefficients.items():
        if beta != 0.0:
            y_hat = y_hat + beta * table.columns[name]
    return np.clip(y_hat, 0.0, 1.0) if clamp else y_hat


def write_model(model: RegressionModel, path) -> None:
    """Plain-text model dump: method, intercept, coefficients, hyperparameters."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# qppfuse model v1\n")
        fh.write(f"method\t{model.method}\n")
        fh.write(f"intercept\t{model.intercept!r}\n")
        for name, beta in model.coefficients.items():
            fh.write(f"coef\t{name}\t{beta!r}\n")
        for key, value in model.hyperparameters.items():
            if key == "support_counts":
                continue
            fh.write(f"hyper\t{key}\t{value!r}\n")
        if model.normalization is not None:
            for name, (lo, hi) in model.normalization.items():
                fh.write(f"norm\t{name}\t{lo!r}\t{hi!r}\n")


def read_model(path) -> RegressionModel:
    method = None
    intercept = 0.0
    coefficients: dict[str, float] = {}
    hyper: dict = {}
    norm: dict[str, tuple[float, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if parts[0] == "method":
                method = parts[1]
            elif parts[0] == "intercept":
                intercept = float(parts[1])
            elif parts[0] == "coef":
                coefficients[parts[1]] = float(parts[2])
            elif parts[0] == "hyper":
                try:
                    hyper[parts[1]] = ast.literal_eval(parts[2])
                except (ValueError, SyntaxError):
                    hyper[parts[1]] = parts[2]
            elif parts[0] == "norm":
                norm[parts[1]] = (float(parts[2]), float(parts[3]))
    if method is None:
        raise FusionError(f"{path}: missing method line")
    return RegressionModel(method=method, intercept=intercept, coefficients=coefficients,
                           hyperparameters=hyper, normalization=norm or None)
