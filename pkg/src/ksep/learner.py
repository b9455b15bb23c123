"""Gradient learners for k-separable projections and interval classifiers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boolfn import Label
from .projection import ThreeSepParams


def _as_bool_labels(labels) -> np.ndarray:
    if isinstance(labels, np.ndarray) and labels.dtype == bool:
        return labels
    out = []
    for y in labels:
        if isinstance(y, Label):
            if y is Label.MIXED:
                raise ValueError("labels must be plus or minus")
            out.append(y is Label.PLUS)
        elif isinstance(y, str):
            out.append(Label(y) is Label.PLUS)
        else:
            out.append(bool(y))
    return np.asarray(out, dtype=bool)


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.shape else float(out)


@dataclass
class ClusterTargets:
    centers: np.ndarray
    labels: np.ndarray  # True = plus

    def __post_init__(self) -> None:
        self.centers = np.asarray(self.centers, dtype=float)
        self.labels = _as_bool_labels(self.labels)
        if self.centers.ndim != 1 or len(self.centers) == 0:
            raise ValueError("need a non-empty 1-D array of centers")
        if len(self.labels) != len(self.centers):
            raise ValueError("one label per center")


@dataclass
class TrainConfig:
    restarts: int = 20
    max_iters: int = 300
    learning_rate: float = 0.1
    tolerance: float = 1e-10
    k_max: int | None = None  # None: input dimension + 1
    k_min: int = 2
    seed: int = 0
    smoothing: str = "logistic"
    beta: float = 10.0
    gap_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.k_max is not None and self.k_max < 2:
            raise ValueError("k_max must be >= 2")
        if self.k_min < 2 or (self.k_max is not None and self.k_min > self.k_max):
            raise ValueError("need 2 <= k_min <= k_max")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.smoothing not in ("hard", "logistic"):
            raise ValueError("smoothing must be 'hard' or 'logistic'")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


# -- nearest same-class center loss --------------------------------------------


def assign_centers(y: np.ndarray, labels: np.ndarray, targets: ClusterTargets) -> np.ndarray:
    """Index of the nearest center of each point's own class; ties go to the lower index."""
    missing = set(np.unique(labels).tolist()) - set(np.unique(targets.labels).tolist())
    if missing:
        names = ", ".join("plus" if m else "minus" for m in sorted(missing))
        raise ValueError(f"no cluster center for class {names}")
    return _assign(y, labels, targets.centers, targets.labels)


def _assign(y, labels, centers, center_labels):
    d = np.abs(y[:, None] - centers[None, :])
    d[center_labels[None, :] != labels[:, None]] = np.inf
    return np.argmin(d, axis=1)


def loss_quadratic(w, targets: ClusterTargets, X, labels, assignment=None) -> float:
    """Half the squared distance of each projection to its nearest same-class center."""
    X = np.asarray(X, dtype=float)
    labels = _as_bool_labels(labels)
    y = X @ np.asarray(w, dtype=float)
    j = assign_centers(y, labels, targets) if assignment is None else assignment
    return 0.5 * float(np.sum((y - targets.centers[j]) ** 2))


def grad_quadratic(w, targets: ClusterTargets, X, labels, assignment=None):
    """Gradient of :func:`loss_quadratic` in (w, centers) with assignments held fixed."""
    X = np.asarray(X, dtype=float)
    labels = _as_bool_labels(labels)
    y = X @ np.asarray(w, dtype=float)
    j = assign_centers(y, labels, targets) if assignment is None else assignment
    e = y - targets.centers[j]
    gw = X.T @ e
    gt = -np.bincount(j, weights=e, minlength=len(targets.centers))
    return gw, gt


# -- three-interval linear loss ---------------------------------------------------


def loss_3sep(w, params: ThreeSepParams, X, labels, inside=True, smoothing: str = "hard",
              beta: float = 1.0, normalize: bool = True) -> float:
    """Linear interval loss: ``inside``-class points are penalised outside [a, b],
    the other class inside it.

    The class indicators are placed so that a projection putting the inside
    class in [a, b] and the rest outside costs exactly zero (swapping them
    would penalise exactly those solutions).  Points on a or b cost nothing
    for either class.  The y <= t
    half-line indicator is replaced by ``1 - sigmoid(beta*(y - t))`` under
    logistic smoothing.  With ``normalize`` the direction is scaled to unit
    norm, which rules out the trivial w = 0 minimum.
    """
    return _loss3(w, params, X, labels, inside, smoothing, beta, normalize)[0]


def _loss3(w, params, X, labels, inside, smoothing, beta, normalize):
    a, b = params
    if not a < b:
        raise ValueError(f"interval edges must satisfy a < b, got a={a}, b={b}")
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    norm = float(np.linalg.norm(w))
    if normalize:
        if norm == 0:
            raise ValueError("zero direction cannot be normalized")
        u = w / norm
    else:
        u = w
    pos = _as_bool_labels(labels) == bool(inside)
    y = X @ u
    t = (a + b) / 2
    # per-point penalties on each half-line
    left = np.where(pos, np.maximum(0.0, a - y), np.maximum(0.0, y - a))
    right = np.where(pos, np.maximum(0.0, y - b), np.maximum(0.0, b - y))
    above_a = (y > a).astype(float)
    below_a = (y < a).astype(float)
    above_b = (y > b).astype(float)
    below_b = (y < b).astype(float)
    dleft = np.where(pos, -below_a, above_a)
    dright = np.where(pos, above_b, -below_b)
    if smoothing == "hard":
        s = (y > t).astype(float)
        ds = np.zeros_like(y)
    elif smoothing == "logistic":
        s = _sigmoid(beta * (y - t))
        ds = beta * s * (1 - s)
    else:
        raise ValueError("smoothing must be 'hard' or 'logistic'")
    loss = float(np.sum((1 - s) * left + s * right))
    # derivative w.r.t. y, a, b (a and b also move t)
    dy = (1 - s) * dleft + s * dright + ds * (right - left)
    da_left = np.where(pos, below_a, -above_a)
    db_right = np.where(pos, -above_b, below_b)
    dt = -ds * (right - left)
    ga = float(np.sum((1 - s) * da_left) + 0.5 * np.sum(dt))
    gb = float(np.sum(s * db_right) + 0.5 * np.sum(dt))
    gu = X.T @ dy
    if normalize:
        gw = (gu - u * (u @ gu)) / norm
    else:
        gw = gu
    return loss, gw, ga, gb


def grad_3sep(w, params: ThreeSepParams, X, labels, inside=True, smoothing: str = "hard",
              beta: float = 1.0, normalize: bool = True):
    """(d/dw, d/da, d/db) of :func:`loss_3sep`; subgradient at the kinks."""
    return _loss3(w, params, X, labels, inside, smoothing, beta, normalize)[1:]


# -- interval networks -------------------------------------------------------------


def soft_window(Y, a, b, beta=1.0):
    """sigmoid(beta*(Y-a)) - sigmoid(beta*(Y-b)): near 1 inside [a, b], near 0 far outside."""
    if not a < b:
        raise ValueError(f"window edges must satisfy a < b, got a={a}, b={b}")
    if not beta > 0:
        raise ValueError("beta must be positive")
    return _sigmoid(beta * (np.asarray(Y, dtype=float) - a)) - _sigmoid(
        beta * (np.asarray(Y, dtype=float) - b))


@dataclass
class IntervalModel:
    w: np.ndarray
    thresholds: np.ndarray
    interval_labels: np.ndarray  # True = plus, one per interval
    beta: float = 10.0
    pure: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=float)
        self.thresholds = np.asarray(self.thresholds, dtype=float).reshape(-1)
        self.interval_labels = _as_bool_labels(self.interval_labels)
        if np.any(np.diff(self.thresholds) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if len(self.interval_labels) != len(self.thresholds) + 1:
            raise ValueError("need exactly one label per interval")

    @property
    def k(self) -> int:
        return len(self.interval_labels)

    @property
    def n_params(self) -> int:
        """Direction weights plus thresholds (n + k - 1)."""
        return len(self.w) + len(self.thresholds)

    def parameter_counts(self) -> dict:
        n, nthr = len(self.w), len(self.thresholds)
        return {
            "weights": n,
            "thresholds": nthr,
            "interval_model": n + nthr,
            "network_with_slope": n + nthr + 1,
            "network_neurons": 1 + nthr,
        }

    def project(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.w

    def interval_index(self, X) -> np.ndarray:
        return np.searchsorted(self.thresholds, self.project(X), side="right")

    def predict(self, X) -> np.ndarray:
        return self.interval_labels[self.interval_index(X)]

    def accuracy(self, X, labels) -> float:
        return float(np.mean(self.predict(X) == _as_bool_labels(labels)))

    def scaled(self, c: float) -> "IntervalModel":
        if not c > 0:
            raise ValueError("scale must be positive")
        return IntervalModel(self.w * c, self.thresholds * c, self.interval_labels.copy(),
                             self.beta / c, self.pure, dict(self.meta))

    def to_json(self) -> dict:
        return {
            "weights": self.w.tolist(),
            "thresholds": self.thresholds.tolist(),
            "interval_labels": ["+" if v else "-" for v in self.interval_labels],
            "k": self.k,
            "beta": self.beta,
            "pure": self.pure,
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, d: dict) -> "IntervalModel":
        return cls(d["weights"], d["thresholds"], [Label(s) for s in d["interval_labels"]],
                   d.get("beta", 10.0), d.get("pure", True), d.get("meta", {}))


def interval_network_forward(X, model: IntervalModel, beta: float | None = None) -> np.ndarray:
    """Soft score of the projection + bias-unit network; its sign is the class.

    One linear unit gives y = w.x; each threshold feeds a sigmoid unit and
    the units are summed with alternating +-2 weights on top of the first
    interval's label, i.e. a chain of soft trapezoidal windows.
    """
    beta = model.beta if beta is None else beta
    y = model.project(X)
    lab = np.where(model.interval_labels, 1.0, -1.0)
    score = np.full_like(y, lab[0])
    for i, theta in enumerate(model.thresholds):
        score = score + (lab[i + 1] - lab[i]) * _sigmoid(beta * (y - theta))
    return score


def parity_cos(x):
    """cos(pi * sum x) as +-1: +1 for an even number of ones, -1 for odd."""
    arr = np.asarray(x)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("parity_cos needs a binary vector")
    s = arr.sum(axis=-1)
    out = np.sign(np.cos(np.pi * s)).astype(int)
    return int(out) if out.ndim == 0 else out


# -- posterior on the projection line --------------------------------------------


@dataclass
class PosteriorEstimate:
    bandwidth: float
    plus_values: np.ndarray
    minus_values: np.ndarray
    prior_plus: float
    degenerate: bool = False

    def _log_density(self, y: np.ndarray, values: np.ndarray) -> np.ndarray:
        if len(values) == 0:
            return np.full(y.shape, -np.inf)
        h = self.bandwidth
        z = -0.5 * ((y[:, None] - values[None, :]) / h) ** 2
        top = z.max(axis=1, keepdims=True)
        lse = top[:, 0] + np.log(np.exp(z - top).sum(axis=1))
        return lse - math.log(len(values) * h * math.sqrt(2 * math.pi))

    def density(self, y, plus: bool = True) -> np.ndarray:
        """Class-conditional kernel density P(y | class)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.exp(self._log_density(y, self.plus_values if plus else self.minus_values))

    def posterior(self, y) -> tuple[np.ndarray, np.ndarray]:
        """(P(plus | y), P(minus | y))."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.degenerate:
            one = np.ones_like(y)
            return (one, 0 * one) if self.prior_plus == 1 else (0 * one, one)
        lp = self._log_density(y, self.plus_values) + math.log(self.prior_plus)
        lm = self._log_density(y, self.minus_values) + math.log(1 - self.prior_plus)
        # finite wherever either class has support
        p_plus = _sigmoid(lp - lm)
        return np.atleast_1d(p_plus), 1 - np.atleast_1d(p_plus)


def posterior_estimate(X, labels, w, bandwidth: float) -> PosteriorEstimate:
    """Parzen-window densities of both classes along ``w`` and Bayes posteriors."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    lab = _as_bool_labels(labels)
    y = np.asarray(X, dtype=float) @ np.asarray(w, dtype=float)
    prior = float(lab.mean())
    return PosteriorEstimate(float(bandwidth), y[lab], y[~lab], prior,
                             degenerate=prior in (0.0, 1.0))


# -- fitting ---------------------------------------------------------------------------


@dataclass
class FitReport:
    k: int
    pure: bool
    restart: int | None
    loss: float
    loss_trace: list[float]
    accuracy: float
    min_gap: float | None
    cluster_sizes: list[int]
    attempts: dict[int, int]  # k -> pure restarts found

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "pure": self.pure,
            "restart": self.restart,
            "loss": self.loss,
            "loss_trace": self.loss_trace,
            "accuracy": self.accuracy,
            "min_gap": self.min_gap,
            "cluster_sizes": self.cluster_sizes,
            "attempts": {str(k): v for k, v in self.attempts.items()},
        }


def _runs(y: np.ndarray, labels: np.ndarray):
    """Runs of the sorted projection: (label, member indices) per run."""
    order = np.argsort(y, kind="stable")
    ls = labels[order]
    cut = np.flatnonzero(ls[1:] != ls[:-1]) + 1
    return [(bool(ls[s]), order[s:e]) for s, e in zip(np.r_[0, cut], np.r_[cut, len(y)])]


def _pure_run_count(y: np.ndarray, labels: np.ndarray, gap_tol: float) -> int | None:
    order = np.argsort(y, kind="stable")
    ls = labels[order]
    change = ls[1:] != ls[:-1]
    ys = y[order]
    if np.any((ys[1:] - ys[:-1])[change] <= gap_tol):
        return None
    return int(change.sum()) + 1


def pure_intervals(y: np.ndarray, labels: np.ndarray, gap_tol: float):
    """Run count and thresholds when every class change has a gap > ``gap_tol``."""
    order = np.argsort(y, kind="stable")
    ys, ls = y[order], labels[order]
    change = np.flatnonzero(ls[1:] != ls[:-1])
    if np.any(ys[change + 1] - ys[change] <= gap_tol):
        return None
    thresholds = (ys[change] + ys[change + 1]) / 2
    run_labels = np.r_[ls[0], ls[change + 1]] if len(ls) else ls
    gaps = ys[change + 1] - ys[change]
    sizes = np.diff(np.r_[0, change + 1, len(ys)])
    return len(change) + 1, thresholds, run_labels, (float(gaps.min()) if len(gaps) else None), sizes


def seed_centers(y: np.ndarray, labels: np.ndarray, k: int) -> ClusterTargets:
    """Centers from the class runs of the sorted projection, merged down to ``k``.

    The smallest run is absorbed repeatedly; its two neighbours then share a
    class and fuse into one run.
    """
    runs = [[lab, list(idx)] for lab, idx in _runs(y, labels)]
    while len(runs) > max(k, 1):
        i = min(range(len(runs)), key=lambda r: (len(runs[r][1]), r))
        runs.pop(i)
        if 0 < i < len(runs):
            runs[i - 1][1].extend(runs[i][1])
            runs.pop(i)
    # a dropped end run may leave its class without any center
    for cls in (True, False):
        if cls in labels and not any(r[0] == cls for r in runs):
            runs.append([cls, list(np.flatnonzero(labels == cls))])
    centers = np.array([y[idx].mean() for _, idx in runs])
    return ClusterTargets(centers, np.array([lab for lab, _ in runs]))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _train_restart(X, labels, k, w, cfg: TrainConfig):
    """Alternate a gradient step on w with center re-estimation; keep the best pure state."""
    m = len(X)
    y = X @ w
    targets = seed_centers(y, labels, k)
    centers, clabels = targets.centers, targets.labels
    trace = []
    best = None
    prev = math.inf
    for _ in range(cfg.max_iters):
        y = X @ w
        j = _assign(y, labels, centers, clabels)
        e = y - centers[j]
        loss = 0.5 * float(e @ e)
        trace.append(loss)
        runs = _pure_run_count(y, labels, cfg.gap_tol)
        if runs is not None and runs <= k:
            best = (loss, w.copy())
            break
        if prev - loss < cfg.tolerance:
            break
        prev = loss
        w = _unit(w - cfg.learning_rate * (X.T @ e) / m)
        y = X @ w
        counts = np.bincount(j, minlength=len(centers))
        sums = np.bincount(j, weights=y, minlength=len(centers))
        keep = counts > 0
        centers = (sums[keep] / counts[keep])
        clabels = clabels[keep]
    return best, trace, w


def _model_from_projection(X, labels, w, k, cfg, pure_hit=None, meta=None) -> IntervalModel:
    y = X @ w
    if pure_hit is not None:
        _, thr, run_labels, _, _ = pure_hit
        return IntervalModel(w, thr, run_labels, cfg.beta, True, meta or {})
    # impure: thresholds at the boundaries of the merged class runs
    t = seed_centers(y, labels, k)
    order = np.argsort(t.centers)
    c, lab = t.centers[order], t.labels[order]
    thr, keep_lab = [], [lab[0]]
    for i in range(1, len(c)):
        if lab[i] != keep_lab[-1] and c[i] > c[i - 1]:
            thr.append((c[i - 1] + c[i]) / 2)
            keep_lab.append(lab[i])
    return IntervalModel(w, thr, keep_lab, cfg.beta, False, meta or {})


def _prepare(X, labels):
    X = np.asarray(X, dtype=float)
    lab = _as_bool_labels(labels)
    if X.ndim != 2 or len(X) != len(lab):
        raise ValueError("X must be (m, d) with one label per row")
    if len(X) < 2:
        raise ValueError("need at least two points")
    if lab.all() or not lab.any():
        raise ValueError("data has a single class; nothing to separate")
    return X, lab


def fit_interval_model(X, labels, cfg: TrainConfig | None = None) -> tuple[IntervalModel, FitReport]:
    """Smallest k (2..k_max) whose restarts reach label-pure intervals.

    Each restart draws a unit direction, seeds k centers from the class runs
    of its projection and descends the nearest-center quadratic loss.  Among
    restarts that become pure at the accepted k the lowest loss wins, ties to
    the lower restart index.  If no k up to k_max becomes pure the most
    accurate model is returned with ``pure=False``.
    """
    cfg = cfg or TrainConfig()
    X, lab = _prepare(X, labels)
    k_max = cfg.k_max if cfg.k_max is not None else X.shape[1] + 1
    if cfg.k_min > k_max:
        raise ValueError(f"k_min={cfg.k_min} exceeds k_max={k_max}")
    # centering leaves the run structure unchanged and conditions the gradient
    Xc = X - X.mean(axis=0)
    attempts: dict[int, int] = {}
    fallback = None
    for k in range(cfg.k_min, k_max + 1):
        winners = []
        for r in range(cfg.restarts):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, k, r]))
            w0 = _unit(rng.standard_normal(X.shape[1]))
            best, trace, w_end = _train_restart(Xc, lab, k, w0, cfg)
            if best is not None:
                winners.append((best[0], r, best, trace))
            elif k == k_max:
                model = _model_from_projection(X, lab, w_end, k, cfg)
                acc = model.accuracy(X, lab)
                if fallback is None or acc > fallback[0]:
                    fallback = (acc, r, model, trace)
        attempts[k] = len(winners)
        if winners:
            winners.sort(key=lambda t: (t[0], t[1]))
            loss, r, (_, w), trace = winners[0]
            # thresholds are placed on the uncentered projection
            hit = pure_intervals(X @ w, lab, cfg.gap_tol)
            meta = {"seed": cfg.seed, "restarts": cfg.restarts, "restart": r, "final_loss": loss}
            model = _model_from_projection(X, lab, w, k, cfg, hit, meta)
            report = FitReport(hit[0], True, r, loss, trace, model.accuracy(X, lab), hit[3],
                               hit[4].tolist(), attempts)
            return model, report
    acc, r, model, trace = fallback
    model.meta = {"seed": cfg.seed, "restarts": cfg.restarts, "restart": r,
                  "final_loss": trace[-1] if trace else None}
    report = FitReport(model.k, False, r, trace[-1] if trace else math.nan, trace, acc, None,
                       [], attempts)
    return model, report


def fit_three_separable(X, labels, cfg: TrainConfig | None = None, inside: bool | None = None):
    """Gradient descent on the three-interval loss with random restarts.

    ``inside`` selects the class expected in the middle interval; ``None``
    tries plus first, then minus.  Returns ``(model, report)`` or raises
    ``ValueError`` if no restart reaches zero training error.
    """
    cfg = cfg or TrainConfig()
    X, lab = _prepare(X, labels)
    Xc = X - X.mean(axis=0)
    classes = (True, False) if inside is None else (bool(inside),)
    for cls in classes:
        for r in range(cfg.restarts):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3, r, int(cls)]))
            w = _unit(rng.standard_normal(X.shape[1]))
            y = Xc @ w
            a, b = float(y[lab == cls].min()), float(y[lab == cls].max())
            if not a < b:
                a, b = a - 0.5, b + 0.5
            trace = []
            for _ in range(cfg.max_iters):
                hit = pure_intervals(Xc @ w, lab, cfg.gap_tol)
                if hit is not None and hit[0] <= 3 and (hit[0] < 3 or hit[2][1] == cls):
                    yx = X @ w
                    hit = pure_intervals(yx, lab, cfg.gap_tol)
                    meta = {"seed": cfg.seed, "restart": r, "inside": "+" if cls else "-",
                            "final_loss": trace[-1] if trace else 0.0}
                    model = IntervalModel(w, hit[1], hit[2], cfg.beta, True, meta)
                    report = FitReport(hit[0], True, r, meta["final_loss"], trace,
                                       model.accuracy(X, lab), hit[3], hit[4].tolist(), {3: 1})
                    return model, report
                loss, gw, ga, gb = _loss3(w, (a, b), Xc, lab, cls, cfg.smoothing, cfg.beta, True)
                trace.append(loss)
                w = _unit(w - cfg.learning_rate * gw)
                a -= cfg.learning_rate * ga
                b -= cfg.learning_rate * gb
                if not a < b:
                    a, b = (a + b) / 2 - 1e-3, (a + b) / 2 + 1e-3
    raise ValueError("no restart reached a pure three-interval projection")
