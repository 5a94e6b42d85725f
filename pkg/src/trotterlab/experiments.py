"""Config-driven sweeps, rate fits, truncation checks and result files."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .bounds import BoundReport
from .errors import (ConfigError, InsufficientPoints, IoError, JobError, NumericalError,
                     TrotterLabError)
from .matcore import HermitianOperator, StateVector
from .models import SplitModel, fourier_decay_state, oscillator_model, torus_model
from .propagate import B_THEN_A, ORDERS, trotter_errors

ZERO_ERROR = 1e-14
STABILITY_THRESHOLD = 0.01


def default_n_list(lo=10, hi=1000, points=40):
    """Log-spaced integers from lo to hi, deduplicated after rounding."""
    return [int(v) for v in np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))]


# ---------------------------------------------------------------- config

_MODEL_KEYS = {
    "torus": {"kind", "potential", "M", "alpha", "scale"},
    "oscillator": {"kind", "dim"},
    "custom": {"kind", "path"},
}
_STATE_KEYS = {
    "eigenstate_of_total": {"kind", "k"},
    "eigenstate_of_A": {"kind", "k"},
    "basis": {"kind", "k"},
    "fourier_decay": {"kind", "s"},
    "explicit": {"kind", "path"},
}
_TOP_KEYS = {"model", "state", "t", "n_list", "fit_window", "seed", "output", "order", "allow_edge_states"}


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


@dataclass(frozen=True)
class ExperimentConfig:
    model: Dict[str, Any]
    state: Dict[str, Any]
    t: Any = 1.0
    n_list: Tuple[int, ...] = field(default_factory=lambda: tuple(default_n_list()))
    fit_window: Optional[Tuple[int, int]] = None
    seed: int = 0
    output: Optional[str] = None
    order: str = B_THEN_A
    allow_edge_states: bool = False
    base_dir: str = field(default=".", compare=False)

    @classmethod
    def from_dict(cls, d, base_dir="."):
        problems = []
        if not isinstance(d, dict):
            raise ConfigError([("config", "top level must be a JSON object")])
        for k in sorted(set(d) - _TOP_KEYS):
            problems.append((k, "unknown key"))
        model = d.get("model")
        state = d.get("state")
        if not isinstance(model, dict):
            problems.append(("model", "required object"))
            model = {}
        else:
            kind = model.get("kind")
            if kind not in _MODEL_KEYS:
                problems.append(("model.kind", f"must be one of {sorted(_MODEL_KEYS)}"))
            else:
                for k in sorted(set(model) - _MODEL_KEYS[kind]):
                    problems.append((f"model.{k}", "unknown key"))
                if kind == "torus":
                    if model.get("potential") not in ("square_wave", "sine", "v_alpha"):
                        problems.append(("model.potential", "must be square_wave, sine or v_alpha"))
                    if not (_is_int(model.get("M")) and model["M"] >= 1):
                        problems.append(("model.M", "positive integer required"))
                    if model.get("potential") == "v_alpha":
                        a = model.get("alpha")
                        if not (_is_num(a) and a > 0.5):
                            problems.append(("model.alpha", "number > 1/2 required for v_alpha"))
                    elif "alpha" in model:
                        problems.append(("model.alpha", "only used with potential v_alpha"))
                    if "scale" in model and not _is_num(model["scale"]):
                        problems.append(("model.scale", "finite number required"))
                elif kind == "oscillator":
                    if not (_is_int(model.get("dim")) and model["dim"] >= 2):
                        problems.append(("model.dim", "integer >= 2 required"))
                else:
                    if not isinstance(model.get("path"), str):
                        problems.append(("model.path", "string path required"))
        if not isinstance(state, dict):
            problems.append(("state", "required object"))
            state = {}
        else:
            kind = state.get("kind")
            if kind not in _STATE_KEYS:
                problems.append(("state.kind", f"must be one of {sorted(_STATE_KEYS)}"))
            else:
                for k in sorted(set(state) - _STATE_KEYS[kind]):
                    problems.append((f"state.{k}", "unknown key"))
                if "k" in _STATE_KEYS[kind] and not (_is_int(state.get("k")) and state["k"] >= 0):
                    problems.append(("state.k", "nonnegative integer required"))
                if kind == "fourier_decay":
                    if not _is_num(state.get("s")):
                        problems.append(("state.s", "number required"))
                    if model.get("kind") != "torus":
                        problems.append(("state.kind", "fourier_decay needs a torus model"))
                if kind == "explicit" and not isinstance(state.get("path"), str):
                    problems.append(("state.path", "string path required"))
        t = d.get("t", 1.0)
        if isinstance(t, list):
            if not t or not all(_is_num(v) and v >= 0 for v in t):
                problems.append(("t", "list of nonnegative numbers required"))
        elif not (_is_num(t) and t >= 0):
            problems.append(("t", "nonnegative number or list required"))
        n_list = d.get("n_list")
        if n_list is None:
            n_list = default_n_list()
        elif not (isinstance(n_list, list) and n_list and all(_is_int(v) and v >= 1 for v in n_list)):
            problems.append(("n_list", "non-empty list of positive integers required"))
            n_list = []
        elif any(b <= a for a, b in zip(n_list, n_list[1:])):
            problems.append(("n_list", "must be strictly increasing"))
        fw = d.get("fit_window")
        if fw is not None:
            if not (isinstance(fw, list) and len(fw) == 2 and all(_is_num(v) for v in fw) and fw[0] < fw[1]):
                problems.append(("fit_window", "[n_lo, n_hi] with n_lo < n_hi required"))
            elif n_list and (fw[0] < min(n_list) or fw[1] > max(n_list)):
                problems.append(("fit_window", "must lie inside [min(n_list), max(n_list)]"))
        seed = d.get("seed", 0)
        if not _is_int(seed):
            problems.append(("seed", "integer required"))
        out = d.get("output")
        if out is not None and not isinstance(out, str):
            problems.append(("output", "string path required"))
        order = d.get("order", B_THEN_A)
        if order not in ORDERS:
            problems.append(("order", f"must be one of {list(ORDERS)}"))
        edge = d.get("allow_edge_states", False)
        if not isinstance(edge, bool):
            problems.append(("allow_edge_states", "boolean required"))
        if (not problems and model.get("kind") == "oscillator" and "k" in state and not edge
                and state["k"] >= model["dim"] / 4):
            problems.append(("state.k", f"k must be < dim/4 = {model['dim'] / 4:g} (truncation edge); "
                                        "set allow_edge_states to override"))
        if problems:
            raise ConfigError(problems)
        return cls(model=dict(model), state=dict(state), t=list(t) if isinstance(t, list) else float(t),
                   n_list=tuple(int(v) for v in n_list),
                   fit_window=None if fw is None else (fw[0], fw[1]), seed=int(seed), output=out,
                   order=order, allow_edge_states=edge, base_dir=base_dir)

    @classmethod
    def from_json(cls, text, base_dir="."):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([("config", f"invalid JSON: {exc}")]) from exc
        return cls.from_dict(d, base_dir)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError([("config", f"cannot read {path}: {exc}")]) from exc
        return cls.from_json(text, os.path.dirname(os.path.abspath(path)))

    def to_dict(self):
        d = {"model": self.model, "state": self.state, "t": self.t, "n_list": list(self.n_list),
             "seed": self.seed, "order": self.order}
        if self.fit_window is not None:
            d["fit_window"] = list(self.fit_window)
        if self.output is not None:
            d["output"] = self.output
        if self.allow_edge_states:
            d["allow_edge_states"] = True
        return d

    def truncation(self):
        m = self.model
        if m["kind"] == "torus":
            return m["M"]
        if m["kind"] == "oscillator":
            return m["dim"]
        return None

    def with_truncation(self, size):
        m = dict(self.model)
        if m["kind"] == "torus":
            m["M"] = int(size)
        elif m["kind"] == "oscillator":
            m["dim"] = int(size)
        else:
            raise ConfigError([("model.kind", "custom models have no truncation parameter")])
        d = self.to_dict()
        d["model"] = m
        return ExperimentConfig.from_dict(d, self.base_dir)

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def config_hash(config: ExperimentConfig) -> str:
    """Short sha256 of the canonical JSON form (the output path is excluded)."""
    d = config.to_dict()
    d.pop("output", None)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------- model and state

def build_model(config: ExperimentConfig) -> SplitModel:
    m = config.model
    try:
        if m["kind"] == "torus":
            return torus_model(m["potential"], m["M"], m.get("alpha"), float(m.get("scale", 1.0)))
        if m["kind"] == "oscillator":
            return oscillator_model(m["dim"])
        path = config.resolve(m["path"])
        with np.load(path) as z:
            A, B = np.asarray(z["H_A"]), np.asarray(z["H_B"])
        ops = []
        for X, lab in ((A, "H_A"), (B, "H_B")):
            diag = X.ndim == 2 and not np.count_nonzero(X - np.diag(np.diagonal(X)))
            ops.append(HermitianOperator(X, diagonal_hint=bool(diag), label=lab))
        return SplitModel(ops[0], ops[1], "H_A", "H_B")
    except (OSError, KeyError) as exc:
        raise ConfigError([("model.path", f"cannot load custom model: {exc}")]) from exc
    except (ValueError, TrotterLabError) as exc:
        if isinstance(exc, NumericalError):
            raise
        raise ConfigError([("model", str(exc))]) from exc


def _fix_phase(v):
    i = int(np.argmax(np.abs(v)))
    return v * (abs(v[i]) / v[i])


def build_state(config: ExperimentConfig, model: SplitModel) -> StateVector:
    s = config.state
    kind = s["kind"]
    tag = model.basis_tag
    if "k" in s and s["k"] >= model.dim:
        raise ConfigError([("state.k", f"k = {s['k']} exceeds dim {model.dim}")])
    if kind == "eigenstate_of_total":
        v = model.total.eig.eigenvectors[:, s["k"]]
        return StateVector.normalized(_fix_phase(v), tag, f"eigenstate {s['k']} of H_A+H_B")
    if kind == "eigenstate_of_A":
        v = model.H_A.eig.eigenvectors[:, s["k"]]
        return StateVector.normalized(_fix_phase(v), tag, f"eigenstate {s['k']} of {model.label_A}")
    if kind == "basis":
        return StateVector.basis(model.dim, s["k"], tag, f"basis state {s['k']}")
    if kind == "fourier_decay":
        return StateVector(fourier_decay_state(config.model["M"], s["s"]), tag, f"|n|^-{s['s']} decay")
    try:
        v = np.load(config.resolve(s["path"]))
    except OSError as exc:
        raise ConfigError([("state.path", f"cannot load state: {exc}")]) from exc
    v = np.asarray(v, dtype=np.complex128).ravel()
    if v.size != model.dim:
        raise ConfigError([("state.path", f"state has {v.size} entries, model dim is {model.dim}")])
    return StateVector.normalized(v, tag, os.path.basename(s["path"]))


# ---------------------------------------------------------------- curves and fits

@dataclass(frozen=True)
class ErrorCurve:
    config_hash: str
    t: float
    points: Tuple[Tuple[int, float], ...]
    truncation: Optional[int] = None

    def __post_init__(self):
        pts = tuple(sorted((int(n), float(e)) for n, e in self.points))
        object.__setattr__(self, "points", pts)

    @property
    def ns(self):
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def errors(self):
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    points_used: int
    zeros_excluded: int = 0

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "window": list(self.window), "points_used": self.points_used}


def _run_t(model, psi, t, n_list, order, jobs):
    def job(n):
        try:
            return float(trotter_errors(model, psi.coeffs, t, [n], order)[0, 0])
        except NumericalError as exc:
            raise JobError(n, t, exc) from exc

    # warm shared caches outside the pool
    model.total.eig, model.H_A.eig, model.H_B.eig
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            errs = list(ex.map(job, n_list))
    else:
        errs = [job(n) for n in n_list]
    return errs


def run_experiment(config: ExperimentConfig, jobs: int = 1):
    """Trotter error curve(s) for the configured model and state.

    Returns one ErrorCurve for scalar t and a list of curves for a t list.
    """
    model = build_model(config)
    psi = build_state(config, model)
    h = config_hash(config)
    ts = config.t if isinstance(config.t, list) else [config.t]
    curves = []
    for t in ts:
        errs = _run_t(model, psi, float(t), config.n_list, config.order, jobs)
        curves.append(ErrorCurve(h, float(t), tuple(zip(config.n_list, errs)), config.truncation()))
    return curves if isinstance(config.t, list) else curves[0]


def default_fit_window(ns):
    """Upper half of the n range in log scale."""
    lo, hi = float(min(ns)), float(max(ns))
    return math.sqrt(lo * hi), hi


def pre_crossover_window(ns):
    """Lowest decade [n_min, 10 n_min] of the sweep, before finite-matrix O(1/n) takes over."""
    lo, hi = float(min(ns)), float(max(ns))
    return lo, min(10.0 * lo, hi)


def _ols(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icpt), float(min(1.0, max(0.0, r2)))


def fit_rate(curve: ErrorCurve, window: Optional[Sequence[float]] = None) -> RateFit:
    """Least squares of log error against log n inside the window (inclusive)."""
    ns, es = curve.ns, curve.errors
    if window is None:
        window = default_fit_window(ns)
    lo, hi = float(window[0]), float(window[1])
    inside = (ns >= lo) & (ns <= hi)
    good = inside & (es > ZERO_ERROR)
    zeros = int(np.sum(inside & ~good))
    if good.sum() < 3:
        raise InsufficientPoints(f"{int(good.sum())} usable points in window [{lo:g}, {hi:g}] "
                                 f"({zeros} zero errors excluded); need >= 3")
    slope, icpt, r2 = _ols(np.log(ns[good]), np.log(es[good]))
    return RateFit(slope, icpt, r2, (lo, hi), int(good.sum()), zeros)


def sliding_fits(curve: ErrorCurve, width_decades=0.5, step_decades=0.25):
    """Local slopes over windows of fixed log width sliding across the curve."""
    ns = curve.ns
    lo, hi = math.log10(ns.min()), math.log10(ns.max())
    out = []
    a = lo
    while a + width_decades <= hi + 1e-12:
        try:
            out.append(fit_rate(curve, (10 ** a, 10 ** (a + width_decades))))
        except InsufficientPoints:
            pass
        a += step_decades
    return out


def detect_crossover(curve: ErrorCurve, tol=0.1, width_decades=0.5, step_decades=0.25):
    """Smallest window start after which every local slope is within tol of -1 or steeper.

    Returns (n_cross or None, sliding fits).
    """
    fits = sliding_fits(curve, width_decades, step_decades)
    cross = None
    for i, f in enumerate(fits):
        if all(g.slope <= -1 + tol for g in fits[i:]):
            cross = f.window[0]
            break
    return cross, fits


def linear_fit(x, y):
    """Ordinary linear regression y = slope x + intercept, returned as a RateFit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise InsufficientPoints("need >= 3 points")
    slope, icpt, r2 = _ols(x, y)
    return RateFit(slope, icpt, r2, (float(x.min()), float(x.max())), int(x.size))


# ---------------------------------------------------------------- truncation check

def truncation_check(config: ExperimentConfig, truncations: Sequence[int], jobs: int = 1) -> BoundReport:
    """Rerun the sweep at each truncation and compare successive curves.

    The change between two curves is ``||e_a - e_b||_2 / ||e_b||_2`` over the
    shared n grid. A pointwise ratio is dominated by isolated near-resonant n
    where the error dips, so it is only reported as a diagnostic.
    ``value`` is the change between the two largest truncations; the report is
    invalid (unstable) when it exceeds 1%.
    """
    truncations = [int(v) for v in truncations]
    if len(truncations) < 2:
        raise InsufficientPoints("truncation_check needs at least two truncation values")
    truncations = sorted(truncations)
    curves = []
    for size in truncations:
        c = run_experiment(config.with_truncation(size), jobs)
        curves.append(c if isinstance(c, list) else [c])
    changes, pointwise = [], []
    for prev, nxt in zip(curves, curves[1:]):
        worst, worst_pt = 0.0, 0.0
        for cp, cn in zip(prev, nxt):
            a, b = cp.errors, cn.errors
            diff = np.abs(a - b)
            ref = float(np.linalg.norm(b))
            if ref > ZERO_ERROR:
                worst = max(worst, float(np.linalg.norm(diff)) / ref)
            elif float(np.linalg.norm(a)) > ZERO_ERROR:
                worst = math.inf
            denom = np.where(np.abs(b) > ZERO_ERROR, np.abs(b), 1.0)
            diff = np.where((np.abs(a) <= ZERO_ERROR) & (np.abs(b) <= ZERO_ERROR), 0.0, diff)
            worst_pt = max(worst_pt, float(np.max(diff / denom)))
        changes.append(worst)
        pointwise.append(worst_pt)
    last = changes[-1]
    inputs = {"truncations": truncations, "relative_changes": changes,
              "max_pointwise_changes": pointwise, "threshold": STABILITY_THRESHOLD,
              "config_hash": config_hash(config)}
    if last > STABILITY_THRESHOLD:
        return BoundReport("truncation_check", last, inputs, False,
                           f"relative change {last:.3g} at the largest pair exceeds {STABILITY_THRESHOLD:g}")
    return BoundReport("truncation_check", last, inputs, True, "")


# ---------------------------------------------------------------- emission

def _clean(v):
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _json_text(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def curve_csv(curve: ErrorCurve) -> str:
    buf = io.StringIO()
    buf.write("n,error\n")
    for n, e in curve.points:
        buf.write(f"{n},{e:.17g}\n")
    return buf.getvalue()


def curve_meta(curve: ErrorCurve):
    return {"config_hash": curve.config_hash, "t": curve.t, "truncation": curve.truncation}


def render(obj, fmt: str) -> str:
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if isinstance(obj, ErrorCurve):
        if fmt == "csv":
            return curve_csv(obj)
        d = curve_meta(obj)
        d["points"] = [[n, e] for n, e in obj.points]
        return _json_text(d)
    if fmt == "csv":
        raise ValueError("csv output is only defined for error curves")
    if isinstance(obj, (RateFit, BoundReport)):
        return _json_text(obj.to_dict())
    if isinstance(obj, list):
        return _json_text([json.loads(render(o, "json")) for o in obj])
    return _json_text(obj)


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit_results(obj, fmt: str, path) -> None:
    """Write a curve (csv or json), fit or report (json) to ``path``.

    CSV curves get a ``<path>.meta.json`` sidecar holding hash, t and
    truncation so that :func:`read_curve` gives back the same ErrorCurve.
    """
    path = os.fspath(path)
    _write(path, render(obj, fmt))
    if isinstance(obj, ErrorCurve) and fmt == "csv":
        _write(path + ".meta.json", _json_text(curve_meta(obj)))


def read_curve(path) -> ErrorCurve:
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        return ErrorCurve(d["config_hash"], d["t"], tuple((int(n), float(e)) for n, e in d["points"]),
                          d.get("truncation"))
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["n", "error"]:
        raise ValueError(f"{path}: expected header 'n,error'")
    pts = tuple((int(r[0]), float(r[1])) for r in rows[1:] if r)
    meta = {"config_hash": "", "t": float("nan"), "truncation": None}
    side = path + ".meta.json"
    if os.path.exists(side):
        with open(side, encoding="utf-8") as fh:
            meta.update(json.load(fh))
    t = meta["t"] if meta["t"] is not None else float("nan")
    return ErrorCurve(meta["config_hash"], float(t), pts, meta["truncation"])
