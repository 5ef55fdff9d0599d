"""Experiment orchestration: configs, training runs, sweeps, metrics files.

A run trains one algorithm (online single-kernel, online multi-kernel,
or batch) on half of a dataset, freezes the model, and scores it on the
held-out half.  Online runs stream one metrics record per training
example; identical config and seed reproduce the metrics file byte for
byte except for the wall-clock column.

Configs are flat ``key = value`` text; every key has a default matching
the reference experimental settings (lambda = 0.01, eta0 = 1, squared
loss, 50/50 split).  Kernel specs are strings like ``gaussian(mu=1)``
or ``poly(mu=0.2)``, comma-separated when the learner combines several.
"""

from __future__ import annotations

import dataclasses
import re
import time
from dataclasses import dataclass

import numpy as np

from .batch import fit as batch_fit
from .batch import regularized_risk
from .bounds import check_cumulative_bound, check_hypotheses, compute_constants
from .data import Dataset, SynthSpec, gen_synthetic, load_csv, split_and_normalize
from .exceptions import ConfigError
from .kernels import NonSeparablePoly, SeparableGaussian
from .losses import SquaredLoss, loss_from_name
from .monorma import MONORMA
from .onorma import ONORMA, TruncationSchedule

__all__ = [
    "KernelSpec",
    "ExperimentConfig",
    "MetricsRecord",
    "parse_config_text",
    "read_config",
    "run_experiment",
    "bound_check",
    "sweep",
    "write_metrics",
    "metrics_text",
    "summary_text",
    "sweep_table_text",
]

_KERNEL_RE = re.compile(r"^(gaussian|poly)\(\s*mu\s*=\s*([^)]+?)\s*\)$")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and parameter, instantiated once output_dim is known."""

    family: str
    mu: float

    def __post_init__(self):
        if self.family not in ("gaussian", "poly"):
            raise ConfigError(f"unknown kernel family {self.family!r}")

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        m = _KERNEL_RE.match(text.strip())
        if not m:
            raise ConfigError(
                f"bad kernel spec {text!r}; expected family(mu=value) with "
                f"family in {{gaussian, poly}}"
            )
        try:
            mu = float(m.group(2))
        except ValueError:
            raise ConfigError(f"bad mu in kernel spec {text!r}") from None
        return cls(m.group(1), mu)

    def build(self, dim: int, structure=None):
        if self.family == "gaussian":
            return SeparableGaussian(mu=self.mu, dim=dim, structure=structure)
        return NonSeparablePoly(mu=self.mu, dim=dim)

    def text(self) -> str:
        return f"{self.family}(mu={self.mu:g})"


def _parse_bool(value: str, key: str) -> bool:
    low = value.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"config field {key!r}: expected true/false, got {value!r}")


def _parse_cols(value: str, key: str) -> tuple[int, ...]:
    """Index ranges like ``0-19`` or ``0,3,7-9`` into a flat tuple."""
    cols: list[int] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        m = re.match(r"^(\d+)\s*-\s*(\d+)$", part)
        try:
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if hi < lo:
                    raise ConfigError(
                        f"config field {key!r}: empty range {part!r}"
                    )
                cols.extend(range(lo, hi + 1))
            else:
                cols.append(int(part))
        except ValueError:
            raise ConfigError(
                f"config field {key!r}: bad column index {part!r}"
            ) from None
    if not cols:
        raise ConfigError(f"config field {key!r}: no columns given")
    return tuple(cols)


@dataclass(frozen=True)
class ExperimentConfig:
    """One run's worth of settings; see README for every key's meaning."""

    algorithm: str = "onorma"
    kernels: tuple[KernelSpec, ...] = (KernelSpec("gaussian", 1.0),)
    loss: str = "squared"
    lam: float = 0.01
    eta0: float = 1.0
    r: float = 2.0
    truncate: bool = False
    t0: int = 100
    epsilon: float = 0.25
    seed: int = 0
    train_fraction: float = 0.5
    normalize: bool = False
    data: str = "synthetic"
    n_instances: int = 500
    n_outputs: int = 4
    csv_path: str | None = None
    input_cols: tuple[int, ...] | None = None
    output_cols: tuple[int, ...] | None = None
    header: bool = True
    one_hot_classes: int | None = None
    structure: str | None = None
    metrics: str | None = None
    summary: str | None = None
    checkpoint: str | None = None

    def __post_init__(self):
        if self.algorithm not in ("onorma", "monorma", "batch"):
            raise ConfigError(
                f"config field 'algorithm': unknown value {self.algorithm!r}"
            )
        if not self.kernels:
            raise ConfigError("config field 'kernel': at least one kernel required")
        if self.algorithm in ("onorma", "batch") and len(self.kernels) != 1:
            raise ConfigError(
                f"config field 'kernel': {self.algorithm} takes exactly one "
                f"kernel, got {len(self.kernels)}"
            )
        if self.data not in ("synthetic", "csv"):
            raise ConfigError(f"config field 'data': unknown source {self.data!r}")
        if self.data == "csv":
            for key in ("csv_path", "input_cols", "output_cols"):
                if getattr(self, key) is None:
                    raise ConfigError(f"config field {key!r}: required when data = csv")

    def build_kernels(self, dim: int):
        structure = None
        if self.structure is not None:
            structure = np.loadtxt(self.structure, delimiter=",", ndmin=2)
        return [spec.build(dim, structure=structure) for spec in self.kernels]

    def build_loss(self):
        return loss_from_name(self.loss)

    def truncation_schedule(self) -> TruncationSchedule | None:
        if not self.truncate:
            return None
        return TruncationSchedule(t0=self.t0, epsilon=self.epsilon)


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment; blanks ignored."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {lineno}: expected key = value, got {line!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        if key in raw:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


def _build_config(raw: dict[str, str]) -> ExperimentConfig:
    kwargs = {}

    def take(key, conv, field_name=None):
        if key in raw:
            value = raw.pop(key)
            try:
                kwargs[field_name or key] = conv(value)
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(
                    f"config field {key!r}: cannot parse {value!r}"
                ) from None

    take("algorithm", str)
    take("kernel", lambda v: tuple(KernelSpec.parse(p) for p in v.split(",")), "kernels")
    take("loss", str)
    take("lambda", float, "lam")
    take("eta0", float)
    take("r", float)
    take("truncate", lambda v: _parse_bool(v, "truncate"))
    take("t0", int)
    take("epsilon", float)
    take("seed", int)
    take("train_fraction", float)
    take("normalize", lambda v: _parse_bool(v, "normalize"))
    take("data", str)
    take("n_instances", int)
    take("n_outputs", int)
    take("csv_path", str)
    take("input_cols", lambda v: _parse_cols(v, "input_cols"))
    take("output_cols", lambda v: _parse_cols(v, "output_cols"))
    take("header", lambda v: _parse_bool(v, "header"))
    take("one_hot_classes", int)
    take("structure", str)
    take("metrics", str)
    take("summary", str)
    take("checkpoint", str)
    if raw:
        raise ConfigError(f"unknown config key {sorted(raw)[0]!r}")
    return ExperimentConfig(**kwargs)


def read_config(path=None, overrides=None) -> ExperimentConfig:
    """Config file plus ``key=value`` override strings (later wins)."""
    raw: dict[str, str] = {}
    if path is not None:
        with open(path) as fh:
            raw = parse_config_text(fh.read())
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    return _build_config(raw)


@dataclass(frozen=True)
class MetricsRecord:
    """One training step's metrics; cum_mse averages pre-update errors."""

    step: int
    loss: float
    cum_mse: float
    r_inst: float
    step_us: float
    deltas: np.ndarray | None = None


def _f(value) -> str:
    # repr of a builtin float round-trips and is identical across runs
    return repr(float(value))


def metrics_text(records, m_deltas: int = 0) -> str:
    """Metrics CSV as a string; header even when there are no records."""
    if records and records[0].deltas is not None:
        m_deltas = len(records[0].deltas)
    header = "step,loss,cum_mse,r_inst,step_us" + "".join(
        f",delta_{j + 1}" for j in range(m_deltas)
    )
    lines = [header]
    for rec in records:
        row = [
            str(rec.step),
            _f(rec.loss),
            _f(rec.cum_mse),
            _f(rec.r_inst),
            _f(rec.step_us),
        ]
        if rec.deltas is not None:
            row.extend(_f(v) for v in rec.deltas)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_metrics(path, records, m_deltas: int = 0) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(metrics_text(records, m_deltas))


def summary_text(summary: dict) -> str:
    """Flat ``key = value`` block mirroring the config format."""
    lines = []
    for key, value in summary.items():
        if isinstance(value, bool):
            lines.append(f"{key} = {str(value).lower()}")
        elif isinstance(value, float):
            lines.append(f"{key} = {_f(value)}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.data == "synthetic":
        return gen_synthetic(SynthSpec(cfg.n_instances, cfg.n_outputs, cfg.seed))
    return load_csv(
        cfg.csv_path,
        cfg.input_cols,
        cfg.output_cols,
        header=cfg.header,
        one_hot_classes=cfg.one_hot_classes,
    )


def _test_scores(predict, test: Dataset) -> dict:
    preds = predict(test.xs)
    errs = preds - test.ys
    out = {"test_mse": float(np.mean(np.einsum("ij,ij->i", errs, errs)))}
    if test.task == "classification":
        pred_labels = np.argmax(preds, axis=1)
        true_labels = np.argmax(test.ys, axis=1)
        out["test_misclass"] = float(np.mean(pred_labels != true_labels))
    return out


def run_experiment(cfg: ExperimentConfig):
    """Train per the config; returns (metrics records, summary dict).

    Writes the metrics CSV, summary text, and checkpoint when the config
    names paths for them.  The model is frozen after the training half;
    test scores never update it.
    """
    dataset = load_dataset(cfg)
    train, test, _ = split_and_normalize(
        dataset, cfg.train_fraction, cfg.seed, cfg.normalize
    )
    kernels = cfg.build_kernels(train.output_dim)
    loss = cfg.build_loss()

    summary: dict = {
        "algorithm": cfg.algorithm,
        "dataset": dataset.name,
        "task": dataset.task,
        "n_train": len(train),
        "n_test": len(test),
        "input_dim": train.input_dim,
        "output_dim": train.output_dim,
        "kernel": ",".join(s.text() for s in cfg.kernels),
        "loss": cfg.loss,
        "lambda": cfg.lam,
        "eta0": cfg.eta0,
        "seed": cfg.seed,
        "train_fraction": cfg.train_fraction,
        "normalize": cfg.normalize,
        "truncate": cfg.truncate,
    }
    if cfg.truncate:
        summary["t0"] = cfg.t0
        summary["epsilon"] = cfg.epsilon
    if cfg.algorithm == "monorma":
        summary["r"] = cfg.r
    summary["test_protocol"] = "frozen-after-training"

    records: list[MetricsRecord] = []
    step_results = []
    if cfg.algorithm == "batch":
        start = time.perf_counter()
        model = batch_fit(kernels[0], train.xs, train.ys, cfg.lam)
        summary["fit_time_s"] = time.perf_counter() - start
        summary["support_size"] = len(train)
        predict = model.predict
    else:
        if cfg.algorithm == "onorma":
            model = ONORMA(
                kernels[0],
                loss=loss,
                lam=cfg.lam,
                eta0=cfg.eta0,
                truncation=cfg.truncation_schedule(),
            )
        else:
            model = MONORMA(
                kernels,
                loss=loss,
                lam=cfg.lam,
                eta0=cfg.eta0,
                r=cfg.r,
                truncation=cfg.truncation_schedule(),
            )
        sq_sum = 0.0
        start = time.perf_counter()
        for i, (x, y) in enumerate(zip(train.xs, train.ys), start=1):
            tick = time.perf_counter_ns()
            res = model.step(x, y)
            step_us = (time.perf_counter_ns() - tick) / 1000.0
            err = res.prediction - y
            sq_sum += float(err @ err)
            records.append(
                MetricsRecord(
                    step=i,
                    loss=res.loss,
                    cum_mse=sq_sum / i,
                    r_inst=res.instantaneous_risk,
                    step_us=step_us,
                    deltas=model.delta if cfg.algorithm == "monorma" else None,
                )
            )
            step_results.append(res)
        summary["train_time_s"] = time.perf_counter() - start
        summary["final_cum_mse"] = records[-1].cum_mse if records else 0.0
        summary["support_size"] = model.support_size
        predict = model.predict
        if cfg.algorithm == "monorma":
            for j, dj in enumerate(model.delta, start=1):
                summary[f"delta_{j}"] = float(dj)

    summary.update(_test_scores(predict, test))

    if cfg.algorithm == "onorma" and isinstance(loss, SquaredLoss):
        hyp = check_hypotheses(kernels[0], train.xs, train.ys, cfg.lam, loss)
        summary["hyp_kappa_sq"] = hyp.kappa_sq
        summary["hyp_c_y"] = hyp.c_y
        summary["hyp_lambda_margin"] = hyp.lambda_margin
        summary["hyp_passes"] = hyp.passes
        if hyp.passes:
            consts = compute_constants(
                np.sqrt(hyp.kappa_sq),
                c_y=hyp.c_y,
                eta0=cfg.eta0,
                lam=cfg.lam,
                branch="least_squares",
                truncated=cfg.truncate,
            )
            reference = batch_fit(kernels[0], train.xs, train.ys, cfg.lam)
            report = check_cumulative_bound(
                step_results,
                regularized_risk(reference, train.xs, train.ys),
                consts,
                len(train),
            )
            summary["bound_u"] = consts.u
            summary["bound_alpha"] = consts.alpha
            summary["bound_beta"] = consts.beta
            summary["bound_lhs"] = report.lhs
            summary["bound_batch_risk"] = report.batch_risk
            summary["bound_rhs"] = report.rhs
            summary["bound_slack"] = report.slack
            summary["bound_holds"] = report.holds

    if cfg.metrics is not None:
        write_metrics(cfg.metrics, records)
    if cfg.summary is not None:
        with open(cfg.summary, "w") as fh:
            fh.write(summary_text(summary))
    if cfg.checkpoint is not None:
        from .checkpoint import save_model

        save_model(cfg.checkpoint, model)
    return records, summary


def bound_check(cfg: ExperimentConfig):
    """Hypothesis diagnostics plus, when they pass, the run-vs-bound report.

    Returns (hypothesis report, constants or None, bound report or None).
    Only the single-kernel online learner with squared loss carries a
    proven guarantee here; other configs get diagnostics only.
    """
    if cfg.algorithm != "onorma":
        raise ConfigError(
            "config field 'algorithm': bound checking needs onorma "
            f"(got {cfg.algorithm!r})"
        )
    loss = cfg.build_loss()
    dataset = load_dataset(cfg)
    train, _, _ = split_and_normalize(dataset, cfg.train_fraction, cfg.seed, cfg.normalize)
    kernel = cfg.build_kernels(train.output_dim)[0]
    hyp = check_hypotheses(kernel, train.xs, train.ys, cfg.lam, loss)
    if not hyp.passes:
        return hyp, None, None
    if hyp.branch != "least_squares":
        # no batch minimiser available for this loss; diagnostics only
        return hyp, None, None
    consts = compute_constants(
        np.sqrt(hyp.kappa_sq),
        c_y=hyp.c_y,
        eta0=cfg.eta0,
        lam=cfg.lam,
        branch="least_squares",
        truncated=cfg.truncate,
    )
    learner = ONORMA(
        kernel,
        loss=loss,
        lam=cfg.lam,
        eta0=cfg.eta0,
        truncation=cfg.truncation_schedule(),
    )
    step_results = learner.fit(train.xs, train.ys)
    reference = batch_fit(kernel, train.xs, train.ys, cfg.lam)
    report = check_cumulative_bound(
        step_results, regularized_risk(reference, train.xs, train.ys), consts, len(train)
    )
    return hyp, consts, report


_SWEEPABLE = ("mu", "lambda", "eta0")


def sweep(cfg: ExperimentConfig, parameter: str, values):
    """One run per value; returns [(value, summary)] sorted by value."""
    if parameter not in _SWEEPABLE:
        raise ConfigError(
            f"sweep parameter must be one of {_SWEEPABLE}, got {parameter!r}"
        )
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    base = dataclasses.replace(cfg, metrics=None, summary=None, checkpoint=None)
    rows = []
    for value in sorted(values):
        if parameter == "mu":
            point = dataclasses.replace(
                base,
                kernels=tuple(
                    dataclasses.replace(s, mu=value) for s in base.kernels
                ),
            )
        elif parameter == "lambda":
            point = dataclasses.replace(base, lam=value)
        else:
            point = dataclasses.replace(base, eta0=value)
        _, summary = run_experiment(point)
        rows.append((value, summary))
    return rows


def sweep_table_text(rows) -> str:
    """Plot-ready CSV: one row per swept value."""
    lines = ["value,test_mse,cum_mse,time_s"]
    for value, summary in rows:
        time_s = summary.get("train_time_s", summary.get("fit_time_s", 0.0))
        cum = summary.get("final_cum_mse")
        lines.append(
            ",".join(
                [
                    _f(value),
                    _f(summary["test_mse"]),
                    "" if cum is None else _f(cum),
                    _f(time_s),
                ]
            )
        )
    return "\n".join(lines) + "\n"
