"""Single-file model checkpoints: one .npz with arrays plus JSON metadata.

The archive stores the kernel specification, support points, effective
coefficients (lazy decay scale folded in), the step counter, and the
per-model extras (tracked norms, kernel weights).  Loading rebuilds a
learner whose predictions match the saved one to 1e-12; transient
diagnostics (clip counters) are not persisted.
"""

from __future__ import annotations

import json

import numpy as np

from .batch import BatchModel
from .exceptions import DataError
from .kernels import kernel_from_dict
from .losses import EpsilonInsensitive, loss_from_name
from .monorma import MONORMA
from .onorma import ONORMA, TruncationSchedule, _ExpansionState

__all__ = ["FORMAT_VERSION", "save_model", "load_model"]

FORMAT_VERSION = 1


def _loss_spec(loss) -> str:
    # repr keeps epsilon exact; name() formats it for display
    if isinstance(loss, EpsilonInsensitive):
        return f"eps({loss.epsilon!r})"
    return loss.name()


def _schedule_dict(tr: TruncationSchedule | None):
    return None if tr is None else {"t0": tr.t0, "epsilon": tr.epsilon}


def _schedule_from(d) -> TruncationSchedule | None:
    return None if d is None else TruncationSchedule(t0=d["t0"], epsilon=d["epsilon"])


def _restore_state(state: _ExpansionState, support, coeffs, times, input_dim) -> None:
    state.input_dim = input_dim
    if len(support) == 0:
        return
    state._X = np.ascontiguousarray(support, dtype=float)
    state._A = np.ascontiguousarray(coeffs, dtype=float)
    state._T = np.ascontiguousarray(times, dtype=np.int64)
    state.start = 0
    state.end = len(support)
    state.scale = 1.0


def save_model(path, model) -> None:
    """Write an ONORMA, MONORMA, or BatchModel checkpoint."""
    if isinstance(model, ONORMA):
        meta = {
            "format_version": FORMAT_VERSION,
            "model": "onorma",
            "kernel": model.kernel.to_dict(),
            "loss": _loss_spec(model.loss),
            "lam": model.lam,
            "eta0": model.eta0,
            "truncation": _schedule_dict(model.truncation),
            "t": model.t,
            "norm_sq": model.norm_sq,
            "input_dim": model._state.input_dim,
        }
        state = model._state
        np.savez(
            path,
            meta=np.array(json.dumps(meta)),
            support=state.support.copy(),
            coeffs=state.coeffs,
            times=state.times.copy(),
        )
    elif isinstance(model, MONORMA):
        meta = {
            "format_version": FORMAT_VERSION,
            "model": "monorma",
            "kernels": [k.to_dict() for k in model.kernels],
            "loss": _loss_spec(model.loss),
            "lam": model.lam,
            "eta0": model.eta0,
            "r": model.r,
            "truncation": _schedule_dict(model.truncation),
            "t": model.t,
            "delta": model.delta.tolist(),
            "gamma": model.gamma.tolist(),
            "input_dim": model._state.input_dim,
        }
        state = model._state
        np.savez(
            path,
            meta=np.array(json.dumps(meta)),
            support=state.support.copy(),
            coeffs=state.coeffs,
            times=state.times.copy(),
        )
    elif isinstance(model, BatchModel):
        meta = {
            "format_version": FORMAT_VERSION,
            "model": "batch",
            "kernel": model.kernel.to_dict(),
            "lam": model.lam,
            "norm_sq": model.norm_sq,
        }
        np.savez(
            path,
            meta=np.array(json.dumps(meta)),
            support=np.asarray(model.support, dtype=float),
            coeffs=np.asarray(model.coeffs, dtype=float),
        )
    else:
        raise TypeError(f"cannot checkpoint {type(model).__name__}")


def load_model(path):
    """Rebuild the saved model; raises DataError on unknown formats."""
    with np.load(path, allow_pickle=False) as zf:
        try:
            meta = json.loads(str(zf["meta"]))
        except (KeyError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: not a model checkpoint: {exc}") from None
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise DataError(
                f"{path}: unsupported checkpoint format version {version!r}"
            )
        kind = meta.get("model")
        if kind == "onorma":
            learner = ONORMA(
                kernel_from_dict(meta["kernel"]),
                loss=loss_from_name(meta["loss"]),
                lam=meta["lam"],
                eta0=meta["eta0"],
                truncation=_schedule_from(meta["truncation"]),
            )
            learner.t = meta["t"]
            learner._norm_sq = meta["norm_sq"]
            _restore_state(
                learner._state, zf["support"], zf["coeffs"], zf["times"], meta["input_dim"]
            )
            return learner
        if kind == "monorma":
            learner = MONORMA(
                [kernel_from_dict(k) for k in meta["kernels"]],
                loss=loss_from_name(meta["loss"]),
                lam=meta["lam"],
                eta0=meta["eta0"],
                r=meta["r"],
                truncation=_schedule_from(meta["truncation"]),
            )
            learner.t = meta["t"]
            learner._delta = np.array(meta["delta"])
            learner._gamma = np.array(meta["gamma"])
            _restore_state(
                learner._state, zf["support"], zf["coeffs"], zf["times"], meta["input_dim"]
            )
            return learner
        if kind == "batch":
            return BatchModel(
                kernel=kernel_from_dict(meta["kernel"]),
                support=zf["support"].copy(),
                coeffs=zf["coeffs"].copy(),
                lam=meta["lam"],
                norm_sq=meta["norm_sq"],
            )
        raise DataError(f"{path}: unknown model kind {kind!r}")
