"""Conditional intensity functions for the coupled and decoupled models.

The coupled model runs two interlocking streams. Each main thread carries a
reply stream whose intensity jumps by ``alpha`` per reply and decays at rate
``beta``, scaled by the thread's aging infectivity ``exp(-delta * age)``.
The main-thread stream in turn is excited by every existing cascade through
a power-law kernel weighted by the cascade's reply intensity and its mark
(reply count) warped by ``gamma``.

All sums run over strictly earlier events; marks count events up to and
including the query time (closed boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .events import Cascade, EventSpace
from .validation import check_positive

__all__ = [
    "ReplyParams",
    "MainParams",
    "NestppParams",
    "DecoupledMainParams",
    "ModelConfig",
    "DEFAULT_CONFIG",
    "infectivity",
    "reply_intensity",
    "main_intensity",
    "decoupled_main_intensity",
    "decoupled_reply_intensity",
    "cascade_mark",
    "main_intensity_terms",
    "influence_report",
]


@dataclass(frozen=True)
class ReplyParams:
    """Reply-stream parameters: base rate, jump size, decay, thread-age decay."""

    mu_reply: float
    alpha: float
    beta: float
    delta: float = 0.0

    def __post_init__(self):
        check_positive("mu_reply", self.mu_reply)
        check_positive("alpha", self.alpha)
        check_positive("beta", self.beta)
        check_positive("delta", self.delta, allow_zero=True)


@dataclass(frozen=True)
class MainParams:
    """Main-thread stream parameters: base rate, mark warp, regularizer, tail."""

    mu_main: float
    gamma: float
    c: float
    eta: float

    def __post_init__(self):
        check_positive("mu_main", self.mu_main)
        check_positive("gamma", self.gamma, allow_zero=True)
        check_positive("c", self.c)
        check_positive("eta", self.eta)


@dataclass(frozen=True)
class NestppParams:
    """Full coupled-model parameter set."""

    main: MainParams
    reply: ReplyParams

    PARAM_NAMES = ("mu_main", "gamma", "c", "eta", "mu_reply", "alpha", "beta", "delta")

    def to_vector(self) -> np.ndarray:
        m, r = self.main, self.reply
        return np.array(
            [m.mu_main, m.gamma, m.c, m.eta, r.mu_reply, r.alpha, r.beta, r.delta]
        )

    @classmethod
    def from_vector(cls, theta) -> "NestppParams":
        mu_main, gamma, c, eta, mu_reply, alpha, beta, delta = map(float, theta)
        return cls(
            main=MainParams(mu_main=mu_main, gamma=gamma, c=c, eta=eta),
            reply=ReplyParams(mu_reply=mu_reply, alpha=alpha, beta=beta, delta=delta),
        )


@dataclass(frozen=True)
class DecoupledMainParams:
    """Ablation main-stream parameters with a scalar infectious rate."""

    mu_main: float
    p: float
    c: float
    eta: float

    PARAM_NAMES = ("mu_main", "p", "c", "eta")

    def __post_init__(self):
        check_positive("mu_main", self.mu_main)
        check_positive("p", self.p, allow_zero=True)
        check_positive("c", self.c)
        check_positive("eta", self.eta)

    def to_vector(self) -> np.ndarray:
        return np.array([self.mu_main, self.p, self.c, self.eta])

    @classmethod
    def from_vector(cls, theta) -> "DecoupledMainParams":
        mu_main, p, c, eta = map(float, theta)
        return cls(mu_main=mu_main, p=p, c=c, eta=eta)


@dataclass(frozen=True)
class ModelConfig:
    """Evaluation conventions for the coupled intensities.

    mark_smoothing: use (p_i + 1)**gamma so a thread with no replies still
        excites the main stream. Off reproduces the literal p_i**gamma,
        which silences zero-reply cascades entirely for gamma > 0.
    static_marks: freeze p_i at the thread's own creation time instead of
        the query time.
    truncation_window: drop contributions older than this many seconds from
        intensity sums (inf keeps the evaluation exact).
    """

    mark_smoothing: bool = True
    static_marks: bool = False
    truncation_window: float = math.inf

    def with_(self, **kw) -> "ModelConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = ModelConfig()


def infectivity(delta: float, thread_time: float, t: float) -> float:
    """Aging factor exp(-delta * (t - thread_time)) in (0, 1]."""
    if t < thread_time:
        raise ValidationError(f"t={t} precedes thread_time={thread_time}")
    return math.exp(-delta * (t - thread_time))


def reply_intensity(
    params: ReplyParams,
    cascade: Cascade,
    t: float,
    config: ModelConfig = DEFAULT_CONFIG,
) -> float:
    """Reply-stream intensity of one cascade at time t (>= mu_reply)."""
    if t < cascade.thread_time:
        raise ValidationError(
            f"t={t} precedes thread creation at {cascade.thread_time}"
        )
    r = cascade.reply_times
    k = int(np.searchsorted(r, t, side="left"))  # strictly earlier replies
    lo = 0
    if math.isfinite(config.truncation_window):
        lo = int(np.searchsorted(r, t - config.truncation_window, side="left"))
    active = r[lo:k]
    if active.size == 0:
        return params.mu_reply
    q = infectivity(params.delta, cascade.thread_time, t)
    return params.mu_reply + q * params.alpha * float(np.sum(np.exp(-params.beta * (t - active))))


def cascade_mark(
    gamma: float,
    cascade: Cascade,
    t: float,
    config: ModelConfig = DEFAULT_CONFIG,
) -> float:
    """Warped mark factor p**gamma of one cascade under the configured convention."""
    at = cascade.thread_time if config.static_marks else t
    p = float(np.searchsorted(cascade.reply_times, at, side="right"))
    if config.mark_smoothing:
        p += 1.0
    return p ** gamma


def main_intensity_terms(
    params: NestppParams,
    space: EventSpace,
    t: float,
    config: ModelConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Per-cascade contributions to the main intensity at t (0 for t_i >= t)."""
    out = np.zeros(space.n_threads)
    main, rep = params.main, params.reply
    for i, cascade in enumerate(space.cascades):
        ti = cascade.thread_time
        if ti >= t:
            break  # cascades are time-ordered
        if t - ti > config.truncation_window:
            continue
        lam_r = reply_intensity(rep, cascade, t, config)
        mark = cascade_mark(main.gamma, cascade, t, config)
        out[i] = lam_r * mark * (t - ti + main.c) ** (-(main.eta + 1.0))
    return out


def main_intensity(
    params: NestppParams,
    space: EventSpace,
    t: float,
    config: ModelConfig = DEFAULT_CONFIG,
) -> float:
    """Main-thread stream intensity at t; finite for all t because c > 0."""
    return params.main.mu_main + float(np.sum(main_intensity_terms(params, space, t, config)))


def decoupled_main_intensity(params: DecoupledMainParams, thread_times, t: float) -> float:
    """Ablation main intensity: power-law excitation with scalar weight p."""
    times = np.asarray(thread_times, dtype=float)
    prior = times[times < t]
    if prior.size == 0:
        return params.mu_main
    return params.mu_main + params.p * float(
        np.sum((t - prior + params.c) ** (-(params.eta + 1.0)))
    )


def decoupled_reply_intensity(params: ReplyParams, reply_times, t: float) -> float:
    """Ablation reply intensity: plain exponential Hawkes, no infectivity factor."""
    times = np.asarray(reply_times, dtype=float)
    prior = times[times < t]
    if prior.size == 0:
        return params.mu_reply
    return params.mu_reply + params.alpha * float(np.sum(np.exp(-params.beta * (t - prior))))


def influence_report(
    params: NestppParams,
    space: EventSpace,
    t: float,
    config: ModelConfig = DEFAULT_CONFIG,
) -> dict:
    """Per-cascade influence magnitude lambda_reply_i(t) * p_i**gamma versus eta * c**eta.

    Diagnostic only; the comparison is reported, never enforced.
    """
    main, rep = params.main, params.reply
    mags = []
    for cascade in space.cascades:
        if cascade.thread_time >= t:
            break
        mags.append(
            reply_intensity(rep, cascade, t, config)
            * cascade_mark(main.gamma, cascade, t, config)
        )
    threshold = main.eta * main.c ** main.eta
    arr = np.array(mags)
    return {
        "magnitudes": arr,
        "threshold": threshold,
        "within_bound": bool(np.all(arr < threshold)) if arr.size else True,
    }
