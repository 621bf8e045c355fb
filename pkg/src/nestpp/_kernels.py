"""Numba-compiled inner loops for likelihood evaluation and thinning samplers.

Event spaces are passed as flat arrays: ``thread_times`` sorted ascending,
``reply_flat`` holding each cascade's sorted replies contiguously with
``reply_offsets`` (length m + 1) marking the slices. Samplers additionally
use parallel arrays (time, cascade index) appended in global time order.

Pure-Python reference implementations live in ``intensity``/``likelihood``;
tests cross-check the two paths.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _mark_factor(p, gamma, smoothing):
    base = p + 1.0 if smoothing else p
    return base ** gamma


@njit(cache=True)
def coupled_event_terms(
    thread_times,
    reply_flat,
    reply_offsets,
    mu_main,
    gamma,
    c,
    eta,
    mu_reply,
    alpha,
    beta,
    delta,
    smoothing,
    static_marks,
    weighted_main_logs,
):
    """Sum of log main-intensities at thread times and log reply-intensities
    at reply times. Returns (main_term, reply_term, bad_index); bad_index is
    the thread index of a non-positive main intensity, -1 when none.
    """
    m = thread_times.shape[0]

    # reply-stream log terms: per-cascade decay recursion over own replies
    reply_term = 0.0
    for i in range(m):
        lo, hi = reply_offsets[i], reply_offsets[i + 1]
        acc = 0.0
        for k in range(lo, hi):
            r = reply_flat[k]
            if k > lo:
                acc = (acc + 1.0) * math.exp(-beta * (r - reply_flat[k - 1]))
            q = math.exp(-delta * (r - thread_times[i]))
            reply_term += math.log(mu_reply + alpha * q * acc)

    # main-stream log terms: sweep thread events with synced per-cascade state
    main_term = 0.0
    bad = -1
    if m > 0:
        S = np.zeros(m)  # sum exp(-beta (t_now - r)) over replies r < t_now
        pcount = np.zeros(m, dtype=np.int64)  # replies <= t_now
        ptr = reply_offsets[:m].copy()
        pstatic = np.zeros(m)
        if static_marks:
            for i in range(m):
                k = reply_offsets[i]
                while k < reply_offsets[i + 1] and reply_flat[k] <= thread_times[i]:
                    k += 1
                pstatic[i] = k - reply_offsets[i]
        t_now = thread_times[0]
        for j in range(m):
            tj = thread_times[j]
            decay = math.exp(-beta * (tj - t_now))
            lam = mu_main
            for i in range(j):
                S[i] *= decay
                while ptr[i] < reply_offsets[i + 1] and reply_flat[ptr[i]] < tj:
                    S[i] += math.exp(-beta * (tj - reply_flat[ptr[i]]))
                    ptr[i] += 1
                pcount[i] = ptr[i] - reply_offsets[i]
                k = ptr[i]
                while k < reply_offsets[i + 1] and reply_flat[k] == tj:
                    pcount[i] += 1
                    k += 1
                qi = math.exp(-delta * (tj - thread_times[i]))
                lam_reply = mu_reply + alpha * qi * S[i]
                p = pstatic[i] if static_marks else float(pcount[i])
                lam += (
                    lam_reply
                    * _mark_factor(p, gamma, smoothing)
                    * (tj - thread_times[i] + c) ** (-(eta + 1.0))
                )
            if lam <= 0.0:
                bad = j
                return main_term, reply_term, bad
            w = (reply_offsets[j + 1] - reply_offsets[j]) if weighted_main_logs else 1.0
            main_term += w * math.log(lam)
            t_now = tj
    return main_term, reply_term, bad


@njit(cache=True)
def reply_compensators(
    thread_times,
    reply_flat,
    reply_offsets,
    mu_reply,
    alpha,
    beta,
    delta,
    t_ends,
    frozen_q,
):
    """Integral of each cascade's reply intensity over [thread_time, t_end].

    Exact mode integrates the aging factor jointly with the decay,
    exp(-delta (u - t_i)) * exp(-beta (u - r)) having rate delta + beta.
    Frozen mode fixes the aging factor at t_end, matching the segment-frozen
    closed form.
    """
    m = thread_times.shape[0]
    out = np.zeros(m)
    for i in range(m):
        t0 = thread_times[i]
        te = t_ends[i]
        total = mu_reply * (te - t0)
        lo, hi = reply_offsets[i], reply_offsets[i + 1]
        if frozen_q:
            s = 0.0
            for k in range(lo, hi):
                r = reply_flat[k]
                if r < te:
                    s += 1.0 - math.exp(-beta * (te - r))
            total += (alpha / beta) * math.exp(-delta * (te - t0)) * s
        else:
            rate = delta + beta
            for k in range(lo, hi):
                r = reply_flat[k]
                if r < te:
                    total += (
                        alpha
                        / rate
                        * (
                            math.exp(-delta * (r - t0))
                            - math.exp(-delta * (te - t0) - beta * (te - r))
                        )
                    )
        out[i] = total
    return out


@njit(cache=True)
def frozen_main_factors(
    thread_times,
    reply_flat,
    reply_offsets,
    mu_reply,
    alpha,
    beta,
    delta,
    gamma,
    smoothing,
    freeze_times,
):
    """Per-cascade frozen weight lambda_reply_i(s_i) * mark_i(s_i)**gamma."""
    m = thread_times.shape[0]
    out = np.zeros(m)
    for i in range(m):
        s_i = freeze_times[i]
        lo, hi = reply_offsets[i], reply_offsets[i + 1]
        acc = 0.0
        p = 0.0
        for k in range(lo, hi):
            r = reply_flat[k]
            if r < s_i:
                acc += math.exp(-beta * (s_i - r))
            if r <= s_i:
                p += 1.0
        q = math.exp(-delta * (s_i - thread_times[i]))
        out[i] = (mu_reply + alpha * q * acc) * _mark_factor(p, gamma, smoothing)
    return out


@njit(cache=True)
def power_kernel_integrals(thread_times, c, eta, t_end):
    """Integral of (u - t_i + c)^-(eta+1) over [t_i, t_end] per cascade."""
    m = thread_times.shape[0]
    out = np.zeros(m)
    for i in range(m):
        out[i] = (c ** (-eta) - (t_end - thread_times[i] + c) ** (-eta)) / eta
    return out


@njit(cache=True)
def decoupled_main_loglik(times, mu, p, c, eta, t_end):
    """Log-likelihood of the scalar-weight power-law stream on [0, t_end]."""
    n = times.shape[0]
    ll = 0.0
    for j in range(n):
        lam = mu
        for i in range(j):
            lam += p * (times[j] - times[i] + c) ** (-(eta + 1.0))
        ll += math.log(lam)
    comp = mu * t_end
    for i in range(n):
        comp += p * (c ** (-eta) - (t_end - times[i] + c) ** (-eta)) / eta
    return ll - comp


@njit(cache=True)
def exp_hawkes_loglik(times, mu, alpha, beta, t_end):
    """Log-likelihood of a plain exponential-kernel stream on [0, t_end]."""
    n = times.shape[0]
    ll = 0.0
    acc = 0.0
    for j in range(n):
        if j > 0:
            acc = (acc + 1.0) * math.exp(-beta * (times[j] - times[j - 1]))
        ll += math.log(mu + alpha * acc)
    comp = mu * t_end
    for i in range(n):
        comp += (alpha / beta) * (1.0 - math.exp(-beta * (t_end - times[i])))
    return ll - comp


@njit(cache=True)
def reply_intensity_scalar(thread_time, replies, n_replies, t, mu, alpha, beta, delta):
    acc = 0.0
    for k in range(n_replies):
        r = replies[k]
        if r < t:
            acc += math.exp(-beta * (t - r))
    return mu + alpha * math.exp(-delta * (t - thread_time)) * acc


@njit(cache=True)
def main_intensity_parallel(
    t,
    thread_times,
    m,
    reply_t,
    reply_c,
    n_replies,
    mu_main,
    gamma,
    c,
    eta,
    mu_reply,
    alpha,
    beta,
    delta,
    smoothing,
    static_marks,
):
    """Main intensity at t from parallel reply arrays (time, cascade index)."""
    S = np.zeros(m)
    pcount = np.zeros(m)
    for k in range(n_replies):
        r = reply_t[k]
        i = reply_c[k]
        if r < t:
            S[i] += math.exp(-beta * (t - r))
        if r <= t:
            pcount[i] += 1.0
    lam = mu_main
    for i in range(m):
        ti = thread_times[i]
        if ti >= t:
            continue
        q = math.exp(-delta * (t - ti))
        p = 0.0 if static_marks else pcount[i]
        lam += (
            (mu_reply + alpha * q * S[i])
            * _mark_factor(p, gamma, smoothing)
            * (t - ti + c) ** (-(eta + 1.0))
        )
    return lam


@njit
def sample_reply_window(
    rng,
    thread_time,
    existing,
    n_existing,
    t_resume,
    window_end,
    cap,
    mu,
    alpha,
    beta,
    delta,
):
    """Thin one reply stream forward from t_resume to window_end, at most cap
    acceptances. Returns (new_times, n_new, frontier) where frontier is the
    time the loop stopped exploring (candidate overshoot or window end).
    """
    out = np.empty(cap if cap > 0 else 1)
    n_new = 0
    t = t_resume
    acc = 0.0
    for k in range(n_existing):
        r = existing[k]
        if r < t:
            acc += math.exp(-beta * (t - r))
    while n_new < cap and t <= window_end:
        lam_bar = mu + alpha * math.exp(-delta * (t - thread_time)) * acc
        tau = -math.log(rng.random()) / lam_bar
        t_next = t + tau
        if t_next > window_end:
            t = window_end
            break
        acc *= math.exp(-beta * tau)
        lam_next = mu + alpha * math.exp(-delta * (t_next - thread_time)) * acc
        if rng.random() * lam_bar < lam_next:
            out[n_new] = t_next
            n_new += 1
            acc += 1.0
        t = t_next
    return out[:n_new], n_new, t


@njit
def sample_thinning_constant_bound(rng, t_start, t_end, rates, knots):
    """Thin a piecewise-constant rate given by rates over knots (len + 1 edges).

    Used by the piecewise Poisson baseline; the bound on each segment is the
    segment's own rate, so the sample is exact.
    """
    out_buf = np.empty(1024)
    n = 0
    for seg in range(rates.shape[0]):
        lo = max(t_start, knots[seg])
        hi = min(t_end, knots[seg + 1])
        if hi <= lo:
            continue
        lam = rates[seg]
        if lam <= 0.0:
            continue
        t = lo
        while True:
            t += -math.log(rng.random()) / lam
            if t > hi:
                break
            if n == out_buf.shape[0]:
                grown = np.empty(out_buf.shape[0] * 2)
                grown[: out_buf.shape[0]] = out_buf
                out_buf = grown
            out_buf[n] = t
            n += 1
    return out_buf[:n]


@njit
def joint_sampler(
    rng,
    thread_times0,
    reply_flat0,
    reply_offsets0,
    mu_main,
    gamma,
    c,
    eta,
    mu_reply,
    alpha,
    beta,
    delta,
    smoothing,
    static_marks,
    t_start,
    n_new_threads,
    t_end,
    hard_cap,
):
    """Exact joint thinning of the coupled process from t_start.

    Every stream (main + one reply stream per cascade) evolves on the shared
    clock; between events all intensities decay, so the current total
    intensity is a valid bound and the sample is exact. Stops after
    n_new_threads accepted threads or when the clock passes t_end (whichever
    is configured; pass a huge value to disable one).

    Returns (new_thread_times, n_threads_new, new_reply_t, new_reply_c,
    n_replies_new, total_accepted, hit_cap).
    """
    m0 = thread_times0.shape[0]
    max_m = m0 + (n_new_threads if n_new_threads < hard_cap else hard_cap) + 16

    thread_times = np.empty(max_m)
    thread_times[:m0] = thread_times0
    m = m0

    S = np.zeros(max_m)
    pcount = np.zeros(max_m)
    for i in range(m0):
        lo, hi = reply_offsets0[i], reply_offsets0[i + 1]
        for k in range(lo, hi):
            r = reply_flat0[k]
            if r < t_start:
                S[i] += math.exp(-beta * (t_start - r))
            if r <= t_start:
                pcount[i] += 1.0

    new_threads = np.empty(max_m)
    n_t_new = 0
    cap_replies = hard_cap + 16
    new_reply_t = np.empty(cap_replies)
    new_reply_c = np.empty(cap_replies, dtype=np.int64)
    n_r_new = 0

    t = t_start
    accepted = 0
    hit_cap = False
    while n_t_new < n_new_threads and t <= t_end:
        if accepted >= hard_cap:
            hit_cap = True
            break
        # total intensity at current t (states synced at t)
        lam_main = mu_main
        lam_total = 0.0
        for i in range(m):
            ti = thread_times[i]
            if ti >= t:
                continue
            q = math.exp(-delta * (t - ti))
            lam_r = mu_reply + alpha * q * S[i]
            lam_total += lam_r
            p = 0.0 if static_marks else pcount[i]
            lam_main += (
                lam_r * _mark_factor(p, gamma, smoothing) * (t - ti + c) ** (-(eta + 1.0))
            )
        lam_bar = lam_main + lam_total
        tau = -math.log(rng.random()) / lam_bar
        t_next = t + tau
        if t_next > t_end:
            t = t_end
            break
        decay = math.exp(-beta * tau)
        for i in range(m):
            S[i] *= decay
        # intensities at the candidate time
        lam_main2 = mu_main
        lam_total2 = 0.0
        for i in range(m):
            ti = thread_times[i]
            if ti >= t_next:
                continue
            q = math.exp(-delta * (t_next - ti))
            lam_r = mu_reply + alpha * q * S[i]
            lam_total2 += lam_r
            p = 0.0 if static_marks else pcount[i]
            lam_main2 += (
                lam_r
                * _mark_factor(p, gamma, smoothing)
                * (t_next - ti + c) ** (-(eta + 1.0))
            )
        u = rng.random() * lam_bar
        if u < lam_main2 + lam_total2:
            accepted += 1
            if u < lam_main2:
                thread_times[m] = t_next
                S[m] = 0.0
                pcount[m] = 0.0
                m += 1
                new_threads[n_t_new] = t_next
                n_t_new += 1
            else:
                # pick the reply stream proportionally to its intensity
                target = u - lam_main2
                cum = 0.0
                chosen = -1
                for i in range(m):
                    ti = thread_times[i]
                    if ti >= t_next:
                        continue
                    q = math.exp(-delta * (t_next - ti))
                    cum += mu_reply + alpha * q * S[i]
                    if target < cum:
                        chosen = i
                        break
                if chosen < 0:
                    chosen = m - 1
                if n_r_new >= cap_replies:
                    hit_cap = True
                    break
                new_reply_t[n_r_new] = t_next
                new_reply_c[n_r_new] = chosen
                n_r_new += 1
                S[chosen] += 1.0
                pcount[chosen] += 1.0
        t = t_next
    return (
        new_threads[:n_t_new],
        n_t_new,
        new_reply_t[:n_r_new],
        new_reply_c[:n_r_new],
        n_r_new,
        accepted,
        hit_cap,
    )
