"""Thread-reply event space: validation, ordering, marks, serialization.

Raw inputs are flat event records (id, optional parent id, timestamp in
seconds). Construction groups replies under their parent thread, shifts the
clock so the earliest event sits at zero (raw epoch magnitudes destabilize
the exponential kernels downstream), and enforces strict ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

DEFAULT_TIE_EPSILON = 1e-6


@dataclass(frozen=True)
class MarkedEvent:
    """One raw event: a main thread (parent_id None) or a reply to one."""

    event_id: str
    parent_id: str | None
    time: float


@dataclass(frozen=True, eq=False)
class Cascade:
    """A main thread and its replies, times in the normalized clock."""

    thread_time: float
    reply_times: np.ndarray
    thread_id: str = ""
    reply_ids: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.reply_times, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "reply_times", arr)

    @property
    def n_replies(self) -> int:
        return len(self.reply_times)

    def __eq__(self, other):
        if not isinstance(other, Cascade):
            return NotImplemented
        return (
            self.thread_time == other.thread_time
            and np.array_equal(self.reply_times, other.reply_times)
            and self.thread_id == other.thread_id
            and self.reply_ids == other.reply_ids
        )


@dataclass(frozen=True, eq=False)
class EventSpace:
    """Ordered cascades up to an observation horizon. Immutable once built."""

    cascades: tuple[Cascade, ...]
    horizon: float
    offset: float = 0.0
    thread_times: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        times = np.array([c.thread_time for c in self.cascades], dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "thread_times", times)

    @property
    def n_threads(self) -> int:
        return len(self.cascades)

    @property
    def n_replies(self) -> int:
        return sum(c.n_replies for c in self.cascades)

    def __eq__(self, other):
        if not isinstance(other, EventSpace):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.offset == other.offset
            and self.cascades == other.cascades
        )

    def last_event_time(self) -> float:
        """Largest event time in the space, 0.0 when empty."""
        last = 0.0
        for c in self.cascades:
            last = max(last, c.thread_time)
            if c.n_replies:
                last = max(last, float(c.reply_times[-1]))
        return last


def build_event_space(
    events: list[MarkedEvent],
    horizon: float | None = None,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
) -> EventSpace:
    """Validate raw events and assemble the ordered thread-reply space.

    Times are shifted so the earliest event is at 0; the shift is kept in
    ``offset``. Exact duplicate timestamps within the thread stream, and
    within each cascade's replies, are perturbed by ``tie_epsilon`` in stable
    input order (0 disables the jitter). ``horizon`` is given on the raw
    clock and defaults to the latest event time.
    """
    if tie_epsilon < 0:
        raise ValidationError("tie_epsilon must be >= 0")

    for ev in events:
        t = float(ev.time)
        if not np.isfinite(t):
            raise ValidationError(f"event {ev.event_id!r} has non-finite time {ev.time!r}")

    if not events:
        if horizon is not None and horizon != 0:
            raise ValidationError("horizon must be 0 for an empty event list")
        return EventSpace(cascades=(), horizon=0.0, offset=0.0)

    seen_ids = set()
    for ev in events:
        if ev.event_id in seen_ids:
            raise ValidationError(f"duplicate event_id {ev.event_id!r}")
        seen_ids.add(ev.event_id)

    offset = min(float(ev.time) for ev in events)

    threads = [ev for ev in events if ev.parent_id is None]
    replies = [ev for ev in events if ev.parent_id is not None]
    thread_ids = {ev.event_id for ev in threads}
    for ev in replies:
        if ev.parent_id not in thread_ids:
            raise ValidationError(
                f"reply {ev.event_id!r} references unknown main thread {ev.parent_id!r}"
            )

    threads.sort(key=lambda ev: float(ev.time))  # stable: input order breaks ties
    thread_times = _jitter([float(ev.time) - offset for ev in threads], tie_epsilon)

    time_of = {ev.event_id: t for ev, t in zip(threads, thread_times)}
    raw_time_of = {ev.event_id: float(ev.time) for ev in threads}

    by_parent: dict[str, list[MarkedEvent]] = {ev.event_id: [] for ev in threads}
    for ev in replies:
        if float(ev.time) < raw_time_of[ev.parent_id]:
            raise ValidationError(
                f"reply {ev.event_id!r} at t={ev.time!r} precedes its thread {ev.parent_id!r}"
            )
        by_parent[ev.parent_id].append(ev)

    cascades = []
    for ev, t_thread in zip(threads, thread_times):
        kids = sorted(by_parent[ev.event_id], key=lambda r: float(r.time))
        # threads jittered above their raw time can overtake a tying reply; clamp
        kid_times = _jitter(
            [max(float(r.time) - offset, t_thread) for r in kids], tie_epsilon
        )
        cascades.append(
            Cascade(
                thread_time=t_thread,
                reply_times=np.array(kid_times, dtype=float),
                thread_id=ev.event_id,
                reply_ids=tuple(r.event_id for r in kids),
            )
        )

    last = max(
        max((float(c.reply_times[-1]) for c in cascades if c.n_replies), default=0.0),
        thread_times[-1] if thread_times else 0.0,
    )
    if horizon is None:
        h = last
    else:
        h = float(horizon) - offset
        if h < last:
            raise ValidationError(f"horizon {horizon!r} precedes the last event")

    return EventSpace(cascades=tuple(cascades), horizon=h, offset=offset)


def _jitter(times: list[float], eps: float) -> list[float]:
    if eps == 0 or len(times) < 2:
        return times
    out = list(times)
    for k in range(1, len(out)):
        if out[k] <= out[k - 1]:
            out[k] = out[k - 1] + eps
    return out


def mark_count(space: EventSpace, thread_index: int, t: float) -> int:
    """Number of replies of cascade ``thread_index`` with time <= t."""
    if not 0 <= thread_index < space.n_threads:
        raise IndexError(f"thread_index {thread_index} out of range for m={space.n_threads}")
    return int(np.searchsorted(space.cascades[thread_index].reply_times, t, side="right"))


def subspace(space: EventSpace, start: int, stop: int, horizon: float | None = None) -> EventSpace:
    """Cascades ``start:stop`` with replies truncated at ``horizon``.

    Keeps the normalized clock and offset of the parent space so times stay
    comparable across subsets. ``horizon`` defaults to the last included
    thread time.
    """
    chosen = space.cascades[start:stop]
    if horizon is None:
        horizon = chosen[-1].thread_time if chosen else 0.0
    cut = []
    for c in chosen:
        if c.thread_time > horizon:
            raise ValidationError("subspace horizon precedes an included thread")
        k = int(np.searchsorted(c.reply_times, horizon, side="right"))
        cut.append(
            Cascade(
                thread_time=c.thread_time,
                reply_times=c.reply_times[:k].copy(),
                thread_id=c.thread_id,
                reply_ids=c.reply_ids[:k],
            )
        )
    return EventSpace(cascades=tuple(cut), horizon=float(horizon), offset=space.offset)


# --- JSONL serialization -------------------------------------------------
#
# Event line format (shared with ingestion): one object per line with keys
# `id`, `parent`, `ts`. An EventSpace file adds a header line carrying the
# raw-clock offset and horizon.


def event_to_json(ev: MarkedEvent) -> str:
    return json.dumps(
        {"id": ev.event_id, "parent": ev.parent_id, "ts": ev.time}, sort_keys=True
    )


def event_from_json(line: str) -> MarkedEvent:
    obj = json.loads(line)
    return MarkedEvent(event_id=str(obj["id"]), parent_id=obj["parent"], time=float(obj["ts"]))


def space_to_events(space: EventSpace) -> list[MarkedEvent]:
    """Flatten a space back to raw-clock events, thread order then reply order."""
    out = []
    for c in space.cascades:
        out.append(MarkedEvent(c.thread_id, None, c.thread_time + space.offset))
        for rid, rt in zip(c.reply_ids, c.reply_times):
            out.append(MarkedEvent(rid, c.thread_id, float(rt) + space.offset))
    return out


def serialize_event_space(space: EventSpace) -> str:
    header = json.dumps(
        {"horizon": space.horizon + space.offset if space.n_threads else space.horizon,
         "offset": space.offset},
        sort_keys=True,
    )
    lines = [header]
    lines.extend(event_to_json(ev) for ev in space_to_events(space))
    return "\n".join(lines) + "\n"


def load_event_space(text: str) -> EventSpace:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty event space document")
    header = json.loads(lines[0])
    if "horizon" not in header:
        raise ValidationError("event space document lacks a horizon header")
    events = [event_from_json(ln) for ln in lines[1:]]
    horizon = float(header["horizon"]) if events else None
    return build_event_space(events, horizon=horizon, tie_epsilon=0.0)
