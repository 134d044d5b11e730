"""Discrete-event Monte Carlo simulation of a model.

Tangible states run an exponential race: one delay is drawn per enabled
timed transition, in declaration order, and the minimum fires.  Vanishing
states consume exactly one uniform to pick among the max-priority
immediates by weight.  Given (model, horizon, seed, event cap) a trace is
fully deterministic; replication r of an estimator runs on the stream
``stream_seed(seed, r)`` so replications are independent and can be
executed concurrently and merged by index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import EventCapExceeded, ImmediateCycleError, InvalidArgError, UnknownLabelError
from .model import Model, StateVector, compile_guard, initial_state
from .rng import SplitMix64, stream_seed
from .validate import validate_model

DEFAULT_EVENT_CAP = 1_000_000
MAX_CHAINED_IMMEDIATES = 10_000


@dataclass(frozen=True)
class Event:
    time: float
    transition: str
    state: StateVector


@dataclass(frozen=True)
class Trace:
    replication: int
    seed: int
    initial: StateVector
    events: tuple[Event, ...]
    end_reason: str  # horizon | absorbed | event-cap
    end_time: float


@dataclass(frozen=True)
class Estimate:
    name: str
    value: float
    half_width: float  # 95% normal-approximation CI half width
    replications: int
    seed: int
    metadata: dict = field(default_factory=dict)


class _Engine:
    """Per-state firing tables, memoized across steps and replications."""

    def __init__(self, model: Model):
        validate_or_raise(model)
        self.model = model
        self.comp = model._compiled
        self.transitions = model.transitions
        self.rates = {
            i: model.rate_of(self.transitions[i]) for i in self.comp.timed_idx
        }
        self.cache: dict[StateVector, tuple] = {}

    def info(self, s: StateVector):
        got = self.cache.get(s)
        if got is None:
            comp = self.comp
            imm = [i for i in comp.immediate_idx if comp.guards[i](s)]
            if imm:
                top = max(self.transitions[i].kind.priority for i in imm)
                chosen = [i for i in imm if self.transitions[i].kind.priority == top]
                weights = [self.transitions[i].kind.weight for i in chosen]
                total = sum(weights)
                cuts = []
                acc = 0.0
                for w in weights:
                    acc += w
                    cuts.append(acc / total)
                got = (True, tuple(chosen), tuple(cuts))
            else:
                timed = [i for i in comp.timed_idx if comp.guards[i](s)]
                got = (False, tuple(timed), tuple(self.rates[i] for i in timed))
            self.cache[s] = got
        return got

    def fire(self, idx: int, s: StateVector) -> StateVector:
        return self.comp.updates[idx](s)

    def pick_immediate(self, cuts, candidates, rng: SplitMix64) -> int:
        u = rng.uniform()
        for i, cut in zip(candidates, cuts):
            if u <= cut:
                return i
        return candidates[-1]


def validate_or_raise(model: Model):
    report = validate_model(model)
    if not report.ok:
        first = report.errors[0]
        raise InvalidArgError(
            f"model {model.name!r} does not validate: "
            f"[{first.code}] {first.message} ({first.where})"
        )


def simulate(
    model: Model,
    horizon: float,
    seed: int = 0,
    event_cap: int = DEFAULT_EVENT_CAP,
    replication: int = 0,
    _engine: _Engine | None = None,
) -> Trace:
    """One replication up to ``horizon`` time units.

    Immediate firings are recorded at the timestamp of the timed event
    that exposed them, ordered after it.  Ends at the horizon, at
    absorption (no enabled transition), or fails with the partial trace
    attached once ``event_cap`` events were recorded.
    """
    if not horizon > 0:
        raise InvalidArgError(f"horizon must be positive, got {horizon}")
    eng = _engine or _Engine(model)
    rng = SplitMix64(seed)
    init = initial_state(model)
    events: list[Event] = []

    def cap_guard(trace_time):
        if len(events) > event_cap:
            raise EventCapExceeded(
                f"simulation exceeded {event_cap} events",
                trace=Trace(
                    replication, seed, init, tuple(events[:event_cap]), "event-cap", trace_time
                ),
            )

    state = init
    now = 0.0
    state, now_events = _settle_immediates(eng, state, 0.0, rng)
    events.extend(now_events)
    cap_guard(0.0)

    while True:
        vanishing, items, payload = eng.info(state)
        assert not vanishing  # settled below before looping
        if not items:
            return Trace(replication, seed, init, tuple(events), "absorbed", now)
        best_dt = math.inf
        best = -1
        for idx, rate in zip(items, payload):
            dt = rng.exponential(rate)
            if dt < best_dt:
                best_dt = dt
                best = idx
        t_next = now + best_dt
        if t_next > horizon:
            return Trace(replication, seed, init, tuple(events), "horizon", horizon)
        state = eng.fire(best, state)
        now = t_next
        events.append(Event(now, eng.transitions[best].name, state))
        state, more = _settle_immediates(eng, state, now, rng)
        events.extend(more)
        cap_guard(now)


def _settle_immediates(eng: _Engine, state: StateVector, now: float, rng: SplitMix64):
    fired: list[Event] = []
    for _ in range(MAX_CHAINED_IMMEDIATES):
        vanishing, items, payload = eng.info(state)
        if not vanishing:
            return state, fired
        idx = eng.pick_immediate(payload, items, rng)
        state = eng.fire(idx, state)
        fired.append(Event(now, eng.transitions[idx].name, state))
    raise ImmediateCycleError(
        f"more than {MAX_CHAINED_IMMEDIATES} immediate firings at time {now}"
    )


# ---------------------------------------------------------------------------
# Estimators


def _label_fn(model: Model, label):
    if isinstance(label, str):
        if label not in model.label_map:
            raise UnknownLabelError(f"no label {label!r} on model {model.name!r}")
        return model._compiled.label_guards[label], label
    # A guard expression is accepted anywhere a label name is.
    return compile_guard(label, model.var_index), "<guard>"


def _ci_half_width(values) -> float:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return 1.96 * math.sqrt(var / n)


def _run_replications(count: int, worker, workers: int = 1) -> list:
    if workers <= 1:
        return [worker(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(count)))  # merged by index


def estimate_occupancy(
    model: Model,
    label,
    horizon: float,
    replications: int,
    seed: int = 0,
    burn_in: float | None = None,
    event_cap: int = DEFAULT_EVENT_CAP,
    workers: int = 1,
) -> Estimate:
    """Long-run fraction of time the label holds, averaged per replication.

    Each replication averages the label indicator over [burn_in, horizon]
    (burn-in defaults to horizon/10) on its own derived stream.
    """
    if replications < 2:
        raise InvalidArgError("need at least 2 replications for an estimate")
    if burn_in is None:
        burn_in = horizon / 10.0
    if not 0 <= burn_in < horizon:
        raise InvalidArgError(f"burn-in must lie in [0, horizon), got {burn_in}")
    fn, label_name = _label_fn(model, label)
    eng = _Engine(model)

    def one(r: int) -> float:
        trace = simulate(
            model, horizon, stream_seed(seed, r), event_cap, replication=r, _engine=eng
        )
        return _occupancy_of_trace(trace, fn, burn_in, horizon)

    values = _run_replications(replications, one, workers)
    return Estimate(
        name=f"occupancy[{label_name}]",
        value=sum(values) / replications,
        half_width=_ci_half_width(values),
        replications=replications,
        seed=seed,
        metadata={"horizon": horizon, "burn_in": burn_in},
    )


def _occupancy_of_trace(trace: Trace, fn, burn_in: float, horizon: float) -> float:
    total = 0.0
    t_prev = 0.0
    s_prev = trace.initial
    for ev in trace.events:
        if fn(s_prev):
            total += max(0.0, min(ev.time, horizon) - max(t_prev, burn_in))
        t_prev, s_prev = ev.time, ev.state
    if fn(s_prev):  # last state persists to the horizon (or absorption)
        total += max(0.0, horizon - max(t_prev, burn_in))
    return total / (horizon - burn_in)


def estimate_time_to(
    model: Model,
    label,
    replications: int,
    seed: int = 0,
    cap_time: float = 10_000.0,
    event_cap: int = DEFAULT_EVENT_CAP,
    workers: int = 1,
) -> Estimate:
    """Mean first time the label holds, censored at ``cap_time``.

    Censored replications enter the mean at ``cap_time`` and are counted
    in the metadata; with any censoring the estimate is a lower bound.
    """
    if replications < 2:
        raise InvalidArgError("need at least 2 replications for an estimate")
    if not cap_time > 0:
        raise InvalidArgError(f"cap_time must be positive, got {cap_time}")
    fn, label_name = _label_fn(model, label)
    eng = _Engine(model)

    def one(r: int) -> tuple[float, bool]:
        return _first_hit(eng, fn, cap_time, stream_seed(seed, r), event_cap)

    outcomes = _run_replications(replications, one, workers)
    values = [t for t, _ in outcomes]
    censored = sum(1 for _, c in outcomes if c)
    return Estimate(
        name=f"time_to[{label_name}]",
        value=sum(values) / replications,
        half_width=_ci_half_width(values),
        replications=replications,
        seed=seed,
        metadata={
            "cap_time": cap_time,
            "censored": censored,
            "all_censored": censored == replications,
        },
    )


def _first_hit(eng: _Engine, fn, cap_time: float, seed: int, event_cap: int):
    """First-hit time of the label on one stream; same sampling order as
    ``simulate`` so a hit time can be cross-checked against a full trace."""
    rng = SplitMix64(seed)
    state = initial_state(eng.model)
    now = 0.0
    steps = 0
    imm_run = 0
    if fn(state):
        return 0.0, False
    while True:
        vanishing, items, payload = eng.info(state)
        if vanishing:
            idx = eng.pick_immediate(payload, items, rng)
            imm_run += 1
            if imm_run > MAX_CHAINED_IMMEDIATES:
                raise ImmediateCycleError(
                    f"more than {MAX_CHAINED_IMMEDIATES} immediate firings at time {now}"
                )
        else:
            if not items:
                return cap_time, True  # absorbed without hitting the label
            imm_run = 0
            best_dt = math.inf
            idx = -1
            for i, rate in zip(items, payload):
                dt = rng.exponential(rate)
                if dt < best_dt:
                    best_dt = dt
                    idx = i
            now += best_dt
            if now > cap_time:
                return cap_time, True
        state = eng.fire(idx, state)
        if fn(state):
            return now, False
        steps += 1
        if steps > event_cap:
            raise EventCapExceeded(f"simulation exceeded {event_cap} events")


# ---------------------------------------------------------------------------
# Trace export


def trace_to_csv(trace: Trace, model: Model) -> str:
    """One event per line: ``time,transition,var1=val1,...``."""
    lines = []
    for ev in trace.events:
        assigns = ",".join(
            f"{v.name}={ev.state[i]}" for i, v in enumerate(model.variables)
        )
        lines.append(f"{ev.time!r},{ev.transition},{assigns}")
    return "\n".join(lines) + ("\n" if lines else "")


def trace_to_jsonl(trace: Trace, model: Model) -> str:
    import json

    lines = []
    for ev in trace.events:
        state = {v.name: ev.state[i] for i, v in enumerate(model.variables)}
        lines.append(
            json.dumps(
                {"time": ev.time, "transition": ev.transition, "state": state},
                separators=(", ", ": "),
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
