"""Exact numerical measures on a CTMC.

Production paths are sparse and iterative: steady state by power iteration
on the uniformized chain, transients by uniformization with stable Poisson
weighting, absorption times by a sparse linear solve.  Dense counterparts
live in the test suite as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .errors import (
    InvalidArgError,
    NoConvergenceError,
    NotErgodicError,
    UnknownLabelError,
    UnreachableTargetError,
)
from .statespace import Ctmc


@dataclass(frozen=True)
class SolverOptions:
    steady_tol: float = 1e-10  # residual bound for ||pi Q||_inf
    poisson_tail: float = 1e-9  # Poisson mass allowed to be discarded
    max_iterations: int = 1_000_000
    uniformization_rate: float | None = None  # None: 1.05 * max exit rate


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class Distribution:
    """Probabilities over tangible states at one time (inf = steady)."""

    probs: np.ndarray
    time: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.min(initial=0.0) < -1e-14:
            raise InvalidArgError(f"distribution entry below -1e-14: {p.min()}")
        self.probs = np.clip(p, 0.0, None)


@dataclass(frozen=True)
class MeasureResult:
    name: str
    value: float
    method: str  # steady | transient | mtta | simulation
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Structure helpers


def terminal_sccs(ctmc: Ctmc) -> list[np.ndarray]:
    """Strongly-connected components with no outgoing rate, by state index."""
    n = ctmc.n
    adj = (ctmc.generator > 0).astype(np.int8)
    ncomp, labels = csgraph.connected_components(adj, directed=True, connection="strong")
    has_exit = np.zeros(ncomp, dtype=bool)
    coo = ctmc.generator.tocoo()
    for i, j, v in zip(coo.row, coo.col, coo.data):
        if v > 0 and labels[i] != labels[j]:
            has_exit[labels[i]] = True
    return [np.flatnonzero(labels == c) for c in range(ncomp) if not has_exit[c]]


def _reachable_from(ctmc: Ctmc, sources: np.ndarray, forward: bool = True) -> np.ndarray:
    adj = (ctmc.generator > 0).astype(np.int8)
    if not forward:
        adj = adj.T
    adj = adj.tocsr()
    seen = np.zeros(ctmc.n, dtype=bool)
    seen[sources] = True
    frontier = list(sources)
    indptr, indices = adj.indptr, adj.indices
    while frontier:
        nxt = []
        for i in frontier:
            for j in indices[indptr[i] : indptr[i + 1]]:
                if not seen[j]:
                    seen[j] = True
                    nxt.append(j)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# Steady state


def steady_state(ctmc: Ctmc, options: SolverOptions = DEFAULT_OPTIONS) -> Distribution:
    """Long-run distribution pi with pi Q = 0, sum(pi) = 1.

    Requires a unique terminal strongly-connected component (an
    irreducible chain is the special case where it covers every state);
    the stationary distribution is computed on that component by power
    iteration on the uniformized chain and is zero elsewhere.
    """
    terms = terminal_sccs(ctmc)
    if len(terms) != 1:
        raise NotErgodicError(
            f"chain has {len(terms)} terminal strongly-connected components; "
            "steady state is not unique"
        )
    scc = terms[0]
    n = ctmc.n
    sub = ctmc.generator[np.ix_(scc, scc)].tocsr()

    pi_sub, iterations, residual = _power_iteration(sub, options)
    pi = np.zeros(n)
    pi[scc] = pi_sub
    return Distribution(
        pi,
        math.inf,
        metadata={
            "iterations": iterations,
            "residual": residual,
            "terminal_scc_size": int(len(scc)),
        },
    )


def _power_iteration(q: sp.csr_matrix, options: SolverOptions):
    m = q.shape[0]
    if m == 1:
        return np.ones(1), 0, 0.0
    rates = -q.diagonal()
    lam = float(rates.max()) * 1.05
    if lam <= 0:  # no transitions inside the component
        return np.full(m, 1.0 / m), 0, 0.0
    p = sp.eye(m, format="csr") + q / lam
    pi = np.full(m, 1.0 / m)
    check_every = 32
    residual = math.inf
    for it in range(0, options.max_iterations, check_every):
        for _ in range(check_every):
            pi = pi @ p
        pi = pi / pi.sum()
        residual = float(np.abs(pi @ q).max())
        if residual <= options.steady_tol:
            return pi, it + check_every, residual
    raise NoConvergenceError(
        f"steady-state residual {residual:.3e} above {options.steady_tol} "
        f"after {options.max_iterations} iterations",
        residual=residual,
        iterations=options.max_iterations,
    )


# ---------------------------------------------------------------------------
# Transient analysis


def _poisson_window(mean: float, tail: float):
    """Left/right truncation and normalized weights for Poisson(mean).

    Weights are built by recurrence from the mode, so they stay
    well-scaled for arbitrarily large means; the discarded tail mass is
    bounded geometrically by ``tail`` on each side.
    """
    mode = int(mean)
    w = {mode: 1.0}
    total = 1.0
    # Right tail: w[k+1] = w[k] * mean / (k+1).
    k, wk = mode, 1.0
    while True:
        ratio = mean / (k + 1)
        wk *= ratio
        k += 1
        w[k] = wk
        total += wk
        if ratio < 1.0 and wk * ratio / (1.0 - ratio) < tail * total:
            break
    right = k
    # Left tail: w[k-1] = w[k] * k / mean.
    k, wk = mode, 1.0
    while k > 0:
        ratio = k / mean
        wk *= ratio
        k -= 1
        w[k] = wk
        total += wk
        if ratio < 1.0 and wk * ratio / (1.0 - ratio) < tail * total:
            break
    left = k
    weights = np.array([w[i] for i in range(left, right + 1)])
    return left, right, weights / weights.sum()


def transient(
    ctmc: Ctmc, t: float, options: SolverOptions = DEFAULT_OPTIONS
) -> Distribution:
    """Distribution at time ``t`` by uniformization.

    p(t) = sum_k Poisson(Lambda t)[k] * p(0) P^k with P = I + Q/Lambda;
    the Poisson series is truncated to discard at most ``poisson_tail``
    mass.  Iteration stops early once the powers have converged (their
    difference is non-expansive under a stochastic P).
    """
    if t < 0:
        raise InvalidArgError(f"time must be >= 0, got {t}")
    p0 = ctmc.initial.astype(float)
    rates = -ctmc.generator.diagonal()
    lam = float(rates.max()) * 1.05 if ctmc.n else 0.0
    if options.uniformization_rate is not None:
        if options.uniformization_rate < rates.max():
            raise InvalidArgError(
                "uniformization rate must dominate every exit rate"
            )
        lam = float(options.uniformization_rate)
    if t == 0 or lam <= 0:
        dist = Distribution(p0.copy(), t)
        dist.metadata = {"uniformization_rate": lam, "poisson_terms": 0, "steps": 0}
        return dist

    p = sp.eye(ctmc.n, format="csr") + ctmc.generator / lam
    left, right, weights = _poisson_window(lam * t, options.poisson_tail)

    result = np.zeros_like(p0)
    v = p0
    steps = 0
    for k in range(right + 1):
        if k >= left:
            result += weights[k - left] * v
        if k == right:
            break
        nxt = v @ p
        steps += 1
        if float(np.abs(nxt - v).sum()) <= 1e-14:
            # Remaining Poisson mass multiplies an (effectively) fixed vector.
            if k + 1 >= left:
                result += weights[k + 1 - left :].sum() * nxt
            else:
                result += nxt  # the whole window is still ahead
            v = nxt
            break
        v = nxt

    dist = Distribution(result, t)
    dist.metadata = {
        "uniformization_rate": lam,
        "poisson_terms": [int(left), int(right)],
        "steps": steps,
    }
    return dist


# ---------------------------------------------------------------------------
# Absorption


def resolve_target(ctmc: Ctmc, target) -> np.ndarray:
    """Resolve a target (label name or index set) to sorted state indices."""
    if isinstance(target, str):
        if target not in ctmc.label_sets:
            raise UnknownLabelError(f"no label {target!r} on model {ctmc.model.name!r}")
        idx = sorted(ctmc.label_sets[target])
    else:
        idx = sorted(int(i) for i in target)
        if any(i < 0 or i >= ctmc.n for i in idx):
            raise InvalidArgError("target state index out of range")
    return np.asarray(idx, dtype=int)


def mean_time_to_absorption(
    ctmc: Ctmc,
    target,
    options: SolverOptions = DEFAULT_OPTIONS,
    allow_defective: bool = False,
) -> MeasureResult:
    """Expected first-hitting time of ``target`` from the initial distribution.

    Target states are made absorbing and the expected hitting times solve
    the standard linear system.  If the target is hit with probability
    below one this raises ``UnreachableTargetError`` unless
    ``allow_defective`` is set, in which case the conditional mean given
    absorption is returned together with the hit probability.
    """
    tgt = resolve_target(ctmc, target)
    if len(tgt) == 0:
        raise UnreachableTargetError("target set is empty", hit_probability=0.0)

    in_target = np.zeros(ctmc.n, dtype=bool)
    in_target[tgt] = True

    # Absorb the target: discard its outgoing rates.
    q = ctmc.generator.tolil(copy=True)
    for i in tgt:
        q.rows[i] = []
        q.data[i] = []
    q = q.tocsr()
    absorbed = Ctmc(
        model=ctmc.model,
        states=ctmc.states,
        generator=q,
        initial=ctmc.initial,
        label_sets=ctmc.label_sets,
    )

    start = np.flatnonzero(ctmc.initial > 0)
    reachable = _reachable_from(absorbed, start)
    can_reach = _reachable_from(absorbed, tgt, forward=False)
    defective = bool((reachable & ~can_reach & ~in_target).any())

    relevant = np.flatnonzero(reachable & can_reach & ~in_target)
    sub = q[np.ix_(relevant, relevant)].tocsc()

    if defective and not allow_defective:
        hit = _hit_probability(ctmc, q, relevant, in_target, sub)
        raise UnreachableTargetError(
            f"target hit with probability {hit:.6g} < 1 from the initial "
            "distribution (pass allow_defective to get the conditional mean)",
            hit_probability=hit,
        )

    if not defective:
        if len(relevant):
            h = spla.spsolve(sub, -np.ones(len(relevant)))
            residual = float(np.abs(sub @ h + 1.0).max())
            value = float(ctmc.initial[relevant] @ h)  # target states contribute 0
        else:
            residual, value = 0.0, 0.0  # initial mass already in the target
        return MeasureResult(
            name="mtta",
            value=value,
            method="mtta",
            metadata={
                "residual": residual,
                "target_states": int(len(tgt)),
                "hit_probability": 1.0,
            },
        )

    # Defective case: conditional mean E[time | hit] restricted to states
    # that can still reach the target.
    a = _hit_vector(q, relevant, in_target, sub)
    g = spla.spsolve(sub, -a)
    residual = float(np.abs(sub @ g + a).max()) if len(relevant) else 0.0
    mass_in_target = float(ctmc.initial[in_target].sum())
    hit = float(ctmc.initial[relevant] @ a) + mass_in_target
    num = float(ctmc.initial[relevant] @ g)
    return MeasureResult(
        name="mtta",
        value=num / hit,
        method="mtta",
        metadata={
            "residual": residual,
            "target_states": int(len(tgt)),
            "hit_probability": hit,
            "conditional": True,
        },
    )


def _hit_vector(q, relevant, in_target, sub) -> np.ndarray:
    """P(hit target) for each relevant state: Q'a = -(rates into target)."""
    r = np.asarray(q[relevant][:, np.flatnonzero(in_target)].sum(axis=1)).ravel()
    return spla.spsolve(sub, -r)


def _hit_probability(ctmc, q, relevant, in_target, sub) -> float:
    a = _hit_vector(q, relevant, in_target, sub)
    return float(ctmc.initial[relevant] @ a) + float(ctmc.initial[in_target].sum())


# ---------------------------------------------------------------------------
# Label measures


def label_probability(dist: Distribution, label_set, name: str = "label_probability") -> MeasureResult:
    """Probability mass of a state-index set under ``dist``."""
    idx = sorted(int(i) for i in label_set)
    if any(i < 0 or i >= len(dist.probs) for i in idx):
        raise InvalidArgError("label state index out of range")
    value = float(dist.probs[idx].sum()) if idx else 0.0
    method = "steady" if math.isinf(dist.time) else "transient"
    meta = dict(getattr(dist, "metadata", {}))
    if not math.isinf(dist.time):
        meta["time"] = dist.time
    return MeasureResult(name=name, value=value, method=method, metadata=meta)
