"""Exporters: DOT rendering of state graphs, JSON for measure results."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .model import Model
from .montecarlo import Estimate
from .solvers import MeasureResult
from .statespace import ReachabilityGraph, eliminate_vanishing, label_sets


@dataclass(frozen=True)
class DotOptions:
    hide_vanishing: bool = False
    rankdir: str = "LR"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(obj, model: Model | None = None, options: DotOptions = DotOptions()) -> str:
    """Render a reachability graph or CTMC as a DOT digraph.

    Node ids are the stable state indices.  Tangible states are solid,
    vanishing states dashed; timed edges carry ``rate=``, immediate edges
    ``p=``.  With ``hide_vanishing`` a graph is reduced first, so the
    rendered node set equals the CTMC's.
    """
    model = model or obj.model
    if isinstance(obj, ReachabilityGraph) and options.hide_vanishing:
        obj = eliminate_vanishing(obj)

    labels = label_sets(obj, model)
    by_state: dict[int, list[str]] = {}
    for name, idxs in labels.items():
        for i in idxs:
            by_state.setdefault(i, []).append(name)

    lines = [f"digraph {model.name} {{", f"  rankdir={options.rankdir};",
             "  node [shape=ellipse];"]

    if isinstance(obj, ReachabilityGraph):
        initial = {obj.initial}
        for i, s in enumerate(obj.states):
            tag = "\\n".join(
                x for x in (model.format_state(s), " ".join(sorted(by_state.get(i, ())))) if x
            )
            attrs = [f'label="s{i}\\n{_dot_escape(tag)}"']
            if not obj.tangible[i]:
                attrs.append("style=dashed")
            if i in initial:
                attrs.append("peripheries=2")
            lines.append(f"  s{i} [{', '.join(attrs)}];")
        for e in obj.edges:
            kind = "rate" if obj.tangible[e.src] else "p"
            lines.append(
                f'  s{e.src} -> s{e.dst} [label="{_dot_escape(e.transition)}\\n{kind}={e.value!r}"];'
            )
    else:  # Ctmc
        coo = obj.generator.tocoo()
        initial = {int(i) for i in range(obj.n) if obj.initial[i] > 0}
        for i, s in enumerate(obj.states):
            tag = "\\n".join(
                x for x in (model.format_state(s), " ".join(sorted(by_state.get(i, ())))) if x
            )
            attrs = [f'label="s{i}\\n{_dot_escape(tag)}"']
            if i in initial:
                attrs.append("peripheries=2")
            lines.append(f"  s{i} [{', '.join(attrs)}];")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            if i != j and v > 0:
                lines.append(f'  s{i} -> s{j} [label="rate={v!r}"];')

    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_summary(obj, model: Model | None = None) -> dict:
    """State/edge counts and per-label sizes, JSON-ready."""
    model = model or obj.model
    labels = {name: len(idx) for name, idx in label_sets(obj, model).items()}
    if isinstance(obj, ReachabilityGraph):
        return {
            "model": model.name,
            "states": len(obj.states),
            "tangible": obj.tangible_count(),
            "vanishing": obj.vanishing_count(),
            "edges": len(obj.edges),
            "labels": labels,
        }
    return {
        "model": model.name,
        "states": obj.n,
        "tangible": obj.n,
        "vanishing": 0,
        "edges": int(obj.generator.nnz - (obj.generator.diagonal() != 0).sum()),
        "labels": labels,
    }


def _result_to_dict(r) -> dict:
    if isinstance(r, Estimate):
        meta = {"replications": r.replications, "seed": r.seed}
        meta.update(r.metadata)
        return {
            "name": r.name,
            "value": r.value,
            "method": "simulation",
            "ci_halfwidth": r.half_width,
            "metadata": meta,
        }
    if isinstance(r, MeasureResult):
        return {
            "name": r.name,
            "value": r.value,
            "method": r.method,
            "ci_halfwidth": None,
            "metadata": dict(r.metadata),
        }
    raise TypeError(f"not a result: {r!r}")


def export_results_json(results) -> str:
    """JSON array of measure results with a stable field order."""
    return json.dumps([_result_to_dict(r) for r in results], indent=2) + "\n"
