"""SAOLA extended to streaming samples, with histogram mutual information.

Thresholds are in nats and unbounded above, unlike the CGD threshold of GOA.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dependency import default_bins, estimate_mi_hist, window_fingerprint
from .state import SelectorState, StepError, TraceEntry, check_feature, check_window, est_key
from .streaming import StreamEvent


@dataclass(frozen=True)
class XsaolaConfig:
    delta: float
    bins: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not self.delta >= 0.0:
            raise ValueError("delta must be >= 0")
        if self.bins is not None and self.bins < 2:
            raise ValueError("bins must be >= 2")


class MiStore:
    """Memo of histogram MI values keyed by window fingerprint."""

    def __init__(self, dataset, bins: Optional[int] = None):
        self.dataset = dataset
        self.bins = bins
        self._memo = {}

    def _bins(self, window):
        return self.bins or default_bins(len(window))

    def relevance(self, window, f, fp=None) -> float:
        fp = fp or window_fingerprint(self.dataset, window)
        k = (fp, f, "C")
        if k not in self._memo:
            rows = np.asarray(window)
            self._memo[k] = estimate_mi_hist(self.dataset.values[rows, f],
                                             self.dataset.labels[rows],
                                             self._bins(window), discrete_z=True)
        return self._memo[k]

    def redundancy(self, window, a, b, fp=None) -> float:
        fp = fp or window_fingerprint(self.dataset, window)
        a, b = min(a, b), max(a, b)
        k = (fp, a, b)
        if k not in self._memo:
            rows = np.asarray(window)
            self._memo[k] = estimate_mi_hist(self.dataset.values[rows, a],
                                             self.dataset.values[rows, b],
                                             self._bins(window))
        return self._memo[k]


def xsaola_step(state: SelectorState, event: StreamEvent, dataset, config: XsaolaConfig,
                store: Optional[MiStore] = None) -> SelectorState:
    f = event.feature_id
    check_feature(dataset, f)
    if f in state.selected:
        raise StepError(f"feature {f} is already selected")
    window = check_window(dataset, event.window)
    store = store or MiStore(dataset, config.bins)
    fp = window_fingerprint(dataset, window)
    state.seen.add(f)
    state.best_block.setdefault(f, window)
    state.best_score.setdefault(f, store.relevance(window, f, fp))

    ifc = store.relevance(window, f, fp)
    if ifc <= config.delta:
        state.log(TraceEntry(event.t, f, "discard", [], {est_key(f, "C"): ifc}))
        return state
    for y in list(state.selected):
        iyc = store.relevance(window, y, fp)
        ify = store.redundancy(window, f, y, fp)
        est = {est_key(f, "C"): ifc, est_key(y, "C"): iyc, est_key(f, y): ify}
        if iyc > ifc and ify >= ifc:
            state.log(TraceEntry(event.t, f, "discard", [y], est))
            return state
        if iyc < ifc and ify >= iyc:
            state.selected.remove(y)
            state.log(TraceEntry(event.t, y, "prune", [f], est))
    state.log(TraceEntry(event.t, f, "accept", list(state.selected), {est_key(f, "C"): ifc}))
    state.selected.append(f)
    return state


def run_xsaola(stream, dataset, config: XsaolaConfig, store: Optional[MiStore] = None,
               state: Optional[SelectorState] = None) -> SelectorState:
    """Fold ``xsaola_step``; a repeated feature keeps the block with the largest I(F;C)."""
    state = state or SelectorState()
    store = store or MiStore(dataset, config.bins)
    for ev in stream:
        try:
            f = ev.feature_id
            if f not in state.seen:
                xsaola_step(state, ev, dataset, config, store)
                continue
            window = check_window(dataset, ev.window)
            score = store.relevance(window, f)
            if score > state.best_score[f]:
                state.best_block[f] = window
                state.best_score[f] = score
                if f in state.selected:
                    state.selected.remove(f)
                xsaola_step(state, ev, dataset, config, store)
        except ValueError as e:
            raise StepError(f"time step {ev.t}: {e}") from e
    return state
