"""Geometric Online Adaptation: streaming feature selection with CGD.

At each step the incoming feature F is compared against the stored set S on
the current sample window. F is discarded when some stored X satisfies
G(F;X|C) >= delta while for some other stored Z, G(F;Z|C) > G(X;Z|C).
Otherwise F joins S and S is pruned: a stored Z is removed when some X has
G(Z;X|C) > delta and G(Z;X|C) >= G(Y;X|C) for some third stored Y.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .dependency import PairStore, cgd_store
from .state import SelectorState, StepError, TraceEntry, check_feature, check_window, est_key
from .streaming import StreamEvent


@dataclass(frozen=True)
class GoaConfig:
    delta: float
    seed: int = 0
    bins: Optional[int] = None  # unused; kept so both selectors share a config shape
    max_features: Optional[int] = None
    quantifier: str = "exists"

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        if self.quantifier not in ("exists", "forall"):
            raise ValueError("quantifier must be 'exists' or 'forall'")


def discard_witness(f, stored, cache, config: GoaConfig):
    """Return (discard, witness ids, estimates) for incoming feature ``f``."""
    delta = config.delta
    if not stored:
        return False, [], {}
    if len(stored) == 1:
        x = stored[0]
        g = cache[f, x]
        return g >= delta, [x], {est_key(f, x): g}
    pairs = [(x, z) for x in stored for z in stored if x != z]
    hits = []
    for x, z in pairs:
        fx, fz, xz = cache[f, x], cache[f, z], cache[x, z]
        ok = fx >= delta and fz > xz
        if ok and config.quantifier == "exists":
            return True, [x, z], {est_key(f, x): fx, est_key(f, z): fz, est_key(x, z): xz}
        if not ok and config.quantifier == "forall":
            return False, [], {}
        hits.append((x, z))
    if config.quantifier == "forall":
        return True, [hits[0][0], hits[0][1]], {}
    return False, [], {}


def prune_witness(z, selected, cache, delta):
    """(X, Y) justifying removal of ``z`` from ``selected``, or None."""
    for x in selected:
        if x == z:
            continue
        g = cache[z, x]
        if g <= delta:
            continue
        for y in selected:
            if y == z or y == x:
                continue
            if g >= cache[y, x]:
                return x, y
    return None


def prune(selected, cache, delta):
    """Fixpoint pruning; returns (kept features, [(z, x, y), ...] removals)."""
    sel = list(selected)
    removed = []
    changed = True
    while changed:
        changed = False
        for z in sel:
            w = prune_witness(z, sel, cache, delta)
            if w is not None:
                sel.remove(z)
                removed.append((z, *w))
                changed = True
                break
    return sel, removed


def goa_step(state: SelectorState, event: StreamEvent, dataset, config: GoaConfig,
             store: Optional[PairStore] = None) -> SelectorState:
    f = event.feature_id
    check_feature(dataset, f)
    if f in state.selected:
        raise StepError(f"feature {f} is already selected")
    window = check_window(dataset, event.window)
    store = store or cgd_store(dataset, config.seed)
    stored = list(state.selected)
    cache = store.cache_for(window, stored + [f])
    state.cache = cache
    state.seen.add(f)
    state.best_block.setdefault(f, window)

    discard, witness, est = discard_witness(f, stored, cache, config)
    if discard:
        state.log(TraceEntry(event.t, f, "discard", witness, est))
        return state

    kept, removed = prune(stored + [f], cache, config.delta)
    if config.max_features is not None and len(kept) > config.max_features:
        state.log(TraceEntry(event.t, f, "discard", [], {}))
        return state
    state.log(TraceEntry(event.t, f, "accept", list(stored),
                         {est_key(f, x): cache[f, x] for x in stored}))
    for z, x, y in removed:
        state.log(TraceEntry(event.t, z, "prune", [x, y],
                             {est_key(z, x): cache[z, x], est_key(y, x): cache[y, x]}))
    state.selected = kept
    return state


def block_score(store: PairStore, window, f, others) -> float:
    cache = store.cache_for(window, list(others) + [f])
    return max(cache[f, x] for x in others)


def run_goa(stream, dataset, config: GoaConfig, store: Optional[PairStore] = None,
            state: Optional[SelectorState] = None) -> SelectorState:
    """Fold ``goa_step`` over a stream.

    A feature seen again (scenario B3) is re-evaluated only when the new
    block scores higher, where a block's score is its largest G(F;X|C) over
    the other stored features; the new block then replaces the old one. With
    no other stored feature the first block is kept.
    """
    state = state or SelectorState()
    store = store or cgd_store(dataset, config.seed)
    for ev in stream:
        try:
            f = ev.feature_id
            if f not in state.seen:
                goa_step(state, ev, dataset, config, store)
                continue
            others = [x for x in state.selected if x != f]
            if not others:
                continue
            window = check_window(dataset, ev.window)
            new = block_score(store, window, f, others)
            old = block_score(store, state.best_block[f], f, others)
            if new > old:
                state.best_block[f] = window
                state.best_score[f] = new
                if f in state.selected:
                    state.selected.remove(f)
                goa_step(state, ev, dataset, config, store)
        except ValueError as e:
            raise StepError(f"time step {ev.t}: {e}") from e
    return state
