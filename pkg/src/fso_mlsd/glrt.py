"""Detectors: PCSI symbol-by-symbol ML, exhaustive GLRT, and the
Viterbi-type trellis GLRT-MLSD with the selective-store window.

The sequence metric is lambda(m) = (r.m)^2 / ||m||^2, jointly maximizing
the likelihood over the data subsequence and the unknown channel gain.
The trellis keeps one survivor per PAM level; decisions are emitted when
all survivors share a common ongoing prefix.  Only nonzero detected
symbols (and their received samples) enter the metric window, so the
denominator can never collapse to zero after pilot initialization.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .modem import PamScheme, transmit

__all__ = [
    "glrt_metric",
    "estimate_gain",
    "pcsi_detect",
    "exhaustive_glrt",
    "StoreWindow",
    "Survivor",
    "TrellisDetector",
    "init_pilots",
]


def glrt_metric(r, m) -> float:
    """lambda(m) = (r.m)^2 / ||m||^2; undefined for all-zero m."""
    r = np.asarray(r, dtype=float)
    m = np.asarray(m, dtype=float)
    mm = float(np.dot(m, m))
    if mm == 0.0:
        raise ZeroDivisionError("GLRT metric undefined for all-zero symbol vector")
    rm = float(np.dot(r, m))
    return rm * rm / mm


def estimate_gain(r, m, d: float) -> float:
    """Implicit ML gain estimate h_hat = (r.m) / (2d ||m||^2)."""
    r = np.asarray(r, dtype=float)
    m = np.asarray(m, dtype=float)
    mm = float(np.dot(m, m))
    if mm == 0.0 or d <= 0:
        raise ZeroDivisionError("gain estimate undefined: zero ||m||^2 or d")
    return float(np.dot(r, m)) / (2.0 * d * mm)


def pcsi_detect(r, h: float, d: float, m_order: int):
    """Per-sample ML detection with perfect CSI: nearest level, ties toward
    the smaller symbol, clamped to [0, M-1]."""
    if h <= 0 or d <= 0:
        raise ValueError("pcsi_detect requires h > 0 and d > 0")
    x = np.asarray(r, dtype=float) / (2.0 * d * h)
    lev = np.ceil(x - 0.5).astype(int)
    out = np.clip(lev, 0, m_order - 1)
    return out if out.ndim else int(out)


def exhaustive_glrt(r, m_order: int, prefix_symbols=None, prefix_samples=None):
    """Brute-force GLRT over all M^L subsequences (all-zero excluded).

    An optional known prefix (e.g. pilots) is held fixed and contributes to
    every candidate's metric.  Ties break toward the lexicographically
    smallest sequence.  Refuses L with M^L > 4096.
    """
    r = np.asarray(r, dtype=float)
    n = r.size
    if m_order**n > 4096:
        raise ValueError(f"exhaustive search refused: M^L = {m_order}**{n} too large")
    if prefix_symbols is not None:
        pm = np.asarray(prefix_symbols, dtype=float)
        pr = np.asarray(prefix_samples, dtype=float)
        base_rm = float(np.dot(pr, pm))
        base_mm = float(np.dot(pm, pm))
    else:
        base_rm = base_mm = 0.0

    grids = np.meshgrid(*([np.arange(m_order)] * n), indexing="ij")
    cands = np.stack([g.ravel() for g in grids], axis=1)  # lexicographic order
    mm = base_mm + np.einsum("ij,ij->i", cands, cands).astype(float)
    rm = base_rm + cands.dot(r)
    valid = mm > 0
    metric = np.where(valid, rm * rm / np.where(valid, mm, 1.0), -np.inf)
    if not np.any(valid):
        raise ZeroDivisionError("no candidate with nonzero energy")
    best = int(np.argmax(metric))  # argmax returns the first (lex-smallest) maximizer
    return cands[best].copy()


# ---------------------------------------------------------------------------
# Trellis search with selective store
# ---------------------------------------------------------------------------


class StoreWindow:
    """Committed (nonzero symbol, sample) pairs with running metric sums.

    Holds at most `capacity` entries; filling is gradual (pilots plus all
    committed nonzero symbols until full), then oldest entries are evicted.
    """

    __slots__ = ("capacity", "entries", "sum_rm", "sum_mm")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("window capacity must be >= 1")
        self.capacity = capacity
        self.entries: deque = deque()
        self.sum_rm = 0.0
        self.sum_mm = 0.0

    def push(self, symbol: int, sample: float) -> None:
        """Store a nonzero committed symbol, evicting beyond capacity."""
        if symbol == 0:
            return
        self.entries.append((symbol, sample))
        self.sum_rm += sample * symbol
        self.sum_mm += symbol * symbol
        if len(self.entries) > self.capacity:
            old_m, old_r = self.entries.popleft()
            self.sum_rm -= old_r * old_m
            self.sum_mm -= old_m * old_m

    def recompute(self):
        rm = sum(r * m for m, r in self.entries)
        mm = sum(m * m for m, r in self.entries)
        return rm, mm


@dataclass
class Survivor:
    """Best path into one trellis node: ongoing symbols since the last commit."""

    node: int
    ongoing: list = field(default_factory=list)  # [(symbol, sample), ...]
    sum_rm: float = 0.0
    sum_mm: float = 0.0
    metric: float = 0.0


class TrellisDetector:
    """Viterbi-type GLRT-MLSD over the M-PAM trellis.

    Feed received samples one at a time with step(); decided symbols come
    back as merges occur.  finalize() flushes the best survivor at frame
    end.  Diagnostics: branch_evals, forced_decisions, neg_hhat_events,
    and the running mean ongoing length.
    """

    def __init__(self, scheme: PamScheme, window_len: int, l_max: int = 20):
        if l_max < 1:
            raise ValueError("l_max must be >= 1")
        self.scheme = scheme
        self.m_order = scheme.m_order
        self.l_max = l_max
        self.window = StoreWindow(window_len)
        self.survivors = [Survivor(node=j) for j in range(self.m_order)]
        self.decided: list = []
        self.branch_evals = 0
        self.steps = 0
        self.forced_decisions = 0
        self.neg_hhat_events = 0
        self._ongoing_len_sum = 0

    # -- initialization ----------------------------------------------------

    def load_pilots(self, symbols, samples) -> None:
        """Load known (pilot) symbols straight into the store window."""
        symbols = np.asarray(symbols, dtype=int)
        samples = np.asarray(samples, dtype=float)
        if symbols.size < 1:
            raise ValueError("at least one pilot symbol is required")
        if np.all(symbols == 0):
            raise ValueError("pilots must contain a nonzero symbol")
        for m, r in zip(symbols, samples):
            self.window.push(int(m), float(r))

    # -- online operation --------------------------------------------------

    def step(self, r_k: float) -> list:
        """Advance one symbol interval; return symbols decided this step."""
        if self.window.sum_mm <= 0.0 and all(s.sum_mm == 0.0 for s in self.survivors):
            raise ZeroDivisionError("detector not initialized: call load_pilots first")
        w_rm = self.window.sum_rm
        w_mm = self.window.sum_mm
        old = self.survivors
        new = []
        best_overall = -1.0
        best_overall_rm = 0.0
        for j in range(self.m_order):
            jj = float(j * j)
            jr = r_k * j
            best_i = -1
            best_metric = -1.0
            for i, surv in enumerate(old):
                rm = w_rm + surv.sum_rm + jr
                mm = w_mm + surv.sum_mm + jj
                metric = rm * rm / mm
                if metric > best_metric:
                    best_metric = metric
                    best_i = i
            self.branch_evals += self.m_order
            pred = old[best_i]
            surv = Survivor(
                node=j,
                ongoing=pred.ongoing + [(j, r_k)],
                sum_rm=pred.sum_rm + jr,
                sum_mm=pred.sum_mm + jj,
                metric=best_metric,
            )
            new.append(surv)
            if best_metric > best_overall:
                best_overall = best_metric
                best_overall_rm = w_rm + surv.sum_rm
        self.survivors = new
        self.steps += 1
        if best_overall_rm < 0.0:
            self.neg_hhat_events += 1

        out = self._commit_merged()
        if len(self.survivors[0].ongoing) > self.l_max:
            out += self._force_decision()
        self._ongoing_len_sum += max(len(s.ongoing) for s in self.survivors)
        return out

    def finalize(self) -> list:
        """Flush remaining ongoing symbols from the best-metric survivor."""
        best = max(self.survivors, key=lambda s: s.metric)
        out = [m for m, _ in best.ongoing]
        self._commit_pairs(best.ongoing)
        self.decided.extend(out)
        self.survivors = [Survivor(node=j) for j in range(self.m_order)]
        return out

    # -- internals ---------------------------------------------------------

    def _commit_merged(self) -> list:
        """Commit the ongoing prefix shared by all survivors, if any."""
        first = self.survivors[0].ongoing
        depth = 0
        for k in range(len(first)):
            pair = first[k]
            if all(s.ongoing[k] == pair for s in self.survivors[1:]):
                depth = k + 1
            else:
                break
        if depth == 0:
            return []
        prefix = first[:depth]
        self._commit_pairs(prefix)
        for s in self.survivors:
            s.ongoing = s.ongoing[depth:]
            for m, r in prefix:
                s.sum_rm -= r * m
                s.sum_mm -= m * m
        out = [m for m, _ in prefix]
        self.decided.extend(out)
        return out

    def _force_decision(self) -> list:
        """Ongoing overflow: commit the best survivor wholesale and re-root."""
        self.forced_decisions += 1
        best = max(self.survivors, key=lambda s: s.metric)
        out = [m for m, _ in best.ongoing]
        self._commit_pairs(best.ongoing)
        self.decided.extend(out)
        self.survivors = [Survivor(node=j) for j in range(self.m_order)]
        return out

    def _commit_pairs(self, pairs) -> None:
        for m, r in pairs:
            self.window.push(m, r)

    # -- diagnostics -------------------------------------------------------

    @property
    def mean_ongoing_len(self) -> float:
        return self._ongoing_len_sum / self.steps if self.steps else 0.0

    def window_gain_estimate(self) -> float:
        """h_hat from the stored window alone."""
        if self.window.sum_mm <= 0:
            raise ZeroDivisionError("empty store window")
        return self.window.sum_rm / (2.0 * self.scheme.d * self.window.sum_mm)


def init_pilots(
    detector: TrellisDetector,
    scheme: PamScheme,
    h: float,
    rng: np.random.Generator,
    n_pilots: int,
) -> np.ndarray:
    """Transmit n_pilots max-level symbols through gain h and load them.

    Returns the received pilot samples.  Max-level pilots maximize the SNR
    of the implicit gain estimate.
    """
    if n_pilots < 1:
        raise ValueError("at least one pilot is required (cold start is ambiguous)")
    pilots = np.full(n_pilots, scheme.m_order - 1, dtype=int)
    samples = transmit(pilots, h, scheme, rng)
    detector.load_pilots(pilots, samples)
    return samples
