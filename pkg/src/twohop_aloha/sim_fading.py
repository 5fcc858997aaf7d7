"""Monte Carlo engine for the Rayleigh-fading two-hop model.

Per slot: Poisson traffic for both classes, i.i.d. circularly-symmetric
complex Gaussian access gains per (AP, message) and backhaul gains per AP.
Each AP attempts only the max-SINR message and decodes it when the SINR
clears the Shannon threshold 2**rate - 1 of that message's class; APs
holding the same message add coherently at the BS, which again attempts
only the max-SINR message.  Throughput counts BS decodes per class per
slot; the packet success rate conditions on at least one active device of
the class and tracks the class's first message.

Determinism mirrors ``sim_erasure``: fixed-size slot chunks with per-chunk
substreams and integer tallies, so results do not depend on worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    FadingParams,
    NonOrthogonal,
    ScenarioConfig,
    SimulatedMetrics,
    bernoulli_estimate,
)

_CHUNK_SLOTS = 16384


# ============================================================================
#  Per-slot decode primitives
# ============================================================================


def _message_powers(n_c: int, n_total: int, fading: FadingParams) -> np.ndarray:
    p = np.full(n_total, fading.P_cbar)
    p[:n_c] = fading.P_c
    return p


def _thresholds(n_c: int, n_total: int, fading: FadingParams) -> np.ndarray:
    t = np.full(n_total, 2.0**fading.r_cbar - 1.0)
    t[:n_c] = 2.0**fading.r_c - 1.0
    return t


def ap_decode(gains: np.ndarray, n_c: int, fading: FadingParams) -> np.ndarray:
    """Decoded message index per AP (0 = none) from access gains.

    ``gains`` has shape (..., L, M) with M = n_c + n_cbar messages, CS
    first.  Each AP considers only its max-SINR message (ties go to the
    lowest index, a probability-zero event under continuous fading) and
    decodes when SINR >= 2**rate - 1 for that message's class.
    """
    gains = np.asarray(gains)
    m_total = gains.shape[-1]
    if m_total == 0:
        return np.zeros(gains.shape[:-1], dtype=np.int64)
    power = _message_powers(n_c, m_total, fading)
    rx = np.abs(gains) ** 2 * power
    denom = 1.0 + rx.sum(axis=-1, keepdims=True) - rx
    sinr = rx / denom
    best = np.argmax(sinr, axis=-1)  # first occurrence wins ties
    best_sinr = np.take_along_axis(sinr, best[..., None], axis=-1)[..., 0]
    ok = best_sinr >= _thresholds(n_c, m_total, fading)[best]
    return np.where(ok, best + 1, 0)


def bs_decode(
    decoded: np.ndarray, g: np.ndarray, n_c: int, fading: FadingParams
) -> np.ndarray:
    """Decoded message index at the BS (0 = none).

    ``decoded`` holds the per-AP message indices from ``ap_decode`` (shape
    (L,), fixed across the batch); ``g`` the backhaul gains with shape
    (..., L).  APs relaying the same message combine coherently.
    """
    decoded = np.asarray(decoded)
    g = np.asarray(g)
    msgs = np.unique(decoded[decoded > 0])
    if msgs.size == 0:
        return np.zeros(g.shape[:-1], dtype=np.int64)
    masks = (decoded[None, :] == msgs[:, None]).astype(float)  # (n_msgs, L)
    coherent = g @ masks.T  # (..., n_msgs)
    p_ap = np.where(msgs <= n_c, fading.P_c_ap, fading.P_cbar_ap)
    rx = np.abs(coherent) ** 2 * p_ap
    denom = 1.0 + rx.sum(axis=-1, keepdims=True) - rx
    sinr = rx / denom
    best = np.argmax(sinr, axis=-1)  # msgs sorted ascending: ties -> lowest
    best_sinr = np.take_along_axis(sinr, best[..., None], axis=-1)[..., 0]
    thresholds = np.where(
        msgs <= n_c, 2.0**fading.r_c - 1.0, 2.0**fading.r_cbar - 1.0
    )
    ok = best_sinr >= thresholds[best]
    return np.where(ok, msgs[best], 0)


# ============================================================================
#  Slot-level engine
# ============================================================================


@dataclass(frozen=True)
class FadingSlot:
    """Fully materialized fading slot: gains, per-AP decodes, BS winner.

    ``decoded[l]`` is AP l's max-SINR decode (0 = none); ``winner`` is the
    BS's max-SINR decode over the coherently combined relays (0 = none).
    ``decoded_sets`` maps each relayed message to the APs holding it.
    """

    n_c: int
    n_cbar: int
    gains_access: np.ndarray  # (L, M) complex
    gains_backhaul: np.ndarray  # (L,) complex
    decoded: np.ndarray  # (L,) int
    winner: int

    @property
    def decoded_sets(self) -> dict:
        out: dict = {}
        for l, m in enumerate(self.decoded):
            if m > 0:
                out.setdefault(int(m), []).append(l)
        return out

    @classmethod
    def draw(cls, rng, n_c: int, n_cbar: int, L: int, fading: FadingParams):
        h = _complex_normal(rng, (L, n_c + n_cbar), fading.alpha2)
        g = _complex_normal(rng, (L,), fading.beta2)
        decoded = ap_decode(h, n_c, fading)
        winner = int(bs_decode(decoded, g, n_c, fading))
        return cls(
            n_c=n_c, n_cbar=n_cbar, gains_access=h, gains_backhaul=g,
            decoded=decoded, winner=winner,
        )


@dataclass(frozen=True)
class _FadingSpec:
    lam_c: float
    lam_n: float
    L: int
    fading: FadingParams
    seed: int


def _complex_normal(rng, shape, variance) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def _run_fading_chunk(spec: _FadingSpec, s_lo: int, s_hi: int, chunk_index: int) -> dict:
    S = s_hi - s_lo
    L = spec.L
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=spec.seed, spawn_key=(chunk_index,))
    )
    # Fixed draw order: counts, access gains, backhaul gains.
    n_c = rng.poisson(spec.lam_c, S).astype(np.int64)
    n_n = rng.poisson(spec.lam_n, S).astype(np.int64)
    n_tot = n_c + n_n
    h = _complex_normal(rng, (int(n_tot.sum()), L), spec.fading.alpha2)
    g = _complex_normal(rng, (S, L), spec.fading.beta2)

    starts = np.concatenate(([0], np.cumsum(n_tot)))
    tallies = {
        "cs_slots": 0,
        "ncs_slots": 0,
        "cs_tag_succ": 0,
        "cs_trials": 0,
        "ncs_tag_succ": 0,
        "ncs_trials": 0,
    }
    for s in range(S):
        nc, nn = int(n_c[s]), int(n_n[s])
        tallies["cs_trials"] += nc >= 1
        tallies["ncs_trials"] += nn >= 1
        if nc + nn == 0:
            continue
        slot_gains = h[starts[s] : starts[s + 1]].T  # (L, M), CS messages first
        decoded = ap_decode(slot_gains, nc, spec.fading)
        winner = int(bs_decode(decoded, g[s], nc, spec.fading))
        if winner == 0:
            continue
        if winner <= nc:
            tallies["cs_slots"] += 1
            tallies["cs_tag_succ"] += winner == 1
        else:
            tallies["ncs_slots"] += 1
            tallies["ncs_tag_succ"] += winner == nc + 1
    return tallies


def _run_fading_chunk_star(args):
    return _run_fading_chunk(*args)


def estimate_fading_metrics(
    cfg: ScenarioConfig, n_slots: int, seed: int, workers: int = 1
) -> SimulatedMetrics:
    """Throughput and PSR estimates for a fading scenario.

    PSR conditions on slots with at least one active device of the class
    and scores its first message, matching the analytic conditioning.
    """
    fading = cfg.fading
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    if not isinstance(cfg.allocation, NonOrthogonal):
        raise ValueError("fading simulation supports non-orthogonal allocation only")
    spec = _FadingSpec(
        lam_c=cfg.cs_slot_load,
        lam_n=cfg.ncs_slot_load,
        L=cfg.L,
        fading=fading,
        seed=seed,
    )
    tasks = [
        (spec, lo, min(lo + _CHUNK_SLOTS, n_slots), idx)
        for idx, lo in enumerate(range(0, n_slots, _CHUNK_SLOTS))
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_run_fading_chunk_star, tasks, chunksize=1))
    else:
        partials = [_run_fading_chunk(*t) for t in tasks]
    totals: dict = {}
    for part in partials:
        for key, value in part.items():
            totals[key] = totals.get(key, 0) + value
    return SimulatedMetrics(
        R_c=bernoulli_estimate(totals["cs_slots"], n_slots, seed),
        R_cbar=bernoulli_estimate(totals["ncs_slots"], n_slots, seed),
        Gamma_c=bernoulli_estimate(totals["cs_tag_succ"], totals["cs_trials"], seed),
        Gamma_cbar=bernoulli_estimate(totals["ncs_tag_succ"], totals["ncs_trials"], seed),
    )
