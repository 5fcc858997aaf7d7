"""BS decoding under the superposition receiver.

Copies of the same message relayed by several APs combine constructively at
the BS; only distinct-message interference destroys.  Evaluation keeps the
per-slot message-index bookkeeping explicit: conditioned on the per-slot
transmission counts, the vector of per-message AP copy counts is multinomial
over (silent, one cell per CS message, one cell per NCS message).

Two estimators for the inner expectation over AP allocations:

* ``ExactEnum`` -- exact expectation.  Message cells within a class are
  exchangeable, so the expectation marginalizes onto (copies of a
  distinguished message, other same-class copies, other-class copies),
  which equals exhaustive enumeration of the multinomial outcomes at
  polynomial cost (the equality is pinned by a test against the literal
  enumerator below).  The enumeration feasibility budget
  C(L + cells - 1, cells - 1) <= limit is still enforced; exceeding it
  raises ``CapacityError`` rather than silently degrading.
* ``ConditionedMC`` -- samples allocations per (n_c, n_cbar) pair from
  dedicated substreams of the master seed and reports standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import (
    TAIL_MASS_DEFAULT,
    Receiver,
    ScenarioConfig,
    ServiceMetrics,
    SimEstimate,
    SimulatedMetrics,
    Tdma,
    Tolerance,
    gamma_k_tolerance,
    gamma_k_tolerance_array,
    multinomial_sample,
    normalized_poisson_weights,
    poisson_weights,
)
from .analytic_erasure import p_access_cs, p_access_ncs


class CapacityError(RuntimeError):
    """Allocation-enumeration budget exceeded; choose the MC estimator."""


# ============================================================================
#  Allocation bookkeeping
# ============================================================================


@dataclass(frozen=True)
class ApAllocation:
    """Per-slot message-copy counts at the APs.

    ``m_counts[0]`` counts silent APs; entries 1..n_c hold CS messages and
    the remaining entries NCS messages.  Entries sum to the number of APs.
    """

    m_counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.m_counts) < 1 or any(m < 0 for m in self.m_counts):
            raise ValueError("m_counts must be non-empty and non-negative")

    @property
    def n_aps(self) -> int:
        return sum(self.m_counts)


def ap_allocation_probs(n_c: int, n_cbar: int, eps1: float) -> np.ndarray:
    """Multinomial cell probabilities (silent, CS cells, NCS cells).

    Classes with zero transmissions contribute no cells; the vector always
    sums to one.
    """
    if n_c < 0 or n_cbar < 0:
        raise ValueError("transmission counts must be >= 0")
    p_c = p_access_cs(n_c, eps1)
    p_n = p_access_ncs(n_c, n_cbar, eps1)
    probs = [1.0 - p_c - p_n]
    if n_c > 0:
        probs.extend([p_c / n_c] * n_c)
    if n_cbar > 0:
        probs.extend([p_n / n_cbar] * n_cbar)
    return np.array(probs)


def _budgeted_cs_access(n_c: int, n_cbar: int, eps1: float, k: Tolerance) -> float:
    """AP-level CS decode probability including the tolerance budget.

    The three-state AP rule is receiver-independent: a CS decode needs
    exactly one unerased CS arrival *and* at most k unerased NCS arrivals.
    The budget factor is 1 whenever n_cbar <= k, so it only bites under
    heavy NCS traffic with finite k.
    """
    return p_access_cs(n_c, eps1) * gamma_k_tolerance(n_cbar, eps1, k)


def _check_alloc(alloc: ApAllocation, n_c: int, n_cbar: int) -> None:
    if len(alloc.m_counts) != 1 + n_c + n_cbar:
        raise ValueError(
            f"allocation has {len(alloc.m_counts)} cells, expected "
            f"{1 + n_c + n_cbar} for n_c={n_c}, n_cbar={n_cbar}"
        )


def bs_decode_prob_cs(
    alloc: ApAllocation, n_c: int, n_cbar: int, eps2: float, k: Tolerance
) -> float:
    """P(BS retrieves a CS message | AP allocation).

    Some CS message must get at least one copy through unerased, every copy
    of every other CS message must be erased, and at most ``k`` NCS copies
    (counted individually across APs) may survive.
    """
    _check_alloc(alloc, n_c, n_cbar)
    m = alloc.m_counts
    s_cs = sum(m[1 : 1 + n_c])
    s_ncs = sum(m[1 + n_c :])
    budget = gamma_k_tolerance(s_ncs, eps2, k)
    total = 0.0
    for copies in m[1 : 1 + n_c]:
        total += (1.0 - eps2**copies) * eps2 ** (s_cs - copies)
    return budget * total


def bs_decode_prob_ncs(alloc: ApAllocation, n_c: int, n_cbar: int, eps2: float) -> float:
    """P(BS retrieves a NCS message | AP allocation).

    Requires every CS copy and every copy of any other NCS message erased.
    """
    _check_alloc(alloc, n_c, n_cbar)
    m = alloc.m_counts
    s_cs = sum(m[1 : 1 + n_c])
    s_ncs = sum(m[1 + n_c :])
    total = 0.0
    for copies in m[1 + n_c :]:
        total += (1.0 - eps2**copies) * eps2 ** (s_ncs - copies)
    return eps2**s_cs * total


def _bs_decode_prob_cs_tagged(alloc, n_c, n_cbar, eps2, k) -> float:
    """Same CS event restricted to the first CS message (PSR conditioning)."""
    _check_alloc(alloc, n_c, n_cbar)
    if n_c < 1:
        raise ValueError("tagged CS decode needs n_c >= 1")
    m = alloc.m_counts
    s_cs = sum(m[1 : 1 + n_c])
    s_ncs = sum(m[1 + n_c :])
    return (
        gamma_k_tolerance(s_ncs, eps2, k)
        * (1.0 - eps2 ** m[1])
        * eps2 ** (s_cs - m[1])
    )


def _bs_decode_prob_ncs_tagged(alloc, n_c, n_cbar, eps2) -> float:
    """Decode probability of the first NCS message (PSR conditioning)."""
    _check_alloc(alloc, n_c, n_cbar)
    if n_cbar < 1:
        raise ValueError("tagged NCS decode needs n_cbar >= 1")
    m = alloc.m_counts
    s_cs = sum(m[1 : 1 + n_c])
    s_ncs = sum(m[1 + n_c :])
    tagged = m[1 + n_c]
    return eps2**s_cs * (1.0 - eps2**tagged) * eps2 ** (s_ncs - tagged)


def enumerate_allocations(n_aps: int, n_cells: int):
    """Yield (composition, multinomial coefficient) over all allocations.

    Exhaustive stars-and-bars enumeration; the probability weight of a
    composition under cell probabilities p is coef * prod(p**counts).
    Used as the literal oracle for the marginalized exact computation.
    """
    for bars in combinations(range(n_aps + n_cells - 1), n_cells - 1):
        counts = []
        prev = -1
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(n_aps + n_cells - 2 - prev)
        coef = math.factorial(n_aps)
        for c in counts:
            coef //= math.factorial(c)
        yield tuple(counts), coef


# ============================================================================
#  Estimator declarations
# ============================================================================


@dataclass(frozen=True)
class ExactEnum:
    """Exact inner expectation, with an enumeration feasibility budget."""

    limit: int = 200_000


@dataclass(frozen=True)
class ConditionedMC:
    """Monte Carlo over allocations, conditioned per (n_c, n_cbar) pair."""

    n_alloc_samples: int = 1000
    seed: int = 0


def _allocation_probs_budgeted(n_c, n_cbar, eps1, k) -> np.ndarray:
    """Allocation cell probabilities with the AP-level tolerance applied."""
    p_c = _budgeted_cs_access(n_c, n_cbar, eps1, k)
    p_n = p_access_ncs(n_c, n_cbar, eps1)
    probs = [1.0 - p_c - p_n]
    if n_c > 0:
        probs.extend([p_c / n_c] * n_c)
    if n_cbar > 0:
        probs.extend([p_n / n_cbar] * n_cbar)
    return np.array(probs)


def _check_budget(L: int, n_c: int, n_cbar: int, limit: int) -> None:
    cells = 1 + n_c + n_cbar
    size = math.comb(L + cells - 1, cells - 1)
    if size > limit:
        raise CapacityError(
            f"allocation enumeration needs {size} outcomes for "
            f"(n_c={n_c}, n_cbar={n_cbar}, L={L}), over the limit {limit}; "
            "use the ConditionedMC estimator"
        )


# ============================================================================
#  Exact inner expectations (marginalized over exchangeable cells)
# ============================================================================


def _class_pair_pmf(L: int, p_a: float, p_b: float) -> np.ndarray:
    """Joint pmf of (#APs holding class A, #APs holding class B)."""
    rest = max(1.0 - p_a - p_b, 0.0)
    out = np.zeros((L + 1, L + 1))
    for a in range(L + 1):
        for b in range(L + 1 - a):
            out[a, b] = (
                math.comb(L, a)
                * math.comb(L - a, b)
                * p_a**a
                * p_b**b
                * rest ** (L - a - b)
            )
    return out


def _combine_kernel(L: int, n_msgs: int, eps2: float) -> np.ndarray:
    """kernel[a] = E[sum over class messages of (1 - e2**M_m) e2**(a - M_m)]
    when a copies of the class split uniformly over n_msgs messages."""
    out = np.zeros(L + 1)
    if n_msgs == 0:
        return out
    p1 = 1.0 / n_msgs
    for a in range(L + 1):
        acc = 0.0
        for j in range(1, a + 1):
            acc += (
                math.comb(a, j)
                * p1**j
                * (1.0 - p1) ** (a - j)
                * (1.0 - eps2**j)
                * eps2 ** (a - j)
            )
        out[a] = n_msgs * acc
    return out


def _exact_inner_throughput(L, n_c, n_n, e1, e2, k):
    """(E[CS decode], E[NCS decode]) over allocations at fixed slot counts."""
    p_c = _budgeted_cs_access(n_c, n_n, e1, k)
    p_n = p_access_ncs(n_c, n_n, e1)
    pair = _class_pair_pmf(L, p_c, p_n)  # indices [CS copies, NCS copies]
    b_idx = np.arange(L + 1)
    budget = gamma_k_tolerance_array(b_idx, e2, k)
    e2_pow = e2 ** b_idx.astype(float)
    q_cs = float(_combine_kernel(L, n_c, e2) @ pair @ budget)
    q_ncs = float(e2_pow @ pair @ _combine_kernel(L, n_n, e2))
    return q_cs, q_ncs


def _exact_inner_psr(L, n_tag, n_other, e1, e2, k, tagged_cs: bool):
    """E[tagged-message decode probability] over allocations.

    ``n_tag`` is the tagged class count (>= 1), ``n_other`` the other class.
    The allocation collapses to four exchangeability classes: tagged copies
    j, other same-class copies ao, other-class copies b, silence.
    """
    if tagged_cs:
        p_tagcls = _budgeted_cs_access(n_tag, n_other, e1, k)
        p_other = p_access_ncs(n_tag, n_other, e1)
    else:
        p_tagcls = p_access_ncs(n_other, n_tag, e1)
        p_other = _budgeted_cs_access(n_other, n_tag, e1, k)
    t = p_tagcls / n_tag
    o = p_tagcls - t
    rest = max(1.0 - p_tagcls - p_other, 0.0)
    total = 0.0
    for j in range(1, L + 1):
        w_j = math.comb(L, j) * t**j * (1.0 - e2**j)
        for ao in range(L - j + 1):
            w_jo = w_j * math.comb(L - j, ao) * o**ao * e2**ao
            for b in range(L - j - ao + 1):
                w = (
                    w_jo
                    * math.comb(L - j - ao, b)
                    * p_other**b
                    * rest ** (L - j - ao - b)
                )
                if tagged_cs:
                    total += w * gamma_k_tolerance(b, e2, k)
                else:
                    total += w * e2**b
    return total


# ============================================================================
#  MC inner expectations
# ============================================================================


def _mc_throughput_values(draws: np.ndarray, n_c: int, e2: float, k):
    """Vectorized (CS, NCS) decode probabilities for sampled allocations."""
    cs = draws[:, 1 : 1 + n_c]
    ncs = draws[:, 1 + n_c :]
    s_cs = cs.sum(axis=1)
    s_ncs = ncs.sum(axis=1)
    budget = gamma_k_tolerance_array(s_ncs, e2, k)
    q_cs = budget * ((1.0 - e2**cs) * e2 ** (s_cs[:, None] - cs)).sum(axis=1)
    q_ncs = (e2 ** s_cs.astype(float)) * (
        (1.0 - e2**ncs) * e2 ** (s_ncs[:, None] - ncs)
    ).sum(axis=1)
    return q_cs, q_ncs


def _mc_tagged_values(draws: np.ndarray, n_c: int, e2: float, k, tagged_cs: bool):
    cs = draws[:, 1 : 1 + n_c]
    ncs = draws[:, 1 + n_c :]
    s_cs = cs.sum(axis=1)
    s_ncs = ncs.sum(axis=1)
    if tagged_cs:
        m1 = draws[:, 1]
        budget = gamma_k_tolerance_array(s_ncs, e2, k)
        return budget * (1.0 - e2**m1) * e2 ** (s_cs - m1)
    m1 = draws[:, 1 + n_c]
    return (e2 ** s_cs.astype(float)) * (1.0 - e2**m1) * e2 ** (s_ncs - m1)


class _McAccumulator:
    """Weighted mean and propagated standard error over (n_c, n_cbar) pairs."""

    def __init__(self):
        self.mean = 0.0
        self.var = 0.0
        self.n = 0

    def add(self, weight: float, values: np.ndarray):
        self.mean += weight * float(values.mean())
        if values.size > 1:
            self.var += weight**2 * float(values.var(ddof=1)) / values.size
        self.n += values.size

    def estimate(self, seed: int) -> SimEstimate:
        return SimEstimate(
            mean=self.mean, std_error=math.sqrt(self.var), n_samples=self.n, seed=seed
        )


def _pair_rng(seed: int, purpose: int, n_c: int, n_n: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(purpose, n_c, n_n))
    )


# ============================================================================
#  Scenario evaluation
# ============================================================================


def _metric_grid(L, e1, e2, g_c, g_n, k, estimator, tail_mass):
    """All four metrics for one non-orthogonal parameter set."""
    nc, wc = poisson_weights(g_c, tail_mass)
    nn, wn = poisson_weights(g_n, tail_mass)
    exact = isinstance(estimator, ExactEnum)
    if exact:
        r_c = r_n = 0.0
    else:
        acc_rc, acc_rn = _McAccumulator(), _McAccumulator()
    for i, n_cs in enumerate(nc):
        for j, n_ncs in enumerate(nn):
            n_cs_i, n_ncs_i = int(n_cs), int(n_ncs)
            w = float(wc[i] * wn[j])
            if exact:
                _check_budget(L, n_cs_i, n_ncs_i, estimator.limit)
                q_cs, q_ncs = _exact_inner_throughput(L, n_cs_i, n_ncs_i, e1, e2, k)
                r_c += w * q_cs
                r_n += w * q_ncs
            else:
                rng = _pair_rng(estimator.seed, 0, n_cs_i, n_ncs_i)
                probs = _allocation_probs_budgeted(n_cs_i, n_ncs_i, e1, k)
                draws = multinomial_sample(
                    rng, L, probs, size=estimator.n_alloc_samples
                )
                q_cs, q_ncs = _mc_throughput_values(draws, n_cs_i, e2, k)
                acc_rc.add(w, q_cs)
                acc_rn.add(w, q_ncs)

    def psr(tagged_cs: bool):
        g_tag, g_oth = (g_c, g_n) if tagged_cs else (g_n, g_c)
        if g_tag <= 0:
            return 0.0 if exact else SimEstimate(0.0, 0.0, 0, estimator.seed)
        ntag, wtag = normalized_poisson_weights(g_tag, tail_mass)
        noth, woth = poisson_weights(g_oth, tail_mass)
        if exact:
            total = 0.0
        else:
            acc = _McAccumulator()
        for i, n_t in enumerate(ntag):
            for j, n_o in enumerate(noth):
                n_t_i, n_o_i = int(n_t), int(n_o)
                w = float(wtag[i] * woth[j])
                n_cs_i = n_t_i if tagged_cs else n_o_i
                n_ncs_i = n_o_i if tagged_cs else n_t_i
                if exact:
                    _check_budget(L, n_cs_i, n_ncs_i, estimator.limit)
                    total += w * _exact_inner_psr(
                        L, n_t_i, n_o_i, e1, e2, k, tagged_cs
                    )
                else:
                    rng = _pair_rng(
                        estimator.seed, 1 if tagged_cs else 2, n_cs_i, n_ncs_i
                    )
                    probs = _allocation_probs_budgeted(n_cs_i, n_ncs_i, e1, k)
                    draws = multinomial_sample(
                        rng, L, probs, size=estimator.n_alloc_samples
                    )
                    acc.add(w, _mc_tagged_values(draws, n_cs_i, e2, k, tagged_cs))
        return total if exact else acc.estimate(estimator.seed)

    p_c = psr(tagged_cs=True)
    p_n = psr(tagged_cs=False)
    if exact:
        return ServiceMetrics(R_c=r_c, R_cbar=r_n, Gamma_c=p_c, Gamma_cbar=p_n)
    return SimulatedMetrics(
        R_c=acc_rc.estimate(estimator.seed),
        R_cbar=acc_rn.estimate(estimator.seed),
        Gamma_c=p_c,
        Gamma_cbar=p_n,
    )


def evaluate_superposition(
    cfg: ScenarioConfig,
    estimator: ExactEnum | ConditionedMC = ExactEnum(),
    tail_mass: float = TAIL_MASS_DEFAULT,
):
    """Class metrics for a superposition-receiver erasure scenario.

    Returns ``ServiceMetrics`` under ``ExactEnum`` and ``SimulatedMetrics``
    (with standard errors) under ``ConditionedMC``.  TDMA is evaluated per
    class over its slot share with the other class silenced, with class
    throughput scaled by the share.
    """
    e = cfg.erasure
    if cfg.receiver != Receiver.SUPERPOSITION:
        raise ValueError("evaluate_superposition requires the superposition receiver")
    if isinstance(cfg.allocation, Tdma):
        alpha = cfg.allocation.alpha
        zero = 0.0 if isinstance(estimator, ExactEnum) else SimEstimate(
            0.0, 0.0, 0, estimator.seed
        )
        g_cs = cfg.gamma_c * cfg.G / (alpha * cfg.T) if alpha > 0 else 0.0
        g_ncs = (
            (1.0 - cfg.gamma_c) * cfg.G / ((1.0 - alpha) * cfg.T)
            if alpha < 1
            else 0.0
        )
        m_cs = _metric_grid(cfg.L, e.eps1, e.eps2, g_cs, 0.0, cfg.K, estimator, tail_mass)
        m_ncs = _metric_grid(cfg.L, e.eps1, e.eps2, 0.0, g_ncs, cfg.K, estimator, tail_mass)
        if isinstance(estimator, ExactEnum):
            return ServiceMetrics(
                R_c=alpha * m_cs.R_c,
                R_cbar=(1.0 - alpha) * m_ncs.R_cbar,
                Gamma_c=m_cs.Gamma_c if g_cs > 0 else 0.0,
                Gamma_cbar=m_ncs.Gamma_cbar if g_ncs > 0 else 0.0,
            )
        scale = lambda est, s: SimEstimate(
            est.mean * s, est.std_error * s, est.n_samples, est.seed
        )
        return SimulatedMetrics(
            R_c=scale(m_cs.R_c, alpha),
            R_cbar=scale(m_ncs.R_cbar, 1.0 - alpha),
            Gamma_c=m_cs.Gamma_c if g_cs > 0 else zero,
            Gamma_cbar=m_ncs.Gamma_cbar if g_ncs > 0 else zero,
        )
    return _metric_grid(
        cfg.L, e.eps1, e.eps2, cfg.cs_slot_load, cfg.ncs_slot_load, cfg.K,
        estimator, tail_mass,
    )
