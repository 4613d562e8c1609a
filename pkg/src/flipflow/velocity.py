"""The velocity operator: expected instantaneous drift of a flip process.

Applied to a step graphon W, the operator returns the step kernel whose
(i, j) entry sums, over ordered root pairs (a, b) and drawn patterns F,
the signed pair coefficient of the rule times the rooted induced density
of F with roots pinned to parts i and j.  Equivalently (and this is what
the Monte Carlo estimator samples), each root pair contributes the
probability that the replacement keeps/creates the root edge minus the
current value W(i, j).

On constant graphons the velocity collapses to a polynomial in the
density whose Bernstein coefficients come from the rule's expected
edge-change sequence; that polynomial is an independent code path used
to cross-check the operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import GuardExceededError
from .graphs import pair_list, pair_position
from .rules import Rule, deltas, pair_coefficients
from .stepfun import StepGraphon, StepKernel
from .streams import substream

VELOCITY_GUARD = 10**9  # per-cell bound on m**(k-2) * |H_k| * k**2
_CHUNK_ELEMS = 1 << 23  # cap on rows * 2**npairs per vectorized chunk


def _ordered_pairs(k: int):
    return [(a, b) for a in range(k) for b in range(k) if a != b]


def _ordered_coeff_matrix(rule: Rule) -> np.ndarray:
    """Pair coefficients replicated over ordered root pairs: (|H_k|, (k)_2)."""
    cached = getattr(rule, "_ordered_coeffs", None)
    if cached is not None:
        return cached
    unordered = pair_coefficients(rule)
    cols = [
        unordered[:, pair_position(rule.k, a, b)]
        for a, b in _ordered_pairs(rule.k)
    ]
    out = np.column_stack(cols)
    out.flags.writeable = False
    rule._ordered_coeffs = out
    return out


def _check_velocity_guard(rule: Rule, m: int) -> None:
    k = rule.k
    cost = m ** max(k - 2, 0) * rule.num_graphs * k * k
    if cost > VELOCITY_GUARD:
        raise GuardExceededError(
            f"velocity enumeration cost {cost:.2e} per cell exceeds {VELOCITY_GUARD:.0e} "
            f"(k={k}, m={m}); coarsen the graphon"
        )


def _pattern_weighted_coeffs(edge_probs: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    """sum_F P(F | assignment) * coeff[F] for a chunk of assignments.

    edge_probs has shape (rows, npairs); coeff has shape (2**npairs, T).
    Graphs F with all-zero coefficient rows cost nothing: when the
    nonzero support is small the sum runs over it directly, otherwise the
    full distribution over patterns is built by a doubling cascade.
    """
    rows, npairs = edge_probs.shape
    ngraphs = coeff.shape[0]
    nonzero = np.flatnonzero(np.any(coeff != 0.0, axis=1))
    direct_cost = len(nonzero) * (npairs + coeff.shape[1])
    cascade_cost = ngraphs * (2 + coeff.shape[1])
    if direct_cost <= cascade_cost:
        out = np.zeros((rows, coeff.shape[1]))
        for f in nonzero:
            prob = np.ones(rows)
            for p in range(npairs):
                col = edge_probs[:, p]
                prob = prob * (col if f >> p & 1 else 1.0 - col)
            out += prob[:, None] * coeff[f]
        return out
    dist = np.ones((rows, 1))
    for p in range(npairs):
        col = edge_probs[:, p : p + 1]
        dist = np.concatenate((dist * (1.0 - col), dist * col), axis=1)
    return dist @ coeff


def velocity(rule: Rule, w: StepGraphon) -> StepKernel:
    """Exact velocity kernel of `rule` at the step graphon `w`.

    Enumerates all part assignments of the k pattern vertices once,
    accumulating every ordered root pair into its block; the result is
    computed per unordered cell and mirrored.
    """
    k, m = rule.k, w.m
    _check_velocity_guard(rule, m)
    coeff = _ordered_coeff_matrix(rule)
    pairs = pair_list(k)
    opairs = _ordered_pairs(k)
    d = w.values
    masses = w.masses

    numer = np.zeros((m, m))
    total = m**k
    powers = m ** np.arange(k - 1, -1, -1, dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMS // rule.num_graphs)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        assign = (idx[:, None] // powers) % m
        weight = np.prod(masses[assign], axis=1)
        edge_probs = np.empty((len(idx), len(pairs)))
        for p, (u, v) in enumerate(pairs):
            edge_probs[:, p] = d[assign[:, u], assign[:, v]]
        scores = _pattern_weighted_coeffs(edge_probs, coeff)
        for t, (a, b) in enumerate(opairs):
            cell = assign[:, a] * m + assign[:, b]
            numer += np.bincount(
                cell, weights=weight * scores[:, t], minlength=m * m
            ).reshape(m, m)
    values = numer / np.outer(masses, masses)
    # mirror the upper triangle; the two orientations are analytically equal
    out = np.triu(values) + np.triu(values, 1).T
    return StepKernel(masses, out)


@dataclass
class MonteCarloVelocity:
    estimate: float
    stderr: float
    samples: int


def velocity_monte_carlo(
    rule: Rule, w: StepGraphon, parts, samples: int, seed: int
) -> MonteCarloVelocity:
    """Monte Carlo estimate of the velocity at one block of `w`.

    For each ordered root pair, draws the remaining part labels from the
    mass distribution, the pattern edge-by-edge conditioned on the roots,
    and the replacement from the rule row.  Each draw accumulates the
    root-pair indicator of the replacement minus that of the drawn
    pattern; since the drawn indicator has conditional mean equal to the
    block value, this estimates replacement probability minus block value
    with the drawn pattern acting as a control variate (idle draws
    contribute exactly zero).  Streams are keyed by (seed, parts, pair).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    k, m = rule.k, w.m
    i, j = parts
    pairs = pair_list(k)
    npairs = len(pairs)
    support_pad, cdf_pad = _padded_rows(rule)
    bit_weights = 1 << np.arange(npairs, dtype=np.int64)
    d = w.values

    per_sample = np.zeros(samples)
    for a, b in _ordered_pairs(k):
        rng = substream(seed, "mc-velocity", i, j, a, b)
        labels = np.empty((samples, k), dtype=np.int64)
        labels[:, a] = i
        labels[:, b] = j
        free = [v for v in range(k) if v != a and v != b]
        if free:
            labels[:, free] = rng.choice(m, size=(samples, len(free)), p=w.masses)
        probs = np.empty((samples, npairs))
        for p, (u, v) in enumerate(pairs):
            probs[:, p] = d[labels[:, u], labels[:, v]]
        drawn = (rng.random((samples, npairs)) < probs) @ bit_weights
        u = rng.random(samples)
        pos = (u[:, None] > cdf_pad[drawn]).sum(axis=1)
        pos = np.minimum(pos, support_pad.shape[1] - 1)
        replacement = support_pad[drawn, pos]
        root_bit = pair_position(k, a, b)
        per_sample += (replacement >> root_bit & 1) - (drawn >> root_bit & 1)
    estimate = float(per_sample.mean())
    stderr = float(per_sample.std(ddof=1) / np.sqrt(samples)) if samples > 1 else np.inf
    return MonteCarloVelocity(estimate, stderr, samples)


def _padded_rows(rule: Rule):
    """Row supports and CDFs padded to a rectangle for vectorized sampling."""
    if getattr(rule, "_padded_rows", None) is not None:
        return rule._padded_rows
    width = max(len(row) for row in rule.rows)
    support = np.zeros((rule.num_graphs, width), dtype=np.int64)
    cdf = np.ones((rule.num_graphs, width + 1))
    for f in range(rule.num_graphs):
        sup, c = rule.row_cdf(f)
        support[f, : len(sup)] = sup
        support[f, len(sup) :] = sup[-1]
        cdf[f, : len(c)] = c
        cdf[f, len(c) :] = 2.0  # sentinel beyond any uniform variate
        cdf[f, width] = 2.0
    # searchsorted emulation uses strict >, so drop the final sentinel column
    rule._padded_rows = (support, cdf[:, :width])
    return rule._padded_rows


# ---------------------------------------------------------------------------
# Constant-graphon velocity polynomial


@dataclass
class VelocityPoly:
    """Velocity restricted to constant graphons, as a polynomial.

    `bernstein[ell]` is the control value 2 * delta_ell of the basis
    function C(P, ell) d**ell (1-d)**(P-ell); `monomial[j]` is the
    coefficient of d**j in the expanded form.
    """

    degree: int
    bernstein: np.ndarray
    monomial: np.ndarray

    def __call__(self, d: float) -> float:
        return eval_poly(self, d)


def velocity_poly(rule: Rule) -> VelocityPoly:
    npairs = comb(rule.k, 2)
    control = 2.0 * deltas(rule)
    monomial = np.zeros(npairs + 1)
    # expand sum_ell control_ell C(P,ell) d^ell (1-d)^(P-ell)
    for ell in range(npairs + 1):
        if control[ell] == 0.0:
            continue
        binom = comb(npairs, ell)
        for r in range(npairs - ell + 1):
            monomial[ell + r] += control[ell] * binom * comb(npairs - ell, r) * (-1) ** r
    return VelocityPoly(npairs, control, monomial)


def eval_poly(poly: VelocityPoly, d: float) -> float:
    """Evaluate in Bernstein form by de Casteljau (stable on [0, 1])."""
    b = poly.bernstein.astype(float).copy()
    for r in range(1, len(b)):
        b[: len(b) - r] = (1.0 - d) * b[: len(b) - r] + d * b[1 : len(b) - r + 1]
    return float(b[0])
