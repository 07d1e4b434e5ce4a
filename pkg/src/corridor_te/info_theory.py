"""Entropy and transfer-entropy primitives used by every other module.

Conventions:

* Discrete entropies are in **bits** (log base 2). The bound for a
  K-outcome distribution is log2(K), e.g. 1.585 bits for three actions.
* ``gaussian_differential_entropy`` is in **nats** (natural log), matching
  the usual closed form for a multivariate Gaussian. The two units are
  deliberately not mixed.
* Transfer entropy here is the policy-distribution form: the entropy of a
  policy that ignores the other agent minus the entropy of the policy that
  conditions on it. It can be negative.

All functions are pure and safe to call from multiple threads.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, TypeVar

_LN2 = math.log(2.0)

SourceT = TypeVar("SourceT")
ObsT = TypeVar("ObsT")


def softmax(values: Sequence[float]) -> tuple[float, ...]:
    """Softmax at temperature 1, stabilised by subtracting the max.

    Adding a constant to all inputs does not change the output; every
    output entry is strictly positive and the entries sum to 1.
    """
    if len(values) == 0:
        raise ValueError("softmax requires a non-empty vector")
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"softmax requires finite inputs, got {v!r}")
    top = max(values)
    exps = [math.exp(v - top) for v in values]
    total = sum(exps)
    return tuple(e / total for e in exps)


def _check_distribution(probs: Sequence[float], tol: float = 1e-6) -> None:
    if len(probs) == 0:
        raise ValueError("empty probability vector")
    total = 0.0
    for p in probs:
        if not math.isfinite(p) or p < 0.0:
            raise ValueError(f"invalid probability entry {p!r}")
        total += p
    if abs(total - 1.0) > tol:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")


def shannon_entropy(probs: Sequence[float]) -> float:
    """Shannon entropy in bits, with 0*log(0) taken as 0 by continuity."""
    _check_distribution(probs)
    h = 0.0
    for p in probs:
        if p > 0.0:
            h -= p * math.log(p)
    return h / _LN2


def transfer_entropy(p_minus: Sequence[float], p_plus: Sequence[float]) -> float:
    """Entropy drop (bits) from conditioning on the other agent's history.

    ``p_minus`` is the action distribution without the other agent's
    history, ``p_plus`` the one with it. The result is antisymmetric in
    its arguments and bounded by log2(K) in magnitude.
    """
    if len(p_minus) != len(p_plus):
        raise ValueError(
            f"distributions cover different action sets ({len(p_minus)} vs {len(p_plus)})"
        )
    return shannon_entropy(p_minus) - shannon_entropy(p_plus)


def normalized_te(te: float, action_count: int) -> float:
    """Scale a transfer entropy by its theoretical maximum log2(K).

    Keeps the sign, so the result lies in [-1, +1] for any TE produced
    from K-outcome distributions. The reward shaping multiplies this by
    the scaling factor phi.
    """
    if action_count < 2:
        raise ValueError(f"need at least 2 actions, got {action_count}")
    return te / math.log2(action_count)


def gaussian_differential_entropy(dim: int, cov_det: float) -> float:
    """Differential entropy (nats) of a D-dimensional Gaussian.

    ``cov_det`` is the determinant of the covariance matrix. Note this is
    in nats, unlike the discrete entropies above.
    """
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if not (cov_det > 0.0) or not math.isfinite(cov_det):
        raise ValueError(f"covariance determinant must be positive, got {cov_det!r}")
    return 0.5 * dim * (1.0 + math.log(2.0 * math.pi)) + 0.5 * math.log(cov_det)


def mc_marginal_policy(
    policy: Callable[[ObsT, SourceT], Sequence[float]],
    partial_obs: ObsT,
    source_sampler: Callable[[], SourceT],
    n_samples: int,
) -> tuple[float, ...]:
    """Monte-Carlo estimate of a policy marginalised over a source signal.

    Draws ``n_samples`` source values, evaluates ``policy(partial_obs,
    source)`` for each and returns the arithmetic mean of the action
    distributions. Converges to the exact marginal as the sample count
    grows; with a sampler that cycles deterministically through a finite
    support and a sample count that is an exact multiple of the support
    size, it reproduces the exact marginal.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    acc: list[float] | None = None
    for _ in range(n_samples):
        dist = policy(partial_obs, source_sampler())
        if acc is None:
            acc = [float(p) for p in dist]
        else:
            if len(dist) != len(acc):
                raise ValueError("policy returned distributions of differing lengths")
            for i, p in enumerate(dist):
                acc[i] += p
    assert acc is not None
    return tuple(a / n_samples for a in acc)


def entropy_of_logits(logits: Sequence[float]) -> float:
    """Entropy (bits) of softmax(logits) without forming the distribution.

    Uses H = ln(Z) - sum(e_i * x_i) / Z on max-shifted logits; cheaper and
    no less accurate than softmax followed by shannon_entropy.
    """
    top = max(logits)
    z = 0.0
    weighted = 0.0
    for x in logits:
        e = math.exp(x - top)
        z += e
        weighted += e * (x - top)
    return (math.log(z) - weighted / z) / _LN2
