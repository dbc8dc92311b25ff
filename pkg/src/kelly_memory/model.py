"""Probability dynamics of a binary process with Markov memory.

A coin with memory depth m has head probability that is affine in the
previous m outcomes:

    Pr(X_k = 1 | X_{k-1}, ..., X_{k-m}) = w0 + sum_i wi * X_{k-i}

with outcomes coded +1 (head) and -1 (tail). Validity of the coefficient
vector requires |w0 - 1/2| + sum_i |wi| < 1/2 (the "hyperdiamond"), which
keeps every conditional probability inside (0, 1). This module computes
the unconditional head probabilities p_k, their steady state, expected
head counts, and an equivalent companion-form state-space realization,
plus a brute-force path-enumeration oracle for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    HorizonTooLarge,
    HyperdiamondViolation,
    UnsupportedDepth,
)

# Interior margin for the hyperdiamond constraint. The validity region is
# enforced as a closed set |w0 - 1/2| + sum|wi| <= 1/2 - EPS_MARGIN so that
# feasibility is decidable in floating point.
EPS_MARGIN = 1e-9

# Cap on the horizon accepted by the 2^n path-enumeration oracle.
MAX_ENUM_HORIZON = 20


@dataclass(frozen=True)
class MemoryParams:
    """Coefficients (w0, ..., wm) of the conditional head probability."""

    m: int
    omega: tuple[float, ...]

    def __post_init__(self):
        if self.m < 1:
            raise DimensionMismatch(f"memory depth must be >= 1, got {self.m}")
        if len(self.omega) != self.m + 1:
            raise DimensionMismatch(
                f"omega has length {len(self.omega)}, expected m+1 = {self.m + 1}"
            )
        excess = self.l1_distance - (0.5 - EPS_MARGIN)
        if excess > 0:
            raise HyperdiamondViolation(excess)

    @property
    def l1_distance(self) -> float:
        """Distance |w0 - 1/2| + sum |wi| from the hyperdiamond center."""
        return abs(self.omega[0] - 0.5) + sum(abs(w) for w in self.omega[1:])

    @property
    def margin(self) -> float:
        """Slack remaining inside the shrunk hyperdiamond."""
        return (0.5 - EPS_MARGIN) - self.l1_distance

    @property
    def lag_weights(self) -> np.ndarray:
        """(w1, ..., wm) as an array."""
        return np.asarray(self.omega[1:], dtype=float)


@dataclass(frozen=True)
class History:
    """The m outcomes observed before bet 0, most recent first.

    ``values[0]`` is x_{-1}, ``values[1]`` is x_{-2}, and so on.
    """

    values: tuple[int, ...]

    def __post_init__(self):
        if any(v not in (-1, 1) for v in self.values):
            raise DimensionMismatch(f"history entries must be +1/-1, got {self.values}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def induced_probs(self) -> tuple[float, ...]:
        """Degenerate initial probabilities p_{-i} = (x_{-i} + 1)/2, most recent first."""
        return tuple((v + 1) / 2 for v in self.values)


@dataclass(frozen=True)
class GameSpec:
    """A full betting problem: coefficients, initial history, and horizon."""

    params: MemoryParams
    history: History
    n: int

    def __post_init__(self):
        if len(self.history) != self.params.m:
            raise DimensionMismatch(
                f"history length {len(self.history)} != memory depth {self.params.m}"
            )
        if self.n < 1:
            raise DimensionMismatch(f"horizon must be >= 1, got {self.n}")


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Companion-form realization (A, b, c) of the p_k recursion.

    The state is v_k = [p_{k-m+1}, ..., p_k]^T, so v0 holds the induced
    initial probabilities (p_{-m}, ..., p_{-1}) and one update produces p_0
    in the last slot.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    v0: np.ndarray

    def probability_at(self, k: int) -> float:
        """p_k via c (A^k w0 + (I - A)^{-1} (I - A^k) b).

        w0 = A v0 + b is the state after the first update, the one whose
        last entry is p_0; powers of A then walk the recursion forward.
        """
        m = self.A.shape[0]
        eye = np.eye(m)
        w0 = self.A @ self.v0 + self.b
        a_k = np.linalg.matrix_power(self.A, k)
        accumulated = np.linalg.solve(eye - self.A, (eye - a_k) @ self.b)
        return float(self.c @ (a_k @ w0 + accumulated))

    def steady_state(self) -> float:
        """Fixed point c (I - A)^{-1} b."""
        m = self.A.shape[0]
        return float(self.c @ np.linalg.solve(np.eye(m) - self.A, self.b))


def validate_params(omega: Sequence[float], m: int | None = None) -> MemoryParams:
    """Validate a coefficient vector against the hyperdiamond constraint.

    ``m`` defaults to len(omega) - 1. Raises HyperdiamondViolation (carrying
    the excess) or DimensionMismatch.
    """
    omega = tuple(float(w) for w in omega)
    if m is None:
        m = len(omega) - 1
    return MemoryParams(m=m, omega=omega)


def cond_prob(params: MemoryParams, window: Sequence[int]) -> float:
    """Conditional head probability given the last m outcomes, most recent first."""
    if len(window) != params.m:
        raise DimensionMismatch(
            f"window length {len(window)} != memory depth {params.m}"
        )
    return params.omega[0] + sum(
        w * x for w, x in zip(params.omega[1:], window)
    )


def prob_sequence(spec: GameSpec) -> np.ndarray:
    """Unconditional head probabilities [p_0, ..., p_{n-1}].

    Propagates p_k = w0 - sum wi + 2 sum wi p_{k-i}, seeded with the induced
    initial conditions p_{-i} = (x_{-i} + 1)/2.
    """
    w = spec.params.lag_weights
    drift = spec.params.omega[0] - w.sum()
    # lags[i-1] holds p_{k-i}; starts at the induced initial conditions.
    lags = list(spec.history.induced_probs)
    out = np.empty(spec.n)
    for k in range(spec.n):
        p = drift + 2.0 * float(w @ lags)
        out[k] = p
        lags = [p] + lags[:-1]
    return out


def closed_form_p_k(params: MemoryParams, p0: float, k: int) -> float:
    """Depth-1 closed form p_k = (2 w1)^k p_0 + [1 - (2 w1)^k] p_inf."""
    if params.m != 1:
        raise UnsupportedDepth(f"closed form requires m = 1, got m = {params.m}")
    decay = (2.0 * params.omega[1]) ** k
    return decay * p0 + (1.0 - decay) * steady_state(params)


def steady_state(params: MemoryParams) -> float:
    """Long-run head probability (w0 - sum wi) / (1 - 2 sum wi)."""
    total = sum(params.omega[1:])
    return (params.omega[0] - total) / (1.0 - 2.0 * total)


def lambda_n(params: MemoryParams, n: int) -> float:
    """Weight of p_0 versus p_inf in the depth-1 horizon optimum.

    lambda_n = (1/n) [1 - (2 w1)^n] / (1 - 2 w1); equals 1 at n = 1 and
    decays to 0 as n grows.
    """
    if params.m != 1:
        raise UnsupportedDepth(f"lambda_n requires m = 1, got m = {params.m}")
    if n < 1:
        raise DimensionMismatch(f"n must be >= 1, got {n}")
    r = 2.0 * params.omega[1]
    return (1.0 - r**n) / (1.0 - r) / n


def expected_heads(spec: GameSpec) -> float:
    """Expected number of heads over the horizon, sum_k p_k."""
    return float(prob_sequence(spec).sum())


def state_space(params: MemoryParams, history: History) -> StateSpace:
    """Companion realization of the p_k recursion for this game.

    A carries ones on the superdiagonal and [2 wm, ..., 2 w1] in its last
    row; b = [0, ..., 0, w0 - sum wi]; c selects the last state entry.
    """
    if len(history) != params.m:
        raise DimensionMismatch(
            f"history length {len(history)} != memory depth {params.m}"
        )
    m = params.m
    w = params.lag_weights
    A = np.zeros((m, m))
    if m > 1:
        A[: m - 1, 1:] = np.eye(m - 1)
    A[m - 1, :] = 2.0 * w[::-1]
    b = np.zeros(m)
    b[m - 1] = params.omega[0] - w.sum()
    c = np.zeros(m)
    c[m - 1] = 1.0
    # v0 = [p_{-m}, ..., p_{-1}]: induced probabilities in chronological order.
    v0 = np.asarray(history.induced_probs[::-1], dtype=float)
    return StateSpace(A=A, b=b, c=c, v0=v0)


def all_paths(n: int) -> np.ndarray:
    """All 2^n outcome paths as a (2^n, n) array of +1/-1, one path per row."""
    if n > MAX_ENUM_HORIZON:
        raise HorizonTooLarge(
            f"enumeration capped at n = {MAX_ENUM_HORIZON}, got n = {n}"
        )
    codes = np.arange(2**n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int64)


def path_probabilities(spec: GameSpec, paths: np.ndarray) -> np.ndarray:
    """Probability of each row of ``paths`` under the conditional factorization.

    P_X = prod_k Pr(X_k | X_{k-1}, ..., X_{k-m}), with lags before stage 0
    taken from the game history.
    """
    m = spec.params.m
    w = spec.params.lag_weights
    w0 = spec.params.omega[0]
    probs = np.ones(paths.shape[0])
    for k in range(spec.n):
        p_head = np.full(paths.shape[0], w0)
        for i in range(1, m + 1):
            lag = paths[:, k - i] if k - i >= 0 else spec.history.values[i - k - 1]
            p_head = p_head + w[i - 1] * lag
        heads = paths[:, k] == 1
        probs = probs * np.where(heads, p_head, 1.0 - p_head)
    return probs


def enumerate_expected_heads(spec: GameSpec) -> float:
    """Brute-force E(H_n) by summing P_X * H_n(X) over all 2^n paths.

    Independent of the p_k recursion; guards the horizon at 2^20 paths.
    """
    paths = all_paths(spec.n)
    probs = path_probabilities(spec, paths)
    heads = (paths == 1).sum(axis=1)
    return float(probs @ heads)
