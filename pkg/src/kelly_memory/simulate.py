"""Seeded Monte Carlo simulation of correlated-coin betting.

Outcome paths are sampled with the Philox counter-based generator. Paths
are processed in fixed blocks of ``BLOCK_PATHS``; block b draws its
uniforms from ``Philox(key=seed).jumped(b)``, so every block owns a
disjoint, scheduling-independent slice of the stream and a given
(config, seed) pair reproduces bit-identical results no matter how the
blocks are executed. Per-path statistics are materialized in block order
and reduced with numpy's pairwise summation, keeping the reduction order
fixed as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import model, policy as policy_mod
from .errors import DimensionMismatch, DomainError

BLOCK_PATHS = 8192

_QUANTILES = (0.05, 0.5, 0.95)


@dataclass(frozen=True)
class SimConfig:
    """A simulation run: game, named policies, path count, seed, start value."""

    spec: model.GameSpec
    policies: tuple[tuple[str, policy_mod.BettorPolicy], ...]
    paths: int = 100_000
    seed: int = 0
    initial_value: float = 1.0

    def __post_init__(self):
        if self.paths < 1:
            raise DomainError(f"path count must be >= 1, got {self.paths}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 unsigned bits")
        if self.initial_value <= 0:
            raise DomainError("initial account value must be positive")
        for name, pol in self.policies:
            if (
                pol.kind is policy_mod.PolicyKind.TIME_VARYING
                and len(pol.fractions) != self.spec.n
            ):
                raise DimensionMismatch(
                    f"policy {name!r} has length {len(pol.fractions)}, "
                    f"horizon is {self.spec.n}"
                )


@dataclass(frozen=True)
class PolicyStats:
    """Monte Carlo summary for one policy."""

    name: str
    mean_log_growth: float
    std_error: float
    analytic_elg: float
    final_value_quantiles: tuple[float, float, float]


@dataclass(frozen=True)
class SimResult:
    paths: int
    seed: int
    stats: tuple[PolicyStats, ...]


@dataclass(frozen=True)
class ScenarioRow:
    """Analytic comparison of the three bettors at one horizon."""

    n: int
    elg_kstar: float
    elg_kn: float
    elg_kvec: float
    kstar: float
    kn: float


def sample_path(spec: model.GameSpec, stream_seed: int) -> np.ndarray:
    """One +1/-1 outcome path of length n, deterministic in stream_seed."""
    gen = np.random.Generator(np.random.Philox(key=stream_seed))
    u = gen.random(spec.n)
    w = spec.params.lag_weights
    w0 = spec.params.omega[0]
    window = list(spec.history.values)
    out = np.empty(spec.n, dtype=np.int64)
    for k in range(spec.n):
        p = w0 + float(w @ window)
        x = 1 if u[k] < p else -1
        out[k] = x
        window = [x] + window[:-1]
    return out


def _sample_block(spec: model.GameSpec, seed: int, block_index: int, rows: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed).jumped(block_index))
    u = gen.random((rows, spec.n))
    w = spec.params.lag_weights
    w0 = spec.params.omega[0]
    x = np.empty((rows, spec.n), dtype=np.int64)
    for k in range(spec.n):
        p = np.full(rows, w0)
        for i in range(1, spec.params.m + 1):
            lag = x[:, k - i] if k - i >= 0 else spec.history.values[i - k - 1]
            p = p + w[i - 1] * lag
        x[:, k] = np.where(u[:, k] < p, 1, -1)
    return x


def sample_paths(spec: model.GameSpec, paths: int, seed: int) -> np.ndarray:
    """Sample ``paths`` outcome paths as a (paths, n) +1/-1 array."""
    blocks = []
    for b in range((paths + BLOCK_PATHS - 1) // BLOCK_PATHS):
        rows = min(BLOCK_PATHS, paths - b * BLOCK_PATHS)
        blocks.append(_sample_block(spec, seed, b, rows))
    return np.vstack(blocks)


def run_bettor(
    path: Sequence[int], policy: policy_mod.BettorPolicy, initial_value: float = 1.0
) -> np.ndarray:
    """Account trajectory [V_1, ..., V_n] under V_{k+1} = (1 + K_k X_k) V_k."""
    x = np.asarray(path)
    if policy.kind is policy_mod.PolicyKind.TIME_VARYING:
        if len(policy.fractions) != x.size:
            raise DimensionMismatch(
                f"policy length {len(policy.fractions)} != path length {x.size}"
            )
        ks = np.asarray(policy.fractions)
    else:
        ks = np.full(x.size, policy.fractions[0])
    return initial_value * np.cumprod(1.0 + ks * x)


def _log_growth(x: np.ndarray, pol: policy_mod.BettorPolicy) -> np.ndarray:
    """Per-path log(V_n / V_0) for a block of outcome paths."""
    n = x.shape[1]
    if pol.kind is policy_mod.PolicyKind.TIME_INVARIANT:
        k = pol.fractions[0]
        heads = (x == 1).sum(axis=1)
        return heads * math.log1p(k) + (n - heads) * math.log1p(-k)
    total = np.zeros(x.shape[0])
    for j in range(n):
        k = pol.fractions[j]
        total = total + np.where(x[:, j] == 1, math.log1p(k), math.log1p(-k))
    return total


def _analytic_elg(spec: model.GameSpec, pol: policy_mod.BettorPolicy) -> float:
    if pol.kind is policy_mod.PolicyKind.TIME_INVARIANT:
        return policy_mod.elg_time_invariant(spec, pol.fractions[0])
    return policy_mod.elg_time_varying(spec, pol)


def monte_carlo_elg(config: SimConfig) -> SimResult:
    """Estimate per-bet log growth for every configured policy.

    Returns, per policy, the sample mean and standard error of
    log(V_n/V_0)/n over all paths, the analytic ELG, and the 5/50/95
    percent quantiles of the final account value.
    """
    spec = config.spec
    m_paths = config.paths
    growth = {name: np.empty(m_paths) for name, _ in config.policies}
    offset = 0
    for b in range((m_paths + BLOCK_PATHS - 1) // BLOCK_PATHS):
        rows = min(BLOCK_PATHS, m_paths - b * BLOCK_PATHS)
        x = _sample_block(spec, config.seed, b, rows)
        for name, pol in config.policies:
            growth[name][offset : offset + rows] = _log_growth(x, pol)
        offset += rows

    stats = []
    for name, pol in config.policies:
        log_vn = growth[name]
        g = log_vn / spec.n
        mean = float(np.mean(g))
        if m_paths > 1:
            std_error = float(np.std(g, ddof=1) / math.sqrt(m_paths))
        else:
            std_error = 0.0
        finals = config.initial_value * np.exp(log_vn)
        q = np.quantile(finals, _QUANTILES)
        stats.append(
            PolicyStats(
                name=name,
                mean_log_growth=mean,
                std_error=std_error,
                analytic_elg=_analytic_elg(spec, pol),
                final_value_quantiles=(float(q[0]), float(q[1]), float(q[2])),
            )
        )
    return SimResult(paths=m_paths, seed=config.seed, stats=tuple(stats))


def standard_policies(
    spec: model.GameSpec,
) -> tuple[tuple[str, policy_mod.BettorPolicy], ...]:
    """The three benchmark bettors: long-run constant, horizon constant, vector."""
    return (
        ("kstar", policy_mod.BettorPolicy.constant(policy_mod.kelly_limit(spec.params))),
        ("kn", policy_mod.BettorPolicy.constant(policy_mod.kelly_horizon(spec))),
        ("kvec", policy_mod.kelly_timevarying(spec)),
    )


def scenario_table(
    params: model.MemoryParams, history: model.History, n_max: int = 30
) -> list[ScenarioRow]:
    """Analytic ELG of the three bettors for every horizon 1..n_max.

    The long-run bettor ignores temporal correlation and always bets
    2 p_inf - 1; the other two use the horizon-optimal constant fraction
    and the per-stage optimal vector.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    kstar = policy_mod.kelly_limit(params)
    rows = []
    for n in range(1, n_max + 1):
        spec = model.GameSpec(params=params, history=history, n=n)
        kn = policy_mod.kelly_horizon(spec)
        kvec = policy_mod.kelly_timevarying(spec)
        rows.append(
            ScenarioRow(
                n=n,
                elg_kstar=policy_mod.elg_time_invariant(spec, kstar),
                elg_kn=policy_mod.elg_time_invariant(spec, kn),
                elg_kvec=policy_mod.elg_time_varying(spec, kvec),
                kstar=kstar,
                kn=kn,
            )
        )
    return rows
