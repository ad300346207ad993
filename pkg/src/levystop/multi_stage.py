"""Staged stopping: cluster thresholds and the backward partition algorithm.

A problem with M ordered stages (f_m, g_m) is solved by partitioning the
stage set {1..M} into contiguous clusters that are exercised simultaneously.
The first-order-condition function of a cluster I is the plain sum
Lambda_I = sum_{m in I} Lambda_m, so a cluster threshold is a one-stage solve
for the merged pair (f_I, g_I). The partition is grown backward from stage M:
each new stage either stands alone (its threshold beats the next cluster's)
or absorbs following clusters until it does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import DomainError, InfeasibleThresholds
from .one_stage import (
    StageSpec,
    lambda_fn,
    solve_threshold,
    value_at,
)
from .payoffs import RewardSpec, WeightedSum, reward, weighted_sum
from .scale_fn import ScaleContext

Resolver = Callable[[tuple[int, ...]], float]

EXPONENT_MERGE_TOL = 1e-12  # reward exponents closer than this share a term


@dataclass(frozen=True)
class MultiStageSpec:
    stages: tuple[StageSpec, ...]

    @property
    def M(self) -> int:
        return len(self.stages)


def multi_stage(stages: Iterable[StageSpec]) -> MultiStageSpec:
    stages = tuple(stages)
    if not stages:
        raise DomainError("a staged problem needs at least one stage")
    return MultiStageSpec(stages=stages)


@dataclass(frozen=True)
class StagePartition:
    """Contiguous clusters over {first..M} with strictly decreasing thresholds."""

    clusters: tuple[tuple[int, ...], ...]
    thresholds: tuple[float, ...]

    @property
    def first(self) -> int:
        return self.clusters[0][0]

    @property
    def per_stage_thresholds(self) -> tuple[float, ...]:
        """Threshold of every stage it covers, in stage order."""
        out = []
        for cluster, a in zip(self.clusters, self.thresholds):
            out.extend([a] * len(cluster))
        return tuple(out)


def _validate_partition(p: StagePartition) -> StagePartition:
    stages = [m for cluster in p.clusters for m in cluster]
    if stages != list(range(stages[0], stages[0] + len(stages))):
        raise DomainError(f"clusters {p.clusters} are not contiguous and ordered")
    if len(p.thresholds) != len(p.clusters):
        raise DomainError("one threshold per cluster required")
    for a, b in zip(p.thresholds, p.thresholds[1:]):
        if not a > b:
            raise DomainError(
                f"cluster thresholds must strictly decrease, got {p.thresholds}"
            )
    return p


def merge_stages(spec: MultiStageSpec, cluster: Iterable[int]) -> StageSpec:
    """The one-stage problem (f_I, g_I) of a cluster: plain sums of f and g.

    Reward terms with coinciding exponents pool their coefficients so the
    merged reward stays within the distinct-exponent invariant.
    """
    cluster = tuple(cluster)
    if not cluster:
        raise DomainError("cannot merge an empty cluster")
    members = [spec.stages[m - 1] for m in cluster]
    K = sum(s.g.K for s in members)
    b = sum(s.g.b for s in members)
    pooled: list[list[float]] = []
    for s in members:
        for a, c in s.g.terms:
            for slot in pooled:
                if abs(slot[0] - a) <= EXPONENT_MERGE_TOL:
                    slot[1] += c
                    break
            else:
                pooled.append([a, c])
    g = reward(K, b, [(a, c) for a, c in pooled])
    f = weighted_sum([(1.0, s.f) for s in members])
    return StageSpec(f=f, g=g)


def lambda_cluster(
    spec: MultiStageSpec, ctx: ScaleContext, cluster: Iterable[int], A: float
) -> float:
    """Lambda_I(A) = sum over member stages; nondecreasing in A."""
    return sum(lambda_fn(spec.stages[m - 1], ctx, A) for m in cluster)


def solve_cluster_threshold(
    spec: MultiStageSpec,
    ctx: ScaleContext,
    cluster: Iterable[int],
    a_max: float = 1e3,
    xtol: float = 1e-13,
) -> float:
    """Root of Lambda_I as a one-stage solve on the merged pair."""
    merged = merge_stages(spec, cluster)
    return solve_threshold(merged, ctx, a_max=a_max, xtol=xtol).a_star


def update_partition(
    spec: MultiStageSpec,
    ctx: ScaleContext,
    partition_m: StagePartition,
    m: int,
    resolver: Resolver | None = None,
) -> StagePartition:
    """One backward step: fold stage m-1 into the partition over {m..M}.

    Grows the head cluster {m-1} by absorbing following clusters while its
    threshold fails to exceed theirs (ties merge); stops at the first strict
    ordering or after a full merge.
    """
    if partition_m.first != m:
        raise DomainError(
            f"partition starts at stage {partition_m.first}, expected {m}"
        )
    if m < 2:
        raise DomainError("update needs a stage m-1 >= 1 to fold in")
    if resolver is None:
        resolver = lambda cluster: solve_cluster_threshold(spec, ctx, cluster)

    head = (m - 1,)
    tail = list(zip(partition_m.clusters, partition_m.thresholds))
    for i, (cluster, a_next) in enumerate(tail):
        a_head = resolver(head)
        if a_head > a_next:
            clusters = (head,) + tuple(c for c, _ in tail[i:])
            thresholds = (a_head,) + tuple(a for _, a in tail[i:])
            return _validate_partition(
                StagePartition(clusters=clusters, thresholds=thresholds)
            )
        head = head + cluster
    return _validate_partition(
        StagePartition(clusters=(head,), thresholds=(resolver(head),))
    )


def solve_partition(
    spec: MultiStageSpec, ctx: ScaleContext, resolver: Resolver | None = None
) -> StagePartition:
    """Backward induction from the singleton partition {{M}} down to stage 1."""
    if resolver is None:
        resolver = lambda cluster: solve_cluster_threshold(spec, ctx, cluster)
    M = spec.M
    partition = StagePartition(clusters=((M,),), thresholds=(resolver((M,)),))
    for m in range(M, 1, -1):
        partition = update_partition(spec, ctx, partition, m, resolver=resolver)
    return partition


def multi_value(
    spec: MultiStageSpec, ctx: ScaleContext, partition: StagePartition, x: float
) -> float:
    """Total value: sum of one-stage values of the merged clusters."""
    _validate_partition(partition)
    total = 0.0
    for cluster, a in zip(partition.clusters, partition.thresholds):
        total += value_at(merge_stages(spec, cluster), ctx, a, x)
    return total


def perturbed_value(
    spec: MultiStageSpec, ctx: ScaleContext, thresholds, x: float
) -> float:
    """Value of an arbitrary nonincreasing per-stage threshold vector.

    Each stage contributes its own one-stage value; the ordering makes the
    stage stopping times ordered, so the contributions are exactly additive.
    """
    thresholds = tuple(float(a) for a in thresholds)
    if len(thresholds) != spec.M:
        raise DomainError(
            f"need {spec.M} thresholds, got {len(thresholds)}"
        )
    for a, b in zip(thresholds, thresholds[1:]):
        if b > a:
            raise InfeasibleThresholds(
                f"thresholds must be nonincreasing, got {thresholds}"
            )
    return sum(
        value_at(stage, ctx, a, x)
        for stage, a in zip(spec.stages, thresholds)
    )
