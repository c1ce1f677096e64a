"""Adaptive geometric multigrid benchmarks (local smoothing, global and
polynomial coarsening) on octree meshes."""

import json

from ._core import (
    BenchmarkConfig,
    ConvergenceRow,
    DivergenceError,
    PartitionPolicy,
    Precision,
    ResultRow,
    Variant,
    preset,
    preset_names,
    result_schema_version,
    run_benchmark,
    run_convergence_study,
)
from . import _core


def mesh_statistics(case, L, degrees=(1, 4)):
    return json.loads(_core.mesh_statistics_json(case, L, list(degrees)))


def metrics_sweep(case, L, ranks, policies=None, variants=None, hanging_weight=2.0):
    policies = policies or [PartitionPolicy.first_child, PartitionPolicy.sfc]
    variants = variants or [Variant.LS, Variant.GC]
    return json.loads(_core.metrics_sweep_json(case, L, list(ranks), policies, variants, hanging_weight))


def benchmark(case="octant", L=4, p=1, variant="LS", **kwargs):
    """Run one configuration; keyword arguments set BenchmarkConfig fields."""
    cfg = BenchmarkConfig()
    cfg.case, cfg.L, cfg.p = case, L, p
    cfg.variant = getattr(Variant, variant) if isinstance(variant, str) else variant
    for name, value in kwargs.items():
        if not hasattr(cfg, name):
            raise TypeError(f"unknown option '{name}'")
        setattr(cfg, name, value)
    return run_benchmark(cfg)


__all__ = [
    "BenchmarkConfig",
    "ConvergenceRow",
    "DivergenceError",
    "PartitionPolicy",
    "Precision",
    "ResultRow",
    "Variant",
    "benchmark",
    "mesh_statistics",
    "metrics_sweep",
    "preset",
    "preset_names",
    "result_schema_version",
    "run_benchmark",
    "run_convergence_study",
]
