"""Cluster-based cross-validation: leave-one-cluster-out and K-fold.

Folds are built from whole clusters so no patient/site/subject ever sits on
both sides of a split. Shows the per-fold deviances, the standard error of
the total, and that K = M folds reproduce leave-one-cluster-out exactly.
"""

import numpy as np

from nicc import criterion_se, kfold_cluster_deviance, loo_cluster_deviance, simulation

config = simulation.SimConfig(
    family="binomial", cluster_size=40, n_predictors=5, re_sd_ratio=1.0,
    ar1_level=0.4, clusters=12, seed=21,
)
data, _ = simulation.generate(config)

loo = loo_cluster_deviance(data)
print(f"leave-one-cluster-out over M={data.n_clusters} clusters")
print(f"  total deviance: {loo.total_deviance:.2f}")
print(f"  per-cluster deviances: {np.round(loo.per_fold_deviance, 1)}")
print(f"  SE of the total: {criterion_se(loo.per_fold_deviance):.2f}")

kf = kfold_cluster_deviance(data, k=4, seed=3)
print(f"\n4-fold (clusters dealt round-robin after a seeded shuffle)")
print(f"  total deviance: {kf.total_deviance:.2f}")
print(f"  fold sizes: {np.bincount(list(kf.fold_assignment.values()))}")

full = kfold_cluster_deviance(data, k=data.n_clusters, seed=0)
match = np.allclose(np.sort(full.per_fold_deviance), np.sort(loo.per_fold_deviance))
print(f"\nK = M folds reproduce leave-one-cluster-out exactly: {match}")
