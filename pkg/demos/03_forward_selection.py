"""Forward stepwise selection under different criteria.

The overfitting playground: five real predictors plus fifth-order raw
powers of every random-effect predictor as extra candidates. AIC keeps
adding spurious polynomial terms long after out-of-cluster performance has
turned; NICc turns where looDeviance turns.
"""

from nicc import (
    forward_path,
    jaccard_index,
    model_size_error,
    select_1se,
    select_min,
    simulation,
)

config = simulation.SimConfig(family="gaussian", seed=11, **simulation.SELECTION_CELL)
data, truth = simulation.generate(config)
candidates = simulation.polynomial_candidates(data, truth)
print(f"{len(candidates.predictor_columns())} candidate columns "
      f"({config.n_predictors} real + powers of the {len(truth.random_set)} random-effect ones)\n")

baseline = forward_path(candidates, "loodev")
loo_min = select_min(baseline)
print(f"looDeviance picks size {loo_min.size} (1SE: {select_1se(baseline).size})")

for name in ("aic", "bic", "nicc"):
    path = forward_path(candidates, name)
    chosen = select_min(path)
    print(
        f"{name:>5}: min at size {chosen.size:2d} "
        f"(1SE: {select_1se(path).size:2d}), "
        f"size error {model_size_error(chosen, loo_min):+d}, "
        f"Jaccard vs looDeviance {jaccard_index(chosen.variable_set, loo_min.variable_set):.2f}"
    )

print("\nlooDeviance path values by size:")
print("  " + " ".join(f"{s.value:8.0f}" for s in baseline.steps[:10]))
nicc_path = forward_path(candidates, "nicc")
print("NICc path values by size:")
print("  " + " ".join(f"{s.value:8.0f}" for s in nicc_path.steps[:10]))
