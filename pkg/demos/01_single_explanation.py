# %% [markdown]
# # Explaining one prediction
#
# We build a small two-class problem of noisy sinusoids, fit the centroid
# classifier, and walk through the search for a single test series: the
# nearest unlike neighbor, the naive substitution, and the optimized masks.

# %%
import numpy as np

from mtscf import EngineConfig, explain, find_nun
from mtscf.core import hamming
from mtscf.subsequence import naive_stage
from mtscf.synthetic import desk_fixture

train, test, model = desk_fixture(seed=0)
query = test.instances[0]
print("series shape:", query.shape)
print("predicted class:", model.predict(query), "proba:", np.round(model.predict_proba(query), 3))

# %% [markdown]
# The donor is the closest training series that the model confidently puts
# in another class.

# %%
nun = find_nun(model, query, train, theta=0.9)
print(f"donor {nun.nun.id}: class {nun.target_class}, confidence {nun.confidence:.3f}, L2 {nun.distance:.3f}")

# %% [markdown]
# Copying the donor's most important window wholesale gives a first valid
# counterfactual. The window grows until the target probability clears
# theta, which we set to 0.9 to make the search work harder.

# %%
naive = naive_stage(model, query, nun, train.weights_for(nun.nun.id), theta=0.9)
print(f"naive window {naive.window.start}..{naive.window.end} (length {naive.length}),"
      f" P(target)={naive.confidence:.3f}, cells changed={hamming(naive.c0, query)}")

# %% [markdown]
# The optimizer then looks for sparser masks inside shorter windows.

# %%
report = explain(model, query, train, EngineConfig(seed=0, theta=0.9))
print(f"counterfactuals found: {len(report.ces)}; window lengths probed: {report.probes}")
print(f"{'origin':>8} {'P(target)':>10} {'changed':>8} {'L2':>7}")
for i, ce in enumerate(report.ces):
    mark = " <- chosen" if i == report.best_index else ""
    print(f"{ce.origin:>8} {ce.m1:10.3f} {ce.m2:8.3f} {ce.m3:7.3f}{mark}")

# %%
best = report.best
changed = np.argwhere(best.instance.values != query.values)
print("changed (time, channel) cells:", changed.tolist())
