# %% [markdown]
# # Using a model that lives in another process
#
# Any program that answers one JSON line per request can act as the
# classifier. Here the bundled centroid worker plays that role.

# %%
import json
import sys
import tempfile
from pathlib import Path

import numpy as np

from mtscf import EngineConfig, ExternalClassifier, explain
from mtscf.synthetic import desk_fixture

train, test, model = desk_fixture(seed=1)
tmp = Path(tempfile.mkdtemp())
(tmp / "model.json").write_text(json.dumps(model.to_dict()))
command = [sys.executable, "-m", "mtscf.centroid_worker", "--model", str(tmp / "model.json")]

# %%
with ExternalClassifier(command, n_classes=2) as remote:
    q = test.instances[3]
    print("in-process :", np.round(model.predict_proba(q), 6))
    print("out-process:", np.round(remote.predict_proba(q), 6))
    report = explain(remote, q, train, EngineConfig(seed=1, generations=20))

print(f"counterfactuals found: {len(report.ces)}; model calls: {sum(report.call_counts.values())}")
print("calls by phase:", report.call_counts)
