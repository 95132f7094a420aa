import json
from pathlib import Path

import pytest

from codebpc.errors import ConfigError
from codebpc.pipeline import config_hash, resolve_config, run_end_to_end

SMALL_CONFIG = {
    "seed": 5,
    "corpus": {
        "train_documents": 8,
        "validation_documents": 3,
        "bench_documents": 2,
        "functions_per_doc": 6,
    },
    "zoo": {"orders": [1, 2, 3], "alphas": [1.0, 0.1], "token_mode": "char"},
}


def test_resolve_fills_defaults():
    cfg = resolve_config({"seed": 9})
    assert cfg["window"] == {"window_size": 16, "stride": 4}
    assert cfg["scenario"] == "zoo"
    assert config_hash(cfg) == config_hash(resolve_config({"seed": 9}))


def test_resolve_rejects_bad_window():
    with pytest.raises(ConfigError):
        resolve_config({"window": {"window_size": 4, "stride": 9}})
    with pytest.raises(ConfigError):
        resolve_config({"scenario": "unknown"})


def test_run_produces_artifacts_and_caches(tmp_path):
    out = tmp_path / "run"
    index1 = run_end_to_end(SMALL_CONFIG, out)
    assert all(not s["skipped"] for s in index1["stages"].values())
    fit_report = Path(index1["artifacts"]["fit_report"])
    figure = Path(index1["artifacts"]["figure"])
    assert fit_report.exists() and figure.exists()
    payload = json.loads(fit_report.read_text())
    assert payload["winner"] in ("log-linear", "linear")
    assert payload["config_hash"] == index1["config_hash"]
    assert payload["tool_version"]

    before = fit_report.read_bytes()
    index2 = run_end_to_end(SMALL_CONFIG, out)
    assert all(s["skipped"] for s in index2["stages"].values())
    assert fit_report.read_bytes() == before
    assert index2["config_hash"] == index1["config_hash"]

    snapshot = json.loads((out / "config.resolved.json").read_text())
    index3 = run_end_to_end(snapshot["config"], tmp_path / "replay")
    assert index3["config_hash"] == index1["config_hash"]
    assert Path(index3["artifacts"]["fit_report"]).read_bytes() == before


def test_changed_seed_invalidates_stages(tmp_path):
    out = tmp_path / "run"
    run_end_to_end(SMALL_CONFIG, out)
    changed = dict(SMALL_CONFIG, seed=6)
    index = run_end_to_end(changed, out)
    assert all(not s["skipped"] for s in index.get("stages").values())
