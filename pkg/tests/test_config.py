import json

import pytest

from ndpscope.cachesim import ConfigInvalid
from ndpscope.config import RunConfig, build_hierarchy, load_file, resolve


def test_defaults():
    cfg = resolve()
    assert cfg.cores == [1, 4, 16, 64, 256]
    assert (cfg.window_w, cfg.window_l, cfg.granularity, cfg.word_size) == (32, 32, 64, 8)
    assert cfg.reuse_mode == "occurrences"
    assert cfg.presets == ["host", "hostpf", "ndp"]
    assert cfg.thresholds == {"temporal_thr": 0.48, "lfmr_thr": 0.56, "mpki_thr": 11.0,
                              "ai_thr": 8.5, "slope_delta": 0.15}
    assert cfg.mesh_obj().vault_count == 32


def test_precedence_flags_over_file_over_defaults():
    file_data = {"seed": 5, "jobs": 3, "cores": [16, 1], "thresholds": {"mpki_thr": 20.0}}
    cfg = resolve(file_data, {"seed": 9, "jobs": None})
    assert cfg.seed == 9  # flag wins
    assert cfg.jobs == 3  # file wins over the default
    assert cfg.cores == [1, 16]  # sorted
    assert cfg.thresholds["mpki_thr"] == 20.0
    assert cfg.thresholds["ai_thr"] == 8.5  # nested keys merge
    assert resolve(None, {"seed": 2}).jobs == 1


def test_hierarchy_override():
    cfg = resolve({"hierarchy": {"host": {"levels": {"L1": {"size_bytes": 65536}}, "core_freq_ghz": 3.0}}})
    h = {x.preset_name.value: x for x in cfg.hierarchies()}["host"]
    assert h.levels[0].size_bytes == 65536 and h.levels[1].size_bytes == 262144
    assert h.core_freq_ghz == 3.0
    with pytest.raises(ConfigInvalid):
        build_hierarchy("ndp", {"levels": {"L3": {"ways": 4}}})


@pytest.mark.parametrize("bad", [
    {"seed": -1},
    {"word_size": 16},
    {"cores": []},
    {"unknown_key": 1},
    {"cluster": {"linkage": "ward"}},
    {"thresholds": {"slope_delta": "big"}},
    {"mesh": {"vault_count": 99}},
    {"hierarchy": {"host": {"levels": {"L1": {"size_bytes": 1000}}}}},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigInvalid):
        resolve(bad)


def test_load_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 4}))
    assert load_file(p) == {"seed": 4}
    p.write_text("{not json")
    with pytest.raises(ConfigInvalid):
        load_file(p)
    p.write_text("[1, 2]")
    with pytest.raises(ConfigInvalid):
        load_file(p)


def test_effective_config_round_trips():
    cfg = resolve({"seed": 3, "mesh": {"vault_positions": [[i % 6, i // 6] for i in range(32)]}})
    again = resolve(cfg.to_dict())
    assert again == cfg
    assert isinstance(RunConfig().to_dict()["cluster"], dict)
