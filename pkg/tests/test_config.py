import pytest

from costore.config import ClusterConfig, NetworkProfile, NodeSpec
from costore.errors import ConfigError


def test_local_generates_sequential_ids():
    cfg = ClusterConfig.local(4)
    assert cfg.node_ids == ("n0", "n1", "n2", "n3")
    # first node hosts the directory when none is named
    assert cfg.directory_nodes == ("n0",)


def test_shard_home_round_robin():
    cfg = ClusterConfig(
        nodes=tuple(NodeSpec(f"n{i}") for i in range(4)),
        directory_nodes=("n1", "n3"),
        shard_count=4,
    )
    assert [cfg.shard_home(i) for i in range(4)] == ["n1", "n3", "n1", "n3"]


def test_validation_errors():
    with pytest.raises(ConfigError):
        ClusterConfig(nodes=())
    with pytest.raises(ConfigError):
        ClusterConfig(nodes=(NodeSpec("a"), NodeSpec("a")))
    with pytest.raises(ConfigError):
        ClusterConfig(nodes=(NodeSpec("a"),), directory_nodes=("ghost",))
    with pytest.raises(ConfigError):
        ClusterConfig(nodes=(NodeSpec("a"),), shard_count=0)
    with pytest.raises(ConfigError):
        ClusterConfig(nodes=(NodeSpec("a"),), block_bytes=0)
    with pytest.raises(ConfigError):
        NetworkProfile(latency_s=-1)
    with pytest.raises(ConfigError):
        NetworkProfile(bandwidth_Bps=0)


def test_yaml_roundtrip(tmp_path):
    cfg = ClusterConfig.local(
        3,
        profile=NetworkProfile(latency_s=5e-4, bandwidth_Bps=2.5e9),
        shard_count=16,
        block_bytes=1 << 20,
        small_object_threshold=4096,
        detection_interval_s=0.05,
        store_capacity_bytes=1 << 30,
    )
    path = str(tmp_path / "cluster.yaml")
    cfg.to_yaml(path)
    back = ClusterConfig.from_yaml(path)
    assert back == cfg


def test_from_dict_defaults():
    cfg = ClusterConfig.from_dict({"nodes": [{"node_id": "a"}, {"node_id": "b"}]})
    assert cfg.node_ids == ("a", "b")
    assert cfg.directory_nodes == ("a",)
    assert cfg.profile == NetworkProfile()
    assert cfg.spec_of("b").host == "127.0.0.1"


def test_from_yaml_rejects_non_mapping(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        ClusterConfig.from_yaml(str(path))


def test_with_overrides():
    cfg = ClusterConfig.local(2)
    out = cfg.with_overrides(block_bytes=123456)
    assert out.block_bytes == 123456
    assert out.node_ids == cfg.node_ids
    assert cfg.block_bytes != 123456  # original untouched


def test_unknown_node_lookup():
    cfg = ClusterConfig.local(2)
    with pytest.raises(ConfigError):
        cfg.spec_of("n9")
