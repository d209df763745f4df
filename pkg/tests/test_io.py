import numpy as np
import pytest

from arcgad.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from arcgad.config import TrainConfig, dumps_config, load_config, loads_config, save_config
from arcgad.data import Dataset, load_dataset, save_dataset
from arcgad.errors import DataIOError, ValidationError
from arcgad.graph import EdgeList


def small_dataset(labels=True):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, 3))
    x[0, 0] = 1 / 3  # not exactly representable in short decimal
    y = np.array([0, 1, 0, 0, 0, 0]) if labels else None
    return Dataset("toy", x, EdgeList.from_pairs([(0, 1), (1, 2), (4, 5)], 6), y)


def test_dataset_round_trip(tmp_path):
    ds = small_dataset()
    save_dataset(ds, tmp_path / "d")
    back = load_dataset(tmp_path / "d")
    assert back.name == "toy"
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.edges.pairs, ds.edges.pairs)
    assert np.array_equal(back.labels, ds.labels)


def test_dataset_without_labels(tmp_path):
    save_dataset(small_dataset(labels=False), tmp_path / "d")
    assert not (tmp_path / "d" / "labels.txt").exists()
    assert load_dataset(tmp_path / "d").labels is None


def test_malformed_edge_line_reports_line_number(tmp_path):
    save_dataset(small_dataset(), tmp_path / "d")
    path = tmp_path / "d" / "edges.tsv"
    path.write_text("0\t1\n1\tx\n")
    with pytest.raises(ValidationError, match=r"edges\.tsv:2"):
        load_dataset(tmp_path / "d")


def test_wrong_feature_width(tmp_path):
    save_dataset(small_dataset(), tmp_path / "d")
    path = tmp_path / "d" / "features.csv"
    lines = path.read_text().splitlines()
    lines[3] = "1,2"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match=r"features\.csv:4"):
        load_dataset(tmp_path / "d")


def test_missing_inputs(tmp_path):
    with pytest.raises(DataIOError):
        load_dataset(tmp_path / "nope")
    save_dataset(small_dataset(), tmp_path / "d")
    (tmp_path / "d" / "edges.tsv").unlink()
    with pytest.raises(DataIOError):
        load_dataset(tmp_path / "d")


def test_dataset_validation():
    e = EdgeList.from_pairs([], 4)
    with pytest.raises(ValidationError):
        Dataset("x", np.ones((3, 2)), e)
    with pytest.raises(ValidationError):
        Dataset("x", np.full((4, 2), np.inf), e)
    half = Dataset("x", np.ones((4, 2)), e, np.array([1, 1, 0, 0]))
    with pytest.raises(ValidationError, match="fraction"):
        half.check_anomaly_fraction()


def test_config_round_trip(tmp_path):
    cfg = TrainConfig(hidden=64, lr=1e-4 / 3, bias=False, encoder_mode="raw")
    assert loads_config(dumps_config(cfg)) == cfg
    save_config(cfg, tmp_path / "c.ini")
    assert load_config(tmp_path / "c.ini") == cfg


def test_config_partial_and_errors():
    cfg = loads_config("[arcgad]\nversion = 1\nepochs = 5\n")
    assert cfg.epochs == 5 and cfg.hidden == TrainConfig().hidden
    with pytest.raises(ValidationError, match="version"):
        loads_config("[arcgad]\nepochs = 5\n")
    with pytest.raises(ValidationError, match="unknown"):
        loads_config("[arcgad]\nversion = 1\nwidth = 3\n")
    with pytest.raises(ValidationError):
        loads_config("[arcgad]\nversion = 1\nL = 9\n")
    with pytest.raises(ValidationError):
        loads_config("[other]\nversion = 1\n")
    with pytest.raises(DataIOError):
        load_config("/nonexistent/c.ini")


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    params = {
        "encoder.0.weight": rng.normal(size=(4, 3)),
        "encoder.0.bias": rng.normal(size=(1, 3)) * 1e-300,
        "scorer.W_q": np.zeros((3, 3)),
        "scorer.W_k": rng.normal(size=(3, 3)),
    }
    ckpt = Checkpoint(TrainConfig(), params, {"epochs": 0})
    save_checkpoint(ckpt, tmp_path / "m.ckpt")
    back = load_checkpoint(tmp_path / "m.ckpt")
    assert back.config == ckpt.config and back.log == ckpt.log
    for name, arr in params.items():
        assert np.array_equal(back.params[name], arr)
    assert back.digest() == ckpt.digest()
    assert back.encoder_names() == ["encoder.0.weight", "encoder.0.bias"]
    assert back.scorer_names() == ["scorer.W_q", "scorer.W_k"]


def test_checkpoint_rejects_garbage(tmp_path):
    with pytest.raises(ValidationError):
        Checkpoint.from_text("not json")
    with pytest.raises(ValidationError):
        Checkpoint.from_text('{"format": "arcgad-checkpoint", "version": 1}')
    with pytest.raises(ValidationError):
        Checkpoint.from_text('{"format": "other", "version": 1}')
    with pytest.raises(DataIOError):
        load_checkpoint(tmp_path / "missing.ckpt")
