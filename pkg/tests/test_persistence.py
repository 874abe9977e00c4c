import struct

import numpy as np
import pytest

from src.data.synthetic import SyntheticSpec, gen_composite_sine, gen_swiss_roll, odd_even_split
from src.manifold.diffusion import DmConfig, dm_fit
from src.manifold.embedding_store import load_embedding, save_embedding
from src.pyramid.alp import alp_predict, alp_train
from src.pyramid.model_store import load_model, save_model
from src.storage.container import read_container, write_container


def _model(n=300, m=1):
    x, f = gen_composite_sine(SyntheticSpec(n_points=n, noise_amplitude=0.05, seed=0))
    (xtr, ftr), (xte, _) = odd_even_split(x, f)
    if m == 2:
        ftr = np.hstack([ftr, np.cos(xtr)])
    model, _ = alp_train(xtr, ftr, feature_names=["x"], target_names=["f", "g"][:m])
    return model, xte


def test_model_round_trip_predictions_bit_identical(tmp_path):
    for m in (1, 2):
        model, xte = _model(m=m)
        path = tmp_path / f"model_{m}.alp"
        save_model(model, path)
        loaded = load_model(path)
        assert np.array_equal(alp_predict(loaded, xte), alp_predict(model, xte))
        assert loaded.optimal_iter.tolist() == model.optimal_iter.tolist()
        assert loaded.target_names == model.target_names
        for a, b in zip(loaded.error_curves, model.error_curves):
            assert np.array_equal(a, b)


def test_container_layout(tmp_path):
    path = tmp_path / "c.bin"
    write_container(path, "thing", {"a": 1}, {"v": np.arange(3.0), "i": np.array([1, 2], dtype=np.int32)})
    blob = path.read_bytes()
    magic, version, tag, hlen = struct.unpack_from("<4sHcxI", blob, 0)
    assert (magic, version, tag) == (b"ALPC", 1, b"<")
    meta, arrays = read_container(path, "thing")
    assert meta == {"a": 1}
    assert arrays["v"].tolist() == [0.0, 1.0, 2.0]
    assert arrays["i"].dtype == np.int64


def test_rejects_bad_magic_version_kind_and_truncation(tmp_path):
    model, _ = _model(100)
    path = tmp_path / "m.alp"
    save_model(model, path)
    blob = path.read_bytes()

    bad_magic = tmp_path / "magic.alp"
    bad_magic.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError, match="magic"):
        load_model(bad_magic)

    bad_version = tmp_path / "version.alp"
    bad_version.write_bytes(blob[:4] + struct.pack("<H", 99) + blob[6:])
    with pytest.raises(ValueError, match="version"):
        load_model(bad_version)

    truncated = tmp_path / "short.alp"
    truncated.write_bytes(blob[:-16])
    with pytest.raises(ValueError, match="truncated"):
        load_model(truncated)

    with pytest.raises(ValueError):
        read_container(path, "diffusion_embedding")

    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "missing.alp")


def test_embedding_round_trip(tmp_path):
    X, _ = gen_swiss_roll(120, 0.0, seed=1)
    emb = dm_fit(X, DmConfig(sigma=3.0))
    path = tmp_path / "emb.dm"
    save_embedding(emb, path)
    loaded = load_embedding(path)
    assert loaded.dim == emb.dim
    assert loaded.config == emb.config
    assert np.array_equal(loaded.coordinates, emb.coordinates)
    assert np.array_equal(loaded.train_points, emb.train_points)
