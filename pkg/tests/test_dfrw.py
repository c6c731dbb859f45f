import json
import struct

import numpy as np
import pytest

from dfr.dfrw import read_dfrw
from dfr.errors import LoadError
from dfr.vgg import CONV_LAYERS, load_weights

from helpers import dfrw_bytes, encode_dfrw, make_weights


@pytest.fixture(scope="module")
def weights():
    return make_weights(seed=5)


@pytest.fixture(scope="module")
def blob(weights):
    return dfrw_bytes(weights)


def write(tmp_path, data, name="w.dfrw"):
    p = tmp_path / name
    p.write_bytes(data)
    return p


class TestReadDfrw:
    def test_round_trip(self, tmp_path, weights, blob):
        manifest, tensors = read_dfrw(write(tmp_path, blob))
        assert manifest["layers"] == list(CONV_LAYERS)
        assert manifest["source_checksum"].startswith("sha256:")
        assert len(tensors) == 26
        for i, layer in enumerate(CONV_LAYERS):
            kname, kdata = tensors[2 * i]
            bname, bdata = tensors[2 * i + 1]
            assert kname == bname == layer
            np.testing.assert_array_equal(kdata, weights.kernels[layer])
            np.testing.assert_array_equal(bdata, weights.biases[layer])

    def test_serialization_deterministic(self, weights, blob):
        assert dfrw_bytes(weights) == blob

    def test_bad_magic(self, tmp_path, blob):
        with pytest.raises(LoadError, match="bad magic"):
            read_dfrw(write(tmp_path, b"DFRX" + blob[4:]))

    def test_bad_version(self, tmp_path, blob):
        mangled = blob[:4] + struct.pack("<I", 9) + blob[8:]
        with pytest.raises(LoadError, match="version 9"):
            read_dfrw(write(tmp_path, mangled))

    def test_truncated_data(self, tmp_path, blob):
        with pytest.raises(LoadError, match="truncated"):
            read_dfrw(write(tmp_path, blob[: len(blob) // 2]))

    def test_trailing_garbage(self, tmp_path, blob):
        with pytest.raises(LoadError):
            read_dfrw(write(tmp_path, blob + b"xx"))

    def test_bad_manifest_json(self, tmp_path):
        manifest = b"{not json"
        data = b"DFRW" + struct.pack("<I", 1) + struct.pack("<I", len(manifest)) + manifest
        with pytest.raises(LoadError, match="JSON"):
            read_dfrw(write(tmp_path, data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_dfrw(tmp_path / "nope.dfrw")


class TestLoadWeights:
    def test_round_trip_bit_exact(self, tmp_path, weights, blob):
        loaded = load_weights(write(tmp_path, blob))
        for layer in CONV_LAYERS:
            np.testing.assert_array_equal(loaded.kernels[layer], weights.kernels[layer])
            np.testing.assert_array_equal(loaded.biases[layer], weights.biases[layer])
        np.testing.assert_array_equal(loaded.mean, weights.mean)
        np.testing.assert_array_equal(loaded.std, weights.std)
        assert loaded.kernels["conv1_1"].shape == (64, 3, 3, 3)

    def test_weights_are_immutable(self, tmp_path, blob):
        loaded = load_weights(write(tmp_path, blob))
        with pytest.raises(ValueError):
            loaded.kernels["conv1_1"][0, 0, 0, 0] = 1.0

    def test_missing_layer_named(self, tmp_path, weights):
        layers = [n for n in CONV_LAYERS if n != "conv4_3"]
        data = dfrw_bytes(weights, layers=layers)
        with pytest.raises(LoadError, match="conv4_3"):
            load_weights(write(tmp_path, data))

    def test_kernel_shape_mismatch_named(self, tmp_path, weights):
        tensors = []
        for name in CONV_LAYERS:
            k = weights.kernels[name]
            if name == "conv2_1":
                k = k[:, :32]
            tensors.append((name, k))
            tensors.append((name, weights.biases[name]))
        manifest = {
            "layers": list(CONV_LAYERS),
            "mean": [0.485, 0.456, 0.406],
            "std": [0.229, 0.224, 0.225],
            "source_checksum": "sha256:0",
        }
        with pytest.raises(LoadError, match="conv2_1"):
            load_weights(write(tmp_path, encode_dfrw(manifest, tensors)))

    def test_record_order_enforced(self, tmp_path, weights):
        tensors = []
        for name in CONV_LAYERS:
            tensors.append((name, weights.biases[name]))  # bias before kernel
            tensors.append((name, weights.kernels[name]))
        manifest = {
            "layers": list(CONV_LAYERS),
            "mean": [0.485, 0.456, 0.406],
            "std": [0.229, 0.224, 0.225],
            "source_checksum": "sha256:0",
        }
        with pytest.raises(LoadError, match="ndim"):
            load_weights(write(tmp_path, encode_dfrw(manifest, tensors)))

    def test_permuted_manifest_order_loads(self, tmp_path, weights):
        layers = list(CONV_LAYERS)[::-1]
        loaded = load_weights(write(tmp_path, dfrw_bytes(weights, layers=layers)))
        for layer in CONV_LAYERS:
            np.testing.assert_array_equal(loaded.kernels[layer], weights.kernels[layer])

    def test_manifest_missing_mean(self, tmp_path, weights):
        digest = "sha256:0"
        tensors = []
        for name in CONV_LAYERS:
            tensors.append((name, weights.kernels[name]))
            tensors.append((name, weights.biases[name]))
        manifest = {"layers": list(CONV_LAYERS), "std": [1, 1, 1], "source_checksum": digest}
        with pytest.raises(LoadError, match="mean"):
            load_weights(write(tmp_path, encode_dfrw(manifest, tensors)))

    def test_truncation_points_at_entry(self, tmp_path, weights, blob):
        # drop the final bias record's tail
        with pytest.raises(LoadError, match="truncated"):
            load_weights(write(tmp_path, blob[:-16]))
