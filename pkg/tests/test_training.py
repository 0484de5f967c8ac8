import math

import numpy as np
import pytest
import torch

from ganiqa.errors import DataEmpty, DimMismatch
from ganiqa.training import (
    TrainConfig,
    inpaint,
    load_checkpoint,
    psnr,
    save_checkpoint,
    train_inpainter,
)

from conftest import smooth_texture

TINY = dict(
    learning_rate=0.0002,
    lam=0.9,
    batch_size=4,
    epochs=2,
    seed=0,
    arch_id="D1",
    input_size=64,
    bottleneck=32,
    base_channels=8,
)


def tiny_dataset(n=8, seed=0):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        img = smooth_texture(rng, 64)
        mask = np.zeros((64, 64), dtype=np.uint8)
        r, c = rng.integers(0, 32, size=2)
        mask[r : r + 24, c : c + 24] = 1
        pairs.append((img, mask))
    return pairs


@pytest.fixture(scope="module")
def trained():
    return train_inpainter(tiny_dataset(), TrainConfig(**TINY))


class TestTrainInpainter:
    def test_empty_dataset(self):
        with pytest.raises(DataEmpty):
            train_inpainter([], TrainConfig(**TINY))

    def test_loss_history_recorded(self, trained):
        assert len(trained.loss_history) == TINY["epochs"]
        for entry in trained.loss_history:
            assert all(math.isfinite(entry[k]) for k in ("joint", "rec", "adv_d", "adv_g"))

    def test_same_seed_identical_curves(self):
        a = train_inpainter(tiny_dataset(), TrainConfig(**TINY))
        b = train_inpainter(tiny_dataset(), TrainConfig(**TINY))
        assert a.loss_history == b.loss_history

    def test_wrong_size_rejected(self):
        rng = np.random.default_rng(0)
        pairs = [(rng.random((32, 32, 3)), np.zeros((32, 32), dtype=np.uint8))]
        with pytest.raises(DimMismatch):
            train_inpainter(pairs, TrainConfig(**TINY))


class TestCheckpoint:
    def test_roundtrip(self, trained, tmp_path, rng):
        path = tmp_path / "ckpt.pt"
        save_checkpoint(trained, path)
        back = load_checkpoint(path)
        assert back.config == trained.config
        assert back.loss_history == trained.loss_history
        x = torch.rand(1, 3, 64, 64)
        with torch.no_grad():
            assert torch.equal(trained.generator(x), back.generator(x))
            assert torch.equal(trained.discriminator(x), back.discriminator(x))


class TestInpaint:
    def test_empty_mask_identity(self, trained, rng):
        img = smooth_texture(rng, 64)
        out = inpaint(trained, img, np.zeros((64, 64), dtype=np.uint8))
        assert np.array_equal(out, img)

    def test_full_mask_generator_range(self, trained, rng):
        img = smooth_texture(rng, 64)
        out = inpaint(trained, img, np.ones((64, 64), dtype=np.uint8))
        assert out.shape == img.shape
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_unmasked_pixels_untouched(self, trained, rng):
        img = smooth_texture(rng, 64)
        mask = (rng.random((64, 64)) < 0.4).astype(np.uint8)
        out = inpaint(trained, img, mask)
        assert np.array_equal(out[mask == 0], img[mask == 0])

    def test_dim_mismatch(self, trained, rng):
        img = rng.random((32, 32, 3))
        with pytest.raises(DimMismatch):
            inpaint(trained, img, np.zeros((32, 32), dtype=np.uint8))


class TestPsnr:
    def test_identical_is_inf(self, rng):
        img = rng.random((8, 8, 3))
        assert psnr(img, img.copy()) == math.inf

    def test_black_vs_white(self):
        a = np.zeros((4, 4, 3))
        b = np.ones((4, 4, 3))
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_independent_oracle(self, rng):
        a = rng.random((16, 16, 3))
        b = rng.random((16, 16, 3))
        # second implementation: explicit loops over the definition
        se = 0.0
        for i in range(16):
            for j in range(16):
                for k in range(3):
                    se += (a[i, j, k] - b[i, j, k]) ** 2
        expected = 10.0 * math.log10(1.0 / (se / (16 * 16 * 3)))
        assert psnr(a, b) == pytest.approx(expected, abs=1e-9)

    def test_dim_mismatch(self, rng):
        with pytest.raises(DimMismatch):
            psnr(rng.random((4, 4, 3)), rng.random((5, 5, 3)))
