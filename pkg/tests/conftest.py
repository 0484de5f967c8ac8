import numpy as np
import pytest

from ganiqa.data import ManifestRecord


def smooth_texture(rng, size, n_waves=6):
    """Random smooth RGB texture in [0, 1] built from low-frequency waves."""
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w] / size
    img = np.zeros((h, w, 3))
    for c in range(3):
        for _ in range(n_waves):
            fy, fx = rng.uniform(0.5, 4.0, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            img[:, :, c] += rng.uniform(0.2, 1.0) * np.sin(
                2 * np.pi * (fy * yy + fx * xx) + phase
            )
    img -= img.min()
    img /= img.max()
    return img


def toy_manifest(n_contents=5, n_views=2, algorithms=("A1", "A2"), rotations=(0,)):
    records = []
    rng = np.random.default_rng(7)
    for ci in range(n_contents):
        for vi in range(n_views):
            for alg in algorithms:
                for rot in rotations:
                    records.append(
                        ManifestRecord(
                            image_path=f"img_{ci}_{vi}_{alg}.png",
                            content_id=f"c{ci}",
                            viewpoint_id=f"v{vi}",
                            algorithm_id=alg,
                            dmos=float(rng.uniform(0, 3)),
                            rotation=rot,
                        )
                    )
    return records


@pytest.fixture
def rng():
    return np.random.default_rng(0)
