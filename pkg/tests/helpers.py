import numpy as np


def random_sphere_points(d: int, shape, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(shape + (d,))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)
