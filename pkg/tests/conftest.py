import numpy as np
import pytest

from ompt import available_backends, normalize_columns, use_backend


@pytest.fixture(params=available_backends())
def backend(request):
    """Run a test under every available solver backend."""
    with use_backend(request.param):
        yield request.param


def random_dictionary(rng, n, d):
    return normalize_columns(rng.standard_normal((n, d)))


def perturbed_orthonormal(rng, n, d=None, sigma=0.1):
    """Mildly coherent dictionary: random orthonormal columns plus noise.

    Keeps delta_k small, so the guarantee conditions are satisfiable at
    desk scale, unlike raw Gaussian dictionaries at these sizes.
    """
    d = n if d is None else d
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    base = q[:, :d] if d <= n else np.hstack([q, rng.standard_normal((n, d - n))])
    return normalize_columns(base + sigma * rng.standard_normal((n, d)))
