import numpy as np
import pytest

from pcnet import (ACTIVATIONS, GenerativeStack, LatentBatch, kernels)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Jit compilation happens once here instead of inside timed tests.
    kernels.warmup()


@pytest.fixture
def identity_case():
    """L=1 identity net with a hand-checkable snapshot.

    W(0) = [[1],[2]], X(1) = [[3]], input = [[4,5]]:
    preact [[3,6]], errors [[1,-1]], gains [[1,-1]].
    """
    stack = GenerativeStack([np.array([[1.0], [2.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    latents = LatentBatch([np.array([[3.0]])])
    inputs = np.array([[4.0, 5.0]])
    return stack, inputs, latents


@pytest.fixture
def relu_case():
    """L=1 relu net: W(0) = [[-1],[2]], X(1) = [[1]], input = [[1,1]]:
    preact [[-1,2]], errors [[1,-1]], gains [[0,-1]]."""
    stack = GenerativeStack([np.array([[-1.0], [2.0]])], np.zeros((1, 1)))
    latents = LatentBatch([np.array([[1.0]])])
    inputs = np.array([[1.0, 1.0]])
    return stack, inputs, latents
