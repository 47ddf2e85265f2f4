import numpy as np
import pytest

from pcnet import (ACTIVATIONS, GenerativeStack, LatentBatch, compute_errors)
from pcnet.model import derive_seed
from pcnet import inference
from pcnet.verify import (KINK_ZONE, fd_latent_grad, fd_weight_grad,
                          gradient_check, naive_errors, random_case)


def test_fd_near_zero_at_exact_fit():
    stack = GenerativeStack([np.array([[2.0], [1.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    lat = LatentBatch([np.array([[3.0]])])
    inputs = np.array([[6.0, 3.0]])
    h = 1e-6
    fd = fd_latent_grad(stack, inputs, lat, None, 1, h)
    assert np.all(np.abs(fd) < h)
    fdw = fd_weight_grad(stack, inputs, lat, None, 0, h)
    assert np.all(np.abs(fdw) < h)


def test_fd_identity_values(identity_case):
    stack, inputs, lat = identity_case
    assert np.allclose(fd_latent_grad(stack, inputs, lat, None, 1), [[1.0]],
                       atol=1e-6)
    assert np.allclose(fd_weight_grad(stack, inputs, lat, None, 0),
                       [[-3.0], [3.0]], atol=1e-6)


def test_fd_rejects_bad_step(identity_case):
    stack, inputs, lat = identity_case
    with pytest.raises(ValueError):
        fd_latent_grad(stack, inputs, lat, None, 1, h=0.0)


def test_fd_leaves_inputs_untouched(identity_case):
    stack, inputs, lat = identity_case
    w0 = stack.weights[0].copy()
    x0 = lat.x[0].copy()
    fd_latent_grad(stack, inputs, lat, None, 1)
    fd_weight_grad(stack, inputs, lat, None, 0)
    assert np.array_equal(stack.weights[0], w0)
    assert np.array_equal(lat.x[0], x0)


def test_naive_matches_fast_path():
    for trial in range(6):
        stack, inputs, lat, labels = random_case(derive_seed(55, trial),
                                                 avoid_kinks=False)
        fast = compute_errors(stack, inputs, lat, labels)
        slow = naive_errors(stack, inputs, lat, labels)
        for a, b in zip(fast.errors, slow.errors):
            assert np.max(np.abs(a - b)) <= 1e-12
        for a, b in zip(fast.gain_mod, slow.gain_mod):
            assert np.max(np.abs(a - b)) <= 1e-12
        assert np.max(np.abs(fast.top_err - slow.top_err)) <= 1e-12
        if labels is not None:
            assert np.max(np.abs(fast.sup_err - slow.sup_err)) <= 1e-12


def test_naive_exact_fit_and_identity_gain():
    stack = GenerativeStack([np.array([[2.0], [1.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    lat = LatentBatch([np.array([[3.0]])])
    b = naive_errors(stack, np.array([[6.0, 3.0]]), lat)
    assert np.all(b.errors[0] == 0.0)
    b2 = naive_errors(stack, np.array([[5.0, 1.0]]), lat)
    assert np.array_equal(b2.errors[0], b2.gain_mod[0])


def test_random_case_avoids_relu_kinks():
    for trial in range(20):
        stack, inputs, lat, labels = random_case(derive_seed(77, trial))
        bundle = compute_errors(stack, inputs, lat, labels)
        for act, pre in zip(stack.activations, bundle.preacts):
            if act.name == "relu":
                assert np.min(np.abs(pre)) >= KINK_ZONE


def test_gradient_check_passes():
    report = gradient_check(seed=1, trials=25)
    assert report.ok
    assert report.max_rel < 1e-5
    assert report.trials == 25


def test_gradient_check_zero_trials_vacuous():
    report = gradient_check(seed=0, trials=0)
    assert report.ok and report.max_rel == 0.0


def test_gradient_check_detects_sign_flip(monkeypatch):
    true_fn = inference.latent_gradients

    def flipped(bundle, stack):
        return [-g for g in true_fn(bundle, stack)]

    monkeypatch.setattr(inference, "latent_gradients", flipped)
    report = gradient_check(seed=2, trials=5)
    assert not report.ok
    f = report.failures[0]
    assert f.kind == "latent" and f.layer.startswith("x(")
    assert f.entry is not None


def test_supervised_fd_includes_readout_route():
    for trial in range(12):
        stack, inputs, lat, labels = random_case(derive_seed(91, trial))
        if labels is not None:
            break
    else:
        pytest.skip("no supervised draw")
    from pcnet.learning import readout_gradient
    bundle = compute_errors(stack, inputs, lat, labels)
    fd = fd_weight_grad(stack, inputs, lat, labels, "readout")
    analytic = readout_gradient(bundle, lat)
    scale = max(1.0, np.max(np.abs(fd)))
    assert np.max(np.abs(analytic - fd)) / scale < 1e-5
