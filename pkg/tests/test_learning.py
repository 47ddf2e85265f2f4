import numpy as np
import pytest

from pcnet import (ACTIVATIONS, ConfigError, GenerativeStack, LatentBatch,
                   LearnSettings, ModeError, ModelConfig, apply_updates,
                   compute_errors, init_latents, init_weights, one_hot,
                   readout_gradient, run_learning, weight_gradients)
from pcnet.model import derive_seed
from pcnet.verify import fd_weight_grad, random_case


def test_settings_validation():
    with pytest.raises(ConfigError):
        LearnSettings(t_learn=0)
    with pytest.raises(ConfigError):
        LearnSettings(eta_learn=-1.0)
    assert LearnSettings().t_learn is None  # resolved to B at run time


def test_weight_gradients_zero_at_exact_fit():
    stack = GenerativeStack([np.array([[2.0], [1.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    lat = LatentBatch([np.array([[3.0]])])
    inputs = np.array([[6.0, 3.0]])
    bundle = compute_errors(stack, inputs, lat)
    assert np.all(weight_gradients(bundle, lat, inputs)[0] == 0.0)


def test_weight_gradients_identity_example(identity_case):
    stack, inputs, lat = identity_case
    bundle = compute_errors(stack, inputs, lat)
    grads = weight_gradients(bundle, lat, inputs)
    assert np.allclose(grads[0], [[-3.0], [3.0]])
    fd = fd_weight_grad(stack, inputs, lat, None, 0)
    assert np.allclose(grads[0], fd, rtol=1e-6, atol=1e-9)


def test_weight_gradients_relu_example(relu_case):
    stack, inputs, lat = relu_case
    bundle = compute_errors(stack, inputs, lat)
    grads = weight_gradients(bundle, lat, inputs)
    assert np.allclose(grads[0], [[0.0], [1.0]])
    fd = fd_weight_grad(stack, inputs, lat, None, 0)
    assert np.allclose(grads[0], fd, rtol=1e-6, atol=1e-9)


def test_readout_gradient_examples():
    stack = GenerativeStack([np.zeros((2, 1))], np.array([[2.0]]),
                            [ACTIVATIONS["identity"]])
    lat = LatentBatch([np.array([[3.0]])])
    inputs = np.zeros((1, 2))
    # sup_pred = 6, label 4 -> sup_err = 2, grad = 2 * 3 = 6
    bundle = compute_errors(stack, inputs, lat, labels=np.array([[4.0]]))
    assert np.array_equal(bundle.sup_err, [[2.0]])
    assert np.allclose(readout_gradient(bundle, lat), [[6.0]])
    fd = fd_weight_grad(stack, inputs, lat, np.array([[4.0]]), "readout")
    assert np.allclose(readout_gradient(bundle, lat), fd, rtol=1e-6, atol=1e-9)


def test_readout_gradient_zero_when_prediction_matches():
    stack = GenerativeStack([np.zeros((2, 1))], np.array([[2.0]]),
                            [ACTIVATIONS["identity"]])
    lat = LatentBatch([np.array([[3.0]])])
    bundle = compute_errors(stack, np.zeros((1, 2)), lat, labels=np.array([[6.0]]))
    assert np.all(readout_gradient(bundle, lat) == 0.0)


def test_readout_gradient_requires_supervised_snapshot(identity_case):
    stack, inputs, lat = identity_case
    bundle = compute_errors(stack, inputs, lat)
    with pytest.raises(ModeError):
        readout_gradient(bundle, lat)


def test_duplicated_rows_leave_gradients_unchanged():
    cfg = ModelConfig(dims=(5, 4, 2), output_dim=3, activation="tanh")
    stack = init_weights(cfg, 1)
    rng = np.random.default_rng(2)
    x_single = LatentBatch([rng.standard_normal((1, 4)),
                            rng.standard_normal((1, 2))])
    inp_single = rng.uniform(0, 1, (1, 5))
    lab_single = one_hot([1], 3)
    b1 = compute_errors(stack, inp_single, x_single, lab_single)
    g1 = weight_gradients(b1, x_single, inp_single)
    r1 = readout_gradient(b1, x_single)

    reps = 4
    x_dup = LatentBatch([np.repeat(x, reps, axis=0) for x in x_single.x])
    inp_dup = np.repeat(inp_single, reps, axis=0)
    lab_dup = np.repeat(lab_single, reps, axis=0)
    b4 = compute_errors(stack, inp_dup, x_dup, lab_dup)
    g4 = weight_gradients(b4, x_dup, inp_dup)
    r4 = readout_gradient(b4, x_dup)
    for a, b in zip(g1, g4):
        assert np.allclose(a, b, rtol=0, atol=1e-15)
    assert np.allclose(r1, r4, rtol=0, atol=1e-15)


def test_gradient_locality():
    cfg = ModelConfig(dims=(5, 4, 3, 2), output_dim=2)
    stack = init_weights(cfg, 5)
    lat = init_latents(cfg, 2, 6)
    inputs = np.random.default_rng(7).uniform(0, 1, (2, 5))
    bundle = compute_errors(stack, inputs, lat)
    target = weight_gradients(bundle, lat, inputs)[1]  # G_W(1)

    # Perturb everything G_W(1) must not depend on: other weights, other
    # latents, the readout.
    other = stack.copy()
    other.weights[0] += 10.0
    other.weights[2] -= 3.0
    other.readout += 5.0
    lat2 = lat.copy()
    lat2.x[2] += 2.0  # X(3) feeds W(2), not W(1)
    bundle2 = compute_errors(other, inputs, lat2)
    again = weight_gradients(bundle2, lat2, inputs)[1]
    assert np.array_equal(target, again)


def test_apply_updates_examples():
    stack = GenerativeStack([np.array([[1.0], [2.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    zero = [np.zeros((2, 1))]
    same = apply_updates(stack, zero, None, 0.1)
    assert np.array_equal(same.weights[0], stack.weights[0])
    grads = [np.array([[-3.0], [3.0]])]
    stepped = apply_updates(stack, grads, None, 0.1)
    assert np.allclose(stepped.weights[0], [[1.3], [1.7]])
    frozen = apply_updates(stack, grads, None, 0.0)
    assert np.array_equal(frozen.weights[0], stack.weights[0])
    # the input stack is never touched
    assert np.array_equal(stack.weights[0], [[1.0], [2.0]])


def test_run_learning_fixed_point():
    stack = GenerativeStack([np.array([[2.0], [1.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    lat = LatentBatch([np.array([[3.0]])])
    inputs = np.array([[6.0, 3.0]])
    out, energies = run_learning(stack, inputs, lat, None,
                                 LearnSettings(t_learn=7, eta_learn=0.01))
    assert np.array_equal(out.weights[0], stack.weights[0])
    assert energies == [0.0] * 8


def test_run_learning_energy_non_increasing():
    cfg = ModelConfig(dims=(6, 4, 3), output_dim=2, activation="tanh")
    stack = init_weights(cfg, 8)
    lat = init_latents(cfg, 3, 9)
    inputs = np.random.default_rng(10).uniform(0, 1, (3, 6))
    labels = one_hot([0, 1, 0], 2)
    _, energies = run_learning(stack, inputs, lat, labels,
                               LearnSettings(t_learn=50, eta_learn=1e-4))
    assert len(energies) == 51
    assert np.all(np.diff(energies) <= 1e-12)


def test_t_learn_defaults_to_batch_size():
    cfg = ModelConfig(dims=(4, 3), output_dim=2)
    stack = init_weights(cfg, 11)
    lat = init_latents(cfg, 5, 12)
    inputs = np.random.default_rng(13).uniform(0, 1, (5, 4))
    _, energies = run_learning(stack, inputs, lat, None,
                               LearnSettings(eta_learn=1e-4))
    assert len(energies) == 5 + 1


def test_single_learning_step_matches_manual_update():
    stack, inputs, lat, labels = random_case(derive_seed(40, 0))
    bundle = compute_errors(stack, inputs, lat, labels)
    grads = weight_gradients(bundle, lat, inputs)
    ro = readout_gradient(bundle, lat) if labels is not None else None
    manual = apply_updates(stack, grads, ro, 0.01)
    auto, _ = run_learning(stack, inputs, lat, labels,
                           LearnSettings(t_learn=1, eta_learn=0.01))
    for a, b in zip(manual.weights, auto.weights):
        assert np.array_equal(a, b)
    assert np.array_equal(manual.readout, auto.readout)


def test_weight_gradients_match_fd_on_random_nets():
    for trial in range(8):
        stack, inputs, lat, labels = random_case(derive_seed(41, trial))
        bundle = compute_errors(stack, inputs, lat, labels)
        grads = weight_gradients(bundle, lat, inputs)
        for l in range(stack.num_layers):
            fd = fd_weight_grad(stack, inputs, lat, labels, l)
            scale = max(1.0, np.max(np.abs(fd)))
            assert np.max(np.abs(grads[l] - fd)) / scale < 1e-5
