import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcnet import (EnergyRecord, EnergyTrace, ModelConfig, compute_errors,
                   init_latents, init_weights, one_hot, record, total_energy)
from pcnet.energy import TraceOrderError


def _snapshot(batch=3, seed=0, supervised=False):
    cfg = ModelConfig(dims=(5, 4, 3), output_dim=2, activation="tanh")
    stack = init_weights(cfg, seed)
    lat = init_latents(cfg, batch, seed + 1)
    rng = np.random.default_rng(seed + 2)
    inputs = rng.uniform(0, 1, (batch, 5))
    labels = one_hot(rng.integers(0, 2, batch), 2) if supervised else None
    return stack, inputs, lat, labels


def test_total_energy_zero_at_exact_fit():
    from pcnet import ACTIVATIONS, GenerativeStack, LatentBatch
    stack = GenerativeStack([np.array([[2.0], [1.0]])], np.zeros((1, 1)),
                            [ACTIVATIONS["identity"]])
    bundle = compute_errors(stack, np.array([[6.0, 3.0]]),
                            LatentBatch([np.array([[3.0]])]))
    assert total_energy(bundle) == 0.0


def test_total_energy_hand_value(identity_case):
    stack, inputs, lat = identity_case        # errors (1, -1)
    bundle = compute_errors(stack, inputs, lat)
    assert total_energy(bundle) == pytest.approx(1.0)


def test_total_energy_includes_supervised_term(identity_case):
    stack, inputs, lat = identity_case
    stack = stack.copy()
    stack.readout = np.array([[2.0]])
    bundle = compute_errors(stack, inputs, lat, labels=np.array([[4.0]]))
    # 1.0 from the layer errors + 0.5 * (6 - 4)^2 = 3.0
    assert total_energy(bundle) == pytest.approx(3.0)


def test_duplicating_rows_leaves_energy_unchanged():
    stack, inputs, lat, labels = _snapshot(batch=2, supervised=True)
    e1 = total_energy(compute_errors(stack, inputs, lat, labels))
    from pcnet import LatentBatch
    lat2 = LatentBatch([np.vstack([x, x]) for x in lat.x])
    e2 = total_energy(compute_errors(stack, np.vstack([inputs, inputs]),
                                     lat2, np.vstack([labels, labels])))
    assert e1 == pytest.approx(e2, rel=1e-14)


@given(st.integers(0, 1000))
@settings(max_examples=15, deadline=None)
def test_energy_invariant_under_sample_permutation(seed):
    stack, inputs, lat, labels = _snapshot(batch=4, seed=7, supervised=True)
    base = total_energy(compute_errors(stack, inputs, lat, labels))
    perm = np.random.default_rng(seed).permutation(4)
    from pcnet import LatentBatch
    shuffled = total_energy(compute_errors(
        stack, inputs[perm], LatentBatch([x[perm] for x in lat.x]),
        labels[perm]))
    assert base == pytest.approx(shuffled, rel=1e-13)


# -- trace bookkeeping --------------------------------------------------------

def test_record_appends():
    trace = EnergyTrace()
    record(trace, 0, 0, 0, "infer", 1.5)
    assert len(trace) == 1
    record(trace, 0, 0, 1, "infer", 1.4)
    assert len(trace) == 2


def test_record_rejects_step_regression():
    trace = EnergyTrace()
    record(trace, 0, 0, 1, "infer", 1.0)
    with pytest.raises(TraceOrderError):
        record(trace, 0, 0, 0, "infer", 1.0)


def test_record_rejects_phase_reversal():
    trace = EnergyTrace()
    record(trace, 0, 0, 0, "infer", 1.0)
    record(trace, 0, 0, 1, "learn", 0.9)
    with pytest.raises(TraceOrderError):
        record(trace, 0, 0, 2, "infer", 0.8)


def test_record_rejects_negative_energy_and_bad_phase():
    trace = EnergyTrace()
    with pytest.raises(TraceOrderError):
        record(trace, 0, 0, 0, "infer", -0.1)
    with pytest.raises(TraceOrderError):
        record(trace, 0, 0, 0, "settle", 0.1)


def test_new_batch_resets_step_counter():
    trace = EnergyTrace()
    record(trace, 0, 0, 5, "learn", 1.0)
    record(trace, 0, 1, 0, "infer", 2.0)   # fresh batch: fine
    record(trace, 1, 0, 0, "infer", 2.0)   # fresh epoch: fine
    assert len(trace) == 3


def test_csv_export_format(tmp_path):
    trace = EnergyTrace()
    record(trace, 0, 0, 0, "infer", 1.23456789012)
    record(trace, 0, 0, 1, "learn", 0.0001)
    path = tmp_path / "trace.csv"
    trace.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,batch,step,phase,energy"
    assert lines[1] == "0,0,0,infer,1.23456789"
    assert lines[2] == "0,0,1,learn,0.0001"
    assert len(lines) == 3


def test_trace_is_iterable():
    trace = EnergyTrace()
    record(trace, 0, 0, 0, "infer", 2.0)
    recs = list(trace)
    assert recs == [EnergyRecord(0, 0, 0, "infer", 2.0)]
