import pytest

from specauction import (
    CONFLICT_PACKER,
    InputError,
    dumps_instance,
    dumps_outcome,
    loads_instance,
    outcome_from_dict,
    outcome_to_dict,
    run_mechanism,
)
from specauction.harness import InstanceSpec, generate_instance, generate_values


@pytest.mark.parametrize(
    "env,kwargs",
    [
        ("pc", {}),
        ("fixed-power", {"scheme": "square-root"}),
        ("conflict", {"density": 0.4}),
        ("secondary", {"density": 0.1}),
    ],
)
def test_round_trip_is_lossless(env, kwargs):
    spec = InstanceSpec(environment=env, n=5, channels=2, **kwargs)
    instance = generate_instance(spec, 99)
    assert loads_instance(dumps_instance(instance)) == instance


def test_round_trip_twice_is_stable():
    instance = generate_instance(InstanceSpec(environment="pc", n=4), 1)
    text = dumps_instance(instance)
    assert dumps_instance(loads_instance(text)) == text


def test_outcome_round_trip():
    instance = generate_instance(InstanceSpec(environment="conflict", n=5), 2)
    values = generate_values(5, 3)
    outcome = run_mechanism(instance, values, 0.1, CONFLICT_PACKER, seed=4)
    assert outcome_from_dict(outcome_to_dict(outcome)) == outcome
    # the serialized record carries the tape seed for replay
    assert outcome_to_dict(outcome)["tape"]["seed"] == 4


def test_outcome_replay_from_serialized_tape():
    instance = generate_instance(InstanceSpec(environment="conflict", n=5), 2)
    values = generate_values(5, 3)
    outcome = run_mechanism(instance, values, 0.1, CONFLICT_PACKER, seed=4)
    replayed = run_mechanism(
        instance, values, 0.1, CONFLICT_PACKER, seed=outcome_to_dict(outcome)["tape"]["seed"]
    )
    assert dumps_outcome(replayed) == dumps_outcome(outcome)


def test_malformed_documents_rejected():
    with pytest.raises(InputError):
        loads_instance('{"channels": 1}')
    with pytest.raises(InputError):
        loads_instance(
            '{"links": [], "channels": 1, "params": {"alpha": 2, "beta": 1, "noise": 0},'
            ' "environment": {"type": "warp-drive"}}'
        )
    with pytest.raises(InputError):
        outcome_from_dict({"price": 0.0})
