"""JSON serialization of instances and outcomes.

The instance document has fields ``links`` (array of ``{id, sender:[x,y],
receiver:[x,y]}``), ``channels``, ``params`` (``{alpha, beta, noise}``) and a
tagged ``environment`` union; secondary-network instances replace ``links``
and ``params`` with ``bidders`` and ``conflict``.  Round-trips are lossless
for all finite values (floats travel through their shortest repr).  Outcome
documents embed the full random tape, so any outcome can be replayed from its
file alone plus the instance.
"""

from __future__ import annotations

import json
from pathlib import Path

from .mechanism import Outcome, RandomTape
from .model import (
    Allocation,
    AnyInstance,
    BidderNetwork,
    ConflictGraph,
    FixedPower,
    InputError,
    Instance,
    Link,
    PhysicalParams,
    PowerControl,
    SecondaryNetworkInstance,
)


def instance_to_dict(instance: AnyInstance) -> dict:
    if isinstance(instance, SecondaryNetworkInstance):
        return {
            "channels": instance.channels,
            "environment": {"type": "secondary-network"},
            "bidders": [
                {
                    "id": b.id,
                    "nodes": list(b.nodes),
                    "source": b.source,
                    "destination": b.dest,
                    "edges": [list(e) for e in b.edges],
                }
                for b in instance.bidders
            ],
            "conflict": sorted(
                [list(a), list(b)] for a, b in instance.conflict
            ),
        }
    env = instance.environment
    if isinstance(env, PowerControl):
        env_doc: dict = {"type": "power-control"}
    elif isinstance(env, FixedPower):
        env_doc = {"type": "fixed-power", "scheme": env.scheme, "base_power": env.base_power}
    else:
        assert isinstance(env, ConflictGraph)
        env_doc = {"type": "conflict-graph", "edges": sorted(list(e) for e in env.edges)}
    return {
        "links": [
            {"id": link.id, "sender": list(link.sender), "receiver": list(link.receiver)}
            for link in instance.links
        ],
        "channels": instance.channels,
        "params": {
            "alpha": instance.params.alpha,
            "beta": instance.params.beta,
            "noise": instance.params.noise,
        },
        "environment": env_doc,
    }


def instance_from_dict(doc: dict) -> AnyInstance:
    try:
        env_doc = doc["environment"]
        env_type = env_doc["type"]
        if env_type == "secondary-network":
            bidders = tuple(
                BidderNetwork(
                    id=b["id"],
                    nodes=tuple(b["nodes"]),
                    edges=tuple((u, v) for u, v in b["edges"]),
                    source=b["source"],
                    dest=b["destination"],
                )
                for b in doc["bidders"]
            )
            conflict = frozenset(
                (tuple(a), tuple(b)) for a, b in doc["conflict"]
            )
            return SecondaryNetworkInstance(
                bidders=bidders, channels=doc["channels"], conflict=conflict
            )
        links = tuple(
            Link(id=l["id"], sender=tuple(l["sender"]), receiver=tuple(l["receiver"]))
            for l in doc["links"]
        )
        params = PhysicalParams(**doc["params"])
        if env_type == "power-control":
            environment: PowerControl | FixedPower | ConflictGraph = PowerControl()
        elif env_type == "fixed-power":
            environment = FixedPower(scheme=env_doc["scheme"], base_power=env_doc["base_power"])
        elif env_type == "conflict-graph":
            environment = ConflictGraph.from_pairs((a, b) for a, b in env_doc["edges"])
        else:
            raise InputError(f"unknown environment type {env_type!r}")
        return Instance(
            links=links, channels=doc["channels"], params=params, environment=environment
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed instance document: {exc}") from exc


def dumps_instance(instance: AnyInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n"


def loads_instance(text: str) -> AnyInstance:
    return instance_from_dict(json.loads(text))


def save_instance(instance: AnyInstance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance), encoding="utf-8")


def load_instance(path: str | Path) -> AnyInstance:
    try:
        return loads_instance(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read instance from {path}: {exc}") from exc


def outcome_to_dict(outcome: Outcome) -> dict:
    allocation = outcome.allocation
    doc = {
        "n": len(outcome.payments),
        "channels": len(allocation.channel_winners),
        "price": outcome.price,
        "payments": list(outcome.payments),
        "removed_pre": sorted(outcome.removed_pre),
        "tape": {
            "seed": outcome.tape.seed,
            "secprice": outcome.tape.secprice,
            "stat_flags": list(outcome.tape.stat_flags),
            "price_exponent": outcome.tape.price_exponent,
        },
        "allocation": {
            "channel_winners": [sorted(group) for group in allocation.channel_winners],
            "powers": None
            if allocation.powers is None
            else {str(i): p for i, p in sorted(allocation.powers.items())},
            "paths": None
            if allocation.paths is None
            else {
                str(i): [list(step) for step in path]
                for i, path in sorted(allocation.paths.items())
            },
        },
    }
    return doc


def outcome_from_dict(doc: dict) -> Outcome:
    try:
        alloc_doc = doc["allocation"]
        powers = alloc_doc["powers"]
        paths = alloc_doc["paths"]
        allocation = Allocation(
            channel_winners=tuple(frozenset(g) for g in alloc_doc["channel_winners"]),
            powers=None if powers is None else {int(i): p for i, p in powers.items()},
            paths=None
            if paths is None
            else {
                int(i): tuple((e, c) for e, c in path) for i, path in paths.items()
            },
        )
        tape_doc = doc["tape"]
        tape = RandomTape(
            secprice=tape_doc["secprice"],
            stat_flags=tuple(bool(f) for f in tape_doc["stat_flags"]),
            price_exponent=tape_doc["price_exponent"],
            seed=tape_doc["seed"],
        )
        return Outcome(
            allocation=allocation,
            payments=tuple(doc["payments"]),
            price=doc["price"],
            tape=tape,
            removed_pre=frozenset(doc["removed_pre"]),
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed outcome document: {exc}") from exc


def dumps_outcome(outcome: Outcome) -> str:
    return json.dumps(outcome_to_dict(outcome), indent=2, sort_keys=True) + "\n"
