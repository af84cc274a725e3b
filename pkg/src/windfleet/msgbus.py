"""Deterministic synchronous round-based broadcast bus.

One round = every registered agent broadcasts exactly one payload, then
every agent gathers the full sender-keyed map.  The bus is a lockstep
simulation of the synchronous failure-free model: no sockets, no delay, but
the same interface a transport-backed implementation would expose.

Payloads cross the "wire" as versioned JSON (sorted keys), so anything an
agent sends must survive serialization; gathered maps iterate in ascending
sender id.

Wire schema (version 1)::

    {"v": 1, "round": <int>, "sender": <int>, "kind": <str>, "body": ...}

``kind`` values used by the routing stack: "hello" (position + visited
node list), "claims" (node id list), "bids" (node id -> fixed-precision
decimal string), "visited" (node id list).
"""

import json
from typing import Any, Dict, Iterable, List, Set

from .errors import MembershipError, ProtocolViolationError
from .hexgrid import NodeId, UavId

WIRE_VERSION = 1


class SyncBus:
    def __init__(self, agent_ids: Iterable[UavId]):
        self._agents = sorted(int(a) for a in agent_ids)
        if not self._agents:
            raise ValueError("bus needs at least one agent")
        if len(set(self._agents)) != len(self._agents):
            raise ValueError("duplicate agent ids")
        self.round_id = 0
        self._wire: Dict[UavId, str] = {}
        self._gathered: Set[UavId] = set()

    @property
    def agents(self) -> List[UavId]:
        return list(self._agents)

    def broadcast(self, sender: UavId, kind: str, body: Any) -> None:
        if sender not in self._agents:
            raise MembershipError(f"agent {sender} is not registered on the bus")
        if sender in self._wire:
            raise ProtocolViolationError(f"agent {sender} broadcast twice in round {self.round_id}")
        msg = {"v": WIRE_VERSION, "round": self.round_id, "sender": sender, "kind": kind, "body": body}
        self._wire[sender] = json.dumps(msg, sort_keys=True)

    def ready(self) -> bool:
        return len(self._wire) == len(self._agents)

    def gather(self, agent: UavId) -> Dict[UavId, Any]:
        """Deliver the round to ``agent``: {sender: body} in ascending id order."""
        if agent not in self._agents:
            raise MembershipError(f"agent {agent} is not registered on the bus")
        if not self.ready():
            raise ProtocolViolationError(
                f"round {self.round_id} incomplete: {len(self._wire)}/{len(self._agents)} broadcasts"
            )
        if agent in self._gathered:
            raise ProtocolViolationError(f"agent {agent} gathered twice in round {self.round_id}")
        self._gathered.add(agent)
        out = {}
        for sender in self._agents:
            msg = json.loads(self._wire[sender])
            out[sender] = msg["body"]
        if len(self._gathered) == len(self._agents):
            self._wire.clear()
            self._gathered.clear()
            self.round_id += 1
        return out

    def exchange(self, kind: str, payloads: Dict[UavId, Any]) -> Dict[UavId, Dict[UavId, Any]]:
        """Run one full round from a lockstep driver.

        ``payloads`` must cover every registered agent; returns the gathered
        map per agent (all identical content, fresh objects).
        """
        for agent in self._agents:
            if agent not in payloads:
                raise ProtocolViolationError(f"agent {agent} missing from round {self.round_id}")
        for agent in self._agents:
            self.broadcast(agent, kind, payloads[agent])
        return {agent: self.gather(agent) for agent in self._agents}


def gossip_visited(bus: SyncBus, visited_by_agent: Dict[UavId, Set[NodeId]]) -> Set[NodeId]:
    """Share visited-node sets over one round; returns the merged set.

    Idempotent: repeating the round with the merged sets yields the same
    result.
    """
    payloads = {a: sorted(visited_by_agent.get(a, ())) for a in bus.agents}
    gathered = bus.exchange("visited", payloads)
    merged: Set[NodeId] = set()
    for inbox in gathered.values():
        for nodes in inbox.values():
            merged.update(nodes)
        break  # all inboxes carry identical content
    return merged
