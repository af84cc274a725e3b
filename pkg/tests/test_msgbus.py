import pytest

from windfleet.errors import MembershipError, ProtocolViolationError
from windfleet.msgbus import SyncBus, gossip_visited


def test_singleton_receives_own_payload():
    bus = SyncBus([7])
    bus.broadcast(7, "hello", {"x": 1})
    assert bus.gather(7) == {7: {"x": 1}}


def test_three_agents_full_exchange():
    bus = SyncBus([3, 1, 2])
    gathered = bus.exchange("hello", {1: 1, 2: 2, 3: 3})
    for agent in (1, 2, 3):
        assert gathered[agent] == {1: 1, 2: 2, 3: 3}
        assert list(gathered[agent]) == [1, 2, 3]  # ascending sender order


def test_every_inbox_has_exactly_n_entries_over_many_rounds(rng):
    ids = [1, 2, 3, 4, 5]
    bus = SyncBus(ids)
    for r in range(1000):
        payloads = {a: int(rng.integers(0, 100)) for a in ids}
        gathered = bus.exchange("data", payloads)
        for a in ids:
            assert len(gathered[a]) == len(ids)
            assert gathered[a] == payloads
    assert bus.round_id == 1000


def test_double_broadcast_rejected():
    bus = SyncBus([1, 2])
    bus.broadcast(1, "hello", None)
    with pytest.raises(ProtocolViolationError):
        bus.broadcast(1, "hello", None)


def test_unregistered_agent_rejected():
    bus = SyncBus([1, 2])
    with pytest.raises(MembershipError):
        bus.broadcast(3, "hello", None)
    with pytest.raises(MembershipError):
        bus.gather(3)


def test_gather_before_round_complete_rejected():
    bus = SyncBus([1, 2])
    bus.broadcast(1, "hello", None)
    with pytest.raises(ProtocolViolationError):
        bus.gather(1)


def test_double_gather_rejected():
    bus = SyncBus([1, 2])
    bus.broadcast(1, "hello", None)
    bus.broadcast(2, "hello", None)
    bus.gather(1)
    with pytest.raises(ProtocolViolationError):
        bus.gather(1)


def test_round_id_advances_after_full_round():
    bus = SyncBus([1])
    assert bus.round_id == 0
    bus.exchange("x", {1: None})
    assert bus.round_id == 1


def test_payloads_must_serialize():
    bus = SyncBus([1])
    with pytest.raises(TypeError):
        bus.broadcast(1, "bad", {1, 2, 3})  # sets are not JSON


def test_gossip_empty_sets():
    bus = SyncBus([1, 2])
    assert gossip_visited(bus, {1: set(), 2: set()}) == set()


def test_gossip_merges_disjoint_sets():
    bus = SyncBus([1, 2])
    merged = gossip_visited(bus, {1: {10}, 2: {20}})
    assert merged == {10, 20}


def test_gossip_is_idempotent():
    bus = SyncBus([1, 2, 3])
    first = gossip_visited(bus, {1: {1, 2}, 2: {2, 3}, 3: set()})
    second = gossip_visited(bus, {a: first for a in (1, 2, 3)})
    assert second == first == {1, 2, 3}
