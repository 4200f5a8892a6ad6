import random

from hypothesis import given, strategies as st
import pytest

from mlosim.engine import CancelResult, EventKind, EventQueue, MAX_TICK
from mlosim.errors import SimulationError

K = EventKind.PACKET_ARRIVAL


def test_schedule_and_pop():
    q = EventQueue()
    q.schedule(5, K, "x")
    ev = q.next()
    assert ev.fire_time == 5 and q.now == 5
    assert q.next() is None


def test_same_tick_fires_in_schedule_order():
    q = EventQueue()
    a = q.schedule(3, K, "a")
    b = q.schedule(3, K, "b")
    assert q.next() is a and q.next() is b


def test_zero_delay_ordering_by_seq():
    q = EventQueue()
    q.schedule(4, K, "early")
    q.next()
    late = q.schedule(0, K, "zero")
    assert q.next() is late and q.now == 4


def test_earlier_time_first():
    q = EventQueue()
    q.schedule(3, K, 3)
    q.schedule(1, K, 1)
    assert q.next().target == 1


def test_cancel_semantics():
    q = EventQueue()
    h = q.schedule(2, K)
    assert q.cancel(h) is CancelResult.CANCELLED
    assert q.cancel(h) is CancelResult.ALREADY_DEAD
    assert q.next() is None
    h2 = q.schedule(1, K)
    assert q.next() is h2
    assert q.cancel(h2) is CancelResult.ALREADY_DEAD


def test_negative_delay_and_overflow():
    q = EventQueue()
    with pytest.raises(ValueError):
        q.schedule(-1, K)
    with pytest.raises(SimulationError):
        q.schedule(MAX_TICK + 1, K)


def _random_workload(seed, n):
    rng = random.Random(seed)
    q = EventQueue()
    live = {}
    handles = []
    for _ in range(n):
        if handles and rng.random() < 0.3:
            h = handles.pop(rng.randrange(len(handles)))
            q.cancel(h)
            live.pop(h.seq, None)
        else:
            h = q.schedule(rng.randrange(0, 1000), K)
            handles.append(h)
            live[h.seq] = (h.fire_time, h.seq)
    popped = []
    while (ev := q.next()) is not None:
        popped.append((ev.fire_time, ev.seq))
    return popped, sorted(live.values())


def test_heap_matches_sorted_survivors():
    popped, reference = _random_workload(7, 100_000)
    assert popped == reference


def test_deterministic_pop_sequence():
    assert _random_workload(3, 5000)[0] == _random_workload(3, 5000)[0]


@given(st.lists(st.tuples(st.integers(0, 50), st.booleans()), max_size=200))
def test_clock_monotone(ops):
    q = EventQueue()
    handles = []
    for delay, cancel in ops:
        handles.append(q.schedule(delay, K))
        if cancel:
            q.cancel(handles[len(handles) // 2])
    last = 0
    while (ev := q.next()) is not None:
        assert ev.fire_time >= last
        last = ev.fire_time
