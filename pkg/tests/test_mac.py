"""DCF state machines and the three access policies, driven event by event."""

import pytest

from mlosim.errors import ProtocolViolation
from mlosim.mac import IfState
from mlosim.medium import Outcome
from mlosim.traffic import RandomStream, draw_backoff

from conftest import COLL, DIFS, EX, SLOT, inject


def test_backoff_mean_and_support():
    rng = RandomStream(11, 0, 1)
    draws = [draw_backoff(rng, 15) for _ in range(1_000_000)]
    assert rng.draws == 1_000_000
    mean = sum(draws) / len(draws)
    assert abs(mean - 7.5) < 0.05
    assert set(draws[:10_000]) == set(range(16))
    assert min(draws) == 0 and max(draws) == 15


def test_backoff_degenerate_window():
    rng = RandomStream(1, 0, 1)
    assert {draw_backoff(rng, 0) for _ in range(100)} == {0}


def test_sl_single_backoff_and_transmission(world):
    a = world.bss("A", "SL", [1], slots=[3])
    inject(a, 5)
    a.on_buffer_nonempty()
    iface = a.interfaces[0]
    assert iface.state is IfState.BACKOFF
    # fresh channel: idle since 0, countdown begins after DIFS
    assert iface.expiry.fire_time == DIFS + 3 * SLOT
    world.run(until=DIFS + 3 * SLOT)
    assert iface.state is IfState.TRANSMITTING and len(a.buffer) == 0
    world.run()
    assert len(a.rec_delivery) == 5
    assert set(a.rec_delivery) == {DIFS + 3 * SLOT + EX[5]}  # one batch, one delivery time
    assert iface.state is IfState.IDLE


def test_select_ampdu_sizes(world):
    a = world.bss("A", "SL", [1])
    inject(a, 200)
    assert len(a.select_ampdu()) == 64
    b = world.bss("B", "SL", [2])
    inject(b, 1)
    assert len(b.select_ampdu()) == 1
    c = world.bss("C", "SL", [3])
    inject(c, 64)
    batch = c.select_ampdu()
    assert len(batch) == 64 and len(c.buffer) == 0
    assert [pid for pid, _ in batch] == list(range(64))
    with pytest.raises(AssertionError):
        c.select_ampdu()


def test_on_buffer_nonempty_requires_packets(world):
    a = world.bss("A", "SL", [1])
    with pytest.raises(ProtocolViolation):
        a.on_buffer_nonempty()


def test_mlsr_starts_backoff_on_all_links(world):
    a = world.bss("A", "MLSR", [1, 2], slots=[5, 2])
    inject(a, 3)
    a.on_buffer_nonempty()
    assert [i.state for i in a.interfaces] == [IfState.BACKOFF, IfState.BACKOFF]


def test_mlsr_race_first_expiry_wins_and_sibling_cancelled(world):
    # channel 2 expires first: it transmits, channel 1 is locked out
    a = world.bss("A", "MLSR", [1, 2], slots=[9, 2], mlsr_resume=False)
    inject(a, 3)
    a.on_buffer_nonempty()
    ch1, ch2 = a.interfaces
    world.run(until=DIFS + 2 * SLOT)
    assert ch2.state is IfState.TRANSMITTING
    assert ch1.state is IfState.LOCKED_OUT and ch1.expiry is None
    assert world.medium.channel(1).records == []
    # idle notifications on channel 1 do not wake a locked-out sibling
    ch1.on_channel_idle(world.queue.now)
    assert ch1.state is IfState.LOCKED_OUT


def test_mlsr_restart_draws_fresh_backoffs_on_both(world):
    a = world.bss("A", "MLSR", [1, 2], slots=[9, 2, 4, 6], mlsr_resume=False)
    inject(a, 100)
    a.on_buffer_nonempty()
    ch1, ch2 = a.interfaces
    t_end = DIFS + 2 * SLOT + EX[64]
    world.run(until=t_end)
    assert a.rng.draws == 4  # both links redrew after the exchange
    assert ch1.state is IfState.BACKOFF and ch2.state is IfState.BACKOFF
    assert ch1.backoff_remaining == 4 and ch2.backoff_remaining == 6


def test_mlsr_resume_keeps_sibling_residual(world):
    a = world.bss("A", "MLSR", [1, 2], slots=[9, 2, 4], mlsr_resume=True)
    inject(a, 100)
    a.on_buffer_nonempty()
    ch1, ch2 = a.interfaces
    world.run(until=DIFS + 2 * SLOT)
    assert ch1.state is IfState.LOCKED_OUT and ch1.backoff_remaining == 7  # counted 2 of 9
    world.run(until=DIFS + 2 * SLOT + EX[64])
    assert a.rng.draws == 3  # only the transmitting link redrew
    assert ch1.state is IfState.BACKOFF and ch1.backoff_remaining == 7
    assert ch2.backoff_remaining == 4


def test_mlsr_never_two_transmissions(world):
    a = world.bss("A", "MLSR", [1, 2, 3], slots=[1, 1, 1] * 50)
    inject(a, 640)
    a.on_buffer_nonempty()
    while world.queue.peek_time() is not None:
        world.run(until=world.queue.peek_time())
        assert sum(i.state is IfState.TRANSMITTING for i in a.interfaces) <= 1
    assert a.max_active_tx == 1
    assert len(a.rec_delivery) == 640


def test_mlmr_only_idle_interfaces_start(world):
    a = world.bss("A", "MLMR", [1, 2], slots=[0, 15, 3])
    inject(a, 64)
    a.on_buffer_nonempty()
    ch1, ch2 = a.interfaces
    world.run(until=DIFS)
    assert ch1.state is IfState.TRANSMITTING
    inject(a, 1)
    a.on_buffer_nonempty()
    assert ch1.state is IfState.TRANSMITTING  # untouched
    assert ch2.state is IfState.BACKOFF


def test_mlmr_concurrent_transmissions(world):
    a = world.bss("A", "MLMR", [1, 2], slots=[1, 4])
    inject(a, 100)
    a.on_buffer_nonempty()
    ch1, ch2 = a.interfaces
    world.run(until=DIFS + 4 * SLOT)
    assert ch1.state is IfState.TRANSMITTING and ch2.state is IfState.TRANSMITTING
    assert len(ch1.batch) == 64 and len(ch2.batch) == 36
    assert a.max_active_tx == 2


def test_empty_buffer_at_expiry_returns_idle(world):
    a = world.bss("A", "MLMR", [1, 2], slots=[0, 5])
    inject(a, 10)
    a.on_buffer_nonempty()
    ch1, ch2 = a.interfaces
    world.run(until=DIFS + 5 * SLOT)
    assert ch1.state is IfState.TRANSMITTING
    assert ch2.state is IfState.IDLE  # buffer drained by channel 1
    assert world.medium.channel(2).records == []


def test_freeze_and_resume_after_difs(world):
    a = world.bss("A", "SL", [1], slots=[8])
    b = world.bss("B", "SL", [1], slots=[3], index=1)
    inject(a, 1)
    inject(b, 1)
    a.on_buffer_nonempty()
    b.on_buffer_nonempty()
    ia = a.interfaces[0]
    world.run(until=DIFS + 3 * SLOT)  # B seizes after 3 slots
    assert ia.state is IfState.FROZEN and ia.backoff_remaining == 5
    t_idle = DIFS + 3 * SLOT + EX[1]
    world.run(until=t_idle)
    assert ia.state is IfState.BACKOFF
    assert ia.expiry.fire_time == t_idle + DIFS + 5 * SLOT


def test_busy_during_difs_restarts_difs(world):
    a = world.bss("A", "SL", [1], slots=[2])
    b = world.bss("B", "SL", [1], slots=[0], index=1)
    inject(a, 1)
    a.on_buffer_nonempty()
    ia = a.interfaces[0]
    # first busy period, then B grabs the channel right after it idles
    world.medium.seize(1, b.interfaces[0], 1)
    b.interfaces[0].state = IfState.TRANSMITTING
    b.interfaces[0].batch = []
    world.run(until=0)
    assert ia.state is IfState.FROZEN and ia.backoff_remaining == 2
    world.run(until=EX[1])
    assert ia.state is IfState.BACKOFF and ia.pending_difs
    t = EX[1] + DIFS // 2
    world.queue.now = t
    ia.on_channel_busy(t)
    assert ia.state is IfState.FROZEN and ia.backoff_remaining == 2  # no slot consumed


def test_same_slot_contenders_collide_and_retry(world):
    a = world.bss("A", "SL", [1], slots=[4, 1])
    b = world.bss("B", "SL", [1], slots=[4, 6], index=1)
    inject(a, 20)
    inject(b, 7)
    a.on_buffer_nonempty()
    b.on_buffer_nonempty()
    t_rts = DIFS + 4 * SLOT
    world.run(until=t_rts)
    assert len(a.buffer) == 0 and len(b.buffer) == 0
    world.run(until=t_rts + COLL)
    # batches restored intact and in order; collisions counted on both
    assert [p for p, _ in a.buffer.queue] == list(range(20))
    assert len(b.buffer) == 7
    assert a.interfaces[0].collisions == b.interfaces[0].collisions == 1
    world.run()
    assert len(a.rec_delivery) == 20 and len(b.rec_delivery) == 7


def test_delivered_batch_has_common_delivery_time(world):
    a = world.bss("A", "SL", [1], slots=[0])
    inject(a, 64)
    a.on_buffer_nonempty()
    world.run()
    assert len(a.rec_delivery) == 64 and len(set(a.rec_delivery)) == 1


def test_exchange_end_without_transmission_is_violation(world):
    a = world.bss("A", "SL", [1])
    with pytest.raises(ProtocolViolation):
        a.on_exchange_end(a.interfaces[0], Outcome.DELIVERED)


def test_exponential_backoff_window_grows(world):
    a = world.bss("A", "SL", [1], exponential_backoff=True)
    iface = a.interfaces[0]
    assert a._cw(iface) == 15
    iface.retries = 2
    assert a._cw(iface) == 63
    iface.retries = 10
    assert a._cw(iface) == 1023
