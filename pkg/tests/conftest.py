import pytest

from mlosim.engine import EventQueue
from mlosim.mac import AccessPolicy, Bss
from mlosim.medium import Medium
from mlosim.phy import PhyMacParams, collision_duration, exchange_table, us_to_ticks
from mlosim.traffic import TrafficMode

P = PhyMacParams()
SLOT = us_to_ticks(P.slot)
DIFS = us_to_ticks(P.difs)
EX = [us_to_ticks(d) for d in exchange_table(P)]
COLL = us_to_ticks(collision_duration(P))


class ScriptedRng:
    """Backoff stream returning the scripted slot counts for cw_min=15."""

    def __init__(self, slots):
        self.slots = list(slots)
        self.draws = 0

    def uniform(self):
        k = self.slots.pop(0) if self.slots else 7
        self.draws += 1
        return (k + 0.5) / 16


class ManualSource:
    """No automatic arrivals; tests push packets with ``inject``."""

    mode = TrafficMode.FULL_BUFFER
    next_arrival = 0

    def __init__(self):
        self.generated = 0

    def pull(self, now, buffer):
        pass


def inject(bss, n, t=None):
    t = bss.queue.now if t is None else t
    for _ in range(n):
        bss.buffer.admit((bss.source.generated, t))
        bss.source.generated += 1


class World:
    def __init__(self):
        self.queue = EventQueue()
        self.medium = Medium(self.queue, (1, 2, 3), EX, COLL)

    def bss(self, name, policy, channels, slots=(), index=0, **kw):
        return Bss(name, index, AccessPolicy(policy), list(channels), self.queue, self.medium,
                   ManualSource(), ScriptedRng(slots), buffer_capacity=P.buffer_capacity,
                   max_ampdu=P.max_ampdu, cw_min=P.cw_min, slot_ticks=SLOT, difs_ticks=DIFS, **kw)

    def run(self, until=None):
        from mlosim.sim import run_events

        return run_events(self.queue, self.medium, until)


@pytest.fixture
def world():
    return World()


# acceptance verdicts, printed as one line per criterion at the end of the run
VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        VERDICTS.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
