class MloSimError(Exception):
    """Base class for simulator errors."""


class ConfigError(MloSimError, ValueError):
    """Invalid or inconsistent scenario / PHY configuration."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ProtocolViolation(MloSimError, AssertionError):
    """The MAC broke a channel-access rule; carries the event-loop context."""

    def __init__(self, message, time=None, bss=None, interface=None, state=None):
        self.time = time
        self.bss = bss
        self.interface = interface
        self.state = state
        ctx = f"t={time} ns, bss={bss}, interface={interface}, state={state}"
        super().__init__(f"{message} [{ctx}]")


class SimulationError(MloSimError, RuntimeError):
    """Fatal event-loop failure (e.g. tick overflow)."""
