"""Virtual session clock.

All timestamps in the system are session-clock milliseconds handed out by
this clock. In fast mode the clock jumps straight to each event timestamp;
in realtime mode it paces advancement against the wall clock. No other
module is allowed to read wall time.
"""

from __future__ import annotations

import time


class SessionClock:
    """Monotonic session clock owned by the harness."""

    def __init__(self, realtime: bool = False):
        self.realtime = realtime
        self.started = False
        self._now_ms = 0
        self._wall_origin = 0.0

    @property
    def now_ms(self) -> int:
        return self._now_ms

    def start(self, t0_ms: int = 0) -> None:
        self.started = True
        self._now_ms = t0_ms
        if self.realtime:
            self._wall_origin = time.monotonic() - t0_ms / 1000.0

    def advance_to(self, t_ms: int) -> None:
        """Move the clock forward; never backward."""
        if t_ms < self._now_ms:
            return
        if self.realtime:
            target_wall = self._wall_origin + t_ms / 1000.0
            while True:
                delta = target_wall - time.monotonic()
                if delta <= 0:
                    break
                time.sleep(min(delta, 0.05))
        self._now_ms = t_ms

    def realtime_now_ms(self) -> int:
        """Wall-derived session time; realtime mode only (operator injections)."""
        if not self.realtime:
            return self._now_ms
        return max(self._now_ms, int((time.monotonic() - self._wall_origin) * 1000))
