import sys
import threading
import time
from typing import Dict, Optional, TextIO

_MARKS = {"pass": "✓", "fail": "✗", "error": "!"}
_FRAMES = "⠋⠙⠹⠸⠼⠴⠦⠧⠇⠏"


def format_elapsed(seconds: float) -> str:
    if seconds < 60:
        return f"{seconds:.1f}s"
    return f"{int(seconds // 60)}m{seconds % 60:.0f}s"


class ProgressPrinter:
    """
    Task progress on stderr. On a TTY the running task gets a spinner with its
    position and elapsed time; every finished task leaves one line with its
    status mark. `finish()` prints the pass/fail/error tally.
    """

    interval = 0.1
    width = 80

    def __init__(self, enabled: bool = True, stream: Optional[TextIO] = None):
        self.enabled = enabled
        self.stream = stream or sys.stderr
        self.tally: Dict[str, int] = {"pass": 0, "fail": 0, "error": 0}
        self._label = ""
        self._started = 0.0
        self._frame = 0
        self._ticker: Optional[threading.Thread] = None
        self._stop = threading.Event()
        self._lock = threading.Lock()
        self._live = self.stream.isatty()

    def _elapsed(self) -> str:
        return format_elapsed(time.monotonic() - self._started)

    def _redraw(self) -> None:
        line = f"{_FRAMES[self._frame % len(_FRAMES)]} {self._label} [{self._elapsed()}]"
        if len(line) > self.width:
            line = line[:self.width - 3] + "..."
        self.stream.write(f"\r\033[K{line}")
        self.stream.flush()

    def _tick(self) -> None:
        while not self._stop.wait(self.interval):
            with self._lock:
                self._frame += 1
                self._redraw()

    def start(self, label: str, index: Optional[int] = None, total: Optional[int] = None) -> None:
        if not self.enabled:
            return
        self._label = f"[{index}/{total}] {label}" if index is not None and total else label
        self._started = time.monotonic()
        self._frame = 0
        if self._live:
            self._stop.clear()
            self._ticker = threading.Thread(target=self._tick, daemon=True)
            self._ticker.start()

    def done(self, status: str) -> None:
        self.tally[status] = self.tally.get(status, 0) + 1
        if not self.enabled:
            return
        if self._ticker is not None:
            self._stop.set()
            self._ticker.join(timeout=1.0)
            self._ticker = None
        with self._lock:
            if self._live:
                self.stream.write("\r\033[K")
            self.stream.write(f"{_MARKS.get(status, '?')} {self._label} {status} ({self._elapsed()})\n")
            self.stream.flush()

    def finish(self) -> None:
        if not self.enabled or not any(self.tally.values()):
            return
        parts = ", ".join(f"{n} {k}" for k, n in self.tally.items())
        self.stream.write(f"done: {parts}\n")
        self.stream.flush()
