"""Background session execution and the interactive (human) authority.

The runner thread is the only code that touches the session; HTTP handlers
communicate with it through the authority's answer queue and the run-state
flags. A step that raised a warning blocks inside ``ask`` until a label
arrives via POST /label (or the configured timeout expires, which counts
as a budget-preserving skip).
"""

from __future__ import annotations

import threading
import time

from ..authority import Authority, AuthorityAnswer, AuthorityQuery
from ..framework import Session

STATE_PAUSED = "paused"
STATE_RUNNING = "running"
STATE_FINISHED = "finished"

SUBMIT_OK = "ok"
SUBMIT_UNKNOWN = "unknown_query"
SUBMIT_DUPLICATE = "already_answered"


class InteractiveAuthority(Authority):
    """Queue-backed authority; answers arrive from the labeling endpoint."""

    def __init__(self, timeout: float = 0.0):
        self._timeout = timeout if timeout > 0 else None
        self._cond = threading.Condition()
        self._pending: dict[int, AuthorityQuery] = {}
        self._answers: dict[int, int] = {}
        self._answered: set[int] = set()
        self._shutdown = False

    def ask(self, query: AuthorityQuery) -> AuthorityAnswer | None:
        with self._cond:
            self._pending[query.query_id] = query
            self._cond.notify_all()
            deadline = None if self._timeout is None else time.monotonic() + self._timeout
            while query.query_id not in self._answers and not self._shutdown:
                if deadline is None:
                    self._cond.wait()
                else:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0 or not self._cond.wait(timeout=remaining):
                        break
            self._pending.pop(query.query_id, None)
            if query.query_id in self._answers:
                return AuthorityAnswer(query.query_id, self._answers[query.query_id])
            return None  # timeout or shutdown: budget-preserving skip

    def submit(self, query_id: int, class_id: int) -> str:
        with self._cond:
            if query_id in self._answered:
                return SUBMIT_DUPLICATE
            if query_id not in self._pending:
                return SUBMIT_UNKNOWN
            self._answers[query_id] = class_id
            self._answered.add(query_id)
            self._cond.notify_all()
            return SUBMIT_OK

    def queue(self) -> list[AuthorityQuery]:
        with self._cond:
            return [self._pending[qid] for qid in sorted(self._pending)]

    def shutdown(self) -> None:
        with self._cond:
            self._shutdown = True
            self._cond.notify_all()


class SessionRunner:
    """Owns the session thread; exposes pause/resume/step-batch control."""

    def __init__(self, session: Session, authority: Authority, autostart: bool = False):
        self.session = session
        self.authority = authority
        self._cond = threading.Condition()
        self._state = STATE_RUNNING if autostart else STATE_PAUSED
        self._grants = 0
        self._stop = False
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def _loop(self) -> None:
        while True:
            with self._cond:
                while not self._stop and self._state != STATE_RUNNING and self._grants == 0:
                    self._cond.wait()
                if self._stop:
                    return
                granted = self._grants > 0
            if self.session.finished():
                with self._cond:
                    self._state = STATE_FINISHED
                    self._grants = 0
                    self._cond.notify_all()
                continue
            self.session.run(max_batches=1)
            with self._cond:
                if granted:
                    self._grants = max(0, self._grants - 1)
                if self.session.finished():
                    self._state = STATE_FINISHED
                self._cond.notify_all()

    # --- control surface ---

    def run_state(self) -> str:
        if self.session.finished():
            return STATE_FINISHED
        with self._cond:
            return self._state

    def waiting_for_label(self) -> bool:
        if isinstance(self.authority, InteractiveAuthority):
            return bool(self.authority.queue())
        return False

    def pause(self) -> bool:
        with self._cond:
            if self._state != STATE_RUNNING:
                return False
            self._state = STATE_PAUSED
            self._cond.notify_all()
            return True

    def resume(self) -> bool:
        with self._cond:
            if self._state != STATE_PAUSED or self.session.finished():
                return False
            self._state = STATE_RUNNING
            self._cond.notify_all()
            return True

    def step_batch(self) -> bool:
        with self._cond:
            if self._state != STATE_PAUSED or self.session.finished():
                return False
            self._grants += 1
            self._cond.notify_all()
            return True

    def wait_batch_boundary(self, timeout: float = 30.0) -> bool:
        """Block until the runner idles between batches (for clean saves)."""
        import time

        deadline = time.monotonic() + timeout
        with self._cond:
            while time.monotonic() < deadline:
                if self._state in (STATE_PAUSED, STATE_FINISHED) and self._grants == 0:
                    return True
                self._cond.wait(timeout=0.1)
        return False

    def stop(self) -> None:
        with self._cond:
            self._stop = True
            self._cond.notify_all()
        if isinstance(self.authority, InteractiveAuthority):
            self.authority.shutdown()
        self._thread.join(timeout=10.0)
