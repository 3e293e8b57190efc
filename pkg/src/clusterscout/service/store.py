"""In-memory session registry with per-session locks."""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

from ..errors import UnknownTargetError
from ..session import Session


@dataclass
class SessionHandle:
    session_id: str
    created_at: float
    session: Session
    lock: threading.RLock = field(default_factory=threading.RLock)
    # (method+path, idempotency key) -> (status code, response body)
    replay_cache: dict[tuple[str, str], tuple[int, dict]] = field(default_factory=dict)


class SessionStore:
    def __init__(self) -> None:
        self._guard = threading.Lock()
        self._handles: dict[str, SessionHandle] = {}

    def create(self, session: Session) -> SessionHandle:
        handle = SessionHandle(
            session_id=secrets.token_urlsafe(16),
            created_at=time.time(),
            session=session,
        )
        with self._guard:
            self._handles[handle.session_id] = handle
        return handle

    def get(self, session_id: str) -> SessionHandle:
        with self._guard:
            handle = self._handles.get(session_id)
        if handle is None:
            raise UnknownTargetError(f"unknown session {session_id!r}")
        return handle

    def drop(self, session_id: str) -> None:
        with self._guard:
            self._handles.pop(session_id, None)
