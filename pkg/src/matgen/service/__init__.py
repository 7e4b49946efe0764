from .sessions import Session, SessionError, SessionStore
from .app import create_app

__all__ = ["Session", "SessionError", "SessionStore", "create_app"]
