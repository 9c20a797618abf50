from .app import create_app, resolve_port, serve
from .state import AppState, build_state

__all__ = ["create_app", "resolve_port", "serve", "AppState", "build_state"]
