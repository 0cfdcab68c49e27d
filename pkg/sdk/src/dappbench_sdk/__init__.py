"""Typed client for the dappbench REST API."""

from .client import (
    AuthError,
    InvokeResult,
    NotFoundError,
    Receipt,
    ServerError,
    ValidationError,
    WorkbenchClient,
    WorkbenchError,
    connect,
)

__all__ = [
    "AuthError",
    "InvokeResult",
    "NotFoundError",
    "Receipt",
    "ServerError",
    "ValidationError",
    "WorkbenchClient",
    "WorkbenchError",
    "connect",
]
