"""Client SDK for the armnav simulation server.

Speaks the newline-delimited JSON wire protocol over a TCP socket and
exposes the usual reset/step surface. All environment state lives on the
server; the client holds only the connection and the negotiated
capabilities.
"""

from .client import (
    PROTOCOL_VERSION,
    ClientError,
    ConnectionFailed,
    EpisodeFinished,
    ProtocolError,
    RemoteEnv,
    StepResult,
    VersionMismatch,
)

__version__ = "0.1.0"

__all__ = [
    "PROTOCOL_VERSION",
    "ClientError",
    "ConnectionFailed",
    "EpisodeFinished",
    "ProtocolError",
    "RemoteEnv",
    "StepResult",
    "VersionMismatch",
]
