"""Thin client for the wgc step protocol.

Contains zero game logic: observations, masks, rewards and legality all
originate server-side.  One handle drives one environment instance;
parallel training uses parallel handles, each owning its own session.
"""

from .client import (
    AdapterError,
    ContractError,
    EnvInfo,
    ProtocolError,
    RemoteEnv,
    ServerError,
    StdioTransport,
    StepResult,
    TcpTransport,
)

__all__ = [
    "AdapterError",
    "ContractError",
    "EnvInfo",
    "ProtocolError",
    "RemoteEnv",
    "ServerError",
    "StdioTransport",
    "StepResult",
    "TcpTransport",
]
