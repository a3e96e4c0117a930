"""Shared exception types."""


class LfqaError(Exception):
    """Base class for engine failures."""


class ConfigError(LfqaError):
    """Invalid configuration file or value."""


class ProviderError(LfqaError):
    """A neural-inference provider call failed."""


class TransportError(ProviderError):
    """Network-level failure talking to a provider (retried once)."""


class ProtocolError(ProviderError):
    """Provider reachable but its payload violated the wire contract."""
