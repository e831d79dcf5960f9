"""Exception types shared across the package."""


class VoteTreeError(Exception):
    """Base class for all package errors."""


class CatalogError(VoteTreeError):
    """Malformed or inconsistent action catalog."""


class SceneError(VoteTreeError):
    """Malformed scene document or invariant violation while loading."""


class DatasetError(VoteTreeError):
    """Broken task fixture, e.g. a goal plan that does not execute."""


class ConfigError(VoteTreeError):
    """Invalid run or sampling configuration."""


class ProviderError(VoteTreeError):
    """A plan generator could not deliver the requested samples."""


class EmptyCommandPoolError(VoteTreeError):
    """No commands could be extracted from the generated plans."""


class NoPlansError(VoteTreeError):
    """A vote tree was requested for an empty plan collection."""


class TreeLogicError(VoteTreeError):
    """Internal misuse of the vote tree (indicates an executor bug)."""
