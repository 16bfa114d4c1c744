import os
from abc import abstractmethod

import config
from cache.utils import log, write_atomic

HEADER_PREFIX = "TRIPLEL"


class CacheFormatError(ValueError):
    """Raised by deserialize() when a payload cannot be read back."""


class ArtifactStore:
    """
    One stored artifact: subclasses provide its key and how to write it as
    canonical text. The class handles the lookup in the cache directory, the
    version check and the atomic write.

    Entries live at <cache dir>/<kind>/<key>.txt. The first line of every
    entry is "TRIPLEL <kind> v<version> <key>"; the payload follows.

    The value handed back is always deserialize(payload), whether the entry
    was read or just computed, so warm and cold runs see identical data.
    """

    kind = None

    def __init__(self, cache_dir=None, version=None):
        self.cache_dir = cache_dir if cache_dir is not None else config.CACHE_DIR
        self.version = version if version is not None else config.CACHE_VERSION

    @abstractmethod
    def get_key(self):
        """
        Canonical parameter string, e.g. "11_1" for the classes of R(11, 1).
        Keys must be deterministic and usable as file names.
        """

    @abstractmethod
    def serialize(self, value):
        """Canonical text for value. Exact data must be written exactly."""

    @abstractmethod
    def deserialize(self, payload):
        """
        Inverse of serialize. Raise CacheFormatError (or ValueError) if the
        payload is malformed; the entry will then be recomputed.
        """

    def path(self):
        return os.path.join(self.cache_dir, self.kind, f"{self.get_key()}.txt")

    def header(self):
        return f"{HEADER_PREFIX} {self.kind} v{self.version} {self.get_key()}"

    def load(self):
        """
        Return the cached value, or None if the entry is missing, written by
        another format version or unreadable.
        """
        path = self.path()
        if not os.path.exists(path):
            return None
        name = f"{self.kind} {self.get_key()}"
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
        header, _, payload = text.partition("\n")
        if header != self.header():
            log(f"{name}: stale entry ({header.strip()!r}) ignored")
            return None
        try:
            return self.deserialize(payload)
        except (ValueError, KeyError, IndexError, ZeroDivisionError) as err:
            log(f"{name}: WARNING corrupt cache entry ignored:", err)
            return None

    def store(self, value):
        """Write value and return the exact data read back from its payload."""
        payload = self.serialize(value)
        write_atomic(self.path(), f"{self.header()}\n{payload}")
        return self.deserialize(payload)


class ArtifactCache(ArtifactStore):
    """
    A stored artifact that can be rebuilt: stale or corrupt entries are
    recomputed and written back.
    """

    @abstractmethod
    def compute(self):
        """Build the artifact from scratch."""

    def run(self):
        """
        The main entry point: return the cached artifact, computing and
        storing it first if needed.
        """
        name = f"{self.kind} {self.get_key()}"
        value = self.load()
        if value is not None:
            log(f"{name}: cache hit")
            return value

        log(f"{name}: start")
        value = self.store(self.compute())
        log(f"{name}: done")
        return value
