import hashlib

from cache.artifact_cache import ArtifactStore
from cache.utils import log


class ReportStore(ArtifactStore):
    """
    Central value reports, kept so that a rerun can be compared against the
    previous one. The payload is the report text itself; reports are only
    stored and loaded, never rebuilt from the cache.
    """

    kind = "report"

    def __init__(self, label, options="", cache_dir=None, version=None):
        super().__init__(cache_dir, version)
        self.label = label
        self.options = options

    def get_key(self):
        digest = hashlib.sha1(self.options.encode("utf-8")).hexdigest()[:12]
        return f"{self.label.replace(',', '__')}_{digest}"

    def serialize(self, text):
        return text

    def deserialize(self, payload):
        return payload


def store_report(label, options, text, cache_dir=None):
    """
    Store a report and return True when it matches the previous run with the
    same options (or there was none).
    """
    store = ReportStore(label, options, cache_dir)
    previous = store.load()
    if previous is not None and previous != text:
        log(f"report {store.get_key()}: WARNING differs from the cached report")
    store.store(text)
    return previous is None or previous == text
