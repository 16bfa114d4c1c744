import glob
import os
import re

import config
from cache.artifact_cache import ArtifactCache, CacheFormatError
from errors import PreconditionError
from lfun.newforms import format_coeffs, parse_coeffs, validate_newform
from quaternion.eigenforms import extend_newform, newform_by_label


class CoeffsCache(ArtifactCache):
    """
    Newform coefficients up to n_max in the COEFFS v1 format. Without a form
    the label is resolved among the internally computed newforms; with one
    (an imported form, say) that form is extended.
    """

    kind = "coeffs"

    def __init__(self, label, n_max, form=None, cache_dir=None, version=None):
        super().__init__(cache_dir, version)
        self.label = label
        self.n_max = n_max
        self.form = form

    def get_key(self):
        return f"{self.label}_n{self.n_max}"

    def compute(self):
        if self.form is None:
            return newform_by_label(self.label, self.n_max)
        if self.form.n_max >= self.n_max:
            return self.form
        return extend_newform(self.form, self.n_max)

    def serialize(self, form):
        return format_coeffs(form)

    def deserialize(self, payload):
        try:
            form = validate_newform(parse_coeffs(payload, self.label))
        except PreconditionError as err:
            raise CacheFormatError(str(err)) from err
        if form.n_max < self.n_max:
            raise CacheFormatError(f"entry stops at {form.n_max}")
        return form


def create_coeffs_cache(label, n_max, form=None, cache_dir=None):
    return CoeffsCache(label, n_max, form, cache_dir).run()


def find_coeffs(label, cache_dir=None):
    """
    The stored coefficients of `label` with the largest n_max, or None. Used
    for imported forms, which cannot be recomputed from their name.
    """
    cache_dir = cache_dir if cache_dir is not None else config.CACHE_DIR
    pattern = re.compile(rf"{re.escape(label)}_n(\d+)\.txt$")
    sizes = []
    for path in glob.glob(os.path.join(cache_dir, CoeffsCache.kind, f"{glob.escape(label)}_n*.txt")):
        match = pattern.search(os.path.basename(path))
        if match:
            sizes.append(int(match.group(1)))
    for n_max in sorted(sizes, reverse=True):
        form = CoeffsCache(label, n_max, cache_dir=cache_dir).load()
        if form is not None:
            return form
    return None
