import mpmath
import sympy
import ujson

from cache.artifact_cache import ArtifactCache, CacheFormatError
from quaternion.eigenforms import QuatEigenform, class_set, eigenforms
from quaternion.orders import make_order


def _dump(value, exact):
    if exact:
        return sympy.sstr(sympy.sympify(value))
    return mpmath.nstr(mpmath.mpf(value), mpmath.mp.dps, strip_zeros=False)


def _load(text, exact):
    if exact:
        return sympy.sympify(text)
    return mpmath.mpf(text)


class EigenformCache(ArtifactCache):
    """
    Eigenforms of weight nu on R(M1, M2) as a ujson document. Exact values are
    written as sympy expressions, float values at full working precision.
    """

    kind = "eigenform"

    def __init__(self, M1, M2, nu=0, cache_dir=None, version=None):
        super().__init__(cache_dir, version)
        self.M1 = M1
        self.M2 = M2
        self.nu = nu

    def get_key(self):
        return f"{self.M1}_{self.M2}_nu{self.nu}"

    def compute(self):
        return eigenforms(class_set(make_order(self.M1, self.M2)), self.nu)

    def serialize(self, forms):
        documents = []
        for form in forms:
            exact = form.exact
            documents.append(
                {
                    "exact": exact,
                    "min_poly": form.min_poly,
                    "values": [[_dump(x, exact) for x in vector] for vector in form.values],
                    "hecke": {str(p): _dump(v, exact) for p, v in sorted(form.hecke_eigenvalues.items())},
                    "al": {str(p): v for p, v in sorted(form.al_eigenvalues.items())},
                    "essential": {str(p): v for p, v in sorted(form.essential.items())},
                    "norm_sq": _dump(form.norm_sq, exact),
                    "coordinates": [_dump(x, exact) for x in form.coordinates or []],
                }
            )
        payload = {"order": [self.M1, self.M2], "nu": self.nu, "forms": documents}
        return ujson.dumps(payload, indent=2, sort_keys=True, escape_forward_slashes=False) + "\n"

    def deserialize(self, payload):
        document = ujson.loads(payload)
        if document.get("order") != [self.M1, self.M2] or document.get("nu") != self.nu:
            raise CacheFormatError("entry belongs to another order or weight")
        order = make_order(self.M1, self.M2)
        forms = []
        for item in document["forms"]:
            exact = item["exact"]
            forms.append(
                QuatEigenform(
                    order,
                    self.nu,
                    [[_load(x, exact) for x in vector] for vector in item["values"]],
                    {int(p): _load(v, exact) for p, v in item["hecke"].items()},
                    {int(p): int(v) for p, v in item["al"].items()},
                    _load(item["norm_sq"], exact),
                    exact=exact,
                    min_poly=item["min_poly"],
                    essential={int(p): bool(v) for p, v in item["essential"].items()},
                    coordinates=[_load(x, exact) for x in item["coordinates"]],
                )
            )
        return forms


def create_eigenform_cache(M1, M2, nu=0, cache_dir=None):
    return EigenformCache(M1, M2, nu, cache_dir).run()
