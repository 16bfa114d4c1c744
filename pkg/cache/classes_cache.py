from cache.artifact_cache import ArtifactCache, CacheFormatError
from cache.utils import format_rational, parse_rational
from quaternion.lattice import QuatLattice
from quaternion.orders import IdealClassSet, eichler_mass, make_order, right_ideal_classes


def format_lattice(L):
    lines = [f"scale {format_rational(L.scale)}"]
    lines += [" ".join(format_rational(x) for x in row) for row in L.basis]
    return lines


def parse_lattice(algebra, lines):
    """Inverse of format_lattice on exactly five lines."""
    if len(lines) != 5 or not lines[0].startswith("scale "):
        raise CacheFormatError("lattice needs a scale line and four basis rows")
    scale = parse_rational(lines[0].split(" ", 1)[1])
    basis = tuple(tuple(parse_rational(x) for x in line.split()) for line in lines[1:])
    if any(len(row) != 4 for row in basis):
        raise CacheFormatError("lattice rows need four entries")
    return QuatLattice(algebra, basis, scale)


class ClassesCache(ArtifactCache):
    """Right ideal classes of R(M1, M2) with their unit group orders."""

    kind = "classes"

    def __init__(self, M1, M2, cache_dir=None, version=None):
        super().__init__(cache_dir, version)
        self.M1 = M1
        self.M2 = M2

    def get_key(self):
        return f"{self.M1}_{self.M2}"

    def compute(self):
        return right_ideal_classes(make_order(self.M1, self.M2))

    def serialize(self, classes):
        lines = [
            f"order {self.M1} {self.M2}",
            f"algebra {classes.order.algebra.a_coef} {classes.order.algebra.b_coef}",
            f"mass {format_rational(classes.mass())}",
            f"h {classes.h}",
        ]
        for rep, e in zip(classes.reps, classes.unit_orders):
            lines.append(f"class e={e}")
            lines += format_lattice(rep)
        return "\n".join(lines) + "\n"

    def deserialize(self, payload):
        lines = payload.splitlines()
        if len(lines) < 4 or lines[0] != f"order {self.M1} {self.M2}":
            raise CacheFormatError("missing order line")
        order = make_order(self.M1, self.M2)
        algebra = order.algebra
        if lines[1] != f"algebra {algebra.a_coef} {algebra.b_coef}":
            raise CacheFormatError(f"cached algebra '{lines[1]}' differs from {algebra}")
        mass = parse_rational(lines[2].split(" ", 1)[1])
        h = int(lines[3].split()[1])

        reps = []
        units = []
        body = lines[4:]
        if len(body) != 6 * h:
            raise CacheFormatError(f"expected {h} classes")
        for index in range(h):
            block = body[6 * index : 6 * index + 6]
            if not block[0].startswith("class e="):
                raise CacheFormatError(f"bad class line '{block[0]}'")
            units.append(int(block[0].split("=", 1)[1]))
            reps.append(parse_lattice(algebra, block[1:]))

        classes = IdealClassSet(order, reps, units)
        if reps[0].basis != order.lattice.basis:
            raise CacheFormatError("first class is not the order itself")
        if classes.mass() != mass or mass != eichler_mass(self.M1, self.M2):
            raise CacheFormatError(f"mass {classes.mass()} does not match")
        return classes


def create_classes_cache(M1, M2, cache_dir=None):
    return ClassesCache(M1, M2, cache_dir).run()
