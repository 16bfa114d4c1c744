from cache.artifact_cache import ArtifactCache, CacheFormatError
from cache.utils import format_rational, parse_rational
from quaternion.brandt import BrandtMatrix, brandt_matrix
from quaternion.eigenforms import class_set
from quaternion.orders import make_order


class BrandtCache(ArtifactCache):
    """
    B(n) of weight nu on R(M1, M2), stored as the stacked matrix: one line
    per row, h * (2 nu + 1) exact rationals each.
    """

    kind = "brandt"

    def __init__(self, M1, M2, n, nu=0, cache_dir=None, version=None):
        super().__init__(cache_dir, version)
        self.M1 = M1
        self.M2 = M2
        self.n = n
        self.nu = nu

    def get_key(self):
        return f"{self.M1}_{self.M2}_n{self.n}_nu{self.nu}"

    def compute(self):
        return brandt_matrix(class_set(make_order(self.M1, self.M2)), self.n, self.nu)

    def serialize(self, matrix):
        dimension = matrix.dimension
        lines = [f"brandt n={matrix.n} nu={matrix.nu} h={matrix.h}"]
        for i in range(matrix.h):
            for r in range(dimension):
                entries = []
                for j in range(matrix.h):
                    entries += [format_rational(x) for x in matrix.block(i, j)[r]]
                lines.append(" ".join(entries))
        return "\n".join(lines) + "\n"

    def deserialize(self, payload):
        lines = payload.splitlines()
        if not lines or not lines[0].startswith("brandt "):
            raise CacheFormatError("missing brandt header")
        fields = dict(part.split("=", 1) for part in lines[0].split()[1:])
        n, nu, h = int(fields["n"]), int(fields["nu"]), int(fields["h"])
        if (n, nu) != (self.n, self.nu):
            raise CacheFormatError(f"entry holds B({n}) at nu = {nu}")
        dimension = 2 * nu + 1
        rows = [[parse_rational(x) for x in line.split()] for line in lines[1:]]
        if len(rows) != h * dimension or any(len(row) != h * dimension for row in rows):
            raise CacheFormatError("matrix shape does not match the header")
        blocks = tuple(
            tuple(
                tuple(
                    tuple(rows[i * dimension + r][j * dimension : (j + 1) * dimension])
                    for r in range(dimension)
                )
                for j in range(h)
            )
            for i in range(h)
        )
        return BrandtMatrix(n, nu, h, blocks)


def create_brandt_cache(M1, M2, n, nu=0, cache_dir=None):
    return BrandtCache(M1, M2, n, nu, cache_dir).run()
