from .base import Manifold, ManifoldKind, Point, Tangent
from .fixedrank import FixedRank
from .grassmann import Grassmann, qr_positive
from .sphere import Sphere

__all__ = [
    "FixedRank",
    "Grassmann",
    "Manifold",
    "ManifoldKind",
    "Point",
    "Sphere",
    "Tangent",
    "qr_positive",
]
