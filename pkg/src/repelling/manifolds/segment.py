from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class GeodesicSegment:
    """One connecting geodesic seen from its source point.

    ``direction`` is the unit tangent at the source pointing away from the
    target (the repelling direction): a real vector on a torus, a complex
    number in the orthonormal frame on the disk.  ``label`` identifies the
    homotopy class (winding vector or group-element index).
    """

    length: float
    direction: Any
    label: Any = None
