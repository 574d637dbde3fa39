"""Geometry backends: flat tori and the Bolza surface."""
from ..errors import DomainError, UnsupportedModelError
from .segment import GeodesicSegment
from .surface import (GroupElement, GroupTable, HyperbolicSurfaceModel, bolza)
from .torus import TorusModel

__all__ = [
    "GeodesicSegment", "GroupElement", "GroupTable", "HyperbolicSurfaceModel",
    "TorusModel", "bolza", "distance", "enumerate_group", "from_description",
    "geodesics_between", "is_torus", "reduce_to_domain", "retract", "volume",
]


def is_torus(M):
    return getattr(M, "kind", None) == "torus"


def geodesics_between(M, p, q, R):
    return M.geodesics_between(p, q, R)


def distance(M, p, q):
    return M.distance(p, q)


def retract(M, p, v):
    return M.retract(p, v)


def reduce_to_domain(M, raw):
    return M.reduce(raw)


def volume(M):
    return M.volume()


def enumerate_group(M, R, max_elements=None):
    if is_torus(M):
        raise UnsupportedModelError("group enumeration needs a hyperbolic surface")
    return M.enumerate_group(R, max_elements=max_elements).elements()


def from_description(desc):
    """Build a model from ``{"periods": [...]}`` or ``{"name": "bolza"}``."""
    if "periods" in desc:
        return TorusModel(tuple(desc["periods"]))
    name = desc.get("name")
    if name == "bolza":
        return bolza(**({"max_elements": desc["max_elements"]} if "max_elements" in desc else {}))
    raise DomainError(f"unknown manifold {name!r}")
