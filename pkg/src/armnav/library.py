"""Catalog of object categories the generator and task tooling draw from.

Six categories form the default training set; six more are reserved as
novel categories for the held-out splits. A few non-pickupable clutter
categories pad scenes with obstacles. Dimensions are half-extents (boxes)
or radii (spheres), in meters, sized so every pickupable fits the grasper.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scene import HEAVY, LIGHT


@dataclass(frozen=True)
class CategorySpec:
    name: str
    shape_kind: str  # "sphere" | "box"
    dims: tuple[float, ...]  # sphere: (radius,); box: (hx, hy, hz)
    pickupable: bool = True
    mass_class: str = LIGHT


SEEN_CATEGORIES = ["Apple", "Bread", "Tomato", "Lettuce", "Pot", "Mug"]
NOVEL_CATEGORIES = ["Cup", "Bowl", "Egg", "Potato", "Plate", "Kettle"]
CLUTTER_CATEGORIES = ["Toaster", "Vase", "Pan", "Statue"]

CATALOG: dict[str, CategorySpec] = {
    spec.name: spec
    for spec in [
        CategorySpec("Apple", "sphere", (0.040,)),
        CategorySpec("Bread", "box", (0.080, 0.045, 0.055)),
        CategorySpec("Tomato", "sphere", (0.042,)),
        CategorySpec("Lettuce", "sphere", (0.070,)),
        CategorySpec("Pot", "box", (0.120, 0.065, 0.120)),
        CategorySpec("Mug", "box", (0.045, 0.050, 0.045)),
        CategorySpec("Cup", "box", (0.040, 0.045, 0.040)),
        CategorySpec("Bowl", "box", (0.080, 0.035, 0.080)),
        CategorySpec("Egg", "sphere", (0.028,)),
        CategorySpec("Potato", "sphere", (0.035,)),
        CategorySpec("Plate", "box", (0.100, 0.015, 0.100)),
        CategorySpec("Kettle", "box", (0.095, 0.080, 0.095)),
        CategorySpec("Toaster", "box", (0.140, 0.090, 0.090), pickupable=False, mass_class=HEAVY),
        CategorySpec("Vase", "box", (0.040, 0.090, 0.040), pickupable=False),
        CategorySpec("Pan", "box", (0.110, 0.030, 0.110), pickupable=False),
        CategorySpec("Statue", "box", (0.050, 0.120, 0.050), pickupable=False, mass_class=HEAVY),
    ]
}

PICKUPABLE_CATEGORIES = SEEN_CATEGORIES + NOVEL_CATEGORIES


def category_spec(name: str) -> CategorySpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown object category {name!r}") from None
