"""Restriction constant c0 for a few damping regions under refinement."""

from blockstab.grid import GridSpec, RegionMask
from blockstab.stability import damping_constant

regions = {
    "centre square": [(0.25, 0.25, 0.75, 0.75)],
    "left half": [(0.0, 0.0, 0.5, 1.0)],
    "L-shape": [(0.0, 0.0, 0.5, 1.0), (0.5, 0.0, 1.0, 0.5)],
}

for label, rects in regions.items():
    row = []
    for n in (8, 16, 24):
        g = GridSpec(n, n)
        geo = damping_constant(g, RegionMask.from_rectangles(g, rects))
        row.append(f"{geo.c0:7.4f}")
    print(f"{label:14s} c0 at 8/16/24: {' '.join(row)}")
