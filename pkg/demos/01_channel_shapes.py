"""Channel cross-sections and their transmission/receiver zones.

Builds one channel from each shape family (a square, a 20-gon "circle",
and a polygonal ring), prints their key geometric quantities, and draws the
boundaries together with the zone grids: particle cells along the left wall
(transmission) and the mirrored band on the right wall (receiver).
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kinesim import (
    PolygonRing,
    Rectangle,
    RegularPolygon,
    area,
    build_zones,
    edges,
    perimeter,
    total_boundary_length,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

shapes = {
    "square 40x40": Rectangle(40.0, 40.0),
    "circle (20-gon, r=25.57)": RegularPolygon(20, 25.57),
    "ring (n=8, r_i=20, r_o=25)": PolygonRing(8, 20.0, 25.0),
}

print(f"{'shape':<28} {'area um^2':>10} {'perimeter um':>13} "
      f"{'boundary um':>12} {'A/P um':>7}")
for name, shape in shapes.items():
    a, p = area(shape), perimeter(shape)
    print(f"{name:<28} {a:>10.1f} {p:>13.2f} "
          f"{total_boundary_length(shape):>12.2f} {a / p:>7.2f}")

fig, axes = plt.subplots(1, 3, figsize=(15, 5))
for ax, (name, shape) in zip(axes, shapes.items()):
    layout = build_zones(shape)
    a = layout.particle_diameter_um
    for cells, color, label in ((layout.tx_cells, "tab:blue", "transmission"),
                                (layout.rx_cells, "tab:red", "receiver")):
        for ix, iy in cells:
            cx, cy = layout.cell_center(ix, iy)
            ax.add_patch(plt.Rectangle((cx - a / 2, cy - a / 2), a, a,
                                       color=color, alpha=0.4, lw=0))
    for e in edges(shape):
        ax.plot([e.start[0], e.end[0]], [e.start[1], e.end[1]],
                color="black", lw=1.5)
    ax.set_title(f"{name}\ntx cells: {layout.tx_cell_count}")
    ax.set_aspect("equal")
    ax.set_xlabel("x (um)")
axes[0].set_ylabel("y (um)")
fig.tight_layout()
fig.savefig(OUT / "channel_shapes.png", dpi=120)
print(f"\nwrote {OUT / 'channel_shapes.png'}")
