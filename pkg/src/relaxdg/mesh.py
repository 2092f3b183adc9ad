"""Two-subdomain structured quadrilateral meshes.

The computational domain is the union of two axis-aligned rectangles that
share exactly one full edge, the coupling interface.  Each rectangle is
partitioned into a uniform grid of cells; the interface discretization must
be conforming.  Cells are indexed block-locally by ``c = j*nx + i`` (row
major) and globally with block 1 first.

Meshes are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

_TOL = 1e-12

# side labels, outward direction and unit normals of a cell/block edge
SIDES = ("W", "E", "S", "N")
SIDE_NORMAL = {
    "W": np.array([-1.0, 0.0]),
    "E": np.array([1.0, 0.0]),
    "S": np.array([0.0, -1.0]),
    "N": np.array([0.0, 1.0]),
}
OPPOSITE = {"W": "E", "E": "W", "S": "N", "N": "S"}


@dataclass(frozen=True)
class Block:
    """Uniform rectangular grid of ``nx`` by ``ny`` cells."""

    x0: float
    y0: float
    x1: float
    y1: float
    nx: int
    ny: int

    @property
    def dx(self):
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self):
        return (self.y1 - self.y0) / self.ny

    @property
    def ncells(self):
        return self.nx * self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def cell_diameter(self):
        return math.hypot(self.dx, self.dy)

    def centers(self):
        """Cell centers, shape (ncells, 2), row-major in (j, i)."""
        xs = self.x0 + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.y0 + (np.arange(self.ny) + 0.5) * self.dy
        xx, yy = np.meshgrid(xs, ys)  # shape (ny, nx)
        return np.column_stack([xx.ravel(), yy.ravel()])

    def edge_cells(self, side):
        """Block-local indices of the cells along one edge, ordered along it."""
        i = np.arange(self.nx)
        j = np.arange(self.ny)
        if side == "W":
            return j * self.nx
        if side == "E":
            return j * self.nx + (self.nx - 1)
        if side == "S":
            return i
        if side == "N":
            return (self.ny - 1) * self.nx + i
        raise ValueError(side)

    def locate(self, points):
        """Block-local cell index for each point (points inside the block)."""
        pts = np.atleast_2d(points)
        i = np.clip(((pts[:, 0] - self.x0) / self.dx).astype(int), 0, self.nx - 1)
        j = np.clip(((pts[:, 1] - self.y0) / self.dy).astype(int), 0, self.ny - 1)
        return j * self.nx + i


@dataclass(frozen=True)
class Face:
    """A face of the mesh.  ``right`` is -1 for outer boundary faces.

    For interior and interface faces the stored normal points from ``left``
    into ``right``; interface faces always have their left cell in subdomain 1
    so the normal points from subdomain 1 into subdomain 2.  Boundary normals
    point outward.
    """

    left: int
    right: int
    normal: tuple
    length: float
    kind: str  # "interior" | "interface" | "boundary"
    side: str | None = None  # boundary side label for boundary faces


@dataclass(frozen=True)
class FaceGroup:
    """Structured bundle of parallel faces used by the vectorized assembly.

    ``left``/``right`` are block-local cell indices; ``left_side`` is the side
    label of the face as seen from the left cell.
    """

    left: np.ndarray
    right: np.ndarray
    left_side: str
    length: float

    @property
    def right_side(self):
        return OPPOSITE[self.left_side]

    @property
    def normal(self):
        return SIDE_NORMAL[self.left_side]


@dataclass(frozen=True)
class InterfaceGroup:
    """Interface faces: cells of block 1 paired with cells of block 2.

    ``normal`` points from subdomain 1 into subdomain 2 and equals the
    outward normal of the block-1 cells on side ``side1``.
    """

    cells1: np.ndarray
    cells2: np.ndarray
    side1: str
    side2: str
    normal: np.ndarray
    length: float


@dataclass(frozen=True)
class Mesh:
    blocks: tuple
    interface: InterfaceGroup | None
    interior_groups: tuple  # per block: tuple of FaceGroup
    boundary_groups: tuple  # per block: dict side -> local cell indices
    faces: tuple = field(repr=False)
    interface_faces: tuple = field(repr=False)

    @property
    def ncells(self):
        return sum(b.ncells for b in self.blocks)

    @property
    def offsets(self):
        off, acc = [], 0
        for b in self.blocks:
            off.append(acc)
            acc += b.ncells
        return tuple(off)

    def subdomain_of(self, cell):
        return 1 if cell < self.blocks[0].ncells else 2

    def block_of(self, cell):
        if cell < self.blocks[0].ncells:
            return 0, cell
        return 1, cell - self.blocks[0].ncells


def cell_diameter(mesh, cell):
    """Euclidean diagonal of a cell, the length entering the CFL condition."""
    b, _ = mesh.block_of(cell)
    return mesh.blocks[b].cell_diameter


def _rect(domain):
    x0, x1, y0, y1 = map(float, domain)
    if not (x1 > x0 and y1 > y0):
        raise ConfigError(f"degenerate rectangle {domain}")
    return x0, x1, y0, y1


def _interior_groups(block, periodic_x=False, periodic_y=False):
    nx, ny = block.nx, block.ny
    groups = []
    i = np.arange(nx - 1)
    j = np.arange(ny)
    if nx > 1:
        left = (j[:, None] * nx + i[None, :]).ravel()
        groups.append(FaceGroup(left, left + 1, "E", block.dy))
    if periodic_x:
        jj = np.arange(ny)
        groups.append(FaceGroup(jj * nx + (nx - 1), jj * nx, "E", block.dy))
    i = np.arange(nx)
    j = np.arange(ny - 1)
    if ny > 1:
        low = (j[:, None] * nx + i[None, :]).ravel()
        groups.append(FaceGroup(low, low + nx, "N", block.dx))
    if periodic_y:
        ii = np.arange(nx)
        groups.append(FaceGroup((ny - 1) * nx + ii, ii, "N", block.dx))
    return tuple(groups)


def _flat_faces(mesh_blocks, offsets, interior_groups, boundary_groups, interface):
    faces = []
    for b, groups in enumerate(interior_groups):
        off = offsets[b]
        block = mesh_blocks[b]
        for g in groups:
            n = tuple(g.normal)
            for l, r in zip(g.left, g.right):
                faces.append(Face(off + int(l), off + int(r), n, g.length, "interior"))
        for side, cells in boundary_groups[b].items():
            n = tuple(SIDE_NORMAL[side])
            length = block.dy if side in ("W", "E") else block.dx
            for c in cells:
                faces.append(Face(off + int(c), -1, n, length, "boundary", side))
    ifaces = []
    if interface is not None:
        n = tuple(interface.normal)
        for c1, c2 in zip(interface.cells1, interface.cells2):
            f = Face(offsets[0] + int(c1), offsets[1] + int(c2), n,
                     interface.length, "interface")
            ifaces.append(f)
            faces.append(f)
    return tuple(faces), tuple(ifaces)


def build_mesh(domain1, domain2, nx1, ny1, nx2, ny2):
    """Build the coupled two-block mesh.

    ``domain1``/``domain2`` are rectangles ``(x0, x1, y0, y1)`` that must
    share exactly one full edge; the shared edge becomes the interface and
    must be discretized conformingly.  The stored interface normal points
    from subdomain 1 into subdomain 2.
    """
    for n in (nx1, ny1, nx2, ny2):
        if int(n) != n or n < 1:
            raise ConfigError(f"cell counts must be positive integers, got {n}")
    a = _rect(domain1)
    b = _rect(domain2)

    # reject overlapping interiors
    if (min(a[1], b[1]) - max(a[0], b[0]) > _TOL
            and min(a[3], b[3]) - max(a[2], b[2]) > _TOL):
        raise ConfigError("domains overlap")

    scale = max(abs(v) for v in a + b) or 1.0
    tol = 1e-10 * scale

    def close(u, v):
        return abs(u - v) <= tol

    # locate the shared full edge; side1 is the side of block 1 touching it
    if close(a[1], b[0]) and close(a[2], b[2]) and close(a[3], b[3]):
        side1 = "E"
    elif close(b[1], a[0]) and close(a[2], b[2]) and close(a[3], b[3]):
        side1 = "W"
    elif close(a[3], b[2]) and close(a[0], b[0]) and close(a[1], b[1]):
        side1 = "N"
    elif close(b[3], a[2]) and close(a[0], b[0]) and close(a[1], b[1]):
        side1 = "S"
    else:
        raise ConfigError("domains do not share exactly one full edge")

    if side1 in ("E", "W") and ny1 != ny2:
        raise ConfigError(
            f"non-conforming interface discretization: ny1={ny1} != ny2={ny2}")
    if side1 in ("N", "S") and nx1 != nx2:
        raise ConfigError(
            f"non-conforming interface discretization: nx1={nx1} != nx2={nx2}")

    b1 = Block(a[0], a[2], a[1], a[3], int(nx1), int(ny1))
    b2 = Block(b[0], b[2], b[1], b[3], int(nx2), int(ny2))
    side2 = OPPOSITE[side1]
    length = b1.dy if side1 in ("E", "W") else b1.dx
    interface = InterfaceGroup(
        cells1=b1.edge_cells(side1),
        cells2=b2.edge_cells(side2),
        side1=side1,
        side2=side2,
        normal=SIDE_NORMAL[side1].copy(),
        length=length,
    )

    interior = (_interior_groups(b1), _interior_groups(b2))
    boundary = []
    for blk, iface_side in ((b1, side1), (b2, side2)):
        boundary.append({s: blk.edge_cells(s) for s in SIDES if s != iface_side})
    boundary = tuple(boundary)

    blocks = (b1, b2)
    faces, ifaces = _flat_faces(blocks, (0, b1.ncells), interior, boundary, interface)
    return Mesh(blocks, interface, interior, boundary, faces, ifaces)


def single_block_mesh(domain, nx, ny, periodic=False):
    """One-block mesh (subdomain 2 empty), for uncoupled runs and tests.

    ``periodic=True`` pairs opposite edges as interior faces in both
    directions, leaving no outer boundary.
    """
    if nx < 1 or ny < 1:
        raise ConfigError("cell counts must be positive")
    r = _rect(domain)
    blk = Block(r[0], r[2], r[1], r[3], int(nx), int(ny))
    interior = (_interior_groups(blk, periodic_x=periodic, periodic_y=periodic),)
    if periodic:
        boundary = ({},)
    else:
        boundary = ({s: blk.edge_cells(s) for s in SIDES},)
    faces, _ = _flat_faces((blk,), (0,), interior, boundary, None)
    return Mesh((blk,), None, interior, boundary, faces, ())
