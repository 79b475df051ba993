"""Linear static and modal analysis of 2D pin-jointed trusses.

Direct stiffness method with two translational DOFs per node. Supported
nodes are fully fixed; the remaining DOFs are ordered node by node as
``(x, y)`` pairs in ascending node index, so for the ten-bar cantilever the
reduced order is ``(n1x, n1y, n2x, n2y, n3x, n3y, n4x, n4y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import NotPositiveDefiniteError, cholesky, cho_solve, smallest_generalized_eigenvalue

# Standard gravity in in/s^2; converts a weight density in lb/in^3 to lbf*s^2/in^4.
G_IN_PER_S2 = 386.08858267716535

MASS_MATRIX_KINDS = ("consistent", "lumped")


class TrussError(Exception):
    """Base class for analysis failures."""


class ZeroLengthMemberError(TrussError, ValueError):
    pass


class UnstableStructureError(TrussError):
    """The supports leave a mechanism: reduced stiffness is singular."""


class SolverError(TrussError):
    """Factorization of an assembled matrix failed."""


@dataclass(frozen=True)
class TrussModel:
    """Geometry, supports, loads and material of a plane truss.

    ``density`` is the value used for the reported structural mass
    (``sum rho * A * l``). ``dynamic_mass_factor`` converts it to a mass
    density consistent with the stiffness units for modal analysis, e.g.
    ``1/g`` for a weight density in lb/in^3 or ``1e-3`` for kg/m^3 with kN.
    """

    nodes: np.ndarray
    members: tuple[tuple[int, int], ...]
    supports: frozenset[int]
    loads: dict[int, tuple[float, float]]
    youngs_modulus: float
    density: float
    dynamic_mass_factor: float = 1.0
    mass_matrix: str = "consistent"
    area_scale: float = 1.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError(f"nodes must be an (n, 2) array, got shape {nodes.shape}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "members", tuple((int(i), int(j)) for i, j in self.members))
        object.__setattr__(self, "supports", frozenset(int(s) for s in self.supports))
        object.__setattr__(self, "loads", {int(k): (float(v[0]), float(v[1])) for k, v in self.loads.items()})
        n = len(nodes)
        for e, (i, j) in enumerate(self.members):
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"member {e + 1} has invalid end nodes ({i}, {j})")
        for s in self.supports:
            if not 0 <= s < n:
                raise ValueError(f"support node {s} does not exist")
        for k in self.loads:
            if not 0 <= k < n:
                raise ValueError(f"loaded node {k} does not exist")
        if self.mass_matrix not in MASS_MATRIX_KINDS:
            raise ValueError(f"mass_matrix must be one of {MASS_MATRIX_KINDS}, got {self.mass_matrix!r}")
        for name in ("youngs_modulus", "density", "dynamic_mass_factor", "area_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def n_members(self) -> int:
        return len(self.members)

    @cached_property
    def free_nodes(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.nodes)) if i not in self.supports)

    @cached_property
    def free_dofs(self) -> np.ndarray:
        return np.array([2 * i + d for i in self.free_nodes for d in (0, 1)], dtype=int)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([member_geometry(self, e)[0] for e in range(self.n_members)])

    @cached_property
    def load_vector(self) -> np.ndarray:
        """Applied loads over the free DOFs."""
        f = np.zeros(2 * len(self.nodes))
        for node, (fx, fy) in self.loads.items():
            f[2 * node] += fx
            f[2 * node + 1] += fy
        return f[self.free_dofs]

    @cached_property
    def _unit_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        # Per-member reduced K and M for unit area; assembly is linear in the areas.
        free = self.free_dofs
        index = {int(d): r for r, d in enumerate(free)}
        nf = len(free)
        ks = np.zeros((self.n_members, nf, nf))
        ms = np.zeros((self.n_members, nf, nf))
        for e, (i, j) in enumerate(self.members):
            ke = element_stiffness(self, e, 1.0)
            me = element_mass(self, e, 1.0)
            dofs = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1)
            for p, dp in enumerate(dofs):
                rp = index.get(dp)
                if rp is None:
                    continue
                for q, dq in enumerate(dofs):
                    rq = index.get(dq)
                    if rq is None:
                        continue
                    ks[e, rp, rq] += ke[p, q]
                    ms[e, rp, rq] += me[p, q]
        return ks, ms

    @cached_property
    def is_stable(self) -> bool:
        if len(self.free_dofs) == 0:
            return True
        ks, _ = self._unit_matrices
        k = ks.sum(axis=0)
        return bool(np.linalg.matrix_rank(k, tol=1e-10 * np.abs(k).max()) == k.shape[0])


@dataclass
class AnalysisResult:
    """Response of one design.

    ``displacements`` has one ``(dx, dy)`` row per free node, in the order
    of ``free_nodes``. ``omega`` is the fundamental circular frequency in
    rad/s, or ``None`` when the modal solve was skipped.
    """

    areas: np.ndarray
    free_nodes: tuple[int, ...]
    displacements: np.ndarray
    stresses: np.ndarray
    mass: float
    total_displacement: float
    residual: float
    omega: float | None = None
    member_forces: np.ndarray = field(default=None, repr=False)

    @property
    def frequency_hz(self) -> float | None:
        return None if self.omega is None else self.omega / (2.0 * math.pi)


def standard_ten_bar_model(length: float, youngs_modulus: float, density: float, load: float,
                           **kwargs) -> TrussModel:
    """The ten-bar cantilever: two bays of width ``length``, supported at the left.

    Node indices 0..5 correspond to n1..n6; the load acts downward at n2 and n4.
    Extra keyword arguments are passed to :class:`TrussModel`.
    """
    for name, v in (("length", length), ("youngs_modulus", youngs_modulus), ("density", density), ("load", load)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    L = float(length)
    nodes = [(2 * L, L), (2 * L, 0.0), (L, L), (L, 0.0), (0.0, L), (0.0, 0.0)]
    members = ((4, 2), (2, 0), (5, 3), (3, 1), (2, 3), (0, 1), (4, 3), (5, 2), (2, 1), (3, 0))
    return TrussModel(
        nodes=np.array(nodes),
        members=members,
        supports=frozenset({4, 5}),
        loads={1: (0.0, -float(load)), 3: (0.0, -float(load))},
        youngs_modulus=float(youngs_modulus),
        density=float(density),
        **kwargs,
    )


def member_geometry(model: TrussModel, member: int) -> tuple[float, float, float]:
    """Length and direction cosines ``(l, c, s)`` of a member."""
    i, j = model.members[member]
    dx, dy = model.nodes[j] - model.nodes[i]
    length = math.hypot(dx, dy)
    if length == 0.0:
        raise ZeroLengthMemberError(f"member {member + 1} has zero length")
    return length, dx / length, dy / length


def element_stiffness(model: TrussModel, member: int, area: float) -> np.ndarray:
    """4x4 global stiffness of one bar over ``(uxi, uyi, uxj, uyj)``."""
    length, c, s = member_geometry(model, member)
    t = np.array([-c, -s, c, s])
    return (model.youngs_modulus * area / length) * np.outer(t, t)


def element_mass(model: TrussModel, member: int, area: float) -> np.ndarray:
    """4x4 element mass matrix in consistent or lumped form.

    Both forms are invariant under rotation for a bar with two translational
    DOFs per node, so no transformation is needed.
    """
    length, _, _ = member_geometry(model, member)
    total = model.density * model.dynamic_mass_factor * area * length
    if model.mass_matrix == "lumped":
        return (total / 2.0) * np.eye(4)
    return (total / 6.0) * np.array([[2.0, 0.0, 1.0, 0.0],
                                     [0.0, 2.0, 0.0, 1.0],
                                     [1.0, 0.0, 2.0, 0.0],
                                     [0.0, 1.0, 0.0, 2.0]])


def _physical_areas(model: TrussModel, areas) -> np.ndarray:
    a = np.asarray(areas, dtype=float) * model.area_scale
    if a.shape != (model.n_members,):
        raise ValueError(f"expected {model.n_members} areas, got shape {a.shape}")
    if not np.all(a > 0):
        bad = int(np.flatnonzero(~(a > 0))[0])
        raise ValueError(f"area of member {bad + 1} must be positive, got {areas[bad]}")
    return a


def assemble(model: TrussModel, areas) -> tuple[np.ndarray, np.ndarray]:
    """Reduced global stiffness and mass matrices over the free DOFs.

    ``areas`` are in design units; ``model.area_scale`` converts them.
    """
    a = _physical_areas(model, areas)
    if not model.is_stable:
        raise UnstableStructureError("reduced stiffness matrix is singular: the supports allow a mechanism")
    ks, ms = model._unit_matrices
    return np.tensordot(a, ks, axes=1), np.tensordot(a, ms, axes=1)


def solve_static(k: np.ndarray, loads: np.ndarray) -> np.ndarray:
    """Displacements ``u`` with ``K u = F`` via Cholesky factorization."""
    try:
        lower = cholesky(k)
    except NotPositiveDefiniteError as exc:
        raise SolverError(f"stiffness factorization failed: {exc}") from exc
    return cho_solve(lower, loads)


def _full_displacements(model: TrussModel, u_free: np.ndarray) -> np.ndarray:
    u = np.zeros(2 * len(model.nodes))
    u[model.free_dofs] = u_free
    return u


def member_stress(model: TrussModel, member: int, u_full: np.ndarray) -> float:
    """Axial stress from the full nodal displacement vector; tension positive."""
    i, j = model.members[member]
    length, c, s = member_geometry(model, member)
    elong = -c * u_full[2 * i] - s * u_full[2 * i + 1] + c * u_full[2 * j] + s * u_full[2 * j + 1]
    return model.youngs_modulus * elong / length


def total_mass(model: TrussModel, areas) -> float:
    """``sum(rho * A_i * l_i)``."""
    return float(model.density * (_physical_areas(model, areas) @ model.lengths))


def fundamental_frequency(k: np.ndarray, m: np.ndarray) -> float:
    """Fundamental circular frequency (rad/s) of ``det(K - w^2 M) = 0``."""
    try:
        lam = smallest_generalized_eigenvalue(k, m)
    except NotPositiveDefiniteError as exc:
        raise SolverError(f"mass factorization failed: {exc}") from exc
    return math.sqrt(max(lam, 0.0))


def total_displacement(displacements: np.ndarray) -> float:
    """Sum of the resultant displacement of every free node."""
    d = np.asarray(displacements, dtype=float).reshape(-1, 2)
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def analyze(model: TrussModel, areas, modal: bool = True) -> AnalysisResult:
    """Static response, mass and (optionally) the fundamental frequency."""
    a_design = np.array(areas, dtype=float)
    k, m = assemble(model, a_design)
    f = model.load_vector
    u = solve_static(k, f)
    u_full = _full_displacements(model, u)
    stresses = np.array([member_stress(model, e, u_full) for e in range(model.n_members)])
    fnorm = float(np.linalg.norm(f))
    residual = float(np.linalg.norm(k @ u - f)) / fnorm if fnorm > 0 else float(np.linalg.norm(k @ u - f))
    disp = u.reshape(-1, 2)
    return AnalysisResult(
        areas=a_design,
        free_nodes=model.free_nodes,
        displacements=disp,
        stresses=stresses,
        mass=total_mass(model, a_design),
        total_displacement=total_displacement(disp),
        residual=residual,
        omega=fundamental_frequency(k, m) if modal else None,
        member_forces=stresses * a_design * model.area_scale,
    )
