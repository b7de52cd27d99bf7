"""Fermi-Hubbard sector construction, exact diagonalization, spectral models.

Hamiltonians are built directly in a fixed (n_up, n_down) occupation
sector: orbitals are ordered all-up-then-all-down, and the fermionic
string of a nearest-neighbor hop reduces to the parity of occupied sites
of the same spin strictly between the two bond sites (the cross-species
strings cancel for number-conserving terms).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .numerics import hermitian_eig

__all__ = [
    "HubbardSpec",
    "SectorBasis",
    "ReferenceState",
    "SpectralModel",
    "sector_basis",
    "build_hubbard",
    "neel_state",
    "spectral_model",
    "synthetic_model",
]

NEEL_PATTERNS = ("left_packed_alternating", "spread_alternating")

# relative tolerance for merging near-degenerate eigenvalues into one level
DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class HubbardSpec:
    """Open-boundary Hubbard lattice with a fixed occupation sector.

    ``lattice`` is ("chain", length) or ("grid", rows, cols); ``t`` is the
    hopping energy (> 0), ``u`` the on-site repulsion (>= 0).
    """

    lattice: tuple
    t: float
    u: float
    n_up: int
    n_down: int

    def __post_init__(self) -> None:
        kind = self.lattice[0]
        if kind == "chain":
            if len(self.lattice) != 2 or self.lattice[1] < 1:
                raise ValueError("chain lattice needs a positive length")
        elif kind == "grid":
            if len(self.lattice) != 3 or self.lattice[1] < 1 or self.lattice[2] < 1:
                raise ValueError("grid lattice needs positive rows and cols")
        else:
            raise ValueError(f"unknown lattice kind {kind!r}")
        if not self.t > 0:
            raise ValueError("hopping t must be > 0")
        if self.u < 0:
            raise ValueError("repulsion U must be >= 0")
        if self.n_up < 0 or self.n_down < 0:
            raise ValueError("occupations must be non-negative")
        if self.n_up + self.n_down < 1:
            raise ValueError("need at least one electron")
        if self.n_up > self.sites or self.n_down > self.sites:
            raise ValueError("occupation exceeds site count")

    @property
    def sites(self) -> int:
        if self.lattice[0] == "chain":
            return self.lattice[1]
        return self.lattice[1] * self.lattice[2]

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbor bonds (p < q), open boundaries, row-major grids."""
        if self.lattice[0] == "chain":
            n = self.lattice[1]
            return [(i, i + 1) for i in range(n - 1)]
        rows, cols = self.lattice[1], self.lattice[2]
        out = []
        for r in range(rows):
            for c in range(cols):
                s = r * cols + c
                if c + 1 < cols:
                    out.append((s, s + 1))
                if r + 1 < rows:
                    out.append((s, s + cols))
        return out

    @staticmethod
    def parse_lattice(text: str) -> tuple:
        """Parse 'chain:7' or 'grid:2x3' into a lattice tuple."""
        kind, _, rest = text.partition(":")
        if kind == "chain":
            return ("chain", int(rest))
        if kind == "grid":
            r, _, c = rest.partition("x")
            return ("grid", int(r), int(c))
        raise ValueError(f"cannot parse lattice {text!r}")


@dataclass(frozen=True)
class SectorBasis:
    """Deterministically ordered (up-mask, down-mask) pairs of a sector."""

    site_count: int
    states: tuple[tuple[int, int], ...]
    index: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)


def _masks(sites: int, occupied: int) -> list[int]:
    masks = [sum(1 << s for s in combo) for combo in combinations(range(sites), occupied)]
    masks.sort()
    return masks


def sector_basis(spec: HubbardSpec) -> SectorBasis:
    """Enumerate the (n_up, n_down) sector, sorted by (up_mask, down_mask)."""
    ups = _masks(spec.sites, spec.n_up)
    downs = _masks(spec.sites, spec.n_down)
    states = tuple((u, d) for u in ups for d in downs)
    if not states:
        raise ValueError("sector has dimension 0")
    index = {st: i for i, st in enumerate(states)}
    return SectorBasis(spec.sites, states, index)


def _hop_sign(mask: int, p: int, q: int) -> int:
    """Parity sign from occupied same-spin sites strictly between p < q."""
    between = ((1 << q) - 1) & ~((1 << (p + 1)) - 1)
    return -1 if (mask & between).bit_count() % 2 else 1


def build_hubbard(spec: HubbardSpec, basis: SectorBasis | None = None) -> np.ndarray:
    """Sector Hamiltonian: -t hopping with fermionic signs, +U per doublon.

    Returns a real symmetric dense matrix over the sector basis.
    """
    basis = basis if basis is not None else sector_basis(spec)
    dim = len(basis)
    h = np.zeros((dim, dim))
    bonds = spec.bonds()
    for i, (up, down) in enumerate(basis.states):
        h[i, i] = spec.u * (up & down).bit_count()
        for p, q in bonds:
            bp, bq = 1 << p, 1 << q
            occ = up & (bp | bq)
            if occ == bp or occ == bq:  # exactly one end occupied: up hop
                j = basis.index[(up ^ (bp | bq), down)]
                h[i, j] += -spec.t * _hop_sign(up, p, q)
            occ = down & (bp | bq)
            if occ == bp or occ == bq:
                j = basis.index[(up, down ^ (bp | bq))]
                h[i, j] += -spec.t * _hop_sign(down, p, q)
    return h


@dataclass(frozen=True)
class ReferenceState:
    """Unit-norm state over a sector basis; product states carry their index."""

    amplitudes: np.ndarray
    basis_index: int | None = None

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"reference state norm {norm!r} is not 1 to 1e-12")
        object.__setattr__(self, "amplitudes", amp)


def _neel_sites(spec: HubbardSpec, pattern: str) -> list[int]:
    n_e = spec.n_up + spec.n_down
    if pattern == "left_packed_alternating":
        return list(range(n_e))
    if pattern == "spread_alternating":
        if n_e == 1:
            return [(spec.sites - 1) // 2]
        if n_e == spec.sites:
            return list(range(n_e))
        pos = [int(math.floor(i * (spec.sites - 1) / (n_e - 1) + 0.5)) for i in range(n_e)]
        if len(set(pos)) != n_e:
            raise ValueError("spread pattern collides; sector too full for spreading")
        return pos
    raise ValueError(f"unknown pattern {pattern!r}; choose one of {NEEL_PATTERNS}")


def neel_state(
    spec: HubbardSpec,
    pattern: str = "left_packed_alternating",
    start_spin: str = "up",
    basis: SectorBasis | None = None,
) -> ReferenceState:
    """Antiferromagnetically alternating product state in the sector.

    ``left_packed_alternating`` fills sites 0..n_e-1; ``spread_alternating``
    spaces the occupied sites as evenly as possible (grids in row-major
    order). Spins alternate starting from ``start_spin``.
    """
    if start_spin not in ("up", "down"):
        raise ValueError("start_spin must be 'up' or 'down'")
    sites = _neel_sites(spec, pattern)
    up_mask = down_mask = 0
    for k, s in enumerate(sites):
        spin_up = (k % 2 == 0) == (start_spin == "up")
        if spin_up:
            up_mask |= 1 << s
        else:
            down_mask |= 1 << s
    if up_mask.bit_count() != spec.n_up or down_mask.bit_count() != spec.n_down:
        raise ValueError(
            f"pattern {pattern!r} with start_spin={start_spin!r} places "
            f"({up_mask.bit_count()},{down_mask.bit_count()}) electrons, "
            f"sector needs ({spec.n_up},{spec.n_down})"
        )
    basis = basis if basis is not None else sector_basis(spec)
    idx = basis.index[(up_mask, down_mask)]
    amp = np.zeros(len(basis), dtype=complex)
    amp[idx] = 1.0
    return ReferenceState(amp, basis_index=idx)


@dataclass(frozen=True)
class SpectralModel:
    """Normalized spectrum with reference-state overlaps.

    ``energies`` ascend within [-1, 1]; ``overlaps_sq`` sum to 1; ``gap``
    is the first coalesced level above the ground level minus the ground
    level (inf for single-level models); ``scale`` is the normalization
    constant dividing the raw energies.
    """

    energies: np.ndarray
    overlaps_sq: np.ndarray
    gap: float
    scale: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        e = np.asarray(self.energies, dtype=float)
        w = np.asarray(self.overlaps_sq, dtype=float)
        if e.ndim != 1 or e.shape != w.shape or e.size < 1:
            raise ValueError("energies and overlaps_sq must be equal-length 1-D")
        if np.any(np.diff(e) < 0):
            raise ValueError("energies must be non-decreasing")
        if e[0] < -1.0 - 1e-12 or e[-1] > 1.0 + 1e-12:
            raise ValueError(f"energies must lie in [-1, 1], got [{e[0]}, {e[-1]}]")
        if np.any(w < -1e-15):
            raise ValueError("overlaps_sq must be non-negative")
        total = w.sum()
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"overlaps_sq sum to {total!r}, expected 1 to 1e-10")
        if not self.gap > 0:
            raise ValueError("gap must be > 0 after degeneracy coalescing")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "overlaps_sq", w)

    @property
    def n_levels(self) -> int:
        return self.energies.size

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    def renormalized(self, margin: float = 1.0) -> "SpectralModel":
        """Re-express on margin * spectral-radius normalization."""
        if margin < 1.0:
            raise ValueError("margin must be >= 1")
        radius = float(np.abs(self.energies).max())
        factor = margin * radius if radius > 0 else 1.0
        meta = dict(self.metadata)
        meta["renormalized_from_scale"] = self.scale
        return SpectralModel(
            self.energies / factor,
            self.overlaps_sq.copy(),
            gap=self.gap / factor if math.isfinite(self.gap) else math.inf,
            scale=self.scale * factor,
            metadata=meta,
        )

    def to_dict(self) -> dict:
        return {
            "energies": self.energies.tolist(),
            "overlaps_sq": self.overlaps_sq.tolist(),
            "gap": self.gap,
            "scale": self.scale,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralModel":
        return cls(
            np.asarray(data["energies"], dtype=float),
            np.asarray(data["overlaps_sq"], dtype=float),
            gap=float(data["gap"]),
            scale=float(data["scale"]),
            metadata=dict(data.get("metadata", {})),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "SpectralModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _coalesce(values: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge eigenvalues closer than DEGENERACY_RTOL * spread into levels."""
    spread = float(values[-1] - values[0])
    tol = DEGENERACY_RTOL * spread
    levels, masses = [], []
    cur_vals, cur_w = [values[0]], weights[0]
    for v, w in zip(values[1:], weights[1:]):
        if v - cur_vals[-1] <= tol:
            cur_vals.append(v)
            cur_w += w
        else:
            levels.append(float(np.mean(cur_vals)))
            masses.append(cur_w)
            cur_vals, cur_w = [v], w
    levels.append(float(np.mean(cur_vals)))
    masses.append(cur_w)
    return np.asarray(levels), np.asarray(masses)


def spectral_model(
    spec: HubbardSpec,
    reference: ReferenceState,
    scale_policy: tuple = ("spectral", 1.0),
    metadata: dict | None = None,
) -> SpectralModel:
    """Diagonalize a Hubbard sector and package the normalized spectrum.

    ``scale_policy`` is ("spectral", margin) with normalization
    margin * max(|E_min|, |E_max|), or ("explicit", lam) with a
    user-supplied lam that must cover the spectral radius. Degenerate
    eigenvalues are coalesced into single levels with summed
    (projection-norm) overlap before the gap is read off.
    """
    basis = sector_basis(spec)
    if reference.amplitudes.size != len(basis):
        raise ValueError("reference state does not live in the sector")
    h = build_hubbard(spec, basis)
    eig = hermitian_eig(h)
    gamma = eig.vectors.conj().T @ reference.amplitudes
    weights = np.abs(gamma) ** 2
    levels, masses = _coalesce(eig.values, weights)
    radius = float(max(abs(levels[0]), abs(levels[-1])))
    kind = scale_policy[0]
    if kind == "spectral":
        margin = float(scale_policy[1]) if len(scale_policy) > 1 else 1.0
        if margin < 1.0:
            raise ValueError("spectral margin must be >= 1")
        lam = margin * radius if radius > 0 else 1.0
    elif kind == "explicit":
        lam = float(scale_policy[1])
        if lam < radius:
            raise ValueError(
                f"explicit scale {lam} is below the spectral radius {radius}; "
                "spectrum would leave [-1, 1]"
            )
    else:
        raise ValueError(f"unknown scale policy {kind!r}")
    gap = (levels[1] - levels[0]) / lam if levels.size > 1 else math.inf
    meta = {
        "lattice": list(spec.lattice),
        "t": spec.t,
        "U": spec.u,
        "n_up": spec.n_up,
        "n_down": spec.n_down,
        "sector_dimension": len(basis),
        "scale_policy": [kind, scale_policy[1] if len(scale_policy) > 1 else 1.0],
    }
    if metadata:
        meta.update(metadata)
    return SpectralModel(levels / lam, masses, gap=float(gap), scale=lam, metadata=meta)


def synthetic_model(
    energies, overlaps_sq, scale: float = 1.0, metadata: dict | None = None
) -> SpectralModel:
    """Validated pass-through model for arbitrary spectra."""
    e = np.asarray(energies, dtype=float)
    w = np.asarray(overlaps_sq, dtype=float)
    if e.size > 1 and np.any(np.diff(e) <= 0):
        raise ValueError("energies must be strictly increasing per level")
    gap = float(e[1] - e[0]) if e.size > 1 else math.inf
    meta = {"synthetic": True}
    if metadata:
        meta.update(metadata)
    return SpectralModel(e, w, gap=gap, scale=scale, metadata=meta)
