"""Truncated Fock spaces, second quantization and representation transport.

All particles of a system share one occupation basis keyed by
``(particle, mode)`` slots. Bosonic slots hold up to the total cutoff,
fermionic slots hold 0 or 1, and creation amplitudes that would leave the
retained basis are dropped. Fermionic signs follow a Jordan-Wigner string
over the fermionic slots in slot order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp

from .errors import ParticleSystemError, RegistryError, UnitarityError, VacuumError
from .report import Check, Report

BOSON, FERMION = "boson", "fermion"


@dataclass(frozen=True)
class Particle:
    name: str
    conj: str
    mass: float = 0.0
    stats: str = BOSON
    spin: Any = None


@dataclass
class ParticleSystem:
    particles: list[Particle]

    def __post_init__(self):
        self.by_name = {p.name: p for p in self.particles}

    @classmethod
    def from_json(cls, records) -> "ParticleSystem":
        return cls([Particle(r["name"], r.get("conj", r["name"]), float(r.get("mass", 0.0)),
                             r.get("stats", BOSON), r.get("spin")) for r in records])

    def to_json(self):
        return [{"name": p.name, "conj": p.conj, "mass": p.mass, "stats": p.stats, "spin": p.spin} for p in self.particles]

    def __getitem__(self, name) -> Particle:
        try:
            return self.by_name[name]
        except KeyError:
            raise ParticleSystemError(f"unknown particle {name!r}") from None

    def antiparticle(self, name) -> Particle:
        return self[self[name].conj]


def validate_particle_system(system: ParticleSystem) -> dict:
    names = [p.name for p in system.particles]
    if len(set(names)) != len(names):
        raise ParticleSystemError("duplicate particle names")
    for p in system.particles:
        if p.stats not in (BOSON, FERMION):
            raise ParticleSystemError(f"{p.name}: statistics must be boson or fermion")
        if p.mass < 0:
            raise ParticleSystemError(f"{p.name}: negative mass")
        if p.conj not in system.by_name:
            raise ParticleSystemError(f"{p.name}: conjugate {p.conj!r} is not in the system")
        q = system.by_name[p.conj]
        if q.conj != p.name:
            raise ParticleSystemError(f"conjugation is not an involution: {p.name} -> {q.name} -> {q.conj}")
        if q.mass != p.mass:
            raise ParticleSystemError(f"{p.name} and its antiparticle {q.name} have different masses")
        if q.stats != p.stats:
            raise ParticleSystemError(f"{p.name} and its antiparticle {q.name} have different statistics")
    return {
        "valid": True,
        "self_conjugate": [p.name for p in system.particles if p.conj == p.name],
        "pairs": sorted({tuple(sorted((p.name, p.conj))) for p in system.particles if p.conj != p.name}),
    }


def _occupations(caps, cutoff):
    ranges = [range(min(c, cutoff) + 1) for c in caps]
    states = [n for n in itertools.product(*ranges) if sum(n) <= cutoff]
    # graded lexicographic: by total, then first slot most occupied
    states.sort(key=lambda n: (sum(n), tuple(-v for v in n)))
    return states


def expected_dimension(n_bosons: int, n_fermions: int, cutoff: int) -> int:
    """Number of occupation states with total at most ``cutoff``."""
    total = 0
    for f in range(min(n_fermions, cutoff) + 1):
        rest = cutoff - f
        total += math.comb(n_fermions, f) * math.comb(n_bosons + rest, rest)
    return total


class TruncatedFock:
    """Occupation-number basis over ``(particle, mode)`` slots with total occupation ``<= cutoff``."""

    def __init__(self, system: ParticleSystem, momenta, cutoff: int, dp: float = 1.0):
        validate_particle_system(system)
        self.system = system
        mom = np.asarray(momenta, dtype=float)
        if mom.ndim == 1:
            mom = np.column_stack([mom, np.zeros((len(mom), 2))])
        self.momenta = mom.reshape(-1, 3)
        self.cutoff = int(cutoff)
        self.dp = float(dp)
        self.slots = [(p.name, k) for p in system.particles for k in range(len(self.momenta))]
        self.slot_index = {s: i for i, s in enumerate(self.slots)}
        self.stats = [system[name].stats for name, _ in self.slots]
        self.energies = np.array([math.sqrt(system[name].mass ** 2 + float(self.momenta[k] @ self.momenta[k]))
                                  for name, k in self.slots])
        caps = [1 if s == FERMION else self.cutoff for s in self.stats]
        self.basis = _occupations(caps, self.cutoff)
        self.index = {n: i for i, n in enumerate(self.basis)}
        self._fermionic = np.array([s == FERMION for s in self.stats])
        self._cache: dict = {}

    @classmethod
    def single(cls, n_modes: int, cutoff: int, stats: str = BOSON, mass: float = 0.0, momenta=None, dp: float = 1.0):
        system = ParticleSystem([Particle("phi", "phi", mass, stats)])
        if momenta is None:
            momenta = np.zeros(n_modes)
        return cls(system, momenta, cutoff, dp)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    def slot(self, particle: str, mode: int) -> int:
        try:
            return self.slot_index[(particle, mode)]
        except KeyError:
            raise ParticleSystemError(f"no slot for particle {particle!r}, mode {mode}") from None

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.complex128)
        v[0] = 1.0
        return v

    def state(self, occupation) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.complex128)
        v[self.index[tuple(occupation)]] = 1.0
        return v

    def totals(self) -> np.ndarray:
        return np.array([sum(n) for n in self.basis])

    # -- operators ---------------------------------------------------------
    def creator(self, slot: int) -> sp.csr_matrix:
        key = ("c", slot)
        if key not in self._cache:
            rows, cols, vals = [], [], []
            fermion = self.stats[slot] == FERMION
            for j, n in enumerate(self.basis):
                if sum(n) >= self.cutoff:
                    continue
                if fermion:
                    if n[slot]:
                        continue
                    amp = -1.0 if sum(n[i] for i in range(slot) if self._fermionic[i]) % 2 else 1.0
                else:
                    amp = math.sqrt(n[slot] + 1)
                m = list(n)
                m[slot] += 1
                rows.append(self.index[tuple(m)])
                cols.append(j)
                vals.append(amp)
            self._cache[key] = sp.csr_matrix((np.array(vals, dtype=np.complex128), (rows, cols)), shape=(self.dim, self.dim))
        return self._cache[key]

    def annihilator(self, slot: int) -> sp.csr_matrix:
        return self.creator(slot).conj().T.tocsr()

    def number(self, slot: int | None = None) -> sp.csr_matrix:
        if slot is None:
            diag = self.totals()
        else:
            diag = np.array([n[slot] for n in self.basis])
        return sp.diags(diag.astype(np.complex128)).tocsr()

    def guarded_projector(self) -> sp.csr_matrix:
        """Projector onto states with total occupation ``<= cutoff - 1``."""
        return sp.diags((self.totals() <= self.cutoff - 1).astype(np.complex128)).tocsr()


def ladder(fock: TruncatedFock, kind: str, slot: int) -> sp.csr_matrix:
    if kind in ("create", "creation", "+"):
        return fock.creator(slot)
    if kind in ("annihilate", "annihilation", "-"):
        return fock.annihilator(slot)
    raise ValueError(f"unknown ladder kind {kind!r}")


def smeared_field(fock: TruncatedFock, particle: str, h, t: float = 0.0) -> sp.csr_matrix:
    """``sum_k dp / sqrt(mu_k) (e^{i mu_k t} conj(h_k) a^+_{pbar,k} + e^{-i mu_k t} h_k a_{p,k})``.

    ``h_k`` is the smearing amplitude contracted with the annihilation kernel;
    the creation kernel of a real test function is its conjugate.
    """
    p = fock.system[particle]
    pbar = fock.system[p.conj]
    h = np.broadcast_to(np.asarray(h, dtype=np.complex128), (len(fock.momenta),))
    out = sp.csr_matrix((fock.dim, fock.dim), dtype=np.complex128)
    for k in range(len(fock.momenta)):
        mu = fock.energies[fock.slot(p.name, k)]
        if mu == 0:
            raise ParticleSystemError("massless mode at p = 0 has no finite field normalization")
        c = fock.dp / math.sqrt(mu)
        out = out + c * (np.exp(1j * mu * t) * np.conj(h[k]) * fock.creator(fock.slot(pbar.name, k))
                         + np.exp(-1j * mu * t) * h[k] * fock.annihilator(fock.slot(p.name, k)))
    return out.tocsr()


def free_hamiltonian(fock: TruncatedFock) -> sp.csr_matrix:
    """Diagonal ``sum n_s mu_s`` over all slots."""
    diag = np.array([float(np.dot(n, fock.energies)) for n in fock.basis])
    return sp.diags(diag.astype(np.complex128)).tocsr()


def check_unitary(U, tol: float = 1e-12) -> float:
    U = np.asarray(U)
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if defect > tol:
        raise UnitarityError(f"matrix is not unitary (defect {defect:.3e})")
    return defect


def gamma(fock: TruncatedFock, U) -> np.ndarray:
    """Second quantization of a one-particle unitary acting on the slots.

    Each basis state ``prod_k (a^+_k)^{n_k} / sqrt(n_k!) |0>`` (lowest slot
    leftmost) maps to the same product of ``b^+_k = sum_j U_jk a^+_j``.
    """
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (fock.n_slots, fock.n_slots):
        raise ValueError(f"unitary must be {fock.n_slots}x{fock.n_slots}")
    check_unitary(U)
    stats = np.array(fock.stats)
    mixing = np.abs(U[np.ix_(stats == BOSON, stats == FERMION)]).max(initial=0.0) + \
        np.abs(U[np.ix_(stats == FERMION, stats == BOSON)]).max(initial=0.0)
    if mixing > 1e-14:
        raise UnitarityError("one-particle unitary mixes bosonic and fermionic slots")
    creators = [fock.creator(j) for j in range(fock.n_slots)]
    B = []
    for k in range(fock.n_slots):
        op = sp.csr_matrix((fock.dim, fock.dim), dtype=np.complex128)
        for j in np.flatnonzero(np.abs(U[:, k]) > 0):
            op = op + U[j, k] * creators[j]
        B.append(op.tocsr())
    out = np.zeros((fock.dim, fock.dim), dtype=np.complex128)
    for col, n in enumerate(fock.basis):
        v = fock.vacuum()
        norm = 1.0
        for k in reversed(range(fock.n_slots)):
            for _ in range(n[k]):
                v = B[k] @ v
            norm *= math.factorial(n[k])
        out[:, col] = v / math.sqrt(norm)
    return out


def _dense(a):
    return a.toarray() if sp.issparse(a) else np.asarray(a)


@dataclass
class TransportedRepresentation:
    operators: list
    spectrum_defects: list[float]
    isometry_defect: float
    vacuum_defect: float


def transport_representation(W, ops, tol: float = 1e-10, vacuum_index: int = 0) -> TransportedRepresentation:
    """Conjugate ``ops`` by a vacuum-fixing partial isometry: ``A -> W A W^+``.

    Spectra are compared between ``P A P`` (``P = W^+ W``, the initial
    space) and ``W A W^+``; both share eigenvalues including the zeros.
    """
    W = _dense(W).astype(np.complex128)
    e0 = np.zeros(W.shape[1], dtype=np.complex128)
    e0[vacuum_index] = 1.0
    vac = float(np.linalg.norm(W @ e0 - e0))
    if vac > tol:
        raise VacuumError(f"W does not fix the vacuum (defect {vac:.3e})")
    iso = float(np.max(np.abs(W @ W.conj().T @ W - W)))
    if iso > tol:
        raise UnitarityError(f"W is not a partial isometry (defect {iso:.3e})")
    Wd = W.conj().T
    P = Wd @ W
    out, defects = [], []
    for A in ops:
        A = _dense(A)
        TA = W @ A @ Wd
        out.append(TA)
        PAP = P @ A @ P
        if np.allclose(A, A.conj().T, atol=1e-12):
            ref, new = np.linalg.eigvalsh(PAP), np.linalg.eigvalsh(TA)
        else:
            ref, new = np.linalg.svd(PAP, compute_uv=False), np.linalg.svd(TA, compute_uv=False)
        defects.append(float(np.max(np.abs(np.sort(ref) - np.sort(new)))))
    return TransportedRepresentation(out, defects, iso, vac)


class CategoryRegistry:
    """Energy-indexed theories with unitary morphisms between them."""

    def __init__(self):
        self.theories: dict[float, dict] = {}
        self.morphisms: dict[tuple[float, float], np.ndarray] = {}

    def add_theory(self, energy: float, params: dict | None = None):
        energy = float(energy)
        if energy < 0:
            raise RegistryError("energies must be nonnegative")
        if energy in self.theories:
            raise RegistryError(f"theory at E = {energy} already registered")
        self.theories[energy] = dict(params or {})

    def add_morphism(self, e1: float, e2: float, U):
        e1, e2 = float(e1), float(e2)
        for e in (e1, e2):
            if e not in self.theories:
                raise RegistryError(f"no theory registered at E = {e}")
        if (e1, e2) in self.morphisms:
            raise RegistryError(f"morphism ({e1}, {e2}) already registered")
        self.morphisms[(e1, e2)] = _dense(U).astype(np.complex128)

    def check_groupoid(self, tol: float = 1e-10) -> Report:
        report = Report("registry")
        for (a, b), U in sorted(self.morphisms.items()):
            d = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
            report.add(Check.below(f"unitary[{a}->{b}]", d, tol))
            if a == b:
                report.add(Check.below(f"identity[{a}]", float(np.max(np.abs(U - np.eye(U.shape[0])))), tol))
        energies = sorted(self.theories)
        for a, b, c in itertools.product(energies, repeat=3):
            if len({a, b, c}) < 3:
                continue
            if (a, b) in self.morphisms and (b, c) in self.morphisms and (a, c) in self.morphisms:
                comp = self.morphisms[(b, c)] @ self.morphisms[(a, b)]
                d = float(np.max(np.abs(comp - self.morphisms[(a, c)])))
                report.add(Check.below(f"compose[{a}->{b}->{c}]", d, tol))
        return report
