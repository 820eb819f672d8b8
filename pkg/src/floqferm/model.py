"""Model parameters and real-space Majorana coefficient matrices.

The drive acts on a chain of ``L`` spins and is built from three quadratic
pieces.  After the Jordan-Wigner mapping (two Majorana operators per site)
each piece is represented by a ``2L x 2L`` antisymmetric matrix ``H`` with
the normalization ``H_op = gamma^T H gamma / 4``.

Majorana ordering is fixed once for the whole package: the Majorana vector
interleaves the two species site by site,

    (b_1, a_1, b_2, a_2, ..., b_L, a_L)

so in 0-based array indices site ``j`` (1-based) owns ``b_j`` at ``2j - 2``
and ``a_j`` at ``2j - 1``.  A single operator term ``c * i * g_mu * g_nu``
(``mu != nu``) contributes ``H[mu, nu] = 2ic`` and ``H[nu, mu] = -2ic``.

The builders return unit-weight matrices: coupling scalars and per-site
fields are applied later, at exponentiation, so one matrix skeleton serves
disordered and time-dependent runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError

BOUNDARY_CONDITIONS = ("open", "periodic", "antiperiodic")
DISORDER_KINDS = ("none", "quenched", "stochastic")


def b_index(j: int) -> int:
    """0-based position of b_j (1-based site j) in the Majorana vector."""
    return 2 * j - 2


def a_index(j: int) -> int:
    """0-based position of a_j (1-based site j) in the Majorana vector."""
    return 2 * j - 1


def canonical_ordering() -> dict:
    """Describe the Majorana index map used by every module."""
    return {
        "vector": "(b_1, a_1, b_2, a_2, ..., b_L, a_L)",
        "b_index": "site j (1-based) -> 2j - 2",
        "a_index": "site j (1-based) -> 2j - 1",
        "coefficient_rule": (
            "term c*i*g_mu*g_nu (mu != nu) contributes "
            "H[mu, nu] = 2ic, H[nu, mu] = -2ic under H_op = gamma^T H gamma / 4"
        ),
    }


@dataclass(frozen=True)
class DisorderSpec:
    """On-site Y-field randomness.

    ``quenched`` draws one value per site once; ``stochastic`` redraws every
    time step.  Fields are ``mean + delta * u`` with ``u`` uniform in
    [-1, 1], generated counter-based so draws are keyed by
    (seed, site, step) and independent of evaluation order.
    """

    kind: str = "none"
    mean: float = 0.0
    delta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISORDER_KINDS:
            raise ConfigError(f"unknown disorder kind {self.kind!r}")
        if self.delta < 0:
            raise ConfigError("disorder delta must be >= 0")
        if self.seed < 0:
            raise ConfigError("disorder seed must be a non-negative integer")

    def fields(self, L: int, step: int = 0) -> np.ndarray:
        """Per-site field values at a given time step."""
        if self.kind == "none":
            raise ConfigError("fields() called with disorder kind 'none'")
        eff_step = 0 if self.kind == "quenched" else int(step)
        bitgen = np.random.Philox(key=self.seed, counter=[eff_step, 0, 0, 0])
        u = np.random.Generator(bitgen).uniform(-1.0, 1.0, size=L)
        return self.mean + self.delta * u


def _as_coupling(value, n: int, name: str) -> tuple:
    """Broadcast a scalar to n entries; validate a sequence of length n."""
    if value is None:
        value = 0.0
    if np.isscalar(value):
        seq = (float(value),) * n
    else:
        seq = tuple(float(v) for v in value)
        if len(seq) != n:
            raise ConfigError(f"{name} must have length {n}, got {len(seq)}")
    if not all(np.isfinite(seq)):
        raise ConfigError(f"{name} contains non-finite entries")
    return seq


@dataclass(frozen=True)
class ModelParams:
    """Full specification of a run.

    Open chains carry ``L - 1`` bonds, closed chains ``L``.  Scalars passed
    for the couplings are broadcast to per-bond / per-site sequences.
    """

    L: int
    beta: float = 0.0
    j_xx: Sequence[float] | float = 0.0
    j_zz: Sequence[float] | float = 0.0
    j_yy: Sequence[float] | float = 0.0
    h_y: Sequence[float] | float = 0.0
    bc: str = "open"
    disorder: DisorderSpec = field(default_factory=DisorderSpec)
    seed: int = 0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ConfigError("L must be an integer >= 2")
        object.__setattr__(self, "L", int(self.L))
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ConfigError(f"unknown boundary condition {self.bc!r}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ConfigError("beta must be a finite real >= 0")
        if isinstance(self.disorder, dict):
            object.__setattr__(self, "disorder", DisorderSpec(**self.disorder))
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        nb = self.n_bonds
        object.__setattr__(self, "j_xx", _as_coupling(self.j_xx, nb, "j_xx"))
        object.__setattr__(self, "j_zz", _as_coupling(self.j_zz, nb, "j_zz"))
        object.__setattr__(self, "j_yy", _as_coupling(self.j_yy, nb, "j_yy"))
        object.__setattr__(self, "h_y", _as_coupling(self.h_y, self.L, "h_y"))

    @property
    def n_bonds(self) -> int:
        return self.L - 1 if self.bc == "open" else self.L

    def h_fields(self, step: int = 0) -> np.ndarray:
        """Per-site Y fields at a time step, disorder folded in."""
        if self.disorder.kind == "none":
            return np.asarray(self.h_y, dtype=float)
        return self.disorder.fields(self.L, step)

    def is_uniform(self) -> bool:
        return all(
            len(set(c)) <= 1 for c in (self.j_xx, self.j_zz, self.j_yy, self.h_y)
        )

    def with_size(self, L: int) -> "ModelParams":
        """Same physics on a chain of different length (uniform couplings only)."""
        if not self.is_uniform():
            raise ConfigError("with_size requires uniform couplings")
        return replace(
            self,
            L=L,
            j_xx=self.j_xx[0] if self.j_xx else 0.0,
            j_zz=self.j_zz[0] if self.j_zz else 0.0,
            j_yy=self.j_yy[0] if self.j_yy else 0.0,
            h_y=self.h_y[0],
        )

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "beta": self.beta,
            "j_xx": list(self.j_xx),
            "j_zz": list(self.j_zz),
            "j_yy": list(self.j_yy),
            "h_y": list(self.h_y),
            "bc": self.bc,
            "disorder": {
                "kind": self.disorder.kind,
                "mean": self.disorder.mean,
                "delta": self.disorder.delta,
                "seed": self.disorder.seed,
            },
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        data = dict(data)
        dis = data.pop("disorder", None)
        disorder = DisorderSpec(**dis) if dis else DisorderSpec()
        known = {"L", "beta", "j_xx", "j_zz", "j_yy", "h_y", "bc", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown model keys: {sorted(unknown)}")
        if "L" not in data:
            raise ConfigError("model is missing required key 'L'")
        return cls(disorder=disorder, **data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MajoranaMatrix:
    """Antisymmetric coefficient matrix of one quadratic piece.

    ``pairs`` lists the (mu, nu) index pair of each bond, in bond order, so
    exponentiation can work block by block; all pairs are disjoint.
    """

    entries: np.ndarray
    pairs: tuple

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def antisymmetry_defect(self) -> float:
        a = self.entries
        scale = max(1.0, float(np.abs(a).max()))
        return float(np.abs(a + a.T).max()) / scale

    def pairs_disjoint(self) -> bool:
        seen = [mu for pair in self.pairs for mu in pair]
        return len(seen) == len(set(seen))

    def weighted(self, weights) -> np.ndarray:
        """Entries with per-bond weights folded in (returns a plain array)."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(self.pairs),):
            raise ConfigError(
                f"expected {len(self.pairs)} weights, got {weights.shape}"
            )
        out = np.zeros_like(self.entries)
        for (mu, nu), w in zip(self.pairs, weights):
            out[mu, nu] = w * self.entries[mu, nu]
            out[nu, mu] = w * self.entries[nu, mu]
        return out


def matrix_from_terms(L: int, terms: Sequence[tuple]) -> MajoranaMatrix:
    """Assemble H from terms (c, mu, nu), each meaning c*i*g_mu*g_nu."""
    H = np.zeros((2 * L, 2 * L), dtype=complex)
    pairs = []
    for c, mu, nu in terms:
        if mu == nu:
            raise ConfigError("term with mu == nu has no antisymmetric part")
        H[mu, nu] += 2j * c
        H[nu, mu] -= 2j * c
        pairs.append((mu, nu))
    return MajoranaMatrix(entries=H, pairs=tuple(pairs))


def _closed_sign(bc: str) -> float:
    return 1.0 if bc == "periodic" else -1.0


def build_h_zz(params: ModelParams) -> MajoranaMatrix:
    """ZZ piece: one term -i b_j a_{j+1} per bond (unit weights).

    The wrap bond of a closed chain carries +1 (periodic) or -1
    (antiperiodic); open chains omit it.
    """
    L = params.L
    terms = [(-1.0, b_index(j), a_index(j + 1)) for j in range(1, L)]
    if params.bc != "open":
        terms.append((-_closed_sign(params.bc), b_index(L), a_index(1)))
    return matrix_from_terms(L, terms)


def build_h_xx(params: ModelParams) -> MajoranaMatrix:
    """XX piece: one term +i a_j b_{j+1} per bond (unit weights)."""
    L = params.L
    terms = [(1.0, a_index(j), b_index(j + 1)) for j in range(1, L)]
    if params.bc != "open":
        terms.append((_closed_sign(params.bc), a_index(L), b_index(1)))
    return matrix_from_terms(L, terms)


def build_h_y(params: ModelParams, step: int = 0):
    """Y piece: one on-site term +i b_j a_j per site (unit weights).

    Returns ``(matrix, fields)``; the per-site field values (including any
    disorder realization at ``step``) are applied by the caller at
    exponentiation, not folded into the matrix.
    """
    L = params.L
    terms = [(1.0, b_index(j), a_index(j)) for j in range(1, L + 1)]
    return matrix_from_terms(L, terms), params.h_fields(step)
