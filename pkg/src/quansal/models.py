"""Scenarios, behaviors and the three model classes (commuting, tensor, quansal).

Indices are zero-based throughout: setting ``x`` of Alice, setting ``y`` of
Bob, outcomes ``a`` and ``b``.  Behavior tables are ragged because different
settings may have different outcome counts; ``table[x][y]`` is a real array of
shape ``(outcomes_a[x], outcomes_b[y])``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import matkernel as mk
from .errors import InvalidModel, NotNormalized, ScenarioMismatch

DEFAULT_TOL = 1e-9
IMAG_TOL = 1e-10

MeasurementKind = Literal["projective", "povm"]


# ----------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)


@dataclass(frozen=True)
class Report:
    """Itemized validation outcome; overall pass iff every residual <= its tol."""

    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def residual(self, name: str) -> float:
        for c in self.checks:
            if c.name == name:
                return c.residual
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "residual": c.residual, "tol": c.tol, "passed": c.passed}
                for c in self.checks
            ],
        }

    def __str__(self) -> str:
        lines = [
            f"{'PASS' if c.passed else 'FAIL'}  {c.name:<28s} residual={c.residual:.3e}  tol={c.tol:.1e}"
            for c in self.checks
        ]
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _max(values, default: float = 0.0) -> float:
    values = list(values)
    return float(max(values)) if values else default


# ----------------------------------------------------------------------------
# scenario and behavior


@dataclass(frozen=True)
class Scenario:
    outcomes_a: tuple[int, ...]
    outcomes_b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes_a", tuple(int(k) for k in self.outcomes_a))
        object.__setattr__(self, "outcomes_b", tuple(int(k) for k in self.outcomes_b))
        if not self.outcomes_a or not self.outcomes_b:
            raise ValueError("each party needs at least one setting")
        if min(self.outcomes_a + self.outcomes_b) < 1:
            raise ValueError("outcome counts must be >= 1")

    @property
    def settings_a(self) -> int:
        return len(self.outcomes_a)

    @property
    def settings_b(self) -> int:
        return len(self.outcomes_b)

    @classmethod
    def uniform(cls, settings_a: int, outcomes_a: int, settings_b: int, outcomes_b: int) -> "Scenario":
        return cls((outcomes_a,) * settings_a, (outcomes_b,) * settings_b)


@dataclass(frozen=True, eq=False)
class Behavior:
    scenario: Scenario
    table: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        s = self.scenario
        rows = []
        if len(self.table) != s.settings_a:
            raise ScenarioMismatch("table does not match the number of Alice settings")
        for x, row in enumerate(self.table):
            if len(row) != s.settings_b:
                raise ScenarioMismatch("table does not match the number of Bob settings")
            cells = []
            for y, cell in enumerate(row):
                arr = np.array(cell, dtype=float)
                if arr.shape != (s.outcomes_a[x], s.outcomes_b[y]):
                    raise ScenarioMismatch(
                        f"cell ({x},{y}) has shape {arr.shape}, expected {(s.outcomes_a[x], s.outcomes_b[y])}"
                    )
                arr.setflags(write=False)
                cells.append(arr)
            rows.append(tuple(cells))
        object.__setattr__(self, "table", tuple(rows))

    def p(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.table[x][y][a, b])

    def alice_marginal(self, x: int, y: int = 0) -> np.ndarray:
        return self.table[x][y].sum(axis=1)

    def bob_marginal(self, y: int, x: int = 0) -> np.ndarray:
        return self.table[x][y].sum(axis=0)

    def max_abs_diff(self, other: "Behavior") -> float:
        if other.scenario != self.scenario:
            raise ScenarioMismatch("behaviors live on different scenarios")
        return _max(
            np.max(np.abs(p - q)) for rp, rq in zip(self.table, other.table) for p, q in zip(rp, rq)
        )

    def cells(self):
        """Iterate ``(x, y, array)`` over all setting pairs."""
        for x, row in enumerate(self.table):
            for y, cell in enumerate(row):
                yield x, y, cell


def behavior_from_function(scenario: Scenario, fn) -> Behavior:
    """Build a behavior from ``fn(x, y) -> array`` of shape (outcomes_a[x], outcomes_b[y])."""
    return Behavior(
        scenario,
        tuple(tuple(fn(x, y) for y in range(scenario.settings_b)) for x in range(scenario.settings_a)),
    )


def validate_behavior(p: Behavior, tol: float = DEFAULT_TOL) -> Report:
    lo = _max(-c.min() for _, _, c in p.cells())
    hi = _max(c.max() - 1.0 for _, _, c in p.cells())
    norm = _max(abs(c.sum() - 1.0) for _, _, c in p.cells())
    return Report(
        (
            Check("nonnegativity", max(lo, 0.0), tol),
            Check("upper_bound", max(hi, 0.0), tol),
            Check("normalization", norm, tol),
        )
    )


def check_no_signaling(p: Behavior, tol: float = DEFAULT_TOL) -> Report:
    """Max deviation of each party's marginals under the other party's setting change."""
    s = p.scenario
    a_to_b = 0.0
    for y in range(s.settings_b):
        margs = [p.bob_marginal(y, x) for x in range(s.settings_a)]
        for m1, m2 in itertools.combinations(margs, 2):
            a_to_b = max(a_to_b, float(np.max(np.abs(m1 - m2))))
    b_to_a = 0.0
    for x in range(s.settings_a):
        margs = [p.alice_marginal(x, y) for y in range(s.settings_b)]
        for m1, m2 in itertools.combinations(margs, 2):
            b_to_a = max(b_to_a, float(np.max(np.abs(m1 - m2))))
    return Report((Check("alice_to_bob", a_to_b, tol), Check("bob_to_alice", b_to_a, tol)))


def mix_behaviors(p: Behavior, q: Behavior, w: float) -> Behavior:
    """Entrywise ``w * p + (1 - w) * q``."""
    if p.scenario != q.scenario:
        raise ScenarioMismatch("cannot mix behaviors on different scenarios")
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"mixing weight {w} outside [0, 1]")
    return behavior_from_function(p.scenario, lambda x, y: w * p.table[x][y] + (1.0 - w) * q.table[x][y])


def _check_distributions(dists, counts, who: str, tol: float) -> list[np.ndarray]:
    if len(dists) != len(counts):
        raise ScenarioMismatch(f"{who}: expected {len(counts)} settings, got {len(dists)}")
    out = []
    for k, (d, n) in enumerate(zip(dists, counts)):
        d = np.asarray(d, dtype=float)
        if d.shape != (n,):
            raise ScenarioMismatch(f"{who}: setting {k} has {d.shape} entries, expected {n}")
        if np.any(d < -tol) or abs(d.sum() - 1.0) > tol:
            raise NotNormalized(f"{who}: setting {k} is not a probability distribution")
        out.append(d)
    return out


def product_behavior(qa: Sequence, pb: Sequence, s: Scenario, tol: float = DEFAULT_TOL) -> Behavior:
    """``P(a,b|x,y) = q(a|x) p(b|y)``."""
    qa = _check_distributions(qa, s.outcomes_a, "Alice", tol)
    pb = _check_distributions(pb, s.outcomes_b, "Bob", tol)
    return behavior_from_function(s, lambda x, y: np.outer(qa[x], pb[y]))


def uniform_distributions(counts: Sequence[int]) -> list[np.ndarray]:
    return [np.full(n, 1.0 / n) for n in counts]


def alice_marginals(p: Behavior) -> list[np.ndarray]:
    return [p.alice_marginal(x) for x in range(p.scenario.settings_a)]


def bob_marginals(p: Behavior) -> list[np.ndarray]:
    return [p.bob_marginal(y) for y in range(p.scenario.settings_b)]


def chsh_value(p: Behavior) -> float:
    """``E11 + E12 + E21 - E22`` for a two-setting, two-outcome behavior.

    Outcome index 0 is read as +1 and index 1 as -1.
    """
    s = p.scenario
    if s.outcomes_a != (2, 2) or s.outcomes_b != (2, 2):
        raise ScenarioMismatch("CHSH needs two dichotomic settings per party")
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    corr = [[float(np.sum(sign * p.table[x][y])) for y in range(2)] for x in range(2)]
    return corr[0][0] + corr[0][1] + corr[1][0] - corr[1][1]


# ----------------------------------------------------------------------------
# measurements


@dataclass(frozen=True, eq=False)
class Measurement:
    operators: tuple[np.ndarray, ...]
    kind: MeasurementKind = "projective"

    def __post_init__(self):
        if self.kind not in ("projective", "povm"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        ops = tuple(mk.as_cmatrix(E) for E in self.operators)
        if not ops:
            raise ValueError("a measurement needs at least one outcome")
        d = ops[0].shape
        if any(E.shape != d or d[0] != d[1] for E in ops):
            raise ValueError("measurement operators must be square and of equal size")
        for E in ops:
            E.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.operators)

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, a: int) -> np.ndarray:
        return self.operators[a]


def measurement_checks(ms: Sequence[Measurement], label: str, tol: float) -> list[Check]:
    herm = psd = comp = proj = 0.0
    any_projective = False
    for m in ms:
        eye = np.eye(m.dim)
        comp = max(comp, mk.frobenius_norm(sum(m.operators) - eye))
        for E in m.operators:
            herm = max(herm, mk.hermiticity_residual(E))
            psd = max(psd, -mk.min_eigenvalue(E))
            if m.kind == "projective":
                any_projective = True
                proj = max(proj, mk.frobenius_norm(E @ E - E))
    checks = [
        Check(f"{label}_hermiticity", herm, tol),
        Check(f"{label}_positivity", max(psd, 0.0), tol),
        Check(f"{label}_completeness", comp, tol),
    ]
    if any_projective:
        checks.append(Check(f"{label}_projectivity", proj, tol))
    return checks


def _state_checks(rho: np.ndarray, label: str, tol: float) -> list[Check]:
    return [
        Check(f"{label}_hermiticity", mk.hermiticity_residual(rho), tol),
        Check(f"{label}_positivity", max(-mk.min_eigenvalue(rho), 0.0), tol),
        Check(f"{label}_trace", abs(complex(np.trace(rho)) - 1.0), tol),
    ]


def _outcome_counts(ms: Sequence[Measurement]) -> tuple[int, ...]:
    return tuple(m.outcomes for m in ms)


def _as_measurements(ms) -> tuple[Measurement, ...]:
    out = tuple(m if isinstance(m, Measurement) else Measurement(tuple(m)) for m in ms)
    if not out:
        raise ValueError("each party needs at least one measurement setting")
    return out


def _real_prob(value: complex, where: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise InvalidModel(f"probability at {where} has imaginary part {value.imag:.3e}")
    return float(value.real)


# ----------------------------------------------------------------------------
# commuting-operator models


@dataclass(frozen=True, eq=False)
class CommutingModel:
    rho: np.ndarray
    alice: tuple[Measurement, ...]
    bob: tuple[Measurement, ...]

    def __post_init__(self):
        rho = mk.as_cmatrix(self.rho)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "alice", _as_measurements(self.alice))
        object.__setattr__(self, "bob", _as_measurements(self.bob))
        if any(m.dim != self.dim for m in self.alice + self.bob):
            raise ValueError("measurement dimension differs from the state dimension")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def scenario(self) -> Scenario:
        return Scenario(_outcome_counts(self.alice), _outcome_counts(self.bob))


def validate_commuting(m: CommutingModel, tol: float = DEFAULT_TOL) -> Report:
    comm = _max(
        mk.commutator_norm(E, F) for ma in m.alice for E in ma for mb in m.bob for F in mb
    )
    checks = (
        _state_checks(m.rho, "rho", tol)
        + measurement_checks(m.alice, "alice", tol)
        + measurement_checks(m.bob, "bob", tol)
        + [Check("commutation", comm, tol)]
    )
    return Report(tuple(checks))


def _require_valid(report: Report, what: str) -> None:
    if not report.passed:
        worst = max(report.failures(), key=lambda c: c.residual / max(c.tol, 1e-300))
        raise InvalidModel(f"invalid {what}: {worst.name} residual {worst.residual:.3e} > {worst.tol:.1e}", report)


def behavior_of_commuting(m: CommutingModel, validate: bool = True, tol: float = DEFAULT_TOL) -> Behavior:
    """``P(a,b|x,y) = tr(rho E^x_a F^y_b)``."""
    if validate:
        _require_valid(validate_commuting(m, tol), "commuting model")

    def cell(x, y):
        out = np.empty((m.alice[x].outcomes, m.bob[y].outcomes))
        for a, E in enumerate(m.alice[x]):
            rhoE = m.rho @ E
            for b, F in enumerate(m.bob[y]):
                # tr(X F) = sum_ij X_ij F_ji
                out[a, b] = _real_prob(complex(np.sum(rhoE * F.T)), f"(x={x},y={y},a={a},b={b})")
        return out

    return behavior_from_function(m.scenario, cell)


# ----------------------------------------------------------------------------
# tensor-product models


@dataclass(frozen=True, eq=False)
class TensorModel:
    dim_a: int
    dim_b: int
    rho_ab: np.ndarray
    alice: tuple[Measurement, ...]
    bob: tuple[Measurement, ...]

    def __post_init__(self):
        rho = mk.as_cmatrix(self.rho_ab)
        rho.setflags(write=False)
        object.__setattr__(self, "rho_ab", rho)
        object.__setattr__(self, "alice", _as_measurements(self.alice))
        object.__setattr__(self, "bob", _as_measurements(self.bob))
        if rho.shape != (self.dim_a * self.dim_b,) * 2:
            raise ValueError(f"rho_ab has shape {rho.shape}, expected {(self.dim_a * self.dim_b,) * 2}")
        if any(m.dim != self.dim_a for m in self.alice) or any(m.dim != self.dim_b for m in self.bob):
            raise ValueError("measurement dimension differs from its factor dimension")

    @property
    def scenario(self) -> Scenario:
        return Scenario(_outcome_counts(self.alice), _outcome_counts(self.bob))


def validate_tensor(m: TensorModel, tol: float = DEFAULT_TOL) -> Report:
    checks = (
        _state_checks(m.rho_ab, "rho_ab", tol)
        + measurement_checks(m.alice, "alice", tol)
        + measurement_checks(m.bob, "bob", tol)
    )
    return Report(tuple(checks))


def behavior_of_tensor(m: TensorModel, validate: bool = True, tol: float = DEFAULT_TOL) -> Behavior:
    """``P(a,b|x,y) = tr(rho_AB E^x_a (x) F^y_b)``."""
    if validate:
        _require_valid(validate_tensor(m, tol), "tensor model")
    da, db = m.dim_a, m.dim_b
    r4 = m.rho_ab.reshape(da, db, da, db)

    def cell(x, y):
        out = np.empty((m.alice[x].outcomes, m.bob[y].outcomes))
        for a, E in enumerate(m.alice[x]):
            # partial contraction over Alice: X[j, l] = sum_ik rho[i,j,k,l] E[k,i]
            X = np.einsum("ijkl,ki->jl", r4, E)
            for b, F in enumerate(m.bob[y]):
                out[a, b] = _real_prob(complex(np.sum(X * F.T)), f"(x={x},y={y},a={a},b={b})")
        return out

    return behavior_from_function(m.scenario, cell)


def embed(t: TensorModel) -> CommutingModel:
    """Commuting-operator form ``E -> E (x) id``, ``F -> id (x) F`` on the product space."""
    ia, ib = np.eye(t.dim_a), np.eye(t.dim_b)
    alice = tuple(Measurement(tuple(np.kron(E, ib) for E in m), m.kind) for m in t.alice)
    bob = tuple(Measurement(tuple(np.kron(ia, F) for F in m), m.kind) for m in t.bob)
    return CommutingModel(t.rho_ab, alice, bob)


def partial_trace_a(X: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    return np.einsum("ijil->jl", X.reshape(dim_a, dim_b, dim_a, dim_b))


def swap_parties(t: TensorModel) -> TensorModel:
    """Exchange the roles of Alice and Bob (and the tensor factors)."""
    da, db = t.dim_a, t.dim_b
    rho = t.rho_ab.reshape(da, db, da, db).transpose(1, 0, 3, 2).reshape(da * db, da * db)
    return TensorModel(db, da, rho, t.bob, t.alice)


# ----------------------------------------------------------------------------
# quansal models


@dataclass(frozen=True, eq=False)
class QuansalModel:
    """Subnormalized states ``sigma_family[x][a]`` with x-independent sums, plus Bob's measurements."""

    sigma_family: tuple[tuple[np.ndarray, ...], ...]
    bob: tuple[Measurement, ...]
    sigma: np.ndarray = field(default=None)

    def __post_init__(self):
        fam = tuple(tuple(mk.as_cmatrix(s) for s in row) for row in self.sigma_family)
        if not fam or any(not row for row in fam):
            raise ValueError("sigma_family needs at least one setting with one outcome")
        d = fam[0][0].shape
        if any(s.shape != d or d[0] != d[1] for row in fam for s in row):
            raise ValueError("sigma_family members must be square and of equal size")
        for row in fam:
            for s in row:
                s.setflags(write=False)
        object.__setattr__(self, "sigma_family", fam)
        object.__setattr__(self, "bob", _as_measurements(self.bob))
        sigma = self.sigma
        if sigma is None:
            sigma = sum(sum(row) for row in fam) / len(fam)
        sigma = mk.as_cmatrix(sigma)
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        if sigma.shape != d or any(m.dim != d[0] for m in self.bob):
            raise ValueError("sigma or Bob's measurements do not match the family dimension")

    @property
    def dim_b(self) -> int:
        return self.sigma.shape[0]

    @property
    def scenario(self) -> Scenario:
        return Scenario(tuple(len(row) for row in self.sigma_family), _outcome_counts(self.bob))

    def setting_sums(self) -> list[np.ndarray]:
        return [sum(row) for row in self.sigma_family]


def quansality_residual(sigma_family) -> float:
    """``max_{x,x'} || sum_a sigma^x_a - sum_a sigma^x'_a ||_1``."""
    sums = [sum(row) for row in sigma_family]
    return _max(mk.trace_norm(s1 - s2) for s1, s2 in itertools.combinations(sums, 2))


def validate_quansal(m: QuansalModel, tol: float = DEFAULT_TOL) -> Report:
    members = [s for row in m.sigma_family for s in row]
    sums = m.setting_sums()
    mean_sum = sum(sums) / len(sums)
    checks = [
        Check("sigma_hermiticity", _max(mk.hermiticity_residual(s) for s in members), tol),
        Check("sigma_positivity", max(_max(-mk.min_eigenvalue(s) for s in members), 0.0), tol),
        Check("quansality", quansality_residual(m.sigma_family), tol),
        Check("sigma_consistency", _max(mk.trace_norm(s - m.sigma) for s in sums), tol),
        Check("sigma_trace", abs(complex(np.trace(mean_sum)) - 1.0), tol),
    ]
    checks += measurement_checks(m.bob, "bob", tol)
    return Report(tuple(checks))


def behavior_of_quansal(m: QuansalModel, validate: bool = True, tol: float = DEFAULT_TOL) -> Behavior:
    """``P(a,b|x,y) = tr(sigma^x_a F^y_b)``."""
    if validate:
        _require_valid(validate_quansal(m, tol), "quansal model")

    def cell(x, y):
        row = m.sigma_family[x]
        out = np.empty((len(row), m.bob[y].outcomes))
        for a, s in enumerate(row):
            for b, F in enumerate(m.bob[y]):
                out[a, b] = _real_prob(complex(np.sum(s * F.T)), f"(x={x},y={y},a={a},b={b})")
        return out

    return behavior_from_function(m.scenario, cell)


def behavior_of(model, validate: bool = True, tol: float = DEFAULT_TOL) -> Behavior:
    if isinstance(model, CommutingModel):
        return behavior_of_commuting(model, validate, tol)
    if isinstance(model, TensorModel):
        return behavior_of_tensor(model, validate, tol)
    if isinstance(model, QuansalModel):
        return behavior_of_quansal(model, validate, tol)
    if isinstance(model, Behavior):
        return model
    raise TypeError(f"no behavior for {type(model).__name__}")
