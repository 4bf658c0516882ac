"""Proportional exchange: a post-solve resettlement of network vs external flows.

Sign convention: positive means flow into the MWEN. At each period the
members with positive net exchange (importers) and negative net exchange
(exporters) are matched through the network first. The larger side is
scaled down proportionally so the network balances, and its remainder goes
to the grid / water main. Net exchanges are never altered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model.index import NETWORKED
from .model.schedule import Schedule
from .scenario.types import Scenario

POWER = "power"
WATER = "water"
RESOURCES = (POWER, WATER)
LEDGER_TOL = 1e-6

# schedule fields per resource: (net, network, external import, external export or None)
_FIELDS = {
    POWER: ("P_E", "P_N", "P_grid_in", "P_grid_out"),
    WATER: ("W_E", "W_N", "W_main_in", None),
}


class PeaError(ValueError):
    pass


@dataclass
class ExchangeLedger:
    """One resource's exchanges, arrays of shape (members, periods)."""

    resource: str
    names: tuple[str, ...]
    net_exchange: np.ndarray
    network_exchange: np.ndarray
    external_import: np.ndarray
    external_export: np.ndarray

    def problems(self, tol: float = LEDGER_TOL) -> list[str]:
        """Invariant violations, as human-readable strings (empty when consistent)."""
        out = []
        resid = self.external_import - self.external_export + self.network_exchange - self.net_exchange
        for m, t in zip(*np.nonzero(np.abs(resid) > tol)):
            out.append(f"net exchange mismatch at {self.names[m]}, t={t}: {resid[m, t]:.3g}")
        total = self.network_exchange.sum(axis=0)
        for t in np.flatnonzero(np.abs(total) > tol):
            out.append(f"network exchanges do not balance at t={t}: sum {total[t]:.3g}")
        for label, arr in (("external_import", self.external_import), ("external_export", self.external_export)):
            for m, t in zip(*np.nonzero(arr < -tol)):
                out.append(f"negative {label} at {self.names[m]}, t={t}")
        if self.resource == WATER and np.any(np.abs(self.external_export) > tol):
            out.append("water ledger has external exports")
        return out

    @classmethod
    def from_schedule(cls, sch: Schedule, resource: str) -> "ExchangeLedger":
        if resource not in RESOURCES:
            raise PeaError(f"unknown resource {resource!r}")
        net, network, imp, exp = _FIELDS[resource]
        stack = lambda key: np.array([ms[key] for ms in sch.mwens], dtype=float)  # noqa: E731
        return cls(
            resource,
            tuple(ms.name for ms in sch.mwens),
            stack(net),
            stack(network),
            stack(imp),
            stack(exp) if exp else np.zeros((len(sch.mwens), sch.horizon)),
        )


@dataclass
class PeaResult:
    before: ExchangeLedger
    after: ExchangeLedger
    shares: np.ndarray  # network_exchange / net_exchange after PEA; nan where net is zero
    unchanged: np.ndarray  # per period: the pass left the ledger as it was


def split_signed(exchanges) -> tuple[np.ndarray, np.ndarray]:
    """Positive parts as imports, negative parts (kept negative) as exports."""
    L = np.asarray(exchanges, dtype=float)
    return np.maximum(L, 0.0), np.minimum(L, 0.0)


def rebalance_period(exchanges) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Network exchange, external import and external export for one period."""
    L = np.asarray(exchanges, dtype=float)
    imports, exports = split_signed(L)
    total_in = imports.sum()
    total_out = -exports.sum()
    pos, neg = L > 0, L < 0
    network = np.zeros_like(L)
    ext_in = np.zeros_like(L)
    ext_out = np.zeros_like(L)
    if total_in > total_out:
        network[pos] = L[pos] * (total_out / total_in)
        ext_in[pos] = L[pos] - network[pos]
    else:
        network[pos] = L[pos]
    if total_in < total_out:
        network[neg] = L[neg] * (total_in / total_out)
        ext_out[neg] = np.abs(L[neg] - network[neg])
    else:
        network[neg] = L[neg]
    return network, ext_in, ext_out


def rebalance_ledger(ledger: ExchangeLedger) -> PeaResult:
    M, T = ledger.net_exchange.shape
    network = np.zeros((M, T))
    ext_in = np.zeros((M, T))
    ext_out = np.zeros((M, T))
    for t in range(T):
        L = ledger.net_exchange[:, t]
        n, i, o = rebalance_period(L)
        if ledger.resource == WATER and o.any():
            if o.max() > LEDGER_TOL:
                raise PeaError(f"water exports exceed imports through the network at t={t}")
            # round-off only: exporters stay fully on the network
            n = np.where(L < 0, L, n)
            o = np.zeros_like(o)
        network[:, t], ext_in[:, t], ext_out[:, t] = n, i, o
    after = ExchangeLedger(ledger.resource, ledger.names, ledger.net_exchange.copy(), network, ext_in, ext_out)
    with np.errstate(invalid="ignore", divide="ignore"):
        shares = np.where(ledger.net_exchange != 0, network / ledger.net_exchange, np.nan)
    unchanged = np.all(
        (network == ledger.network_exchange)
        & (ext_in == ledger.external_import)
        & (ext_out == ledger.external_export),
        axis=0,
    )
    return PeaResult(ledger, after, shares, unchanged)


def apply_pea(schedule: Schedule, s: Scenario, resource: str = POWER) -> tuple[Schedule, PeaResult]:
    """Resettle one resource of a networked schedule; returns a new schedule.

    Only the network exchange and external import/export fields change (plus
    the aggregate grid direction binaries, kept consistent with the new
    aggregate flows).
    """
    if schedule.mode != NETWORKED:
        raise PeaError("proportional exchange applies to networked schedules only")
    if len(schedule.mwens) != len(s.mwens):
        raise PeaError("schedule and scenario have different MWEN counts")
    ledger = ExchangeLedger.from_schedule(schedule, resource)
    problems = ledger.problems()
    if problems:
        raise PeaError("exchange ledger is inconsistent:\n" + "\n".join(problems))
    result = rebalance_ledger(ledger)
    out = schedule.copy()
    _, network, imp, exp = _FIELDS[resource]
    for i, ms in enumerate(out.mwens):
        ms[network] = result.after.network_exchange[i]
        ms[imp] = result.after.external_import[i]
        if exp:
            ms[exp] = result.after.external_export[i]
    if resource == POWER and out.aggregate:
        buys = result.after.external_import.sum(axis=0)
        sells = result.after.external_export.sum(axis=0)
        p_in, p_out = out.aggregate["p_in"], out.aggregate["p_out"]
        p_in[buys > 0], p_out[buys > 0] = 1.0, 0.0
        p_in[sells > 0], p_out[sells > 0] = 0.0, 1.0
    return out, result
