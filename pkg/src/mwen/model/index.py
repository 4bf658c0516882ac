"""Decision-variable catalogue and the (mwen, asset, quantity, period) index.

Quantity names are ASCII spellings of the nomenclature symbols. Per-unit
quantities carry an asset position (``g`` generator, ``b`` storage, ``k``
tank); per-MWEN quantities use ``asset=None``; the two aggregate grid
binaries of networked mode use ``mwen=None`` as well.

Per MWEN and period, the variable count is::

    3*G + 5*B + H + 3 + X + 5*ww + 4*wt + 6*K + 1

with G generators, B storages of which H are hydrogen, ww/wt in {0, 1} for the
presence of wastewater/treatment units, K tanks, and X = 4 in networked mode
(P_N, P_E, W_N, W_E) or X = 2 in separate mode (that MWEN's own p_in, p_out).
The constant 3 is P_grid_in, P_grid_out and P_net; the trailing 1 is W_main_in.
Networked mode adds 2 aggregate binaries (p_in, p_out) per period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..scenario.types import HYDROGEN, Scenario

NETWORKED = "networked"
SEPARATE = "separate"

GENERATOR, STORAGE, TANK = "g", "b", "k"

# name -> (asset kind or None, is_binary); order mirrors the nomenclature
QUANTITIES: dict[str, tuple[str | None, bool]] = {
    "P_G": (GENERATOR, False),
    "u_G": (GENERATOR, True),
    "v_G": (GENERATOR, False),
    "P_ESc": (STORAGE, False),
    "P_ESd": (STORAGE, False),
    "e_ESc": (STORAGE, True),
    "e_ESd": (STORAGE, True),
    "EL_ES": (STORAGE, False),
    "W_ES": (STORAGE, False),
    "P_grid_in": (None, False),
    "P_grid_out": (None, False),
    "p_in": (None, True),
    "p_out": (None, True),
    "P_N": (None, False),
    "P_E": (None, False),
    "W_WW": (None, False),
    "u_WW": (None, True),
    "WL_rWW": (None, False),
    "P_WW": (None, False),
    "W_WT": (None, False),
    "u_WT": (None, True),
    "P_WT": (None, False),
    "W_STc": (TANK, False),
    "W_STd": (TANK, False),
    "sp_ST": (TANK, True),
    "sv_ST": (TANK, True),
    "WL_ST": (TANK, False),
    "W_main_in": (None, False),
    "W_N": (None, False),
    "W_E": (None, False),
    "P_WW_pump": (None, False),
    "P_WT_pump": (None, False),
    "P_ST_pump": (TANK, False),
    "P_net": (None, False),
}

WASTEWATER_QUANTITIES = ("W_WW", "u_WW", "WL_rWW", "P_WW", "P_WW_pump")
TREATMENT_QUANTITIES = ("W_WT", "u_WT", "P_WT", "P_WT_pump")
NETWORK_QUANTITIES = ("P_N", "P_E", "W_N", "W_E")


def variable_name(qty, m, asset, t) -> str:
    kind = QUANTITIES[qty][0]
    parts = [] if m is None else [f"m={m}"]
    if kind is not None:
        parts.append(f"{kind}={asset}")
    parts.append(f"t={t}")
    return f"{qty}[{','.join(parts)}]"


def row_name(family, m=None, t=None, **assets) -> str:
    parts = [] if m is None else [f"m={m}"]
    parts += [f"{k}={v}" for k, v in assets.items()]
    if t is not None:
        parts.append(f"t={t}")
    return f"{family}[{','.join(parts)}]" if parts else family


def row_family(name: str) -> str:
    """``eq04.lo[m=0,g=0,t=3]`` -> ``eq04``."""
    return name.split("[", 1)[0].split(".", 1)[0]


@dataclass
class VariableIndex:
    """Maps ``(mwen, asset, quantity, period)`` to a variable position.

    ``members`` lists the scenario positions of the MWENs in the model (all of
    them in networked mode, one in separate mode). ``bound_families`` records
    which variables carry a constraint family as plain bounds rather than rows.
    """

    mode: str
    members: tuple[int, ...]
    horizon: int
    positions: dict[tuple, int] = field(default_factory=dict)
    bound_families: dict[str, list[int]] = field(default_factory=dict)

    def add(self, key, position):
        if key in self.positions:
            raise KeyError(f"duplicate index key {key}")
        self.positions[key] = position

    def __getitem__(self, key) -> int:
        return self.positions[key]

    def __contains__(self, key) -> bool:
        return key in self.positions

    def __len__(self):
        return len(self.positions)

    def get(self, m, asset, qty, t, default=None):
        return self.positions.get((m, asset, qty, t), default)

    def series(self, m, asset, qty) -> list[int]:
        return [self.positions[(m, asset, qty, t)] for t in range(self.horizon)]

    def quantities(self) -> set[str]:
        return {key[2] for key in self.positions}


def per_period_count(mwen, mode: str) -> int:
    G = len(mwen.generators)
    B = len(mwen.storages)
    H = sum(st.kind == HYDROGEN for st in mwen.storages)
    K = len(mwen.tanks)
    X = 4 if mode == NETWORKED else 2
    return 3 * G + 5 * B + H + 3 + X + 5 * (mwen.wastewater is not None) + 4 * (mwen.treatment is not None) + 6 * K + 1


def variable_count(s: Scenario, mode: str = NETWORKED, m=None) -> int:
    """Closed-form number of model variables (see module docstring)."""
    T = s.horizon_periods
    if mode == NETWORKED:
        return T * (sum(per_period_count(mw, mode) for mw in s.mwens) + 2)
    return T * per_period_count(s.mwens[s.mwen_index(m)], SEPARATE)
