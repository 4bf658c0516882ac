"""The water-energy nexus MILP: variable index, encoders and schedules."""

from .builder import ModelError, build_networked, build_separate, pump_power, recovery_inflow, terminal_targets
from .index import (
    NETWORKED,
    QUANTITIES,
    SEPARATE,
    VariableIndex,
    row_family,
    variable_count,
)
from .schedule import MwenSchedule, Schedule, ScheduleError, empty_schedule, extract_schedule

__all__ = [
    "ModelError", "build_networked", "build_separate", "pump_power", "recovery_inflow",
    "terminal_targets", "NETWORKED", "QUANTITIES", "SEPARATE", "VariableIndex", "row_family",
    "variable_count", "MwenSchedule", "Schedule", "ScheduleError", "empty_schedule",
    "extract_schedule",
]
