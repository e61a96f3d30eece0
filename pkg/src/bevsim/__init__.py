"""Forward-facing longitudinal dynamics simulator for a battery-electric
vehicle: PI driver, Ah-counting battery, torque/power-limited motor,
fixed-ratio transmission, resistive body dynamics, and regenerative
braking, integrated at a fixed step with an energy-conservation ledger.
"""

from .cycle import (
    CycleStats,
    DriveCycle,
    cycle_stats,
    load_udds,
    parse_cycle,
    repeat,
    serialize_cycle,
    synth_trapezoid,
    target_speed,
)
from .driver import ActuationRequest, DriverState, pi_step, split_command
from .dynamics import (
    BodyState,
    ForceBreakdown,
    acceleration,
    aero_drag,
    integrate,
    rolling_resistance,
)
from .engine import (
    EnergyLedger,
    SimState,
    SimSummary,
    SimTrace,
    StopReason,
    TraceRecord,
    initial_state,
    ledger_check,
    run,
    step,
)
from .errors import (
    BevSimError,
    ConfigError,
    CycleError,
    DegenerateVoltageError,
    EnvelopeError,
    PlotError,
    UnreachableTargetError,
)
from .experiments import (
    AccelReport,
    RangeReport,
    RegenComparisonReport,
    SocDynamicsReport,
    TopSpeedReport,
    accel_test,
    accel_time_oracle,
    design_speed_for_power,
    range_test,
    regen_comparison,
    size_motor,
    soc_dynamics_report,
    top_speed_oracle,
    top_speed_test,
)
from .params import (
    BatteryParams,
    DerivedParams,
    DriverParams,
    DrivetrainParams,
    MotorParams,
    SimParams,
    VehicleBodyParams,
    VehicleConfig,
    default_config,
    derived_quantities,
    parse_config,
    serialize_config,
    validate,
)
from .powertrain import (
    BatteryState,
    MotorOperatingPoint,
    available_torque,
    battery_step,
    motor_current,
    motor_electrical_power,
    motor_speed_from_vehicle,
    wheel_torque,
)

__version__ = "0.1.0"

__all__ = [
    "AccelReport",
    "ActuationRequest",
    "BatteryParams",
    "BatteryState",
    "BevSimError",
    "BodyState",
    "ConfigError",
    "CycleError",
    "CycleStats",
    "DegenerateVoltageError",
    "DerivedParams",
    "DriveCycle",
    "DriverParams",
    "DriverState",
    "DrivetrainParams",
    "EnergyLedger",
    "EnvelopeError",
    "ForceBreakdown",
    "MotorOperatingPoint",
    "MotorParams",
    "PlotError",
    "RangeReport",
    "RegenComparisonReport",
    "SimParams",
    "SimState",
    "SimSummary",
    "SimTrace",
    "SocDynamicsReport",
    "StopReason",
    "TopSpeedReport",
    "TraceRecord",
    "UnreachableTargetError",
    "VehicleBodyParams",
    "VehicleConfig",
    "acceleration",
    "accel_test",
    "accel_time_oracle",
    "aero_drag",
    "available_torque",
    "battery_step",
    "cycle_stats",
    "default_config",
    "derived_quantities",
    "design_speed_for_power",
    "initial_state",
    "integrate",
    "ledger_check",
    "load_udds",
    "motor_current",
    "motor_electrical_power",
    "motor_speed_from_vehicle",
    "parse_config",
    "parse_cycle",
    "pi_step",
    "range_test",
    "regen_comparison",
    "repeat",
    "rolling_resistance",
    "run",
    "serialize_config",
    "serialize_cycle",
    "size_motor",
    "soc_dynamics_report",
    "split_command",
    "step",
    "synth_trapezoid",
    "target_speed",
    "top_speed_oracle",
    "top_speed_test",
    "validate",
    "wheel_torque",
]
