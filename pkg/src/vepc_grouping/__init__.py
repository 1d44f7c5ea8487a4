"""Placement-aware signaling-traffic model for a virtualized EPC."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    INTERFACES, PLACEABLE, EntityKind, Interface, ModelError, PathClass, Placement, Protocol,
    Site, classify_path, load_placement, validate_placement,
)
from .profile import (  # noqa: E402
    PAPER_CALIBRATION, TABLE3_PROFILE, Calibration, ProfileError, RateMode, RateTable,
    TrafficProfile, derive_baseline_rates, load_profile, table_calibrated_rates,
)
from .grouping import (  # noqa: E402
    GroupedRates, RewriteRule, apply_grouping, isolated_placement, load_rules, paper_rules,
    proposed_placement, single_segment_placement,
)
from .procedures import ProcedureDef, attach_procedure, expand_procedure  # noqa: E402
from .engine import (  # noqa: E402
    Comparison, EngineKind, Scenario, SimReport, compare, load_scenario, run, run_analytic,
    run_simulation,
)
from .reporting import RenderFormat, merge, parse, render  # noqa: E402
