"""tripcraft: travel-plan constraint checking, synthesis, and prompt refinement."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Plan,
    ReferenceBundle,
    TravelQuery,
    UnresolvedItem,
    plan_total_cost,
    validate_query,
)
from .ingest import ParsedPlanResult, parse_plan, render_plan_text  # noqa: F401
from .constraints import check_plan, default_registry  # noqa: F401
from .metrics import compute_metrics, diff_reports  # noqa: F401
from .solver import Infeasible, SearchConfig, brute_force_oracle, generate_plan  # noqa: F401
