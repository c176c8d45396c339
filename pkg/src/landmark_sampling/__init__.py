"""Landmark sampling for large survival panels: date-aligned super datasets,
five samplers, weighted hazards and their verification."""

from .dasd import (
    DasdCounts,
    LandmarkCounts,
    RowBudgetExceeded,
    StackedSample,
    dasd_counts,
    dasd_counts_from_landmark,
    dasd_table,
    expand_multiplicity,
    landmark_window,
    materialize_dasd,
)
from .hazard import error_report, fpc_variance, hazard_variance, mae, rmse, se_with_fpc, weighted_hazard, window_hazard
from .ingest import CleaningReport, FREDDIE_MAC_PRESET, SchemaConfig, clean_panel, load_schema, parse_performance_file
from .panel import (
    EventType,
    HazardTable,
    IndividualHistory,
    MonthDate,
    Panel,
    PanelValidationError,
    SizeTable,
    monthly_hazard_original,
    size_table,
    validate_panel,
)
from .samplers import (
    METHODS,
    ProgressiveWeightTable,
    SamplerConfig,
    progressive_rate,
    sample_backward,
    sample_horizontal,
    sample_single,
    sample_uniform,
    sample_vertical,
)
from .synth import SynthConfig, illustration_panel, synthetic_panel

__version__ = "0.1.0"
