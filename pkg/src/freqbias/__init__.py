"""Online estimation of balancing-area frequency bias from minute telemetry."""
from .ace import (
    AceRecord,
    IeeRecord,
    LoadDeviationSeries,
    ace_f_from_bias,
    compose_ace,
    estimate_load_deviation,
    iee_compare,
    iee_hourly,
    interchange_deviation,
)
from .csvio import Telemetry, emit_plot_data, ingest_csv, read_truth_csv, write_dataset_csv, write_truth_csv
from .errors import FreqBiasError, all_error_classes
from .estimator import DroopEstimate, EstimatorConfig, beta_from_sigma, objective_value, ols_fit, rolling_estimate
from .gtg import (
    AreaDroop,
    GtgParams,
    GtgState,
    aggregate_area,
    aggregate_reference,
    analytic_droop,
    integrate_gtg,
    random_gtg_params,
    step_gtg,
)
from .pipeline import ReportBundle, RunConfig, load_config, run_pipeline
from .reserves import (
    BandSpec,
    CostModel,
    ReserveEnvelope,
    band_compliance,
    cost_savings,
    envelope_tightening,
    reserve_envelope,
)
from .synth import BiasSchedule, DisturbanceSpec, InterchangeModel, LoadModel, SyntheticDataset, simulate_ba, two_area_interchange
from .timeseries import BiasValue, TimeSeries, Unit, Window, convert_bias, hourly_sum_mwh, make_series

__all__ = [name for name in dir() if not name.startswith("_")]
