//! Relative entropies, selection-rate estimation and the parameter-region scan.

mod entropy;
mod martingale;
mod rate;
mod region;

pub use entropy::{relative_entropy, theoretical_rate, Extended, OutcomeDistribution, DISTRIBUTION_SUM_TOL};
pub use martingale::{martingale_defect, product_form_populations, recurrence_residuals, LOG_SPACE_AFTER};
pub use rate::{empirical_rate, endpoint_rate, PopulationSource, RateEstimate};
pub use region::{
    argmin_condition, region_scan, AxisRange, Grid, RegionScanResult, ScanNode, Verdict, TIE_TOL,
};
