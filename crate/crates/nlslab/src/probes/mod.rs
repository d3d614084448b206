//! Batch experiments, configuration and run reports.

pub mod config;
pub mod conservation;
pub mod report;
pub mod runners;
pub mod strichartz;

pub use conservation::{
    run_almost_conservation, run_energy_track, ConservationConfig, ConservationReport, ConservationRow,
    EnergyTrack,
};
pub use strichartz::{run_strichartz_probe, CalibrationRow, StrichartzConfig, StrichartzReport, StrichartzRow};

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two distinct abscissae
/// or a non-positive value.
pub(crate) fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
