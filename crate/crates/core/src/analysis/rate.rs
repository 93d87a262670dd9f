use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::TrajectoryRecord;

/// Which population series of a record to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationSource {
    True,
    Filter(usize),
}

/// Least-squares slope of `ln(q_alpha(n) / q_upsilon(n))` against `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate<T> {
    pub alpha: usize,
    pub upsilon: usize,
    pub slope: T,
    /// Inclusive step window `[n0, n1]`.
    pub window: (usize, usize),
    /// RMS residual of the linear fit.
    pub residual: T,
}

fn series<T: Real>(record: &TrajectoryRecord<T>, source: PopulationSource) -> Result<&[Vec<T>]> {
    match source {
        PopulationSource::True => record.populations.as_deref(),
        PopulationSource::Filter(f) => record.filter_populations.as_ref().and_then(|p| p.get(f)).map(|v| v.as_slice()),
    }
    .ok_or_else(|| Error::UndefinedRate("record carries no populations for this source".into()))
}

fn log_ratio<T: Real>(q: &[T], alpha: usize, upsilon: usize, n: usize) -> Result<T> {
    let (a, u) = (q[alpha], q[upsilon]);
    if !(a > T::zero() && u > T::zero()) {
        return Err(Error::UndefinedRate(format!("zero population at step {n}")));
    }
    Ok(a.ln() - u.ln())
}

/// Fitted selection rate over `window`; `upsilon` is the true trajectory's
/// final argmax.
pub fn empirical_rate<T: Real>(
    record: &TrajectoryRecord<T>,
    source: PopulationSource,
    alpha: usize,
    window: (usize, usize),
) -> Result<RateEstimate<T>> {
    let (n0, n1) = window;
    if n1 < n0 + 2 || n1 > record.steps() {
        return Err(Error::UndefinedRate(format!(
            "window [{n0}, {n1}] needs n1 - n0 >= 2 and n1 <= {}",
            record.steps()
        )));
    }
    let upsilon = record
        .final_true_pointer()
        .ok_or_else(|| Error::UndefinedRate("no true populations".into()))?;
    let q = series(record, source)?;
    if alpha >= q[0].len() {
        return Err(Error::UnknownPointer(alpha.to_string()));
    }
    let ys = (n0..=n1)
        .map(|n| log_ratio(&q[n], alpha, upsilon, n))
        .collect::<Result<Vec<T>>>()?;
    let count = T::from_usize(ys.len()).expect("window fits scalar");
    let x_mean = T::from_usize(n0 + n1).expect("step fits scalar") / T::lit(2.0);
    let y_mean = ys.iter().copied().sum::<T>() / count;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (k, y) in ys.iter().enumerate() {
        let dx = T::from_usize(n0 + k).expect("step fits scalar") - x_mean;
        sxy = sxy + dx * (*y - y_mean);
        sxx = sxx + dx * dx;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sq: T = ys
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let fit = intercept + slope * T::from_usize(n0 + k).expect("step fits scalar");
            (*y - fit) * (*y - fit)
        })
        .sum();
    Ok(RateEstimate {
        alpha,
        upsilon,
        slope,
        window,
        residual: (sq / count).sqrt(),
    })
}

/// `(1/n) ln(q_alpha(n) / q_upsilon(n))` at a single step `n > 0`.
pub fn endpoint_rate<T: Real>(record: &TrajectoryRecord<T>, source: PopulationSource, alpha: usize, n: usize) -> Result<T> {
    if n == 0 || n > record.steps() {
        return Err(Error::UndefinedRate(format!("step {n} outside 1..={}", record.steps())));
    }
    let upsilon = record
        .final_true_pointer()
        .ok_or_else(|| Error::UndefinedRate("no true populations".into()))?;
    let q = series(record, source)?;
    if alpha >= q[n].len() {
        return Err(Error::UnknownPointer(alpha.to_string()));
    }
    Ok(log_ratio(&q[n], alpha, upsilon, n)? / T::from_usize(n).expect("step fits scalar"))
}
