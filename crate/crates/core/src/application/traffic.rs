use serde::{Deserialize, Serialize};

use super::AppError;
use crate::engine::{Distribution, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrafficKind {
    Constant,
    Uniform,
    Exponential,
}

impl TrafficKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficKind::Constant => "constant",
            TrafficKind::Uniform => "uniform",
            TrafficKind::Exponential => "exponential",
        }
    }
}

/// Inter-generation time model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub kind: TrafficKind,
    /// Seconds.
    pub mean_interval: f64,
    /// Bounds of the uniform model; `(lo + hi) / 2` must equal the mean.
    pub lo: f64,
    pub hi: f64,
}

impl TrafficModel {
    pub fn constant(mean_interval: f64) -> Self {
        Self {
            kind: TrafficKind::Constant,
            mean_interval,
            lo: mean_interval,
            hi: mean_interval,
        }
    }

    pub fn exponential(mean_interval: f64) -> Self {
        Self {
            kind: TrafficKind::Exponential,
            mean_interval,
            lo: mean_interval,
            hi: mean_interval,
        }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self {
            kind: TrafficKind::Uniform,
            mean_interval: 0.5 * (lo + hi),
            lo,
            hi,
        }
    }

    /// Uniform over `[mean/2, 3*mean/2]`.
    pub fn uniform_around(mean_interval: f64) -> Self {
        Self::uniform(0.5 * mean_interval, 1.5 * mean_interval)
    }

    pub fn of_kind(kind: TrafficKind, mean_interval: f64) -> Self {
        match kind {
            TrafficKind::Constant => Self::constant(mean_interval),
            TrafficKind::Uniform => Self::uniform_around(mean_interval),
            TrafficKind::Exponential => Self::exponential(mean_interval),
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if !(self.mean_interval > 0.0 && self.mean_interval.is_finite()) {
            return Err(AppError::InvalidModel(
                "mean_interval must be positive".into(),
            ));
        }
        if self.kind == TrafficKind::Uniform {
            if !(self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
                return Err(AppError::InvalidModel(
                    "uniform bounds need 0 < lo <= hi".into(),
                ));
            }
            let mid = 0.5 * (self.lo + self.hi);
            if (mid - self.mean_interval).abs() > 1e-9 * self.mean_interval {
                return Err(AppError::InvalidModel(
                    "uniform bounds must be centred on mean_interval".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn distribution(&self) -> Distribution {
        match self.kind {
            TrafficKind::Constant => Distribution::Constant(self.mean_interval),
            TrafficKind::Uniform => Distribution::Uniform {
                lo: self.lo,
                hi: self.hi,
            },
            TrafficKind::Exponential => Distribution::Exponential {
                mean: self.mean_interval,
            },
        }
    }
}

/// Time of the next generation after `now`.
pub fn next_generation_time(
    model: &TrafficModel,
    now: f64,
    rng: &mut RngStream,
) -> Result<f64, AppError> {
    model.validate()?;
    let gap = rng
        .draw(&model.distribution())
        .map_err(|e| AppError::InvalidModel(e.to_string()))?;
    Ok(now + gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Purpose;

    #[test]
    fn constant_is_exact() {
        let mut rng = RngStream::new(0, Purpose::Traffic);
        assert_eq!(
            next_generation_time(&TrafficModel::constant(7200.0), 0.0, &mut rng).unwrap(),
            7200.0
        );
    }

    #[test]
    fn degenerate_uniform() {
        let mut rng = RngStream::new(0, Purpose::Traffic);
        let m = TrafficModel::uniform(7200.0, 7200.0);
        assert_eq!(next_generation_time(&m, 0.0, &mut rng).unwrap(), 7200.0);
    }

    #[test]
    fn uniform_stays_in_bounds() {
        let mut rng = RngStream::new(5, Purpose::Traffic);
        let m = TrafficModel::uniform_around(600.0);
        for _ in 0..1000 {
            let dt = next_generation_time(&m, 10.0, &mut rng).unwrap() - 10.0;
            assert!((300.0..=900.0).contains(&dt));
        }
    }

    #[test]
    fn invalid_models() {
        let mut rng = RngStream::new(0, Purpose::Traffic);
        for m in [
            TrafficModel::constant(0.0),
            TrafficModel::exponential(-5.0),
            TrafficModel {
                kind: TrafficKind::Uniform,
                mean_interval: 10.0,
                lo: 1.0,
                hi: 2.0,
            },
            TrafficModel::uniform(0.0, 4.0),
        ] {
            assert!(matches!(
                next_generation_time(&m, 0.0, &mut rng),
                Err(AppError::InvalidModel(_))
            ));
        }
    }
}
