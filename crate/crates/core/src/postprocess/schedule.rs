//! Loading programmes.

use serde::{Deserialize, Serialize};

use super::PostprocessError;

fn default_samples() -> usize {
    11
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PressureSchedule {
    /// Pressure proportional to analysis time. `samples` evenly spaced
    /// levels are used when the schedule drives a solver.
    Proportional {
        t_end: f64,
        p_max: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Staircase of `increment` kPa steps held for `hold` seconds up to
    /// `p_max`, optionally stepping back down the same way.
    Stepped { increment: f64, hold: f64, p_max: f64, with_reverse: bool },
    /// `(time, pressure)` pairs, linearly interpolated.
    Explicit { points: Vec<(f64, f64)> },
}

impl PressureSchedule {
    /// The usual bench protocol: 10 kPa steps held 5 s, up to 100 kPa and back.
    pub fn bench_protocol() -> Self {
        PressureSchedule::Stepped { increment: 10.0, hold: 5.0, p_max: 100.0, with_reverse: true }
    }

    pub fn validate(&self) -> Result<(), PostprocessError> {
        let bad = |m: String| Err(PostprocessError::InvalidSchedule(m));
        match self {
            PressureSchedule::Proportional { t_end, p_max, samples } => {
                if !(*t_end > 0.0) {
                    return bad(format!("t_end must be positive (got {t_end})"));
                }
                if !(*p_max >= 0.0 && p_max.is_finite()) {
                    return bad(format!("p_max must be non-negative (got {p_max})"));
                }
                if *samples < 1 {
                    return bad("at least one sample is needed".into());
                }
            }
            PressureSchedule::Stepped { increment, hold, p_max, .. } => {
                if !(*increment > 0.0) {
                    return bad(format!("increment must be positive (got {increment})"));
                }
                if !(*hold > 0.0) {
                    return bad(format!("hold must be positive (got {hold})"));
                }
                if !(*p_max >= 0.0 && p_max.is_finite()) {
                    return bad(format!("p_max must be non-negative (got {p_max})"));
                }
            }
            PressureSchedule::Explicit { points } => {
                if points.is_empty() {
                    return bad("explicit schedule is empty".into());
                }
                if points.iter().any(|&(_, p)| !(p >= 0.0 && p.is_finite())) {
                    return bad("pressures must be non-negative".into());
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return bad("times must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }

    fn steps(increment: f64, p_max: f64) -> usize {
        (p_max / increment).ceil() as usize
    }

    /// `(start, end)` of the schedule in its time unit.
    pub fn span(&self) -> (f64, f64) {
        match self {
            PressureSchedule::Proportional { t_end, .. } => (0.0, *t_end),
            PressureSchedule::Stepped { increment, hold, p_max, with_reverse } => {
                let k = Self::steps(*increment, *p_max) as f64;
                (0.0, if *with_reverse { 2.0 * k * hold } else { k * hold })
            }
            PressureSchedule::Explicit { points } => (points[0].0, points[points.len() - 1].0),
        }
    }

    /// Pressure in kPa at time `t`.
    pub fn time_to_pressure(&self, t: f64) -> Result<f64, PostprocessError> {
        self.validate()?;
        let (start, end) = self.span();
        if !(t >= start && t <= end) {
            return Err(PostprocessError::OutOfRange { t, start, end });
        }
        Ok(match self {
            PressureSchedule::Proportional { t_end, p_max, .. } => p_max * t / t_end,
            PressureSchedule::Stepped { increment, hold, p_max, .. } => {
                let k = Self::steps(*increment, *p_max) as f64;
                let up = |tau: f64| (increment * (tau / hold).ceil()).min(*p_max);
                if t <= k * hold {
                    up(t)
                } else {
                    (p_max - increment * ((t - k * hold) / hold).ceil()).max(0.0)
                }
            }
            PressureSchedule::Explicit { points } => {
                let i = points.partition_point(|&(pt, _)| pt <= t);
                if i == points.len() {
                    points[i - 1].1
                } else if i == 0 {
                    points[0].1
                } else {
                    let (t0, p0) = points[i - 1];
                    let (t1, p1) = points[i];
                    p0 + (p1 - p0) * (t - t0) / (t1 - t0)
                }
            }
        })
    }

    /// Pressure levels visited, in order.
    pub fn levels(&self) -> Result<Vec<f64>, PostprocessError> {
        self.validate()?;
        Ok(match self {
            PressureSchedule::Proportional { p_max, samples, .. } => {
                if *samples == 1 {
                    vec![*p_max]
                } else {
                    (0..*samples).map(|i| p_max * i as f64 / (*samples - 1) as f64).collect()
                }
            }
            PressureSchedule::Stepped { increment, p_max, with_reverse, .. } => {
                let k = Self::steps(*increment, *p_max);
                let mut v: Vec<f64> = (0..=k).map(|i| (increment * i as f64).min(*p_max)).collect();
                if *with_reverse {
                    v.extend((0..k).rev().map(|i| (increment * i as f64).min(*p_max)));
                }
                v
            }
            PressureSchedule::Explicit { points } => points.iter().map(|&(_, p)| p).collect(),
        })
    }

    /// Levels, checked to rise to a single peak and then fall.
    pub fn monotone_legs(&self) -> Result<Vec<f64>, PostprocessError> {
        let v = self.levels()?;
        let peak = v.iter().enumerate().fold(0, |best, (i, &p)| if p > v[best] { i } else { best });
        let rising = v[..=peak].windows(2).all(|w| w[1] >= w[0]);
        let falling = v[peak..].windows(2).all(|w| w[1] <= w[0]);
        if rising && falling {
            Ok(v)
        } else {
            Err(PostprocessError::InvalidSchedule(
                "pressure must rise monotonically to its peak, then fall monotonically".into(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_mapping() {
        let s = PressureSchedule::Proportional { t_end: 1.0, p_max: 100.0, samples: 11 };
        assert_eq!(s.time_to_pressure(0.5).unwrap(), 50.0);
        assert_eq!(s.time_to_pressure(0.0).unwrap(), 0.0);
        assert!(matches!(s.time_to_pressure(1.5), Err(PostprocessError::OutOfRange { .. })));
        assert_eq!(s.levels().unwrap().len(), 11);
    }

    #[test]
    fn staircase() {
        let s = PressureSchedule::bench_protocol();
        assert_eq!(s.time_to_pressure(12.0).unwrap(), 30.0);
        assert_eq!(s.time_to_pressure(0.0).unwrap(), 0.0);
        assert_eq!(s.time_to_pressure(5.0).unwrap(), 10.0);
        assert_eq!(s.time_to_pressure(50.0).unwrap(), 100.0);
        assert_eq!(s.time_to_pressure(52.0).unwrap(), 90.0);
        assert_eq!(s.time_to_pressure(100.0).unwrap(), 0.0);
        assert_eq!(s.span(), (0.0, 100.0));
        let levels = s.monotone_legs().unwrap();
        assert_eq!(levels.len(), 21);
        assert_eq!(levels[10], 100.0);
    }

    #[test]
    fn explicit_interpolation_and_checks() {
        let s = PressureSchedule::Explicit { points: vec![(0.0, 0.0), (2.0, 40.0), (3.0, 10.0)] };
        assert_eq!(s.time_to_pressure(1.0).unwrap(), 20.0);
        assert_eq!(s.time_to_pressure(3.0).unwrap(), 10.0);
        assert!(s.monotone_legs().is_ok());
        let zigzag = PressureSchedule::Explicit { points: vec![(0.0, 0.0), (1.0, 40.0), (2.0, 10.0), (3.0, 50.0)] };
        assert!(zigzag.monotone_legs().is_err());
        let bad = PressureSchedule::Explicit { points: vec![(1.0, 0.0), (1.0, 5.0)] };
        assert!(bad.validate().is_err());
        let neg = PressureSchedule::Stepped { increment: 0.0, hold: 5.0, p_max: 100.0, with_reverse: false };
        assert!(neg.validate().is_err());
    }
}
