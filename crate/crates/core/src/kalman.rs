//! Static scalar Kalman filter for denoising one measurement channel.
//!
//! The state has identity dynamics, so prediction leaves the estimate
//! unchanged. Each measurement runs, in order:
//!
//! ```text
//! K      = P / (P + r)          gain
//! x      = x + K * (z - x)      state update
//! P      = (1 - K) * P          covariance update
//! P      = P + q                covariance prediction
//! ```

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KalmanError {
    /// `p0` must be strictly positive.
    Covariance(f64),
    /// `r` must be strictly positive.
    MeasurementVariance(f64),
    /// `q` must be non-negative.
    ProcessVariance(f64),
    /// Measurement was NaN or infinite; the state was left untouched.
    NonFinite(f64),
}

impl fmt::Display for KalmanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KalmanError::Covariance(v) => write!(f, "initial covariance must be > 0, got {v}"),
            KalmanError::MeasurementVariance(v) => {
                write!(f, "measurement variance must be > 0, got {v}")
            }
            KalmanError::ProcessVariance(v) => write!(f, "process variance must be >= 0, got {v}"),
            KalmanError::NonFinite(v) => write!(f, "non-finite measurement {v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub x_hat: f64,
    /// Predicted covariance for the next measurement.
    pub p: f64,
    pub r: f64,
    pub q: f64,
    /// Gain used for the most recent estimate; `None` before the first update.
    pub k_last: Option<f64>,
}

impl KalmanState {
    pub fn new(x0: f64, p0: f64, r: f64, q: f64) -> Result<Self, KalmanError> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(KalmanError::Covariance(p0));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(KalmanError::MeasurementVariance(r));
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(KalmanError::ProcessVariance(q));
        }
        Ok(KalmanState {
            x_hat: x0,
            p: p0,
            r,
            q,
            k_last: None,
        })
    }

    /// Folds one measurement in and returns the new estimate.
    pub fn step(&mut self, z: f64) -> Result<f64, KalmanError> {
        if !z.is_finite() {
            return Err(KalmanError::NonFinite(z));
        }
        let denom = self.p + self.r;
        let k = self.p / denom;
        self.x_hat += k * (z - self.x_hat);
        // 1 - K evaluated as r / (P + r): same value, no cancellation when K ~ 1
        self.p *= self.r / denom;
        self.p += self.q;
        self.k_last = Some(k);
        Ok(self.x_hat)
    }

    /// Pure form of [`KalmanState::step`].
    pub fn update(self, z: f64) -> Result<(KalmanState, f64), KalmanError> {
        let mut next = self;
        let x = next.step(z)?;
        Ok((next, x))
    }

    /// Limit of the gain under repeated updates, for `q > 0`.
    ///
    /// The predicted covariance settles where `P = P r / (P + r) + q`, i.e.
    /// the positive root of `P^2 - qP - qr = 0`.
    pub fn steady_state_gain(r: f64, q: f64) -> f64 {
        let p = 0.5 * (q + libm::sqrt(q * q + 4.0 * q * r));
        p / (p + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validates() {
        let s = KalmanState::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!((s.x_hat, s.p, s.k_last), (0.0, 1.0, None));
        assert_eq!(
            KalmanState::new(0.0, 0.0, 1.0, 0.0),
            Err(KalmanError::Covariance(0.0))
        );
        assert!(KalmanState::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(KalmanState::new(0.0, 1.0, 1.0, -1e-9).is_err());
        assert!(KalmanState::new(0.6, 1e6, 0.0004, 1e-6).is_ok());
    }

    #[test]
    fn single_update_by_hand() {
        let s = KalmanState::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let (s, x) = s.update(4.0).unwrap();
        assert_eq!(s.k_last, Some(0.5));
        assert_eq!(x, 2.0);
        assert_eq!(s.p, 0.5);
    }

    #[test]
    fn equal_p_and_r_give_half_gain() {
        for &v in &[1e-8, 0.3, 7.0, 1e9] {
            let (s, _) = KalmanState::new(1.0, v, v, 0.0)
                .unwrap()
                .update(2.0)
                .unwrap();
            assert_eq!(s.k_last, Some(0.5));
        }
    }

    #[test]
    fn diffuse_prior_gives_running_mean() {
        let mut s = KalmanState::new(0.0, 1e12, 1.0, 0.0).unwrap();
        let est: [f64; 3] = [3.0, 5.0, 7.0].map(|z| s.step(z).unwrap());
        for (e, m) in est.iter().zip([3.0, 4.0, 5.0]) {
            assert!((e - m).abs() < 1e-6);
        }
    }

    #[test]
    fn non_finite_measurement_leaves_state() {
        let mut s = KalmanState::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let before = s;
        assert!(matches!(s.step(f64::NAN), Err(KalmanError::NonFinite(_))));
        assert_eq!(s, before);
        assert!(s.step(f64::INFINITY).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn steady_state_root_satisfies_recursion() {
        let (r, q) = (1.0, 0.01);
        let k = KalmanState::steady_state_gain(r, q);
        let p = k * r / (1.0 - k);
        assert!((p * r / (p + r) + q - p).abs() < 1e-15);
    }
}
