//! Monte Carlo validation of the state-cooperation feedback scheme for the
//! Gaussian MAC with the state known strictly causally at encoder 1 and
//! output feedback at encoder 2.
//!
//! Scheme timeline (n + 1 channel uses, Y = X1 + X2 + S with i.i.d. state):
//! at use 0, user 1 is silent and user 2 sends the message point theta(w2)
//! from a uniform partition of [-1, 1]; the feedback of y_0 hands user 2 the
//! realized state s_0, which user 1 already knows. From use 1 on, both users
//! transmit scaled copies of the receiver's current MMSE estimation error of
//! s_0 (user 1 superimposing its own message codeword), driving the error
//! variance down geometrically, Schalkwijk-Kailath style. The receiver
//! finally recovers theta(w2) as y_0 minus its estimate of s_0.
//!
//! User 1's message component is modeled as i.i.d. Gaussian interference of
//! power alpha*P1; its rate bound is reported in closed form rather than by
//! codebook decoding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::NeumaierSum;
use crate::prob::{gaussian_capacity, ProbError};

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("parameter {name} = {value} is invalid: {why}")]
    BadParameter {
        name: &'static str,
        value: f64,
        why: &'static str,
    },
    #[error("channel uses must be >= 1")]
    NoChannelUses,
    #[error("trial count must be >= 1")]
    NoTrials,
    #[error("message count 2^(n R2) = 2^{0} does not fit in a u64")]
    MessageCountOverflow(f64),
    #[error("estimate variance underflows double precision at n = {0}")]
    VarianceUnderflow(usize),
}

pub type Result<T> = std::result::Result<T, FeedbackError>;

/// Configuration of one feedback-scheme run.
#[derive(Debug, Clone)]
pub struct FeedbackConfig {
    pub p1: f64,
    pub p2: f64,
    pub sigma_s2: f64,
    /// Fraction of user 1's power spent on its own message; the rest goes
    /// to state cooperation.
    pub alpha: f64,
    /// Channel uses after the initial message-point transmission.
    pub n: usize,
    /// Rate of user 2 in bits per channel use.
    pub rate2: f64,
    pub trials: usize,
    pub seed: u64,
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(FeedbackError::BadParameter {
                    name,
                    value: v,
                    why: "power must be finite and nonnegative",
                });
            }
        }
        if !self.sigma_s2.is_finite() || self.sigma_s2 <= 0.0 {
            return Err(FeedbackError::BadParameter {
                name: "sigma_s2",
                value: self.sigma_s2,
                why: "state variance must be finite and positive",
            });
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(FeedbackError::BadParameter {
                name: "alpha",
                value: self.alpha,
                why: "power split must lie in [0, 1]",
            });
        }
        if !self.rate2.is_finite() || self.rate2 < 0.0 {
            return Err(FeedbackError::BadParameter {
                name: "rate2",
                value: self.rate2,
                why: "rate must be finite and nonnegative",
            });
        }
        if self.n == 0 {
            return Err(FeedbackError::NoChannelUses);
        }
        if self.trials == 0 {
            return Err(FeedbackError::NoTrials);
        }
        Ok(())
    }

    /// Number of message points for user 2: ceil(2^(n R2)).
    pub fn message_count(&self) -> Result<u64> {
        let bits = self.n as f64 * self.rate2;
        if bits > 62.0 {
            return Err(FeedbackError::MessageCountOverflow(bits));
        }
        Ok((2f64.powf(bits)).ceil().max(1.0) as u64)
    }
}

/// Per-use SNR of the cooperative state transmission: both users' state
/// components add coherently against the fresh state plus user 1's message
/// interference.
pub fn cooperation_snr(alpha: f64, p1: f64, p2: f64, sigma_s2: f64) -> f64 {
    let coherent = ((1.0 - alpha) * p1).sqrt() + p2.sqrt();
    coherent * coherent / (alpha * p1 + sigma_s2)
}

/// Predicted MMSE sequence of the receiver's estimate of s_0: var_0 is the
/// prior sigma_s^2 and each use divides the variance by (1 + SNR_step).
pub fn mmse_recursion(cfg: &FeedbackConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let snr = cooperation_snr(cfg.alpha, cfg.p1, cfg.p2, cfg.sigma_s2);
    let mut vars = Vec::with_capacity(cfg.n + 1);
    let mut v = cfg.sigma_s2;
    vars.push(v);
    for i in 1..=cfg.n {
        v /= 1.0 + snr;
        if v < 1e-290 {
            return Err(FeedbackError::VarianceUnderflow(i));
        }
        vars.push(v);
    }
    Ok(vars)
}

/// Closed-form rate bounds of the scheme at power split alpha:
/// R1 <= C(alpha P1 / sigma^2) from the residual channel after state
/// cancellation, and R2 <= C of the cooperative-transmission SNR.
pub fn achievable_pair(alpha: f64, p1: f64, p2: f64, sigma_s2: f64) -> Result<(f64, f64)> {
    let cfg = FeedbackConfig {
        p1,
        p2,
        sigma_s2,
        alpha,
        n: 1,
        rate2: 0.0,
        trials: 1,
        seed: 0,
    };
    cfg.validate()?;
    let r1 = gaussian_capacity(alpha * p1 / sigma_s2)?;
    let r2 = gaussian_capacity(cooperation_snr(alpha, p1, p2, sigma_s2))?;
    Ok((r1, r2))
}

/// Outcome of a Monte Carlo run. MSE sequences are indexed by channel use,
/// entry 0 being the prior (before any cooperative transmission).
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub predicted_mse: Vec<f64>,
    pub empirical_mse: Vec<f64>,
    /// Standard error of each empirical MSE entry across trials.
    pub mse_stderr: Vec<f64>,
    /// Empirical probability of decoding user 2's message wrongly.
    pub error_rate: f64,
    /// Closed-form (R1, R2) bounds at this configuration's alpha.
    pub rate_pair: (f64, f64),
    /// Whether the configured rate2 is below the closed-form bound.
    pub rate_feasible: bool,
    /// Per-use gains (gamma_1i, gamma_2i) applied at uses 1..=n.
    pub gains: Vec<(f64, f64)>,
    /// Per-use empirical mean transmit power over the cooperative uses.
    pub power1: Vec<f64>,
    pub power2: Vec<f64>,
}

struct TrialOutput {
    sq_err: Vec<f64>,
    sq_err_sq: Vec<f64>,
    pow1: Vec<f64>,
    pow2: Vec<f64>,
    decode_error: bool,
}

/// Run the scheme for `cfg.trials` independent trials with per-trial
/// substreams derived from (seed, trial index); the aggregation is a fixed
/// index-order compensated reduction, so results do not depend on the
/// parallel schedule.
pub fn simulate(cfg: &FeedbackConfig) -> Result<SimResult> {
    cfg.validate()?;
    let message_count = cfg.message_count()?;
    let predicted = mmse_recursion(cfg)?;
    let (r1_bound, r2_bound) = achievable_pair(cfg.alpha, cfg.p1, cfg.p2, cfg.sigma_s2)?;
    let rate_feasible = cfg.rate2 <= r2_bound + 1e-12;

    // Gains come from the analytical variance recursion so each user's
    // transmit power is exactly budgeted per use.
    let gamma1: Vec<f64> = (1..=cfg.n)
        .map(|i| ((1.0 - cfg.alpha) * cfg.p1 / predicted[i - 1]).sqrt())
        .collect();
    let gamma2: Vec<f64> = (1..=cfg.n)
        .map(|i| (cfg.p2 / predicted[i - 1]).sqrt())
        .collect();
    // Innovation gain of the scalar MMSE filter at use i.
    let noise = cfg.alpha * cfg.p1 + cfg.sigma_s2;
    let kalman: Vec<f64> = (1..=cfg.n)
        .map(|i| {
            let g = gamma1[i - 1] + gamma2[i - 1];
            g * predicted[i - 1] / (g * g * predicted[i - 1] + noise)
        })
        .collect();

    let trials: Vec<TrialOutput> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial, message_count, &gamma1, &gamma2, &kalman))
        .collect();

    let uses = cfg.n + 1;
    let t = cfg.trials as f64;
    let mut empirical = vec![0.0; uses];
    let mut stderr = vec![0.0; uses];
    for i in 0..uses {
        let mut mean = NeumaierSum::new();
        let mut second = NeumaierSum::new();
        for tr in &trials {
            mean.add(tr.sq_err[i]);
            second.add(tr.sq_err_sq[i]);
        }
        let m = mean.total() / t;
        let var = (second.total() / t - m * m).max(0.0);
        empirical[i] = m;
        stderr[i] = (var / t).sqrt();
    }
    let mut power1 = vec![0.0; cfg.n];
    let mut power2 = vec![0.0; cfg.n];
    for i in 0..cfg.n {
        let mut acc1 = NeumaierSum::new();
        let mut acc2 = NeumaierSum::new();
        for tr in &trials {
            acc1.add(tr.pow1[i]);
            acc2.add(tr.pow2[i]);
        }
        power1[i] = acc1.total() / t;
        power2[i] = acc2.total() / t;
    }
    let errors = trials.iter().filter(|tr| tr.decode_error).count();

    Ok(SimResult {
        predicted_mse: predicted,
        empirical_mse: empirical,
        mse_stderr: stderr,
        error_rate: errors as f64 / t,
        rate_pair: (r1_bound, r2_bound),
        rate_feasible,
        gains: gamma1.iter().copied().zip(gamma2.iter().copied()).collect(),
        power1,
        power2,
    })
}

fn run_trial(
    cfg: &FeedbackConfig,
    trial: usize,
    message_count: u64,
    gamma1: &[f64],
    gamma2: &[f64],
    kalman: &[f64],
) -> TrialOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64 + 1);

    let sigma_s = cfg.sigma_s2.sqrt();
    let msg_amp = (cfg.alpha * cfg.p1).sqrt();

    let s0 = sigma_s * rng.sample::<f64, _>(StandardNormal);
    let w2 = rng.random_range(0..message_count);
    let theta = -1.0 + (2 * w2 + 1) as f64 / message_count as f64;
    let y0 = theta + s0;

    let mut estimate = 0.0_f64;
    let mut sq_err = Vec::with_capacity(cfg.n + 1);
    let mut pow1 = Vec::with_capacity(cfg.n);
    let mut pow2 = Vec::with_capacity(cfg.n);
    sq_err.push(s0 * s0);
    for i in 0..cfg.n {
        let err = s0 - estimate;
        let x1p = msg_amp * rng.sample::<f64, _>(StandardNormal);
        let state = sigma_s * rng.sample::<f64, _>(StandardNormal);
        let x1 = x1p + gamma1[i] * err;
        let x2 = gamma2[i] * err;
        let y = x1 + x2 + state;
        estimate += kalman[i] * y;
        let e = s0 - estimate;
        sq_err.push(e * e);
        pow1.push(x1 * x1);
        pow2.push(x2 * x2);
    }

    let theta_hat = y0 - estimate;
    let slot = ((theta_hat + 1.0) * message_count as f64 / 2.0).floor();
    let decoded = slot.clamp(0.0, (message_count - 1) as f64) as u64;

    TrialOutput {
        sq_err_sq: sq_err.iter().map(|&v| v * v).collect(),
        sq_err,
        pow1,
        pow2,
        decode_error: decoded != w2,
    }
}

#[cfg(test)]
mod tests {
    // Oracle constants carry full decimal expansions beyond f64 precision.
    #![allow(clippy::excessive_precision)]

    use super::*;

    // Frozen closed-form values at P1 = P2 = 2, sigma^2 = 1, alpha = 1/2.
    const SNR_HALF: f64 = 2.9142135623730950; // (1 + sqrt 2)^2 / 2
    const R2_BOUND_HALF: f64 = 0.98436123630775491;
    const C8: f64 = 1.58496250072115618;

    fn base_cfg() -> FeedbackConfig {
        FeedbackConfig {
            p1: 2.0,
            p2: 2.0,
            sigma_s2: 1.0,
            alpha: 0.5,
            n: 8,
            rate2: 0.5,
            trials: 2000,
            seed: 7,
        }
    }

    #[test]
    fn recursion_constant_without_transmission() {
        let cfg = FeedbackConfig {
            alpha: 1.0,
            p2: 0.0,
            ..base_cfg()
        };
        let vars = mmse_recursion(&cfg).unwrap();
        assert!(vars.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn recursion_matches_rate_bound() {
        let cfg = base_cfg();
        let snr = cooperation_snr(cfg.alpha, cfg.p1, cfg.p2, cfg.sigma_s2);
        assert!((snr - SNR_HALF).abs() < 1e-12);
        let vars = mmse_recursion(&cfg).unwrap();
        for i in 1..vars.len() {
            assert!((vars[i] - vars[i - 1] / (1.0 + snr)).abs() < 1e-15);
        }
        // The per-step rate limit equals the closed-form R2 bound exactly.
        let (_, r2) = achievable_pair(cfg.alpha, cfg.p1, cfg.p2, cfg.sigma_s2).unwrap();
        assert!((0.5 * (1.0 + snr).log2() - r2).abs() < 1e-15);
        assert!((r2 - R2_BOUND_HALF).abs() < 1e-12);
    }

    #[test]
    fn achievable_pair_endpoints() {
        // alpha = 1: all of user 1's power carries its message.
        let (r1, r2) = achievable_pair(1.0, 2.0, 2.0, 1.0).unwrap();
        assert!((r1 - gaussian_capacity(2.0).unwrap()).abs() < 1e-15);
        assert!((r2 - gaussian_capacity(2.0 / 3.0).unwrap()).abs() < 1e-15);

        // alpha = 0: full cooperation, powers combine coherently.
        let (r1, r2) = achievable_pair(0.0, 2.0, 2.0, 1.0).unwrap();
        assert_eq!(r1, 0.0);
        assert!((r2 - C8).abs() < 1e-12);

        assert!(achievable_pair(1.5, 2.0, 2.0, 1.0).is_err());
        assert!(achievable_pair(0.5, 2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn zero_rate_never_errors() {
        let cfg = FeedbackConfig {
            rate2: 0.0,
            trials: 200,
            ..base_cfg()
        };
        let res = simulate(&cfg).unwrap();
        assert_eq!(res.error_rate, 0.0);
        assert_eq!(cfg.message_count().unwrap(), 1);
    }

    #[test]
    fn empirical_mse_tracks_recursion() {
        let res = simulate(&base_cfg()).unwrap();
        for i in 0..res.predicted_mse.len() {
            let dev = (res.empirical_mse[i] - res.predicted_mse[i]).abs();
            assert!(
                dev <= 4.0 * res.mse_stderr[i].max(1e-300),
                "use {i}: |{} - {}| vs 4 x {}",
                res.empirical_mse[i],
                res.predicted_mse[i],
                res.mse_stderr[i]
            );
        }
        for i in 1..res.predicted_mse.len() {
            assert!(res.predicted_mse[i] <= res.predicted_mse[i - 1]);
            assert!(res.empirical_mse[i] <= res.empirical_mse[i - 1] + 1e-12);
        }
    }

    #[test]
    fn per_use_power_is_budgeted() {
        let cfg = base_cfg();
        let res = simulate(&cfg).unwrap();
        let t = cfg.trials as f64;
        for i in 0..cfg.n {
            // X_k,i is Gaussian with the budget as variance: the stderr of
            // its mean square is budget * sqrt(2/T).
            let se1 = cfg.p1 * (2.0 / t).sqrt();
            let se2 = cfg.p2 * (2.0 / t).sqrt();
            assert!((res.power1[i] - cfg.p1).abs() <= 4.0 * se1, "user 1 use {i}");
            assert!((res.power2[i] - cfg.p2).abs() <= 4.0 * se2, "user 2 use {i}");
        }
    }

    #[test]
    fn determinism_same_seed_same_result() {
        let a = simulate(&base_cfg()).unwrap();
        let b = simulate(&base_cfg()).unwrap();
        assert_eq!(a, b);
        let c = simulate(&FeedbackConfig {
            seed: 8,
            ..base_cfg()
        })
        .unwrap();
        assert_ne!(a.empirical_mse, c.empirical_mse);
    }

    #[test]
    fn infeasible_rate_is_flagged_but_simulated() {
        let cfg = FeedbackConfig {
            alpha: 1.0,
            p2: 0.0,
            rate2: 0.25,
            n: 4,
            trials: 100,
            ..base_cfg()
        };
        let res = simulate(&cfg).unwrap();
        assert!(!res.rate_feasible);
        assert!(res.error_rate > 0.0, "no state transmission, decoding fails");
    }

    #[test]
    fn message_count_overflow_rejected() {
        let cfg = FeedbackConfig {
            rate2: 2.0,
            n: 40,
            ..base_cfg()
        };
        assert!(matches!(
            cfg.message_count(),
            Err(FeedbackError::MessageCountOverflow(_))
        ));
        assert!(simulate(&cfg).is_err());
    }
}
