//! Randomized invariant suites over the region evaluators, used by the
//! command-line `check` subcommand and by the acceptance tests.
//!
//! Each suite returns a [`SuiteReport`]; a suite passes only if every case
//! does.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{build_joint, binary_additive_channel, AuxChannel, AuxChannelSet, ChannelSpec, InputAssignment};
use crate::optimize::Result as SearchResult;
use crate::prob::{JointTable, Pmf};
use crate::regions::{
    capacity_deterministic, closed_form_binary, region_lapidoth, region_m_user, region_proposed,
};

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed violation (0 when everything holds with margin).
    pub worst: f64,
    pub tol: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn dirichlet(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln().max(1e-12))
        .collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x10_0000 + index as u64);
    rng
}

/// Random two-user channel with alphabets of size at most 3 and zero costs,
/// plus random independent inputs.
pub fn random_channel(seed: u64, index: usize) -> (ChannelSpec, InputAssignment, ChaCha8Rng) {
    let mut rng = instance_rng(seed, index);
    let x_sizes = [rng.random_range(2..=3usize), rng.random_range(2..=3usize)];
    let s_sizes = [rng.random_range(1..=3usize), rng.random_range(1..=3usize)];
    let y_size = rng.random_range(2..=3usize);

    let rows = x_sizes[0] * x_sizes[1] * s_sizes[0] * s_sizes[1];
    let mut kernel = Vec::with_capacity(rows * y_size);
    for _ in 0..rows {
        kernel.extend(dirichlet(&mut rng, y_size));
    }
    let state_pmfs = vec![
        Pmf::new(dirichlet(&mut rng, s_sizes[0])).unwrap(),
        Pmf::new(dirichlet(&mut rng, s_sizes[1])).unwrap(),
    ];
    let ch = ChannelSpec::new(
        x_sizes.to_vec(),
        state_pmfs,
        y_size,
        kernel,
        vec![vec![0.0; x_sizes[0]], vec![0.0; x_sizes[1]]],
        vec![0.0, 0.0],
    )
    .expect("random channel data is well-formed");
    let inputs = InputAssignment::new(vec![
        Pmf::new(dirichlet(&mut rng, x_sizes[0])).unwrap(),
        Pmf::new(dirichlet(&mut rng, x_sizes[1])).unwrap(),
    ]);
    (ch, inputs, rng)
}

/// Random state-only test channels (compression of the state alone).
pub fn random_state_only_aux(ch: &ChannelSpec, rng: &mut ChaCha8Rng) -> AuxChannelSet {
    let chans = (0..ch.users())
        .map(|k| {
            let card = rng.random_range(1..=3usize);
            let mut rows = Vec::with_capacity(ch.state_size(k) * card);
            for _ in 0..ch.state_size(k) {
                rows.extend(dirichlet(rng, card));
            }
            AuxChannel::state_only(ch.state_size(k), ch.input_size(k), card, rows).unwrap()
        })
        .collect();
    AuxChannelSet::new(chans)
}

/// Random test channels depending on state and input jointly.
pub fn random_full_aux(ch: &ChannelSpec, rng: &mut ChaCha8Rng) -> AuxChannelSet {
    let chans = (0..ch.users())
        .map(|k| {
            let card = rng.random_range(1..=3usize);
            let rows_n = ch.state_size(k) * ch.input_size(k);
            let mut rows = Vec::with_capacity(rows_n * card);
            for _ in 0..rows_n {
                rows.extend(dirichlet(rng, card));
            }
            AuxChannel::new(ch.state_size(k), ch.input_size(k), card, rows).unwrap()
        })
        .collect();
    AuxChannelSet::new(chans)
}

/// Random joint with state-only test channels.
pub fn random_restricted_joint(seed: u64, index: usize) -> JointTable {
    let (ch, inputs, mut rng) = random_channel(seed, index);
    let aux = random_state_only_aux(&ch, &mut rng);
    build_joint(&ch, &inputs, &aux).expect("valid instance")
}

/// Random joint with full test channels.
pub fn random_joint(seed: u64, index: usize) -> JointTable {
    let (ch, inputs, mut rng) = random_channel(seed, index);
    let aux = random_full_aux(&ch, &mut rng);
    build_joint(&ch, &inputs, &aux).expect("valid instance")
}

/// Over random state-only instances, the joint-compression region dominates
/// the state-only region component-wise, and the sum bounds agree to
/// `sum_tol`.
pub fn suite_region_inclusion(instances: usize, seed: u64, sum_tol: f64) -> SearchResult<SuiteReport> {
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    for i in 0..instances {
        let j = random_restricted_joint(seed, i);
        let lap = region_lapidoth(&j)?;
        let prop = region_proposed(&j)?;
        let mut bad = false;
        for mask in [0b01usize, 0b10] {
            let gap = lap.bound(mask) - prop.bound(mask);
            if gap > 1e-9 {
                bad = true;
            }
            worst = worst.max(gap);
        }
        let sum_gap = (lap.bound(0b11) - prop.bound(0b11)).abs();
        if sum_gap > sum_tol {
            bad = true;
        }
        worst = worst.max(sum_gap);
        if bad {
            failures += 1;
        }
    }
    Ok(SuiteReport {
        name: "region inclusion (state-only vs joint compression)",
        cases: instances,
        failures,
        worst,
        tol: sum_tol,
    })
}

/// The generic M-user evaluator at M = 2 equals the two-user evaluator
/// bound by bound on random joints.
pub fn suite_specialization(instances: usize, seed: u64) -> SearchResult<SuiteReport> {
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    for i in 0..instances {
        let j = random_joint(seed, i);
        let two = region_proposed(&j)?;
        let gen = region_m_user(&j, 2)?;
        let mut bad = false;
        for mask in 1..4usize {
            let gap = (two.bound(mask) - gen.bound(mask)).abs();
            worst = worst.max(gap);
            if gap > 0.0 {
                bad = true;
            }
        }
        if bad {
            failures += 1;
        }
    }
    Ok(SuiteReport {
        name: "two-user specialization of the M-user region",
        cases: instances,
        failures,
        worst,
        tol: 0.0,
    })
}

/// On the binary additive channel, the deterministic-class capacity formulas
/// equal the generic evaluator with V1 = S1, V2 degenerate, over a grid of
/// budget-saturating inputs.
pub fn suite_deterministic_consistency(grid: usize, tol: f64) -> SearchResult<SuiteReport> {
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for a in 1..=grid {
        for b in 1..=grid {
            let p1 = 0.5 * a as f64 / grid as f64;
            let p2 = 0.5 * b as f64 / grid as f64;
            let ch = binary_additive_channel(0.25, p1, p2)?;
            let inputs = InputAssignment::new(vec![
                Pmf::bernoulli(p1).unwrap(),
                Pmf::bernoulli(p2).unwrap(),
            ]);
            let det = capacity_deterministic(&ch, &inputs)?;
            let aux = AuxChannelSet::new(vec![
                AuxChannel::copy_state(2, 2),
                AuxChannel::singleton(1, 2),
            ]);
            let j = build_joint(&ch, &inputs, &aux)?;
            let prop = region_proposed(&j)?;
            let mut bad = false;
            for mask in 1..4usize {
                let gap = (det.bound(mask) - prop.bound(mask)).abs();
                worst = worst.max(gap);
                if gap > tol {
                    bad = true;
                }
            }
            cases += 1;
            if bad {
                failures += 1;
            }
        }
    }
    Ok(SuiteReport {
        name: "deterministic-class capacity consistency",
        cases,
        failures,
        worst,
        tol,
    })
}

/// Over a grid of (p1, p2, ps) in (0, 1/2]^3, the no-state binary region is
/// contained in the with-state region (component-wise on normalized bounds).
pub fn suite_binary_inclusion(steps: usize, tol: f64) -> SearchResult<SuiteReport> {
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for a in 1..=steps {
        for b in 1..=steps {
            for c in 1..=steps {
                let p1 = 0.5 * a as f64 / steps as f64;
                let p2 = 0.5 * b as f64 / steps as f64;
                let ps = 0.5 * c as f64 / steps as f64;
                let with = closed_form_binary(p1, p2, ps, true)?;
                let without = closed_form_binary(p1, p2, ps, false)?;
                let mut bad = false;
                for mask in 1..4usize {
                    let gap = without.bound(mask) - with.bound(mask);
                    worst = worst.max(gap);
                    if gap > tol {
                        bad = true;
                    }
                }
                cases += 1;
                if bad {
                    failures += 1;
                }
            }
        }
    }
    Ok(SuiteReport {
        name: "binary region inclusion (no-state within with-state)",
        cases,
        failures,
        worst,
        tol,
    })
}

/// Knobs for the full run; defaults match the documented acceptance scale.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub instances: usize,
    pub seed: u64,
    pub sum_tol: f64,
    pub det_grid: usize,
    pub binary_grid: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            instances: 200,
            seed: 0,
            sum_tol: 1e-9,
            det_grid: 5,
            binary_grid: 6,
        }
    }
}

pub fn run_all(cfg: &CheckConfig) -> SearchResult<Vec<SuiteReport>> {
    Ok(vec![
        suite_region_inclusion(cfg.instances, cfg.seed, cfg.sum_tol)?,
        suite_specialization(cfg.instances, cfg.seed)?,
        suite_deterministic_consistency(cfg.det_grid, 1e-9)?,
        suite_binary_inclusion(cfg.binary_grid, 1e-12)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_at_reduced_scale() {
        let cfg = CheckConfig {
            instances: 25,
            binary_grid: 4,
            ..CheckConfig::default()
        };
        for report in run_all(&cfg).unwrap() {
            assert!(
                report.passed(),
                "{}: {}/{} failures, worst {:.3e}",
                report.name,
                report.failures,
                report.cases,
                report.worst
            );
        }
    }

    #[test]
    fn sum_rate_equality_survives_narrow_tolerance() {
        // The sum-bound identity is analytic; it holds at 1e-12 too.
        let report = suite_region_inclusion(50, 1, 1e-12).unwrap();
        assert!(report.passed(), "worst {:.3e}", report.worst);
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_restricted_joint(7, 3);
        let b = random_restricted_joint(7, 3);
        assert_eq!(a.probs(), b.probs());
    }
}
