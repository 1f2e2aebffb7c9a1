//! Rate regions for fixed distributions: subset-bound polytopes, closed-form
//! capacity regions, convex envelopes with support-function queries, and
//! membership / inclusion testing.
//!
//! Every evaluator normalizes each subset bound to the minimum over its
//! supersets' bound expressions (the M-user form). That normalization never
//! changes the region as a set - with nonnegative rates a subset sum is
//! dominated by every superset sum - and it makes the two-user evaluators,
//! the M-user evaluator, and the deterministic-class formulas agree bound by
//! bound rather than merely as sets.

use thiserror::Error;

use crate::channels::{
    build_joint, is_deterministic_recoverable, AuxChannelSet, ChannelError, ChannelSpec,
    InputAssignment,
};
use crate::numeric::solve_linear;
use crate::prob::{bernoulli_convolve, binary_entropy, gaussian_capacity, JointTable, ProbError};

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("joint table is missing variable `{0}`")]
    MissingVariable(String),
    #[error("factorization check failed: I(V{user}; X{user}) = {value:.3e} > 1e-6")]
    FactorizationViolated { user: usize, value: f64 },
    #[error("user count {m} outside the supported range 1..=5")]
    UserCountOutOfRange { m: usize },
    #[error("channel is not in the deterministic recoverable class")]
    NotDeterministicClass,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter {name} = {value} is invalid: {why}")]
    BadParameter {
        name: &'static str,
        value: f64,
        why: &'static str,
    },
    #[error("empty input family")]
    EmptyFamily,
    #[error("inclusion test needs at least 3 directions, got {0}")]
    TooFewDirections(usize),
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// Raw bounds below this are treated as genuinely negative and mark the
/// polytope empty; anything in (-EMPTY_TOL, 0) is numerically zero and
/// clamps.
const EMPTY_TOL: f64 = 1e-9;

const FACTORIZATION_TOL: f64 = 1e-6;

/// Time-sharing alphabet size sufficient to exhaust the deterministic-class
/// capacity region. The envelope construction realizes time sharing
/// implicitly as the convex hull over discovered polytopes, so hulls over at
/// least this many generators lose nothing.
pub const TIME_SHARING_CARD_DETERMINISTIC: usize = 5;

/// One fixed-distribution rate region: for every nonempty subset T of users,
/// a bound `sum_{k in T} R_k <= b_T`, plus the cost tuple of the generating
/// distribution. Bounds may be individually loose; membership always uses
/// all constraints.
#[derive(Debug, Clone)]
pub struct RatePolytope {
    users: usize,
    /// Indexed by subset mask - 1, masks 1..2^users.
    bounds: Vec<f64>,
    costs: Vec<f64>,
    empty: bool,
}

impl RatePolytope {
    /// Build from raw bound values; negative raw bounds (beyond rounding
    /// tolerance) mark the polytope empty instead of being clamped silently.
    pub fn from_raw_bounds(users: usize, raw: Vec<f64>, costs: Vec<f64>) -> Self {
        assert_eq!(raw.len(), (1usize << users) - 1, "one bound per subset");
        let empty = raw.iter().any(|&b| b < -EMPTY_TOL);
        let bounds = raw.iter().map(|&b| b.max(0.0)).collect();
        Self {
            users,
            bounds,
            costs,
            empty,
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Bound for the subset encoded by `mask` (bit k set = user k+1).
    pub fn bound(&self, mask: usize) -> f64 {
        self.bounds[mask - 1]
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn with_costs(mut self, costs: Vec<f64>) -> Self {
        self.costs = costs;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Point membership: nonnegative components and every subset-sum bound
    /// satisfied within `tol`. An empty polytope contains nothing.
    pub fn contains(&self, point: &[f64], tol: f64) -> Result<bool> {
        if point.len() != self.users {
            return Err(RegionError::DimensionMismatch {
                expected: self.users,
                got: point.len(),
            });
        }
        if self.empty {
            return Ok(false);
        }
        if point.iter().any(|&r| r < -tol) {
            return Ok(false);
        }
        for mask in 1..(1usize << self.users) {
            let sum: f64 = (0..self.users)
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| point[k])
                .sum();
            if sum > self.bound(mask) + tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Enumerate the vertices of the polytope (intersected with the
    /// nonnegative orthant) by brute force over constraint subsets. Sized
    /// for M <= 5.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        if self.empty {
            return Vec::new();
        }
        let m = self.users;
        // Constraint list: subset rows a.x <= b, then -x_k <= 0.
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for mask in 1..(1usize << m) {
            let a: Vec<f64> = (0..m)
                .map(|k| if mask & (1 << k) != 0 { 1.0 } else { 0.0 })
                .collect();
            rows.push((a, self.bound(mask)));
        }
        for k in 0..m {
            let mut a = vec![0.0; m];
            a[k] = -1.0;
            rows.push((a, 0.0));
        }

        let mut verts: Vec<Vec<f64>> = Vec::new();
        let n = rows.len();
        let mut choice = vec![0usize; m];
        enumerate_combinations(n, m, &mut choice, 0, 0, &mut |chosen| {
            let a: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].0.clone()).collect();
            let b: Vec<f64> = chosen.iter().map(|&i| rows[i].1).collect();
            if let Some(x) = solve_linear(&a, &b, 1e-12) {
                let feasible = rows.iter().all(|(row, rhs)| {
                    let lhs: f64 = row.iter().zip(&x).map(|(&c, &v)| c * v).sum();
                    lhs <= rhs + 1e-9
                });
                if feasible && !verts.iter().any(|v| point_close(v, &x, 1e-9)) {
                    verts.push(x);
                }
            }
        });
        verts
    }

    /// Support function max over the polytope of `w . R`; negative infinity
    /// for an empty polytope.
    pub fn support(&self, weights: &[f64]) -> f64 {
        if self.empty {
            return f64::NEG_INFINITY;
        }
        self.vertices()
            .iter()
            .map(|v| v.iter().zip(weights).map(|(&a, &b)| a * b).sum())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn point_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= tol)
}

fn enumerate_combinations(
    n: usize,
    k: usize,
    choice: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        visit(choice);
        return;
    }
    for i in start..n {
        choice[depth] = i;
        enumerate_combinations(n, k, choice, depth + 1, i + 1, visit);
    }
}

fn require_vars(j: &JointTable, names: &[String]) -> Result<()> {
    for n in names {
        if !j.has_variable(n) {
            return Err(RegionError::MissingVariable(n.clone()));
        }
    }
    Ok(())
}

fn var_names(m: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(3 * m + 1);
    for p in ["X", "S", "V"] {
        for k in 1..=m {
            names.push(format!("{p}{k}"));
        }
    }
    names.push("Y".into());
    names
}

/// Per-user compression deficit I(V_k; S_k | X_k).
fn compression_deficits(j: &JointTable, m: usize) -> Result<Vec<f64>> {
    (1..=m)
        .map(|k| {
            Ok(j.mutual_information(
                &[&format!("V{k}")],
                &[&format!("S{k}")],
                &[&format!("X{k}")],
            )?)
        })
        .collect()
}

/// Normalize raw per-subset values to the min over supersets.
fn min_over_supersets(raw: &[f64], m: usize) -> Vec<f64> {
    let full = (1usize << m) - 1;
    (1..=full)
        .map(|t| {
            let mut best = f64::INFINITY;
            for s in 1..=full {
                if s & t == t {
                    best = best.min(raw[s - 1]);
                }
            }
            best
        })
        .collect()
}

/// Rate region for a two-user joint with state-only test channels
/// `P(V_k | S_k)`: individual bounds pay the decoder-side deficit
/// I(V_k; S_k | Y, V_other) and the sum bound pays I(V1,V2; S1,S2 | Y).
/// The factorization is checked via I(V_k; X_k) = 0.
pub fn region_lapidoth(j: &JointTable) -> Result<RatePolytope> {
    require_vars(j, &var_names(2))?;
    for k in 1..=2usize {
        let leak = j.mutual_information(&[&format!("V{k}")], &[&format!("X{k}")], &[])?;
        if leak > FACTORIZATION_TOL {
            return Err(RegionError::FactorizationViolated {
                user: k,
                value: leak,
            });
        }
    }
    let b1 = j.mutual_information(&["X1"], &["Y"], &["X2", "V1", "V2"])?
        - j.mutual_information(&["V1"], &["S1"], &["Y", "V2"])?;
    let b2 = j.mutual_information(&["X2"], &["Y"], &["X1", "V1", "V2"])?
        - j.mutual_information(&["V2"], &["S2"], &["Y", "V1"])?;
    let b12 = j.mutual_information(&["X1", "X2"], &["Y"], &["V1", "V2"])?
        - j.mutual_information(&["V1", "V2"], &["S1", "S2"], &["Y"])?;
    let raw = min_over_supersets(&[b1, b2, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, vec![0.0; 2]))
}

/// Rate region for a two-user joint with test channels `P(V_k | S_k, X_k)`
/// that compress past state and past codeword jointly: each bound charges
/// the encoder-side deficit I(V_k; S_k | X_k).
pub fn region_proposed(j: &JointTable) -> Result<RatePolytope> {
    require_vars(j, &var_names(2))?;
    let deficits = compression_deficits(j, 2)?;
    let b1 = j.mutual_information(&["X1", "V1"], &["Y"], &["X2", "V2"])? - deficits[0];
    let b2 = j.mutual_information(&["X2", "V2"], &["Y"], &["X1", "V1"])? - deficits[1];
    let b12 =
        j.mutual_information(&["X1", "X2", "V1", "V2"], &["Y"], &[])? - deficits[0] - deficits[1];
    let raw = min_over_supersets(&[b1, b2, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, vec![0.0; 2]))
}

/// M-user rate region: for every nonempty subset T,
/// `b_T = min over supersets S of
///   I(X(S), V(S); Y | X(S^c), V(S^c)) - sum_{l in S} I(V_l; S_l | X_l)`.
pub fn region_m_user(j: &JointTable, m: usize) -> Result<RatePolytope> {
    if m == 0 || m > 5 {
        return Err(RegionError::UserCountOutOfRange { m });
    }
    require_vars(j, &var_names(m))?;
    let deficits = compression_deficits(j, m)?;

    let full = (1usize << m) - 1;
    let mut terms = vec![0.0; full];
    for s_mask in 1..=full {
        let mut a: Vec<String> = Vec::new();
        let mut g: Vec<String> = Vec::new();
        for k in 0..m {
            let (xs, vs) = (format!("X{}", k + 1), format!("V{}", k + 1));
            if s_mask & (1 << k) != 0 {
                a.push(xs);
                a.push(vs);
            } else {
                g.push(xs);
                g.push(vs);
            }
        }
        let a_refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let g_refs: Vec<&str> = g.iter().map(String::as_str).collect();
        let info = j.mutual_information(&a_refs, &["Y"], &g_refs)?;
        let deficit: f64 = (0..m)
            .filter(|k| s_mask & (1 << k) != 0)
            .map(|k| deficits[k])
            .sum();
        terms[s_mask - 1] = info - deficit;
    }
    let raw = min_over_supersets(&terms, m);
    Ok(RatePolytope::from_raw_bounds(m, raw, vec![0.0; m]))
}

/// Capacity-achieving bounds for the deterministic recoverable class at a
/// fixed product input distribution: H(Y|X2) - H(S), H(Y|X1,S), H(Y) - H(S),
/// where S is the unique non-degenerate state.
pub fn capacity_deterministic(ch: &ChannelSpec, inputs: &InputAssignment) -> Result<RatePolytope> {
    if !is_deterministic_recoverable(ch)? {
        return Err(RegionError::NotDeterministicClass);
    }
    let k_state = (0..2).find(|&k| ch.state_size(k) > 1).unwrap_or(0);
    let s_name = format!("S{}", k_state + 1);
    let j = build_joint(ch, inputs, &AuxChannelSet::degenerate(ch))?;
    let h_s = j.entropy(&[&s_name])?;
    let b1 = j.conditional_entropy(&["Y"], &["X2"])? - h_s;
    let b2 = j.conditional_entropy(&["Y"], &["X1", &s_name])?;
    let b12 = j.entropy(&["Y"])? - h_s;
    let raw = min_over_supersets(&[b1, b2, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, inputs.expected_costs(ch)))
}

fn check_powers(p1: f64, p2: f64, sigma_s2: f64) -> Result<()> {
    for (name, v) in [("P1", p1), ("P2", p2)] {
        if v.is_nan() || v < 0.0 || !v.is_finite() {
            return Err(RegionError::BadParameter {
                name,
                value: v,
                why: "power must be finite and nonnegative",
            });
        }
    }
    if sigma_s2.is_nan() || sigma_s2 <= 0.0 || !sigma_s2.is_finite() {
        return Err(RegionError::BadParameter {
            name: "sigma_s2",
            value: sigma_s2,
            why: "state variance must be finite and positive",
        });
    }
    Ok(())
}

/// Gaussian MAC with the state known strictly causally at encoder 1 only:
/// R1 <= C(P1/sigma^2), R1 + R2 <= C((P1+P2)/sigma^2). There is no
/// individual R2 constraint; its slot carries the sum bound.
pub fn closed_form_gaussian_snf(p1: f64, p2: f64, sigma_s2: f64) -> Result<RatePolytope> {
    check_powers(p1, p2, sigma_s2)?;
    let b1 = gaussian_capacity(p1 / sigma_s2)?;
    let b12 = gaussian_capacity((p1 + p2) / sigma_s2)?;
    let raw = min_over_supersets(&[b1, f64::INFINITY, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, vec![p1, p2]))
}

/// Binary modulo-additive MAC capacity bounds; `with_state` selects the
/// strictly-causal-state region (R2 <= H_b(p2)) over the no-state region
/// (R2 <= H_b(p2 * p_s) - H_b(p_s)).
pub fn closed_form_binary(p1: f64, p2: f64, ps: f64, with_state: bool) -> Result<RatePolytope> {
    for (name, v) in [("p1", p1), ("p2", p2), ("ps", ps)] {
        if !(v > 0.0 && v <= 0.5) {
            return Err(RegionError::BadParameter {
                name,
                value: v,
                why: "expected a value in (0, 1/2]",
            });
        }
    }
    let h_s = binary_entropy(ps)?;
    let b1 = binary_entropy(bernoulli_convolve(p1, ps)?)? - h_s;
    let b2 = if with_state {
        binary_entropy(p2)?
    } else {
        binary_entropy(bernoulli_convolve(p2, ps)?)? - h_s
    };
    let b12 = binary_entropy(bernoulli_convolve(bernoulli_convolve(p1, p2)?, ps)?)? - h_s;
    let raw = min_over_supersets(&[b1, b2, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, vec![p1, p2]))
}

/// Gaussian MAC with state at encoder 1 and output feedback at encoder 2,
/// for a fixed correlation coefficient rho in [0, 1]:
/// R1 <= C((1-rho^2) P1 / sigma^2),
/// R1 + R2 <= C((P1 + P2 + 2 rho sqrt(P1 P2)) / sigma^2).
pub fn closed_form_gaussian_feedback(
    p1: f64,
    p2: f64,
    sigma_s2: f64,
    rho: f64,
) -> Result<RatePolytope> {
    check_powers(p1, p2, sigma_s2)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(RegionError::BadParameter {
            name: "rho",
            value: rho,
            why: "expected a value in [0, 1]",
        });
    }
    let b1 = gaussian_capacity((1.0 - rho * rho) * p1 / sigma_s2)?;
    let b12 = gaussian_capacity((p1 + p2 + 2.0 * rho * (p1 * p2).sqrt()) / sigma_s2)?;
    let raw = min_over_supersets(&[b1, f64::INFINITY, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, vec![p1, p2]))
}

/// Gaussian MAC with the state known strictly causally at both encoders:
/// a single sum constraint R1 + R2 <= C((P1 + P2 + 2 sqrt(P1 P2))/sigma^2).
pub fn closed_form_gaussian_both_state(p1: f64, p2: f64, sigma_s2: f64) -> Result<RatePolytope> {
    check_powers(p1, p2, sigma_s2)?;
    let b12 = gaussian_capacity((p1 + p2 + 2.0 * (p1 * p2).sqrt()) / sigma_s2)?;
    let raw = min_over_supersets(&[f64::INFINITY, f64::INFINITY, b12], 2);
    Ok(RatePolytope::from_raw_bounds(2, raw, vec![p1, p2]))
}

/// Convex envelope of a family of rate polytopes in rate-cost space,
/// projected to rates. Generators are the vertices of the cost-feasible
/// member polytopes; support queries over the generator cloud are exact
/// convex-hull support queries.
#[derive(Debug, Clone)]
pub struct RegionEnvelope {
    dim: usize,
    /// (rate vertex, cost tuple of the generating polytope)
    generators: Vec<(Vec<f64>, Vec<f64>)>,
    budgets: Vec<f64>,
}

impl RegionEnvelope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.generators
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Support function over the envelope. An envelope with no generators is
    /// treated as the origin (support 0).
    pub fn support(&self, weights: &[f64]) -> f64 {
        self.generators
            .iter()
            .map(|(r, _)| r.iter().zip(weights).map(|(&a, &b)| a * b).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// The generator attaining the support in direction `weights`.
    pub fn support_point(&self, weights: &[f64]) -> Option<&[f64]> {
        let mut best: Option<(f64, &[f64])> = None;
        for (r, _) in &self.generators {
            let v: f64 = r.iter().zip(weights).map(|(&a, &b)| a * b).sum();
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, r));
            }
        }
        best.map(|(_, r)| r)
    }
}

/// Hull-and-project construction: keep the polytopes whose cost tuples fit
/// the budgets (closure semantics, `cost <= budget + 1e-9`), and collect
/// their vertices as envelope generators.
pub fn envelope_build(polytopes: &[RatePolytope], budgets: &[f64]) -> Result<RegionEnvelope> {
    if polytopes.is_empty() {
        return Err(RegionError::EmptyFamily);
    }
    let dim = polytopes[0].users();
    if budgets.len() != dim {
        return Err(RegionError::DimensionMismatch {
            expected: dim,
            got: budgets.len(),
        });
    }
    let mut generators = Vec::new();
    for p in polytopes {
        if p.users() != dim {
            return Err(RegionError::DimensionMismatch {
                expected: dim,
                got: p.users(),
            });
        }
        if p.is_empty() {
            continue;
        }
        let feasible = p
            .costs()
            .iter()
            .zip(budgets)
            .all(|(&c, &b)| c <= b + 1e-9);
        if !feasible {
            continue;
        }
        for v in p.vertices() {
            if !generators
                .iter()
                .any(|(g, _): &(Vec<f64>, Vec<f64>)| point_close(g, &v, 1e-12))
            {
                generators.push((v, p.costs().to_vec()));
            }
        }
    }
    Ok(RegionEnvelope {
        dim,
        generators,
        budgets: budgets.to_vec(),
    })
}

/// Result of a sampled-direction inclusion test between two envelopes.
#[derive(Debug, Clone)]
pub struct InclusionReport {
    pub directions: usize,
    pub tol: f64,
    /// min over sampled directions of support(outer) - support(inner).
    pub min_margin: f64,
    pub worst_direction: Vec<f64>,
    /// Directions (with margins) where the margin fell below -tol.
    pub violations: Vec<(Vec<f64>, f64)>,
    pub certified: bool,
}

/// Sample unit directions in the nonnegative orthant and compare support
/// functions. Certification is only at the sampled directions; the report
/// carries the direction count and the minimum margin.
pub fn envelope_includes(
    inner: &RegionEnvelope,
    outer: &RegionEnvelope,
    directions: usize,
    tol: f64,
) -> Result<InclusionReport> {
    if directions < 3 {
        return Err(RegionError::TooFewDirections(directions));
    }
    if inner.dim() != outer.dim() {
        return Err(RegionError::DimensionMismatch {
            expected: outer.dim(),
            got: inner.dim(),
        });
    }
    let dirs = direction_grid(inner.dim(), directions);
    let mut min_margin = f64::INFINITY;
    let mut worst = dirs[0].clone();
    let mut violations = Vec::new();
    for w in &dirs {
        let margin = outer.support(w) - inner.support(w);
        if margin < min_margin {
            min_margin = margin;
            worst = w.clone();
        }
        if margin < -tol {
            violations.push((w.clone(), margin));
        }
    }
    let certified = violations.is_empty();
    Ok(InclusionReport {
        directions,
        tol,
        min_margin,
        worst_direction: worst,
        violations,
        certified,
    })
}

/// Deterministic direction grid in the nonnegative orthant: an even angular
/// sweep of the quarter circle in two dimensions, a fixed-seed pseudo-random
/// unit cloud above that.
pub fn direction_grid(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && count >= 1);
    if dim == 1 {
        return vec![vec![1.0]; 1];
    }
    if dim == 2 {
        return (0..count)
            .map(|i| {
                let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (count - 1) as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect();
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6d61_636c_6162_u64);
    let mut dirs = Vec::with_capacity(count);
    // Include the axes first so degenerate faces are always probed.
    for k in 0..dim.min(count) {
        let mut w = vec![0.0; dim];
        w[k] = 1.0;
        dirs.push(w);
    }
    while dirs.len() < count {
        let mut w: Vec<f64> = (0..dim).map(|_| rng.random::<f64>().max(1e-12)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        dirs.push(w);
    }
    dirs
}

#[cfg(test)]
mod tests {
    // Oracle constants carry full decimal expansions beyond f64 precision.
    #![allow(clippy::excessive_precision)]

    use super::*;
    use crate::channels::{
        binary_additive_channel, binary_additive_channel_relaxed, example1_aux, example1_channel,
        AuxChannel, AuxChannelSet,
    };
    use crate::prob::Pmf;

    // Frozen oracle values (high-precision closed-form evaluation).
    const B1_FIG2: f64 = 0.16859063219201994; // H_b(5/12) - H_b(1/4)
    const B12_FIG2: f64 = 0.18649434763084910; // H_b(17/36) - H_b(1/4)
    const HB_THIRD: f64 = 0.91829583405448951; // H_b(1/3)
    const LAP_B1_STATECOPY: f64 = 0.11371412184711660; // H_b(1/3)-H_b(1/4)-H_b(4/9)+H_b(17/36)
    const C2: f64 = 0.79248125036057809; // C(2)
    const C4: f64 = 1.16096404744368117; // C(4)
    const C8: f64 = 1.58496250072115618; // C(8) = log2(3)

    fn fig2_inputs() -> InputAssignment {
        InputAssignment::new(vec![
            Pmf::bernoulli(1.0 / 3.0).unwrap(),
            Pmf::bernoulli(1.0 / 3.0).unwrap(),
        ])
    }

    fn no_state_xor_joint() -> JointTable {
        // Binary XOR MAC without state, uniform inputs, degenerate aux.
        let (ch, _) = binary_additive_channel_relaxed(0.0, 0.5, 0.5).unwrap();
        build_joint(
            &ch,
            &InputAssignment::uniform(&ch),
            &AuxChannelSet::degenerate(&ch),
        )
        .unwrap()
    }

    #[test]
    fn lapidoth_degenerate_aux_is_classical_mac() {
        let j = no_state_xor_joint();
        let p = region_lapidoth(&j).unwrap();
        assert!((p.bound(0b11) - 1.0).abs() < 1e-12);
        // XOR of uniform bits: each individual bound is I(Xk;Y|Xother) = 1,
        // normalized down to the sum bound 1.
        assert!((p.bound(0b01) - 1.0).abs() < 1e-12);
        assert!((p.bound(0b10) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lapidoth_state_copy_bound() {
        let ch = binary_additive_channel(0.25, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let aux = AuxChannelSet::new(vec![
            AuxChannel::copy_state(2, 2),
            AuxChannel::singleton(1, 2),
        ]);
        let j = build_joint(&ch, &fig2_inputs(), &aux).unwrap();
        let p = region_lapidoth(&j).unwrap();
        assert!((p.bound(0b01) - LAP_B1_STATECOPY).abs() < 1e-9);
    }

    #[test]
    fn lapidoth_rejects_codeword_dependent_aux() {
        // V2 = X2 leaks the codeword into the compression variable; the
        // state-only factorization assertion I(V2;X2) = 0 must catch it.
        let ch = binary_additive_channel(0.25, 0.5, 0.5).unwrap();
        let mut table = vec![0.0; 2 * 2];
        for x2 in 0..2usize {
            table[x2 * 2 + x2] = 1.0;
        }
        let aux = AuxChannelSet::new(vec![
            AuxChannel::singleton(2, 2),
            AuxChannel::new(1, 2, 2, table).unwrap(),
        ]);
        let j = build_joint(&ch, &InputAssignment::uniform(&ch), &aux).unwrap();
        assert!(matches!(
            region_lapidoth(&j),
            Err(RegionError::FactorizationViolated { user: 2, .. })
        ));
    }

    #[test]
    fn proposed_example1_bounds_and_membership() {
        let ch = example1_channel();
        let j = build_joint(&ch, &InputAssignment::uniform(&ch), &example1_aux()).unwrap();
        let p = region_proposed(&j).unwrap();
        assert!((p.bound(0b01) - 1.0).abs() < 1e-9);
        assert!((p.bound(0b10) - 1.0).abs() < 1e-9);
        assert!((p.bound(0b11) - 1.5).abs() < 1e-9);
        assert!(p.contains(&[1.0, 0.5], 1e-9).unwrap());
        assert!(!p.contains(&[1.0, 0.51], 1e-9).unwrap());
        assert!(p.contains(&[0.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn proposed_degenerate_aux_matches_lapidoth() {
        let j = no_state_xor_joint();
        let a = region_proposed(&j).unwrap();
        let b = region_lapidoth(&j).unwrap();
        for mask in 1..4usize {
            assert!((a.bound(mask) - b.bound(mask)).abs() < 1e-12);
        }
    }

    #[test]
    fn m_user_specializations() {
        // M = 2 equals the two-user evaluator exactly.
        let ch = example1_channel();
        let j = build_joint(&ch, &InputAssignment::uniform(&ch), &example1_aux()).unwrap();
        let two = region_proposed(&j).unwrap();
        let gen = region_m_user(&j, 2).unwrap();
        for mask in 1..4usize {
            assert_eq!(two.bound(mask), gen.bound(mask));
        }

        // M = 1 with degenerate aux: single bound I(X;Y).
        let ch1 = ChannelSpec::new(
            vec![2],
            vec![Pmf::point_mass(1, 0)],
            2,
            vec![1.0, 0.0, 0.0, 1.0],
            vec![vec![0.0, 0.0]],
            vec![0.0],
        )
        .unwrap();
        let j1 = build_joint(
            &ch1,
            &InputAssignment::uniform(&ch1),
            &AuxChannelSet::degenerate(&ch1),
        )
        .unwrap();
        let p1 = region_m_user(&j1, 1).unwrap();
        assert!((p1.bound(0b1) - 1.0).abs() < 1e-12);

        assert!(matches!(
            region_m_user(&j1, 6),
            Err(RegionError::UserCountOutOfRange { m: 6 })
        ));
    }

    #[test]
    fn m_user_three_user_xor_against_enumeration() {
        // Three-user XOR channel Y = X1 ^ X2 ^ X3 ^ S1 with a Bernoulli(0.3)
        // state at user 1 and non-degenerate test channels for users 1 and
        // 2; verify each b_T against an independent enumeration of supersets
        // done directly with mutual-information calls.
        let mut kernel = Vec::new();
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                for x3 in 0..2usize {
                    for s1 in 0..2usize {
                        let y = x1 ^ x2 ^ x3 ^ s1;
                        let mut row = [0.0; 2];
                        row[y] = 1.0;
                        kernel.extend_from_slice(&row);
                    }
                }
            }
        }
        let ch = ChannelSpec::new(
            vec![2, 2, 2],
            vec![
                Pmf::bernoulli(0.3).unwrap(),
                Pmf::point_mass(1, 0),
                Pmf::point_mass(1, 0),
            ],
            2,
            kernel,
            vec![vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]],
            vec![0.0; 3],
        )
        .unwrap();
        let inputs = InputAssignment::new(vec![
            Pmf::bernoulli(0.5).unwrap(),
            Pmf::bernoulli(0.3).unwrap(),
            Pmf::bernoulli(0.2).unwrap(),
        ]);
        // V1 compresses (S1, X1) through a lopsided binary channel; V2 leaks
        // a noisy copy of X2; V3 degenerate.
        let v1 = AuxChannel::new(
            2,
            2,
            2,
            vec![
                0.9, 0.1, // s=0, x=0
                0.7, 0.3, // s=0, x=1
                0.2, 0.8, // s=1, x=0
                0.4, 0.6, // s=1, x=1
            ],
        )
        .unwrap();
        let v2 = AuxChannel::new(1, 2, 2, vec![0.85, 0.15, 0.35, 0.65]).unwrap();
        let aux = AuxChannelSet::new(vec![v1, v2, AuxChannel::singleton(1, 2)]);
        let j = build_joint(&ch, &inputs, &aux).unwrap();
        let p = region_m_user(&j, 3).unwrap();

        let names = |mask: usize, inv: bool| -> Vec<String> {
            (0..3)
                .filter(|k| ((mask >> k) & 1 == 1) != inv)
                .flat_map(|k| [format!("X{}", k + 1), format!("V{}", k + 1)])
                .collect()
        };
        for t in 1..8usize {
            let mut expect = f64::INFINITY;
            for s in 1..8usize {
                if s & t != t {
                    continue;
                }
                let a = names(s, false);
                let g = names(s, true);
                let a_refs: Vec<&str> = a.iter().map(String::as_str).collect();
                let g_refs: Vec<&str> = g.iter().map(String::as_str).collect();
                let mut term = j.mutual_information(&a_refs, &["Y"], &g_refs).unwrap();
                for k in 0..3usize {
                    if s & (1 << k) != 0 {
                        term -= j
                            .mutual_information(
                                &[&format!("V{}", k + 1)],
                                &[&format!("S{}", k + 1)],
                                &[&format!("X{}", k + 1)],
                            )
                            .unwrap();
                    }
                }
                expect = expect.min(term);
            }
            assert!(
                (p.bound(t) - expect.max(0.0)).abs() < 1e-12,
                "subset {t}: {} vs {}",
                p.bound(t),
                expect
            );
        }
        // The user-1 compression deficit is genuinely active here.
        assert!(
            j.mutual_information(&["V1"], &["S1"], &["X1"]).unwrap() > 0.05
        );
    }

    #[test]
    fn deterministic_capacity_fig2_values() {
        let ch = binary_additive_channel(0.25, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let p = capacity_deterministic(&ch, &fig2_inputs()).unwrap();
        assert!((p.bound(0b01) - B1_FIG2).abs() < 1e-9);
        assert!((p.bound(0b11) - B12_FIG2).abs() < 1e-9);
        // The raw individual bound H(Y|X1,S) = H_b(1/3) is looser than the
        // sum bound; normalized form stores the binding value.
        assert!((p.bound(0b10) - B12_FIG2).abs() < 1e-9);
        assert!(p.bound(0b10) < HB_THIRD);
        // Cost tuple records E[X_k] = 1/3.
        assert!((p.costs()[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_capacity_noiseless_limit() {
        let (ch, _) = binary_additive_channel_relaxed(0.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let p = capacity_deterministic(&ch, &fig2_inputs()).unwrap();
        assert!((p.bound(0b01) - HB_THIRD).abs() < 1e-9);
    }

    #[test]
    fn deterministic_capacity_matches_state_copy_region() {
        // Evaluating with V1 = S1, V2 degenerate through the generic
        // evaluator reproduces the deterministic-class formulas bound by
        // bound.
        let ch = binary_additive_channel(0.25, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let inputs = fig2_inputs();
        let det = capacity_deterministic(&ch, &inputs).unwrap();
        let aux = AuxChannelSet::new(vec![
            AuxChannel::copy_state(2, 2),
            AuxChannel::singleton(1, 2),
        ]);
        let j = build_joint(&ch, &inputs, &aux).unwrap();
        let prop = region_proposed(&j).unwrap();
        for mask in 1..4usize {
            assert!(
                (det.bound(mask) - prop.bound(mask)).abs() < 1e-9,
                "mask {mask}: {} vs {}",
                det.bound(mask),
                prop.bound(mask)
            );
        }
        assert!(matches!(
            capacity_deterministic(&example1_channel(), &InputAssignment::uniform(&ch)),
            Err(RegionError::NotDeterministicClass)
        ));
    }

    #[test]
    fn gaussian_snf_values() {
        let p = closed_form_gaussian_snf(2.0, 2.0, 1.0).unwrap();
        assert!((p.bound(0b01) - C2).abs() < 1e-12);
        assert!((p.bound(0b11) - C4).abs() < 1e-12);
        assert_eq!(p.bound(0b10), p.bound(0b11), "no individual R2 bound");

        let zero = closed_form_gaussian_snf(0.0, 2.0, 1.0).unwrap();
        assert_eq!(zero.bound(0b01), 0.0);

        let wide = closed_form_gaussian_snf(2.0, 2.0, 1e12).unwrap();
        assert!(wide.bound(0b11) < 1e-11);

        assert!(closed_form_gaussian_snf(2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn binary_closed_form_values() {
        let s = closed_form_binary(1.0 / 3.0, 1.0 / 3.0, 0.25, true).unwrap();
        assert!((s.bound(0b01) - B1_FIG2).abs() < 1e-12);
        assert!((s.bound(0b10) - B12_FIG2).abs() < 1e-12);
        assert!((s.bound(0b11) - B12_FIG2).abs() < 1e-12);

        let ns = closed_form_binary(1.0 / 3.0, 1.0 / 3.0, 0.25, false).unwrap();
        assert!((ns.bound(0b10) - B1_FIG2).abs() < 1e-12);

        // Vanishing state noise: the two variants coincide.
        let a = closed_form_binary(0.3, 0.3, 1e-9, true).unwrap();
        let b = closed_form_binary(0.3, 0.3, 1e-9, false).unwrap();
        for mask in 1..4usize {
            assert!((a.bound(mask) - b.bound(mask)).abs() < 1e-6);
        }

        assert!(closed_form_binary(0.0, 0.3, 0.25, true).is_err());
        assert!(closed_form_binary(0.3, 0.3, 0.75, true).is_err());
    }

    #[test]
    fn gaussian_feedback_values() {
        let at_zero = closed_form_gaussian_feedback(2.0, 2.0, 1.0, 0.0).unwrap();
        let snf = closed_form_gaussian_snf(2.0, 2.0, 1.0).unwrap();
        for mask in 1..4usize {
            assert!((at_zero.bound(mask) - snf.bound(mask)).abs() < 1e-12);
        }
        let at_one = closed_form_gaussian_feedback(2.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(at_one.bound(0b01), 0.0);
        assert!((at_one.bound(0b11) - C8).abs() < 1e-12);

        assert!(closed_form_gaussian_feedback(2.0, 2.0, 1.0, 1.5).is_err());
        assert!(closed_form_gaussian_feedback(2.0, 2.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn gaussian_both_state_values() {
        let p = closed_form_gaussian_both_state(2.0, 2.0, 1.0).unwrap();
        assert!((p.bound(0b11) - C8).abs() < 1e-12);
        let only1 = closed_form_gaussian_both_state(2.0, 0.0, 1.0).unwrap();
        assert!((only1.bound(0b11) - C2).abs() < 1e-12);
        let wide = closed_form_gaussian_both_state(2.0, 2.0, 1e12).unwrap();
        assert!(wide.bound(0b11) < 1e-11);
    }

    #[test]
    fn polytope_vertices_and_support() {
        let p = RatePolytope::from_raw_bounds(2, vec![1.0, 1.0, 1.5], vec![0.0, 0.0]);
        let mut verts = p.vertices();
        verts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // (0,0), (0,1), (0.5,1), (1,0.5), (1,0)
        assert_eq!(verts.len(), 5);
        assert!((p.support(&[1.0, 1.0]) - 1.5).abs() < 1e-12);
        assert!((p.support(&[1.0, 0.0]) - 1.0).abs() < 1e-12);

        let empty = RatePolytope::from_raw_bounds(2, vec![-0.5, 1.0, 1.0], vec![0.0, 0.0]);
        assert!(empty.is_empty());
        assert!(!empty.contains(&[0.0, 0.0], 1e-9).unwrap());
        assert_eq!(empty.support(&[1.0, 0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn envelope_single_and_nested() {
        let p = closed_form_gaussian_snf(2.0, 2.0, 1.0).unwrap();
        let env = envelope_build(std::slice::from_ref(&p), &[2.0, 2.0]).unwrap();
        for w in direction_grid(2, 13) {
            assert!((env.support(&w) - p.support(&w)).abs() < 1e-12);
        }

        let half = RatePolytope::from_raw_bounds(
            2,
            vec![C2 / 2.0, C4 / 2.0, C4 / 2.0],
            vec![0.0, 0.0],
        );
        let both = envelope_build(&[p.clone(), half], &[2.0, 2.0]).unwrap();
        for w in direction_grid(2, 13) {
            assert!((both.support(&w) - p.support(&w)).abs() < 1e-12, "outer wins");
        }
        assert!(matches!(
            envelope_build(&[], &[1.0, 1.0]),
            Err(RegionError::EmptyFamily)
        ));
    }

    #[test]
    fn envelope_crossing_rectangles_support() {
        // Rectangles [0,2]x[0,1] and [0,1]x[0,2]: support in (1,1) is 3 at
        // either outer corner.
        let a = RatePolytope::from_raw_bounds(2, vec![2.0, 1.0, 3.0], vec![0.0, 0.0]);
        let b = RatePolytope::from_raw_bounds(2, vec![1.0, 2.0, 3.0], vec![0.0, 0.0]);
        let env = envelope_build(&[a, b], &[1.0, 1.0]).unwrap();
        assert!((env.support(&[1.0, 1.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_budget_filter() {
        let cheap = RatePolytope::from_raw_bounds(2, vec![0.5, 0.5, 1.0], vec![0.2, 0.2]);
        let pricey = RatePolytope::from_raw_bounds(2, vec![2.0, 2.0, 4.0], vec![5.0, 5.0]);
        let env = envelope_build(&[cheap, pricey], &[1.0, 1.0]).unwrap();
        assert!((env.support(&[1.0, 0.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inclusion_reports() {
        let p = closed_form_gaussian_snf(2.0, 2.0, 1.0).unwrap();
        let env = envelope_build(std::slice::from_ref(&p), &[2.0, 2.0]).unwrap();
        let same = envelope_includes(&env, &env, 61, 1e-9).unwrap();
        assert!(same.certified);
        assert!(same.min_margin.abs() < 1e-12);

        let half = RatePolytope::from_raw_bounds(
            2,
            vec![C2 / 2.0, C4 / 2.0, C4 / 2.0],
            vec![2.0, 2.0],
        );
        let half_env = envelope_build(std::slice::from_ref(&half), &[2.0, 2.0]).unwrap();
        let rep = envelope_includes(&half_env, &env, 61, 1e-9).unwrap();
        assert!(rep.certified);
        assert!(rep.min_margin > 0.1);

        let rev = envelope_includes(&env, &half_env, 61, 1e-9).unwrap();
        assert!(!rev.certified);
        assert!(!rev.violations.is_empty());

        assert!(matches!(
            envelope_includes(&env, &env, 2, 1e-9),
            Err(RegionError::TooFewDirections(2))
        ));
    }
}
