//! Exact finite-alphabet probability tables and information measures.
//!
//! Everything downstream (region bounds, capacity formulas, search
//! objectives) reduces to entropies of marginals of a [`JointTable`].
//! All measures are in bits with the convention `0 log 0 = 0`.

use thiserror::Error;

use crate::numeric::NeumaierSum;

/// Tolerance on |sum - 1| accepted at construction. Measures are computed
/// without renormalizing afterwards.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Dense tables only: product of alphabet sizes is capped here.
pub const MAX_TABLE_CELLS: usize = 1 << 24;

/// Rounding can leave information quantities a hair below zero; anything
/// within this magnitude clamps to 0, anything worse is a real bug.
const NEG_ROUNDING_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("unknown variable name `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("variable set is empty")]
    EmptyVariableSet,
    #[error("alphabet size must be positive")]
    EmptyAlphabet,
    #[error("probabilities sum to {sum:.12e}, expected 1 within {tol:.1e}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("negative probability {value:.6e} at flat index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("table has {cells} cells, exceeding the dense-table cap of {cap}")]
    TableTooLarge { cells: usize, cap: usize },
    #[error("table length {got} does not match alphabet product {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("argument {value} outside [{lo}, {hi}]")]
    ArgOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("negative cost entry {value} for symbol {index}")]
    NegativeCost { index: usize, value: f64 },
    #[error("{what} evaluated to {value:.6e}; more negative than rounding can explain")]
    InternalConsistency { what: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, ProbError>;

/// A probability mass function over `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    weights: Vec<f64>,
}

impl Pmf {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(ProbError::EmptyAlphabet);
        }
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 {
                return Err(ProbError::NegativeProbability { index: i, value: w });
            }
        }
        let sum = crate::numeric::sum_compensated(weights.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform pmf needs a nonempty alphabet");
        Self {
            weights: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, symbol: usize) -> Self {
        assert!(symbol < len, "point-mass symbol out of range");
        let mut weights = vec![0.0; len];
        weights[symbol] = 1.0;
        Self { weights }
    }

    /// Two-symbol pmf with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ProbError::ArgOutOfRange {
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self {
            weights: vec![1.0 - p, p],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_slice(&self.weights)
    }
}

fn entropy_of_slice(probs: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &p in probs {
        if p > 0.0 {
            acc.add(-p * p.log2());
        }
    }
    // -p log p is nonnegative termwise, but compensation can leave -0.0.
    acc.total().max(0.0)
}

/// A finite joint distribution over named discrete variables, stored as a
/// dense row-major table (last variable fastest).
#[derive(Debug, Clone)]
pub struct JointTable {
    vars: Vec<(String, usize)>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(vars: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        if vars.is_empty() {
            return Err(ProbError::EmptyVariableSet);
        }
        for (i, (name, size)) in vars.iter().enumerate() {
            if *size == 0 {
                return Err(ProbError::EmptyAlphabet);
            }
            if vars[..i].iter().any(|(other, _)| other == name) {
                return Err(ProbError::DuplicateVariable(name.clone()));
            }
        }
        let mut cells: usize = 1;
        for (_, size) in &vars {
            cells = cells
                .checked_mul(*size)
                .filter(|&c| c <= MAX_TABLE_CELLS)
                .ok_or(ProbError::TableTooLarge {
                    cells: usize::MAX,
                    cap: MAX_TABLE_CELLS,
                })?;
        }
        if cells > MAX_TABLE_CELLS {
            return Err(ProbError::TableTooLarge {
                cells,
                cap: MAX_TABLE_CELLS,
            });
        }
        if probs.len() != cells {
            return Err(ProbError::LengthMismatch {
                got: probs.len(),
                expected: cells,
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(ProbError::NegativeProbability { index: i, value: p });
            }
        }
        let sum = crate::numeric::sum_compensated(probs.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(Self { vars, probs })
    }

    pub fn variables(&self) -> &[(String, usize)] {
        &self.vars
    }

    pub fn cells(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.vars.iter().any(|(n, _)| n == name)
    }

    fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    /// Resolve a name set to sorted variable indices, rejecting duplicates.
    fn resolve_set(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(names.len());
        for name in names {
            let i = self.var_index(name)?;
            if idx.contains(&i) {
                return Err(ProbError::DuplicateVariable(name.to_string()));
            }
            idx.push(i);
        }
        idx.sort_unstable();
        Ok(idx)
    }

    fn strides(&self) -> Vec<usize> {
        let n = self.vars.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].1;
        }
        strides
    }

    /// Marginal over the variables at `keep` (sorted table-order indices).
    fn marginal_by_indices(&self, keep: &[usize]) -> Vec<f64> {
        let strides = self.strides();
        let mut out_len = 1usize;
        let mut out_strides = Vec::with_capacity(keep.len());
        for &k in keep.iter().rev() {
            out_strides.push((k, out_len));
            out_len *= self.vars[k].1;
        }
        let mut out = vec![0.0; out_len];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut o = 0usize;
            for &(k, os) in &out_strides {
                let digit = (flat / strides[k]) % self.vars[k].1;
                o += digit * os;
            }
            out[o] += p;
        }
        out
    }

    /// Single-variable marginal as a [`Pmf`].
    pub fn marginal_pmf(&self, name: &str) -> Result<Pmf> {
        let i = self.var_index(name)?;
        let weights = self.marginal_by_indices(&[i]);
        Ok(Pmf { weights })
    }

    /// Joint entropy H(vars) in bits.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        if vars.is_empty() {
            return Err(ProbError::EmptyVariableSet);
        }
        let keep = self.resolve_set(vars)?;
        Ok(entropy_of_slice(&self.marginal_by_indices(&keep)))
    }

    /// Entropy of a name-index set, with H(empty) = 0. Internal building
    /// block for the conditional measures.
    fn entropy_of_indices(&self, keep: &[usize]) -> f64 {
        if keep.is_empty() {
            return 0.0;
        }
        entropy_of_slice(&self.marginal_by_indices(keep))
    }

    /// H(target | given) = H(target, given) - H(given).
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        if target.is_empty() {
            return Err(ProbError::EmptyVariableSet);
        }
        let t = self.resolve_set(target)?;
        let g = self.resolve_set(given)?;
        if let Some(&shared) = t.iter().find(|i| g.contains(i)) {
            return Err(ProbError::OverlappingSets(self.vars[shared].0.clone()));
        }
        let mut tg = t;
        tg.extend_from_slice(&g);
        tg.sort_unstable();
        let h = self.entropy_of_indices(&tg) - self.entropy_of_indices(&g);
        clamp_information(h, "conditional entropy")
    }

    /// I(a; b | given) = H(a|given) + H(b|given) - H(a,b|given), evaluated
    /// as four joint entropies. `given` may be empty.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(ProbError::EmptyVariableSet);
        }
        let ia = self.resolve_set(a)?;
        let ib = self.resolve_set(b)?;
        let ig = self.resolve_set(given)?;
        for (set, other) in [(&ia, &ib), (&ia, &ig), (&ib, &ig)] {
            if let Some(&shared) = set.iter().find(|i| other.contains(i)) {
                return Err(ProbError::OverlappingSets(self.vars[shared].0.clone()));
            }
        }
        let union = |x: &[usize], y: &[usize]| {
            let mut u = x.to_vec();
            u.extend_from_slice(y);
            u.sort_unstable();
            u
        };
        let ag = union(&ia, &ig);
        let bg = union(&ib, &ig);
        let abg = union(&ag, &ib);
        let mi = self.entropy_of_indices(&ag) + self.entropy_of_indices(&bg)
            - self.entropy_of_indices(&abg)
            - self.entropy_of_indices(&ig);
        clamp_information(mi, "mutual information")
    }

    /// E[c(X)] for the marginal of `var` under a per-symbol cost table.
    pub fn expected_cost(&self, var: &str, cost: &[f64]) -> Result<f64> {
        let i = self.var_index(var)?;
        let size = self.vars[i].1;
        if cost.len() != size {
            return Err(ProbError::LengthMismatch {
                got: cost.len(),
                expected: size,
            });
        }
        for (j, &c) in cost.iter().enumerate() {
            if c < 0.0 {
                return Err(ProbError::NegativeCost { index: j, value: c });
            }
        }
        let marginal = self.marginal_by_indices(&[i]);
        Ok(crate::numeric::sum_compensated(
            marginal.iter().zip(cost).map(|(&p, &c)| p * c),
        ))
    }
}

fn clamp_information(value: f64, what: &'static str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -NEG_ROUNDING_TOL {
        Ok(0.0)
    } else {
        Err(ProbError::InternalConsistency { what, value })
    }
}

/// Binary entropy H_b(p) = -p log2 p - (1-p) log2(1-p).
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ProbError::ArgOutOfRange {
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Bernoulli convolution p * q = p(1-q) + q(1-p): the parameter of the XOR
/// of independent Bernoulli(p) and Bernoulli(q).
pub fn bernoulli_convolve(p: f64, q: f64) -> Result<f64> {
    for v in [p, q] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ProbError::ArgOutOfRange {
                value: v,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    Ok(p * (1.0 - q) + q * (1.0 - p))
}

/// Gaussian capacity function C(x) = (1/2) log2(1 + x) for SNR x >= 0.
pub fn gaussian_capacity(snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(ProbError::ArgOutOfRange {
            value: snr,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(0.5 * (1.0 + snr).log2())
}

#[cfg(test)]
mod tests {
    // Oracle constants carry full decimal expansions beyond f64 precision.
    #![allow(clippy::excessive_precision)]

    use super::*;

    // Frozen oracle values (closed-form binary entropy, 17 significant digits).
    const H_B_QUARTER: f64 = 0.81127812445913286;
    const MI_XOR_QUARTER: f64 = 0.18872187554086714;

    fn uniform_bit() -> JointTable {
        JointTable::new(vec![("X".into(), 2)], vec![0.5, 0.5]).unwrap()
    }

    /// Joint of (X, S, Y) with Y = X xor S, X ~ Bern(1/2) independent of
    /// S ~ Bern(ps). Brute-force 8-cell table.
    fn xor_joint(ps: f64) -> JointTable {
        let mut probs = vec![0.0; 8];
        for x in 0..2usize {
            for s in 0..2usize {
                let y = x ^ s;
                let p = 0.5 * if s == 1 { ps } else { 1.0 - ps };
                probs[(x * 2 + s) * 2 + y] += p;
            }
        }
        JointTable::new(
            vec![("X".into(), 2), ("S".into(), 2), ("Y".into(), 2)],
            probs,
        )
        .unwrap()
    }

    #[test]
    fn entropy_uniform_bit_is_one() {
        assert!((uniform_bit().entropy(&["X"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_point_mass_is_zero() {
        let j = JointTable::new(vec![("X".into(), 3)], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(j.entropy(&["X"]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_bernoulli_quarter() {
        let j = JointTable::new(vec![("X".into(), 2)], vec![0.75, 0.25]).unwrap();
        assert!((j.entropy(&["X"]).unwrap() - H_B_QUARTER).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_cases() {
        let j = xor_joint(0.25);
        // H(Y|X) = H_b(1/4): brute-force over the 8-cell joint.
        assert!((j.conditional_entropy(&["Y"], &["X"]).unwrap() - H_B_QUARTER).abs() < 1e-12);
        // Self-conditioning is rejected (overlapping sets)...
        assert!(matches!(
            j.conditional_entropy(&["X"], &["X"]),
            Err(ProbError::OverlappingSets(_))
        ));
        // ...but H(X) - H(X) = 0 through the joint H(X,X) convention is
        // covered by H(X|given X via a copy variable) below.
        let copy = JointTable::new(
            vec![("X".into(), 2), ("Z".into(), 2)],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert_eq!(copy.conditional_entropy(&["X"], &["Z"]).unwrap(), 0.0);
        // Independent uniform bits: H(X|Y) = 1.
        let indep = JointTable::new(
            vec![("X".into(), 2), ("Y".into(), 2)],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        assert!((indep.conditional_entropy(&["X"], &["Y"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_cases() {
        let indep = JointTable::new(
            vec![("X".into(), 2), ("Y".into(), 2)],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        assert_eq!(indep.mutual_information(&["X"], &["Y"], &[]).unwrap(), 0.0);

        let identity = JointTable::new(
            vec![("X".into(), 2), ("Y".into(), 2)],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert!((identity.mutual_information(&["X"], &["Y"], &[]).unwrap() - 1.0).abs() < 1e-12);

        let j = xor_joint(0.25);
        assert!(
            (j.mutual_information(&["X"], &["Y"], &[]).unwrap() - MI_XOR_QUARTER).abs() < 1e-12
        );
        // Conditioned on S the channel is clean: I(X;Y|S) = 1.
        assert!((j.mutual_information(&["X"], &["Y"], &["S"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.25).unwrap() - H_B_QUARTER).abs() < 1e-15);
        assert!(
            (binary_entropy(0.25).unwrap() - binary_entropy(0.75).unwrap()).abs() < 1e-15,
            "symmetric in p <-> 1-p"
        );
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn bernoulli_convolve_values() {
        assert_eq!(bernoulli_convolve(0.3, 0.0).unwrap(), 0.3);
        assert!((bernoulli_convolve(0.3, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let v = bernoulli_convolve(1.0 / 3.0, 0.25).unwrap();
        assert!((v - 5.0 / 12.0).abs() < 1e-15);
        let w = bernoulli_convolve(0.25, 1.0 / 3.0).unwrap();
        assert_eq!(v, w, "commutative");
        assert!(bernoulli_convolve(1.2, 0.5).is_err());
    }

    #[test]
    fn gaussian_capacity_values() {
        assert_eq!(gaussian_capacity(0.0).unwrap(), 0.0);
        assert!((gaussian_capacity(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((gaussian_capacity(3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(gaussian_capacity(-1e-9).is_err());
    }

    #[test]
    fn expected_cost_values() {
        let j = uniform_bit();
        assert!((j.expected_cost("X", &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);

        let pm = JointTable::new(vec![("X".into(), 2)], vec![1.0, 0.0]).unwrap();
        assert_eq!(pm.expected_cost("X", &[0.0, 7.0]).unwrap(), 0.0);

        let b = JointTable::new(vec![("X".into(), 2)], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((b.expected_cost("X", &[0.0, 1.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        assert!(matches!(
            j.expected_cost("X", &[1.0]),
            Err(ProbError::LengthMismatch { .. })
        ));
        assert!(matches!(
            j.expected_cost("X", &[0.0, -1.0]),
            Err(ProbError::NegativeCost { .. })
        ));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            JointTable::new(vec![("X".into(), 2)], vec![0.7, 0.7]),
            Err(ProbError::NotNormalized { .. })
        ));
        assert!(matches!(
            JointTable::new(vec![("X".into(), 2)], vec![-0.1, 1.1]),
            Err(ProbError::NegativeProbability { .. })
        ));
        assert!(matches!(
            JointTable::new(vec![("X".into(), 2), ("X".into(), 2)], vec![0.25; 4]),
            Err(ProbError::DuplicateVariable(_))
        ));
        assert!(matches!(
            JointTable::new(
                vec![("A".into(), 1 << 13), ("B".into(), 1 << 13)],
                vec![0.0; 4]
            ),
            Err(ProbError::TableTooLarge { .. })
        ));
        let j = uniform_bit();
        assert!(matches!(
            j.entropy(&["W"]),
            Err(ProbError::UnknownVariable(_))
        ));
        assert!(matches!(j.entropy(&[]), Err(ProbError::EmptyVariableSet)));
    }

    #[test]
    fn marginal_pmf_roundtrip() {
        let j = xor_joint(0.25);
        let s = j.marginal_pmf("S").unwrap();
        assert!((s.weights()[1] - 0.25).abs() < 1e-12);
        let y = j.marginal_pmf("Y").unwrap();
        // P(Y=1) = 1/2 by symmetry of the uniform input.
        assert!((y.weights()[1] - 0.5).abs() < 1e-12);
    }
}
