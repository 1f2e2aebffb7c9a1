//! Discrete memoryless state-dependent MAC models and the construction of
//! the full joint distribution over inputs, states, test channels, and the
//! channel output.
//!
//! Degenerate (absent) states and test-channel variables are modeled as
//! singleton alphabets rather than optional fields, so every code path sees
//! the same variable layout `X1..XM, S1..SM, V1..VM, Y`.

use thiserror::Error;

use crate::prob::{binary_entropy, JointTable, Pmf, ProbError, MAX_TABLE_CELLS};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("kernel row {row} sums to {sum:.12e}, expected 1 within 1e-9")]
    KernelRowNotNormalized { row: usize, sum: f64 },
    #[error("kernel entry at row {row}, output {output} is negative ({value:.6e})")]
    KernelNegativeEntry { row: usize, output: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter {name} = {value} outside {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("budget for user {user} must be nonnegative, got {value}")]
    NegativeBudget { user: usize, value: f64 },
    #[error("joint table would need {cells} cells, above the cap of {cap}")]
    TableTooLarge { cells: usize, cap: usize },
    #[error("deterministic-class check requires two users and exactly one non-degenerate state; {0}")]
    NotDeterministicClassShape(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

const KERNEL_ROW_TOL: f64 = 1e-9;

/// A discrete memoryless state-dependent MAC: per-user input alphabets and
/// cost data, mutually independent per-user states, and a transition kernel
/// `P(y | x_1..x_M, s_1..s_M)`.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    input_sizes: Vec<usize>,
    state_pmfs: Vec<Pmf>,
    output_size: usize,
    /// Rows over (x_1..x_M, s_1..s_M) in row-major order (x_1 slowest,
    /// s_M fastest); each row is a distribution over y.
    kernel: Vec<f64>,
    costs: Vec<Vec<f64>>,
    budgets: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(
        input_sizes: Vec<usize>,
        state_pmfs: Vec<Pmf>,
        output_size: usize,
        kernel: Vec<f64>,
        costs: Vec<Vec<f64>>,
        budgets: Vec<f64>,
    ) -> Result<Self> {
        let users = input_sizes.len();
        if users == 0 {
            return Err(ChannelError::DimensionMismatch(
                "channel needs at least one user".into(),
            ));
        }
        if input_sizes.contains(&0) || output_size == 0 {
            return Err(ChannelError::Prob(ProbError::EmptyAlphabet));
        }
        if state_pmfs.len() != users {
            return Err(ChannelError::DimensionMismatch(format!(
                "{} state pmfs for {} users",
                state_pmfs.len(),
                users
            )));
        }
        if costs.len() != users || budgets.len() != users {
            return Err(ChannelError::DimensionMismatch(format!(
                "{} cost tables / {} budgets for {} users",
                costs.len(),
                budgets.len(),
                users
            )));
        }
        for (k, cost) in costs.iter().enumerate() {
            if cost.len() != input_sizes[k] {
                return Err(ChannelError::DimensionMismatch(format!(
                    "cost table for user {} has {} entries, alphabet size is {}",
                    k + 1,
                    cost.len(),
                    input_sizes[k]
                )));
            }
            if let Some((i, &c)) = cost.iter().enumerate().find(|(_, &c)| c < 0.0) {
                return Err(ChannelError::Prob(ProbError::NegativeCost {
                    index: i,
                    value: c,
                }));
            }
        }
        for (k, &b) in budgets.iter().enumerate() {
            if b.is_nan() || b < 0.0 {
                return Err(ChannelError::NegativeBudget {
                    user: k + 1,
                    value: b,
                });
            }
        }
        let mut row_count: usize = 1;
        for &s in &input_sizes {
            row_count = row_count
                .checked_mul(s)
                .ok_or(ChannelError::TableTooLarge {
                    cells: usize::MAX,
                    cap: MAX_TABLE_CELLS,
                })?;
        }
        for p in &state_pmfs {
            row_count = row_count
                .checked_mul(p.len())
                .ok_or(ChannelError::TableTooLarge {
                    cells: usize::MAX,
                    cap: MAX_TABLE_CELLS,
                })?;
        }
        if kernel.len() != row_count * output_size {
            return Err(ChannelError::DimensionMismatch(format!(
                "kernel has {} entries, expected {} rows x {} outputs",
                kernel.len(),
                row_count,
                output_size
            )));
        }
        for row in 0..row_count {
            let slice = &kernel[row * output_size..(row + 1) * output_size];
            if let Some((i, &v)) = slice.iter().enumerate().find(|(_, &v)| v < 0.0) {
                return Err(ChannelError::KernelNegativeEntry {
                    row,
                    output: i,
                    value: v,
                });
            }
            let sum = crate::numeric::sum_compensated(slice.iter().copied());
            if (sum - 1.0).abs() > KERNEL_ROW_TOL {
                return Err(ChannelError::KernelRowNotNormalized { row, sum });
            }
        }
        Ok(Self {
            input_sizes,
            state_pmfs,
            output_size,
            kernel,
            costs,
            budgets,
        })
    }

    pub fn users(&self) -> usize {
        self.input_sizes.len()
    }

    pub fn input_size(&self, user: usize) -> usize {
        self.input_sizes[user]
    }

    pub fn input_sizes(&self) -> &[usize] {
        &self.input_sizes
    }

    pub fn state_size(&self, user: usize) -> usize {
        self.state_pmfs[user].len()
    }

    pub fn state_pmf(&self, user: usize) -> &Pmf {
        &self.state_pmfs[user]
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn cost_table(&self, user: usize) -> &[f64] {
        &self.costs[user]
    }

    pub fn budget(&self, user: usize) -> f64 {
        self.budgets[user]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    fn row_index(&self, inputs: &[usize], states: &[usize]) -> usize {
        let mut idx = 0usize;
        for (k, &x) in inputs.iter().enumerate() {
            idx = idx * self.input_sizes[k] + x;
        }
        for (k, &s) in states.iter().enumerate() {
            idx = idx * self.state_pmfs[k].len() + s;
        }
        idx
    }

    /// P(y | x_1..x_M, s_1..s_M).
    pub fn kernel_prob(&self, inputs: &[usize], states: &[usize], y: usize) -> f64 {
        debug_assert_eq!(inputs.len(), self.users());
        debug_assert_eq!(states.len(), self.users());
        self.kernel[self.row_index(inputs, states) * self.output_size + y]
    }
}

/// One user's test channel `P(V | S, X)`.
#[derive(Debug, Clone)]
pub struct AuxChannel {
    state_size: usize,
    input_size: usize,
    alphabet: usize,
    /// Rows over (s, x) row-major; each row a distribution over v.
    table: Vec<f64>,
}

impl AuxChannel {
    pub fn new(state_size: usize, input_size: usize, alphabet: usize, table: Vec<f64>) -> Result<Self> {
        if state_size == 0 || input_size == 0 || alphabet == 0 {
            return Err(ChannelError::Prob(ProbError::EmptyAlphabet));
        }
        let rows = state_size * input_size;
        if table.len() != rows * alphabet {
            return Err(ChannelError::DimensionMismatch(format!(
                "test-channel table has {} entries, expected {} rows x {}",
                table.len(),
                rows,
                alphabet
            )));
        }
        for row in 0..rows {
            let slice = &table[row * alphabet..(row + 1) * alphabet];
            if let Some((i, &v)) = slice.iter().enumerate().find(|(_, &v)| v < 0.0) {
                return Err(ChannelError::KernelNegativeEntry {
                    row,
                    output: i,
                    value: v,
                });
            }
            let sum = crate::numeric::sum_compensated(slice.iter().copied());
            if (sum - 1.0).abs() > KERNEL_ROW_TOL {
                return Err(ChannelError::KernelRowNotNormalized { row, sum });
            }
        }
        Ok(Self {
            state_size,
            input_size,
            alphabet,
            table,
        })
    }

    /// Test channel depending on the state only: `P(V | S, X) = P(V | S)`.
    /// `rows` holds one distribution over v per state symbol.
    pub fn state_only(
        state_size: usize,
        input_size: usize,
        alphabet: usize,
        rows: Vec<f64>,
    ) -> Result<Self> {
        if rows.len() != state_size * alphabet {
            return Err(ChannelError::DimensionMismatch(format!(
                "state-only table has {} entries, expected {} states x {}",
                rows.len(),
                state_size,
                alphabet
            )));
        }
        let mut table = Vec::with_capacity(state_size * input_size * alphabet);
        for s in 0..state_size {
            let row = &rows[s * alphabet..(s + 1) * alphabet];
            for _ in 0..input_size {
                table.extend_from_slice(row);
            }
        }
        Self::new(state_size, input_size, alphabet, table)
    }

    /// Degenerate test channel: |V| = 1, carrying no information.
    pub fn singleton(state_size: usize, input_size: usize) -> Self {
        Self {
            state_size,
            input_size,
            alphabet: 1,
            table: vec![1.0; state_size * input_size],
        }
    }

    /// Deterministic copy of the state: V = S.
    pub fn copy_state(state_size: usize, input_size: usize) -> Self {
        let alphabet = state_size;
        let mut table = vec![0.0; state_size * input_size * alphabet];
        for s in 0..state_size {
            for x in 0..input_size {
                table[(s * input_size + x) * alphabet + s] = 1.0;
            }
        }
        Self {
            state_size,
            input_size,
            alphabet,
            table,
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn state_size(&self) -> usize {
        self.state_size
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn prob(&self, v: usize, s: usize, x: usize) -> f64 {
        self.table[(s * self.input_size + x) * self.alphabet + v]
    }
}

/// The per-user test channels parameterizing a compressed-state region.
#[derive(Debug, Clone)]
pub struct AuxChannelSet {
    channels: Vec<AuxChannel>,
}

impl AuxChannelSet {
    pub fn new(channels: Vec<AuxChannel>) -> Self {
        Self { channels }
    }

    /// All users degenerate (|V_k| = 1).
    pub fn degenerate(ch: &ChannelSpec) -> Self {
        let channels = (0..ch.users())
            .map(|k| AuxChannel::singleton(ch.state_size(k), ch.input_size(k)))
            .collect();
        Self { channels }
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    pub fn user(&self, k: usize) -> &AuxChannel {
        &self.channels[k]
    }

    pub fn channels(&self) -> &[AuxChannel] {
        &self.channels
    }
}

/// Per-user independent input distributions.
#[derive(Debug, Clone)]
pub struct InputAssignment {
    pmfs: Vec<Pmf>,
}

impl InputAssignment {
    pub fn new(pmfs: Vec<Pmf>) -> Self {
        Self { pmfs }
    }

    pub fn uniform(ch: &ChannelSpec) -> Self {
        Self {
            pmfs: (0..ch.users())
                .map(|k| Pmf::uniform(ch.input_size(k)))
                .collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.pmfs.len()
    }

    pub fn pmf(&self, k: usize) -> &Pmf {
        &self.pmfs[k]
    }

    pub fn pmfs(&self) -> &[Pmf] {
        &self.pmfs
    }

    /// E[c_k(X_k)] for every user under the channel's cost tables.
    pub fn expected_costs(&self, ch: &ChannelSpec) -> Vec<f64> {
        (0..self.pmfs.len())
            .map(|k| {
                self.pmfs[k]
                    .weights()
                    .iter()
                    .zip(ch.cost_table(k))
                    .map(|(&p, &c)| p * c)
                    .sum()
            })
            .collect()
    }
}

/// Build the full joint table over `(X_1..X_M, S_1..S_M, V_1..V_M, Y)`
/// realizing the product factorization: independent inputs and states per
/// user, per-user test channels `P(V_k | S_k, X_k)`, and the channel kernel
/// acting on inputs and states only.
pub fn build_joint(
    ch: &ChannelSpec,
    inputs: &InputAssignment,
    aux: &AuxChannelSet,
) -> Result<JointTable> {
    let m = ch.users();
    if inputs.users() != m || aux.users() != m {
        return Err(ChannelError::DimensionMismatch(format!(
            "{} input pmfs and {} test channels for {} users",
            inputs.users(),
            aux.users(),
            m
        )));
    }
    for k in 0..m {
        if inputs.pmf(k).len() != ch.input_size(k) {
            return Err(ChannelError::DimensionMismatch(format!(
                "input pmf for user {} has {} symbols, alphabet size is {}",
                k + 1,
                inputs.pmf(k).len(),
                ch.input_size(k)
            )));
        }
        let a = aux.user(k);
        if a.state_size() != ch.state_size(k) || a.input_size() != ch.input_size(k) {
            return Err(ChannelError::DimensionMismatch(format!(
                "test channel for user {} is {}x{}, channel is {}x{}",
                k + 1,
                a.state_size(),
                a.input_size(),
                ch.state_size(k),
                ch.input_size(k)
            )));
        }
    }

    let mut vars: Vec<(String, usize)> = Vec::with_capacity(3 * m + 1);
    for k in 0..m {
        vars.push((format!("X{}", k + 1), ch.input_size(k)));
    }
    for k in 0..m {
        vars.push((format!("S{}", k + 1), ch.state_size(k)));
    }
    for k in 0..m {
        vars.push((format!("V{}", k + 1), aux.user(k).alphabet()));
    }
    vars.push(("Y".into(), ch.output_size()));

    let mut cells: usize = 1;
    for (_, size) in &vars {
        cells = cells
            .checked_mul(*size)
            .filter(|&c| c <= MAX_TABLE_CELLS)
            .ok_or(ChannelError::TableTooLarge {
                cells: usize::MAX,
                cap: MAX_TABLE_CELLS,
            })?;
    }

    let sizes: Vec<usize> = vars.iter().map(|(_, s)| *s).collect();
    let mut probs = vec![0.0; cells];
    let mut digits = vec![0usize; vars.len()];
    for (flat, slot) in probs.iter_mut().enumerate() {
        let mut rem = flat;
        for i in (0..sizes.len()).rev() {
            digits[i] = rem % sizes[i];
            rem /= sizes[i];
        }
        let (xs, rest) = digits.split_at(m);
        let (ss, rest) = rest.split_at(m);
        let (vs, y) = rest.split_at(m);
        let mut p = ch.kernel_prob(xs, ss, y[0]);
        if p == 0.0 {
            continue;
        }
        for k in 0..m {
            p *= inputs.pmf(k).weights()[xs[k]]
                * ch.state_pmf(k).weights()[ss[k]]
                * aux.user(k).prob(vs[k], ss[k], xs[k]);
            if p == 0.0 {
                break;
            }
        }
        *slot = p;
    }
    Ok(JointTable::new(vars, probs)?)
}

/// Binary modulo-additive state-dependent MAC: `Y = X1 xor X2 xor S` with
/// `S ~ Bernoulli(p_s)` known (strictly causally) at encoder 1, identity
/// costs `c_k(x) = x`, and budgets `E[X_k] <= p_k`. Strict parameter range
/// `(0, 1/2]`.
pub fn binary_additive_channel(p_s: f64, p1: f64, p2: f64) -> Result<ChannelSpec> {
    for (name, v) in [("p_s", p_s), ("p_1", p1), ("p_2", p2)] {
        if !(v > 0.0 && v <= 0.5) {
            return Err(ChannelError::ParamOutOfRange {
                name,
                value: v,
                range: "(0, 1/2]",
            });
        }
    }
    Ok(binary_additive_channel_relaxed(p_s, p1, p2)?.0)
}

/// Relaxed-range variant accepting parameters in `[0, 1]`. The boolean flag
/// is set when any parameter falls outside the strict `(0, 1/2]` range.
pub fn binary_additive_channel_relaxed(
    p_s: f64,
    p1: f64,
    p2: f64,
) -> Result<(ChannelSpec, bool)> {
    for (name, v) in [("p_s", p_s), ("p_1", p1), ("p_2", p2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ChannelError::ParamOutOfRange {
                name,
                value: v,
                range: "[0, 1]",
            });
        }
    }
    let out_of_range = [p_s, p1, p2].iter().any(|&v| !(v > 0.0 && v <= 0.5));

    let mut kernel = Vec::with_capacity(2 * 2 * 2 * 2);
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for s1 in 0..2usize {
                // s2 is a singleton; one row per (x1, x2, s1).
                let y = x1 ^ x2 ^ s1;
                let mut row = [0.0; 2];
                row[y] = 1.0;
                kernel.extend_from_slice(&row);
            }
        }
    }
    let spec = ChannelSpec::new(
        vec![2, 2],
        vec![Pmf::bernoulli(p_s)?, Pmf::point_mass(1, 0)],
        2,
        kernel,
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![p1, p2],
    )?;
    Ok((spec, out_of_range))
}

/// Bernoulli parameter p* < 1/2 with H_b(p*) = 1/2, solved by bisection.
pub fn example1_state_param() -> f64 {
    let (mut lo, mut hi) = (1e-12, 0.5);
    while hi - lo > 1e-16 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid).unwrap() < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-user channel with binary inputs, no state at encoder 1, state
/// `S2 = (T0, T1)` of independent bits with H(T0) = H(T1) = 1/2, and output
/// `Y = (X1 xor T_{X2}, X2)`. States are coded as `s2 = 2*t0 + t1` and
/// outputs as `y = 2*y1 + y2`. No active cost constraints (budgets at the
/// maximum cost).
pub fn example1_channel() -> ChannelSpec {
    let p = example1_state_param();
    let mut s2_pmf = vec![0.0; 4];
    for t0 in 0..2usize {
        for t1 in 0..2usize {
            let w0 = if t0 == 1 { p } else { 1.0 - p };
            let w1 = if t1 == 1 { p } else { 1.0 - p };
            s2_pmf[2 * t0 + t1] = w0 * w1;
        }
    }
    let mut kernel = Vec::with_capacity(2 * 2 * 4 * 4);
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for s2 in 0..4usize {
                let t0 = s2 >> 1;
                let t1 = s2 & 1;
                let t_sel = if x2 == 1 { t1 } else { t0 };
                let y1 = x1 ^ t_sel;
                let y = 2 * y1 + x2;
                let mut row = [0.0; 4];
                row[y] = 1.0;
                kernel.extend_from_slice(&row);
            }
        }
    }
    ChannelSpec::new(
        vec![2, 2],
        vec![
            Pmf::point_mass(1, 0),
            Pmf::new(s2_pmf).expect("valid product pmf"),
        ],
        4,
        kernel,
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![1.0, 1.0],
    )
    .expect("example channel data is well-formed")
}

/// The test-channel choice that certifies the Example-1 rate pair:
/// V1 degenerate, V2 = T_{X2} (a deterministic function of S2 and X2).
pub fn example1_aux() -> AuxChannelSet {
    let v1 = AuxChannel::singleton(1, 2);
    let mut table = vec![0.0; 4 * 2 * 2];
    for s2 in 0..4usize {
        for x2 in 0..2usize {
            let t0 = s2 >> 1;
            let t1 = s2 & 1;
            let v = if x2 == 1 { t1 } else { t0 };
            table[(s2 * 2 + x2) * 2 + v] = 1.0;
        }
    }
    let v2 = AuxChannel::new(4, 2, 2, table).expect("deterministic rows are normalized");
    AuxChannelSet::new(vec![v1, v2])
}

/// Check membership in the deterministic recoverable class: the kernel is
/// 0/1-valued (the output is a function of inputs and state) and, for every
/// input pair and reachable output, the non-degenerate state value is
/// uniquely determined. Requires two users with exactly one non-degenerate
/// state.
pub fn is_deterministic_recoverable(ch: &ChannelSpec) -> Result<bool> {
    if ch.users() != 2 {
        return Err(ChannelError::NotDeterministicClassShape(format!(
            "channel has {} users",
            ch.users()
        )));
    }
    let nondeg: Vec<usize> = (0..2).filter(|&k| ch.state_size(k) > 1).collect();
    if nondeg.len() != 1 {
        return Err(ChannelError::NotDeterministicClassShape(format!(
            "{} non-degenerate states",
            nondeg.len()
        )));
    }
    let k_state = nondeg[0];

    let deterministic_tol = 1e-9;
    for &v in &ch.kernel {
        if v > deterministic_tol && v < 1.0 - deterministic_tol {
            return Ok(false);
        }
    }

    let s_size = ch.state_size(k_state);
    for x1 in 0..ch.input_size(0) {
        for x2 in 0..ch.input_size(1) {
            for y in 0..ch.output_size() {
                let mut consistent = None;
                for s in 0..s_size {
                    if ch.state_pmf(k_state).weights()[s] == 0.0 {
                        continue;
                    }
                    let states = if k_state == 0 { [s, 0] } else { [0, s] };
                    if ch.kernel_prob(&[x1, x2], &states, y) > 0.5
                        && consistent.replace(s).is_some()
                    {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
