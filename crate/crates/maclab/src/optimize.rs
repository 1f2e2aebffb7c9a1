//! Search over input distributions and auxiliary test channels to trace the
//! outer boundary of the achievable envelopes.
//!
//! The method is multi-start local ascent on probability simplices: the
//! decision variables are the per-user input pmfs and each conditional row
//! of the test channels. A move shifts probability mass between two symbols
//! of one simplex, scaled back to land exactly on the cost-budget boundary
//! when it would overshoot; step sizes halve whenever a full sweep yields no
//! improvement. Restarts draw fresh starting points from per-item seeded
//! substreams, so results are reproducible and schedule-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{
    build_joint, is_deterministic_recoverable, AuxChannel, AuxChannelSet, ChannelError,
    ChannelSpec, InputAssignment,
};
use crate::prob::{Pmf, ProbError};
use crate::regions::{
    capacity_deterministic, direction_grid, envelope_build, region_lapidoth, region_m_user,
    region_proposed, RatePolytope, RegionEnvelope, RegionError,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("no input distribution for user {user} satisfies cost budget {budget}")]
    InfeasibleBudget { user: usize, budget: f64 },
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("region kind `{kind}` requires a two-user channel, got {users}")]
    KindRequiresTwoUsers { kind: &'static str, users: usize },
    #[error("invalid search config: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, SearchError>;

/// Which fixed-distribution region evaluator the search optimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// State-only test channels P(V_k | S_k).
    Lapidoth,
    /// Test channels compressing state and codeword jointly, P(V_k | S_k, X_k).
    Proposed,
    /// The M-user generalization of the joint-compression region.
    MUser,
    /// Deterministic recoverable class; no test channels, inputs only.
    Deterministic,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Lapidoth => "lapidoth",
            RegionKind::Proposed => "proposed",
            RegionKind::MUser => "m-user",
            RegionKind::Deterministic => "deterministic",
        }
    }
}

impl std::str::FromStr for RegionKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lapidoth" => Ok(RegionKind::Lapidoth),
            "proposed" => Ok(RegionKind::Proposed),
            "m-user" => Ok(RegionKind::MUser),
            "deterministic" => Ok(RegionKind::Deterministic),
            other => Err(format!(
                "unknown region kind `{other}` (expected lapidoth|proposed|m-user|deterministic)"
            )),
        }
    }
}

/// Cost-budget handling: closure keeps E[c] <= budget, strict backs off by a
/// small margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    Strict,
    #[default]
    Closure,
}

const STRICT_MARGIN: f64 = 1e-9;
const MIN_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Test-channel alphabet sizes per user; `None` uses |S_k| * |X_k| + 1.
    pub aux_cards: Option<Vec<usize>>,
    pub restarts: usize,
    /// Cap on coordinate sweeps per restart.
    pub max_sweeps: usize,
    /// Convergence tolerance on the objective (bits).
    pub tol: f64,
    pub seed: u64,
    /// Direction-grid size for boundary tracing.
    pub directions: usize,
    pub cost_mode: CostMode,
    /// Record (restart, sweep, objective) rows.
    pub trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            aux_cards: None,
            restarts: 4,
            max_sweeps: 200,
            tol: 1e-9,
            seed: 0,
            directions: 181,
            cost_mode: CostMode::Closure,
            trace: false,
        }
    }
}

impl SearchConfig {
    fn validate(&self, ch: &ChannelSpec) -> Result<()> {
        if self.restarts == 0 {
            return Err(SearchError::BadConfig("restarts must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(SearchError::BadConfig("tolerance must be positive".into()));
        }
        if let Some(cards) = &self.aux_cards {
            if cards.len() != ch.users() {
                return Err(SearchError::BadConfig(format!(
                    "{} aux cardinalities for {} users",
                    cards.len(),
                    ch.users()
                )));
            }
            if cards.contains(&0) {
                return Err(SearchError::BadConfig(
                    "aux cardinalities must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    fn cards(&self, ch: &ChannelSpec) -> Vec<usize> {
        self.aux_cards.clone().unwrap_or_else(|| {
            (0..ch.users())
                .map(|k| ch.state_size(k) * ch.input_size(k) + 1)
                .collect()
        })
    }
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub restart: usize,
    pub sweep: usize,
    pub objective: f64,
}

/// Best distribution found by one search, with its polytope and objective.
#[derive(Debug, Clone)]
pub struct Optimum {
    pub value: f64,
    pub inputs: InputAssignment,
    pub aux: AuxChannelSet,
    pub polytope: RatePolytope,
    pub trace: Vec<TraceRow>,
}

/// A traced boundary: the envelope over every polytope the per-direction
/// searches discovered, plus the per-direction optima.
#[derive(Debug)]
pub struct BoundaryTrace {
    pub envelope: RegionEnvelope,
    pub optima: Vec<Optimum>,
}

#[derive(Clone)]
struct Candidate {
    inputs: Vec<Vec<f64>>,
    /// Per user: conditional rows of the test channel. One row per state
    /// symbol in state-only mode, one per (state, input) pair otherwise;
    /// empty for the deterministic kind.
    aux_rows: Vec<Vec<Vec<f64>>>,
}

struct Problem<'a> {
    ch: &'a ChannelSpec,
    kind: RegionKind,
    cards: Vec<usize>,
    cost_limits: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(ch: &'a ChannelSpec, kind: RegionKind, cfg: &SearchConfig) -> Result<Self> {
        if matches!(
            kind,
            RegionKind::Lapidoth | RegionKind::Proposed | RegionKind::Deterministic
        ) && ch.users() != 2
        {
            return Err(SearchError::KindRequiresTwoUsers {
                kind: kind.as_str(),
                users: ch.users(),
            });
        }
        if kind == RegionKind::Deterministic && !is_deterministic_recoverable(ch)? {
            return Err(SearchError::Region(RegionError::NotDeterministicClass));
        }
        let cost_limits = (0..ch.users())
            .map(|k| match cfg.cost_mode {
                CostMode::Closure => ch.budget(k),
                CostMode::Strict => ch.budget(k) - STRICT_MARGIN,
            })
            .collect::<Vec<_>>();
        for (k, &limit) in cost_limits.iter().enumerate() {
            let min_cost = ch
                .cost_table(k)
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_cost > limit + 1e-12 {
                return Err(SearchError::InfeasibleBudget {
                    user: k + 1,
                    budget: ch.budget(k),
                });
            }
        }
        Ok(Self {
            ch,
            kind,
            cards: cfg.cards(ch),
            cost_limits,
        })
    }

    fn aux_row_count(&self, user: usize) -> usize {
        match self.kind {
            RegionKind::Deterministic => 0,
            RegionKind::Lapidoth => self.ch.state_size(user),
            RegionKind::Proposed | RegionKind::MUser => {
                self.ch.state_size(user) * self.ch.input_size(user)
            }
        }
    }

    fn aux_set(&self, cand: &Candidate) -> Result<AuxChannelSet> {
        if self.kind == RegionKind::Deterministic {
            return Ok(AuxChannelSet::degenerate(self.ch));
        }
        let mut chans = Vec::with_capacity(self.ch.users());
        for k in 0..self.ch.users() {
            let flat: Vec<f64> = cand.aux_rows[k].concat();
            let chan = match self.kind {
                RegionKind::Lapidoth => AuxChannel::state_only(
                    self.ch.state_size(k),
                    self.ch.input_size(k),
                    self.cards[k],
                    flat,
                )?,
                _ => AuxChannel::new(
                    self.ch.state_size(k),
                    self.ch.input_size(k),
                    self.cards[k],
                    flat,
                )?,
            };
            chans.push(chan);
        }
        Ok(AuxChannelSet::new(chans))
    }

    fn evaluate(&self, cand: &Candidate) -> Result<(InputAssignment, AuxChannelSet, RatePolytope)> {
        let pmfs = cand
            .inputs
            .iter()
            .map(|w| Pmf::new(w.clone()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let inputs = InputAssignment::new(pmfs);
        let aux = self.aux_set(cand)?;
        let poly = match self.kind {
            RegionKind::Deterministic => capacity_deterministic(self.ch, &inputs)?,
            RegionKind::Lapidoth => {
                let j = build_joint(self.ch, &inputs, &aux)?;
                region_lapidoth(&j)?
            }
            RegionKind::Proposed => {
                let j = build_joint(self.ch, &inputs, &aux)?;
                region_proposed(&j)?
            }
            RegionKind::MUser => {
                let j = build_joint(self.ch, &inputs, &aux)?;
                region_m_user(&j, self.ch.users())?
            }
        };
        let poly = poly.with_costs(inputs.expected_costs(self.ch));
        Ok((inputs, aux, poly))
    }

    /// Blend a pmf toward the cheapest symbol until it meets the budget.
    fn make_feasible(&self, user: usize, mut p: Vec<f64>) -> Vec<f64> {
        let cost = self.ch.cost_table(user);
        let limit = self.cost_limits[user];
        let cur: f64 = p.iter().zip(cost).map(|(&w, &c)| w * c).sum();
        if cur <= limit {
            return p;
        }
        let arg_min = cost
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let c_min = cost[arg_min];
        let lambda = ((limit - c_min) / (cur - c_min)).clamp(0.0, 1.0);
        for (i, w) in p.iter_mut().enumerate() {
            *w *= lambda;
            if i == arg_min {
                *w += 1.0 - lambda;
            }
        }
        p
    }

    fn initial(&self, restart: usize, rng: &mut ChaCha8Rng) -> Candidate {
        let m = self.ch.users();
        let mut inputs = Vec::with_capacity(m);
        let mut aux_rows = Vec::with_capacity(m);
        for k in 0..m {
            let base = if restart == 0 {
                vec![1.0 / self.ch.input_size(k) as f64; self.ch.input_size(k)]
            } else {
                random_simplex(self.ch.input_size(k), rng)
            };
            inputs.push(self.make_feasible(k, base));
        }
        for k in 0..m {
            let rows = self.aux_row_count(k);
            let card = self.cards[k];
            let mut user_rows = Vec::with_capacity(rows);
            for _ in 0..rows {
                if restart == 0 {
                    let mut row = vec![0.0; card];
                    row[0] = 1.0;
                    user_rows.push(row);
                } else {
                    user_rows.push(random_simplex(card, rng));
                }
            }
            aux_rows.push(user_rows);
        }
        Candidate { inputs, aux_rows }
    }
}

fn random_simplex(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln().max(1e-12))
        .collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

/// One multi-start local-ascent run. `init_override` replaces the restart-0
/// starting point (used to seed a known-good candidate).
fn ascend(
    problem: &Problem,
    cfg: &SearchConfig,
    objective: &(dyn Fn(&RatePolytope) -> f64 + Sync),
    stream_salt: u64,
    init_override: Option<&Candidate>,
) -> Result<Optimum> {
    let mut best: Option<Optimum> = None;
    let mut all_trace = Vec::new();
    let m = problem.ch.users();

    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream((stream_salt << 24) | restart as u64);

        let mut cand = match (restart, init_override) {
            (0, Some(c)) => c.clone(),
            _ => problem.initial(restart, &mut rng),
        };
        let (_, _, start_poly) = problem.evaluate(&cand)?;
        let mut value = objective(&start_poly);
        let mut trace = Vec::new();

        let mut step = 0.25_f64;
        let mut sweep = 0usize;
        while sweep < cfg.max_sweeps && step >= MIN_STEP {
            let sweep_start = value;
            let mut improved = false;
            // Input blocks.
            for k in 0..m {
                let len = problem.ch.input_size(k);
                for to in 0..len {
                    for from in 0..len {
                        if to == from {
                            continue;
                        }
                        if let Some(next) = input_move(problem, k, &cand.inputs[k], to, from, step)
                        {
                            let old = std::mem::replace(&mut cand.inputs[k], next);
                            let (_, _, p) = problem.evaluate(&cand)?;
                            let v = objective(&p);
                            if v > value {
                                value = v;
                                improved = true;
                            } else {
                                cand.inputs[k] = old;
                            }
                        }
                    }
                }
            }
            // Test-channel rows.
            for k in 0..m {
                for row in 0..cand.aux_rows[k].len() {
                    let len = problem.cards[k];
                    for to in 0..len {
                        for from in 0..len {
                            if to == from {
                                continue;
                            }
                            if let Some(next) = simplex_move(&cand.aux_rows[k][row], to, from, step)
                            {
                                let old = std::mem::replace(&mut cand.aux_rows[k][row], next);
                                let (_, _, p) = problem.evaluate(&cand)?;
                                let v = objective(&p);
                                if v > value {
                                    value = v;
                                    improved = true;
                                } else {
                                    cand.aux_rows[k][row] = old;
                                }
                            }
                        }
                    }
                }
            }
            if cfg.trace {
                trace.push(TraceRow {
                    restart,
                    sweep,
                    objective: value,
                });
            }
            sweep += 1;
            if !improved {
                step *= 0.5;
            } else if step <= 1e-3 && value - sweep_start < cfg.tol {
                // Fine steps no longer move the objective by more than the
                // requested tolerance.
                break;
            }
        }

        all_trace.extend(trace);
        let replace = match &best {
            None => true,
            Some(b) => value > b.value,
        };
        if replace {
            let (inputs, aux, poly) = problem.evaluate(&cand)?;
            best = Some(Optimum {
                value,
                inputs,
                aux,
                polytope: poly,
                trace: Vec::new(),
            });
        }
    }
    let mut best = best.expect("restarts >= 1");
    best.trace = all_trace;
    Ok(best)
}

fn simplex_move(p: &[f64], to: usize, from: usize, step: f64) -> Option<Vec<f64>> {
    let amount = step.min(p[from]);
    if amount <= 1e-15 {
        return None;
    }
    let mut next = p.to_vec();
    next[from] -= amount;
    next[to] += amount;
    Some(next)
}

fn input_move(
    problem: &Problem,
    user: usize,
    p: &[f64],
    to: usize,
    from: usize,
    step: f64,
) -> Option<Vec<f64>> {
    let mut amount = step.min(p[from]);
    if amount <= 1e-15 {
        return None;
    }
    let cost = problem.ch.cost_table(user);
    let delta = cost[to] - cost[from];
    if delta > 0.0 {
        let cur: f64 = p.iter().zip(cost).map(|(&w, &c)| w * c).sum();
        let room = problem.cost_limits[user] - cur;
        if room <= 1e-15 {
            return None;
        }
        amount = amount.min(room / delta);
        if amount <= 1e-15 {
            return None;
        }
    }
    let mut next = p.to_vec();
    next[from] -= amount;
    next[to] += amount;
    Some(next)
}

/// Maximize `sum_k weights_k R_k` over the polytopes generated by the given
/// region kind's admissible distributions. Deterministic given the seed;
/// the best objective is non-decreasing in the restart count.
pub fn maximize_weighted_rate(
    ch: &ChannelSpec,
    weights: &[f64],
    kind: RegionKind,
    cfg: &SearchConfig,
) -> Result<Optimum> {
    cfg.validate(ch)?;
    if weights.len() != ch.users() {
        return Err(SearchError::BadWeights(format!(
            "{} weights for {} users",
            weights.len(),
            ch.users()
        )));
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) || weights.iter().all(|&w| w == 0.0) {
        return Err(SearchError::BadWeights(
            "weights must be nonnegative and not all zero".into(),
        ));
    }
    let problem = Problem::new(ch, kind, cfg)?;
    let w = weights.to_vec();
    ascend(&problem, cfg, &move |p| p.support(&w), 0, None)
}

/// Run the weighted-rate search over the direction grid and return the
/// envelope of every polytope discovered, a valid inner approximation of
/// the region. Directions are independent work items with derived seeds.
pub fn trace_boundary(
    ch: &ChannelSpec,
    kind: RegionKind,
    cfg: &SearchConfig,
) -> Result<RegionEnvelope> {
    Ok(trace_boundary_detailed(ch, kind, cfg)?.envelope)
}

pub fn trace_boundary_detailed(
    ch: &ChannelSpec,
    kind: RegionKind,
    cfg: &SearchConfig,
) -> Result<BoundaryTrace> {
    cfg.validate(ch)?;
    if cfg.directions < 2 {
        return Err(SearchError::BadConfig(
            "boundary tracing needs at least 2 directions".into(),
        ));
    }
    let problem = Problem::new(ch, kind, cfg)?;
    let dirs = direction_grid(ch.users(), cfg.directions);
    let optima: Vec<Optimum> = dirs
        .par_iter()
        .enumerate()
        .map(|(idx, w)| ascend(&problem, cfg, &|p| p.support(w), idx as u64 + 1, None))
        .collect::<Result<Vec<_>>>()?;
    let polys: Vec<RatePolytope> = optima.iter().map(|o| o.polytope.clone()).collect();
    let envelope = envelope_build(&polys, ch.budgets())?;
    Ok(BoundaryTrace { envelope, optima })
}

/// Certificate data for the two-user example channel with outputs
/// `(X1 xor T_{X2}, X2)`: membership of the rate pair (1, 1/2) in the
/// joint-compression region with the hand-constructed V2 = T_{X2} test
/// channel, plus the best state-only-region R2 found by search at R1 = 1
/// (reported as data, not asserted; search is an inner method).
#[derive(Debug, Clone)]
pub struct Example1Report {
    pub contains: bool,
    /// I(X1, V1; Y | X2, V2); 1 for the constructed joint.
    pub message_term: f64,
    /// I(V2; S2 | X2); 1/2 for the constructed joint.
    pub compression_term: f64,
    /// Sum-rate bound; 3/2 for the constructed joint.
    pub sum_bound: f64,
    pub bounds: [f64; 3],
    /// Best R2 with (1, R2) in a state-only polytope found by search.
    pub state_only_r2_at_r1_one: f64,
    /// Whether any searched state-only polytope reached R1 = 1.
    pub state_only_reached_r1_one: bool,
}

pub fn verify_example1(cfg: &SearchConfig) -> Result<Example1Report> {
    let ch = crate::channels::example1_channel();
    let inputs = InputAssignment::uniform(&ch);
    let aux = crate::channels::example1_aux();
    let j = build_joint(&ch, &inputs, &aux)?;
    let message_term = j.mutual_information(&["X1", "V1"], &["Y"], &["X2", "V2"])?;
    let compression_term = j.mutual_information(&["V2"], &["S2"], &["X2"])?;
    let poly = region_proposed(&j)?;
    let contains = poly.contains(&[1.0, 0.5], 1e-9)?;

    // State-only side: search for the largest R2 compatible with R1 = 1.
    // Reaching the R1 = 1 face dominates the objective; R2 headroom only
    // counts once the face is reached.
    let search_cfg = SearchConfig {
        aux_cards: Some(vec![1, 5]),
        restarts: cfg.restarts.min(2),
        max_sweeps: cfg.max_sweeps.min(40),
        seed: cfg.seed,
        trace: false,
        ..cfg.clone()
    };
    let problem = Problem::new(&ch, RegionKind::Lapidoth, &search_cfg)?;
    let objective = |p: &RatePolytope| -> f64 {
        if p.is_empty() {
            return f64::NEG_INFINITY;
        }
        let b1 = p.bound(0b01);
        let gate = b1.min(1.0);
        let extra = if b1 >= 1.0 - 1e-9 {
            (p.bound(0b10).min(p.bound(0b11) - 1.0)).max(0.0)
        } else {
            0.0
        };
        4.0 * gate + extra
    };
    // Seed restart 0 with the informed candidate V2 = S2 (full state copy).
    let mut copy_rows = Vec::with_capacity(4);
    for s in 0..4usize {
        let mut row = vec![0.0; 5];
        row[s] = 1.0;
        copy_rows.push(row);
    }
    let seeded = Candidate {
        inputs: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        aux_rows: vec![vec![vec![1.0]], copy_rows],
    };
    let best = ascend(&problem, &search_cfg, &objective, 0, Some(&seeded))?;
    let b1 = best.polytope.bound(0b01);
    let reached = !best.polytope.is_empty() && b1 >= 1.0 - 1e-6;
    let r2 = if reached {
        (best.polytope.bound(0b10).min(best.polytope.bound(0b11) - 1.0)).max(0.0)
    } else {
        0.0
    };

    Ok(Example1Report {
        contains,
        message_term,
        compression_term,
        sum_bound: poly.bound(0b11),
        bounds: [poly.bound(0b01), poly.bound(0b10), poly.bound(0b11)],
        state_only_r2_at_r1_one: r2,
        state_only_reached_r1_one: reached,
    })
}
