//! Frank-Wolfe construction of LHV+Out models in correlator space.
//!
//! For a zero-marginal target `p` (an `m x n` correlator matrix), minimizes
//! `f(q) = ||q - p||_F^2 / 2` over the convex hull of strategy matrices
//! `s_xy = a_x b_{y, a_x}` by plain Frank-Wolfe with exact line search. The
//! linear minimization oracle is the LHV+Out sign maximization: for a fixed
//! Alice vector the optimal Bob responses are the signs of the column
//! partial sums, so only `2^(m-1)` canonical Alice vectors remain (`a` and
//! `-a` produce the same matrix).
//!
//! Emitted models are certified by the independent verifier; the FW gap is
//! advisory, especially in heuristic LMO mode where it is only a lower
//! bound.


// Index loops walk several arrays in lockstep here; iterators obscure that.
#![allow(clippy::needless_range_loop)]
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::behaviour::CorrelatorTable;
use crate::error::{Error, Result};
use crate::exec;
use crate::model::{CorrModel, CorrStrategy};

/// Alice-setting cap for the exact oracle.
pub const EXACT_LMO_CAP: usize = 26;

/// Oracle flavour used inside [`build`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmoMode {
    /// Global optimum over all `2^(m-1)` canonical Alice vectors.
    Exact,
    /// Best of seeded single-flip ascents; value is a lower bound only.
    Heuristic,
}

/// Frank-Wolfe configuration.
#[derive(Debug, Clone)]
pub struct FwConfig {
    pub max_iters: usize,
    /// Frobenius-distance goal.
    pub eps_target: f64,
    pub lmo_mode: LmoMode,
    /// Restarts per heuristic oracle call.
    pub restarts: usize,
    pub seed: u64,
}

impl FwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be >= 1".into()));
        }
        if self.eps_target.is_nan() || self.eps_target <= 0.0 {
            return Err(Error::InvalidInput("eps_target must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for FwConfig {
    fn default() -> Self {
        FwConfig {
            max_iters: 10_000,
            eps_target: 1e-6,
            lmo_mode: LmoMode::Exact,
            restarts: 16,
            seed: 0,
        }
    }
}

/// Result of a [`build`] run.
#[derive(Debug, Clone)]
pub struct FwResult {
    pub model: CorrModel,
    /// `||q - p||_F` of the emitted model, recomputed from its strategies.
    pub epsilon: f64,
    pub iterations: usize,
    /// Last Frank-Wolfe gap `<q - p, q - s>`.
    pub fw_gap: f64,
    /// Objective value `f(q)` after every iteration.
    pub objective_trace: Vec<f64>,
}

/// Maximizes `sum_xy G_xy a_x b_{y, a_x}` over LHV+Out sign strategies.
///
/// Exact mode scans the canonical Alice vectors (`a_0 = +1`) with
/// incremental column partial sums; heuristic mode runs `restarts` seeded
/// single-flip ascents in parallel and reduces deterministically by
/// `(value, strategy)` order.
pub fn lmo(
    g: &[f64],
    m: usize,
    n: usize,
    mode: LmoMode,
    restarts: usize,
    seed: u64,
) -> Result<(f64, CorrStrategy)> {
    if m == 0 || n == 0 || g.len() != m * n {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for an {m} x {n} oracle call",
            g.len()
        )));
    }
    match mode {
        LmoMode::Exact => {
            if m > EXACT_LMO_CAP {
                return Err(Error::CapExceeded {
                    needed: 1u128 << (m - 1),
                    cap: 1u128 << (EXACT_LMO_CAP - 1),
                });
            }
            Ok(lmo_exact(g, m, n))
        }
        LmoMode::Heuristic => Ok(lmo_heuristic(g, m, n, restarts, seed, false)),
    }
}

/// Per-column partial sums over the +1 and -1 groups of an Alice vector.
struct PartialSums {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl PartialSums {
    fn init(g: &[f64], signs: &[i8], n: usize) -> Self {
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        for (x, &s) in signs.iter().enumerate() {
            let row = &g[x * n..(x + 1) * n];
            let dst = if s > 0 { &mut plus } else { &mut minus };
            for (d, v) in dst.iter_mut().zip(row) {
                *d += v;
            }
        }
        PartialSums { plus, minus }
    }

    /// Objective value with Bob eliminated analytically.
    fn value(&self) -> f64 {
        self.plus
            .iter()
            .zip(&self.minus)
            .map(|(p, m)| p.abs() + m.abs())
            .sum()
    }

    /// Moves row `x` of `g` between the groups (sign flip of `a_x`).
    fn flip(&mut self, g: &[f64], n: usize, x: usize, now_positive: bool) {
        let row = &g[x * n..(x + 1) * n];
        for y in 0..n {
            if now_positive {
                self.minus[y] -= row[y];
                self.plus[y] += row[y];
            } else {
                self.plus[y] -= row[y];
                self.minus[y] += row[y];
            }
        }
    }

    /// Optimal Bob responses for the current grouping: `b+ = sign(plus)`,
    /// `b- = -sign(minus)`, ties resolving to +1.
    fn bob(&self) -> (Vec<i8>, Vec<i8>) {
        let bp = self.plus.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
        let bm = self.minus.iter().map(|&v| if v > 0.0 { -1 } else { 1 }).collect();
        (bp, bm)
    }
}

fn strategy_from(signs: Vec<i8>, sums: &PartialSums) -> CorrStrategy {
    let (b_plus, b_minus) = sums.bob();
    CorrStrategy { a: signs, b_plus, b_minus }
}

fn lmo_exact(g: &[f64], m: usize, n: usize) -> (f64, CorrStrategy) {
    let total: u64 = 1 << (m - 1);
    let signs_of = |c: u64| -> Vec<i8> {
        let mut a = vec![1i8; m];
        for x in 1..m {
            if c >> (m - 1 - x) & 1 == 1 {
                a[x] = -1;
            }
        }
        a
    };
    let kernel = |range: std::ops::Range<u64>| -> (f64, u64) {
        let mut signs = signs_of(range.start);
        let mut sums = PartialSums::init(g, &signs, n);
        let mut best = (sums.value(), range.start);
        let mut c = range.start;
        while c + 1 < range.end {
            let flipped = c ^ (c + 1);
            c += 1;
            for bit in 0..m - 1 {
                if flipped >> bit & 1 == 1 {
                    let x = m - 1 - bit;
                    signs[x] = -signs[x];
                    sums.flip(g, n, x, signs[x] > 0);
                }
            }
            let v = sums.value();
            if v > best.0 {
                best = (v, c);
            }
        }
        best
    };
    let best = exec::reduce_ranges(
        exec::chunk_ranges(total, 256),
        kernel,
        |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
    )
    .expect("nonempty counter space");
    let signs = signs_of(best.1);
    let sums = PartialSums::init(g, &signs, n);
    (best.0, strategy_from(signs, &sums))
}

fn lmo_heuristic(
    g: &[f64],
    m: usize,
    n: usize,
    restarts: usize,
    seed: u64,
    sequential: bool,
) -> (f64, CorrStrategy) {
    let runs = restarts.max(1);
    let run = |r: usize| -> (f64, CorrStrategy) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut signs: Vec<i8> = (0..m).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut sums = PartialSums::init(g, &signs, n);
        let mut cur = sums.value();
        for _ in 0..10 * m.max(50) {
            // Steepest single flip: evaluate each candidate via the partial
            // sum delta, O(n) per candidate.
            let mut best_flip: Option<(usize, f64)> = None;
            for x in 0..m {
                let row = &g[x * n..(x + 1) * n];
                let mut v = 0.0;
                for y in 0..n {
                    let (p, mi) = if signs[x] > 0 {
                        (sums.plus[y] - row[y], sums.minus[y] + row[y])
                    } else {
                        (sums.plus[y] + row[y], sums.minus[y] - row[y])
                    };
                    v += p.abs() + mi.abs();
                }
                if v > cur + 1e-15 && best_flip.is_none_or(|(_, bv)| v > bv) {
                    best_flip = Some((x, v));
                }
            }
            match best_flip {
                Some((x, v)) => {
                    signs[x] = -signs[x];
                    sums.flip(g, n, x, signs[x] > 0);
                    cur = v;
                }
                None => break,
            }
        }
        (cur, strategy_from(signs, &sums))
    };
    let results = if sequential {
        exec::map_collect_seq(runs, run)
    } else {
        exec::map_collect(runs, run)
    };
    results
        .into_iter()
        .reduce(|best, cand| {
            if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                cand
            } else {
                best
            }
        })
        .expect("at least one restart")
}

#[doc(hidden)]
pub fn lmo_heuristic_seq(g: &[f64], m: usize, n: usize, restarts: usize, seed: u64) -> (f64, CorrStrategy) {
    lmo_heuristic(g, m, n, restarts, seed, true)
}

/// `nu = 1 / (1 + epsilon)`: the visibility rescaling that turns an
/// `epsilon`-accurate correlator model into an exact one.
pub fn nu_scaling(epsilon: f64) -> Result<f64> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be >= 0")));
    }
    Ok(1.0 / (1.0 + epsilon))
}

/// Doubles every strategy with a sign-flipped copy, halving the weights.
///
/// The copy flips `a` and swaps-and-negates the Bob branches
/// (`b'_{y,+1} = -b_{y,-1}`, `b'_{y,-1} = -b_{y,+1}`): since the strategy's
/// received outcome flips together with `a`, this leaves every two-body
/// correlator untouched while zeroing both parties' marginals exactly.
pub fn fix_marginals(m: &CorrModel) -> CorrModel {
    let mut weights = Vec::with_capacity(2 * m.len());
    let mut strategies = Vec::with_capacity(2 * m.len());
    for (st, &w) in m.strategies.iter().zip(&m.weights) {
        weights.push(w / 2.0);
        strategies.push(st.clone());
        weights.push(w / 2.0);
        strategies.push(CorrStrategy {
            a: st.a.iter().map(|v| -v).collect(),
            b_plus: st.b_minus.iter().map(|v| -v).collect(),
            b_minus: st.b_plus.iter().map(|v| -v).collect(),
        });
    }
    CorrModel { weights, strategies }
}

/// Builds an LHV+Out model for a zero-marginal correlator target by plain
/// Frank-Wolfe with exact line search
/// `gamma* = clamp(<q - p, q - s> / ||q - s||^2, 0, 1)`.
///
/// Stops at `eps_target`, `max_iters`, or a gap below `1e-12`. Active
/// strategies with weight under `1e-15` are pruned (with renormalization)
/// and the iterate is periodically rebuilt from its weights to keep the
/// convex-combination identity tight.
pub fn build(target: &CorrelatorTable, cfg: &FwConfig) -> Result<FwResult> {
    cfg.validate()?;
    if target
        .alice_marginals
        .iter()
        .chain(&target.bob_marginals)
        .any(|v| v.abs() > 1e-12)
    {
        return Err(Error::InvalidInput(
            "build expects a zero-marginal target; strip marginals or use fix_marginals".into(),
        ));
    }
    let (m, n) = (target.m_x(), target.m_y());
    let p = target.correlators.as_slice();
    let dim = m * n;

    let call_lmo = |g: &[f64], iter: usize| -> Result<(f64, CorrStrategy)> {
        let iter_seed = cfg.seed ^ (iter as u64).wrapping_mul(0xd1b5_4a32_d192_ed03);
        lmo(g, m, n, cfg.lmo_mode, cfg.restarts, iter_seed)
    };

    // Warm start at the vertex best aligned with the target.
    let (_, first) = call_lmo(p, 0)?;
    let mut q: Vec<f64> = matrix_of(&first, m, n);
    let mut weights = vec![1.0];
    let mut strategies = vec![first];

    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut epsilon = frobenius_distance(&q, p);
    trace.push(0.5 * epsilon * epsilon);

    for t in 1..=cfg.max_iters {
        if epsilon <= cfg.eps_target {
            break;
        }
        iterations = t;
        let g: Vec<f64> = p.iter().zip(&q).map(|(pi, qi)| pi - qi).collect();
        let (_, s) = call_lmo(&g, t)?;
        let s_mat = matrix_of(&s, m, n);
        // gap = <q - p, q - s>; nonnegative whenever the oracle beats q.
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..dim {
            let d = q[i] - s_mat[i];
            num += (q[i] - p[i]) * d;
            den += d * d;
        }
        gap = num;
        if gap <= 1e-12 || den <= 1e-24 {
            break;
        }
        let gamma = (num / den).clamp(0.0, 1.0);
        for i in 0..dim {
            q[i] += gamma * (s_mat[i] - q[i]);
        }
        for w in weights.iter_mut() {
            *w *= 1.0 - gamma;
        }
        match strategies.iter().position(|st| *st == s) {
            Some(idx) => weights[idx] += gamma,
            None => {
                strategies.push(s);
                weights.push(gamma);
            }
        }

        if t % 128 == 0 {
            prune_and_rebuild(&mut weights, &mut strategies, &mut q, m, n);
        }
        epsilon = frobenius_distance(&q, p);
        trace.push(0.5 * epsilon * epsilon);
    }

    prune_and_rebuild(&mut weights, &mut strategies, &mut q, m, n);
    let epsilon = frobenius_distance(&q, p);
    let model = CorrModel::new(weights, strategies)?;
    Ok(FwResult { model, epsilon, iterations, fw_gap: gap, objective_trace: trace })
}

fn matrix_of(st: &CorrStrategy, m: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for x in 0..m {
        for y in 0..n {
            out[x * n + y] = st.matrix_entry(x, y);
        }
    }
    out
}

fn frobenius_distance(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Drops sub-`1e-15` weights, renormalizes, and rebuilds `q` from the
/// surviving strategies over a fixed summation tree.
fn prune_and_rebuild(
    weights: &mut Vec<f64>,
    strategies: &mut Vec<CorrStrategy>,
    q: &mut Vec<f64>,
    m: usize,
    n: usize,
) {
    let mut w = Vec::with_capacity(weights.len());
    let mut s = Vec::with_capacity(strategies.len());
    for (wi, st) in weights.iter().zip(strategies.iter()) {
        if *wi >= 1e-15 {
            w.push(*wi);
            s.push(st.clone());
        }
    }
    let total: f64 = w.iter().sum();
    for wi in w.iter_mut() {
        *wi /= total;
    }
    *q = accumulate(&w, &s, m, n);
    *weights = w;
    *strategies = s;
}

/// FW-side accumulation of `sum_lambda w_lambda s_lambda` (the verifier has
/// an independent implementation of the same sum).
pub(crate) fn accumulate(weights: &[f64], strategies: &[CorrStrategy], m: usize, n: usize) -> Vec<f64> {
    exec::pairwise_sum(weights.len(), m * n, &|i, buf: &mut [f64]| {
        let w = weights[i];
        let st = &strategies[i];
        for x in 0..m {
            for y in 0..n {
                buf[x * n + y] += w * st.matrix_entry(x, y);
            }
        }
    })
}
