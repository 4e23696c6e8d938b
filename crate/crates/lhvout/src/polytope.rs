//! Vertex enumeration and LP membership for the LHV and LHV+Out polytopes.
//!
//! A behaviour is a member iff it is a convex combination of deterministic
//! strategies. Membership is decided by a phase-one LP over vertex columns;
//! beyond a size threshold, columns are generated on demand using the
//! deterministic-strategy maximizer as separation oracle. Member results
//! carry the decomposition, non-member results a separating inequality that
//! is re-verified against the exact oracle before being returned.

use std::collections::HashSet;

use crate::behaviour::{Behaviour, Scenario};
use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::model::{LhvStrategy, Model, OutStrategy, Strategies};

/// Which polytope a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolytopeKind {
    /// Shared randomness only.
    Lhv,
    /// Shared randomness plus communication of Alice's outcome.
    Out,
}

/// Default cap on the number of vertices handled by enumeration.
pub const DEFAULT_VERTEX_CAP: u128 = 1 << 24;

/// Active sets at most this large skip column generation entirely.
const DIRECT_SOLVE_LIMIT: u128 = 4096;

/// Number of deterministic strategies of the polytope.
pub fn vertex_count(s: Scenario, kind: PolytopeKind) -> u128 {
    let pow = |base: usize, exp: usize| -> u128 {
        let mut acc: u128 = 1;
        for _ in 0..exp {
            acc = acc.saturating_mul(base as u128);
        }
        acc
    };
    match kind {
        PolytopeKind::Lhv => pow(s.n_a, s.m_x).saturating_mul(pow(s.n_b, s.m_y)),
        PolytopeKind::Out => pow(s.n_a, s.m_x).saturating_mul(pow(s.n_b, s.n_a * s.m_y)),
    }
}

fn digits(mut counter: u128, base: usize, len: usize) -> Vec<u8> {
    // Most significant digit first, so counter order is lexicographic order.
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (counter % base as u128) as u8;
        counter /= base as u128;
    }
    out
}

/// Complete, duplicate-free strategy list in lexicographic
/// `(a_assign, b_assign)` order. Errors when the count exceeds `cap`.
pub fn enumerate_vertices_capped(s: Scenario, kind: PolytopeKind, cap: u128) -> Result<Strategies> {
    let total = vertex_count(s, kind);
    if total > cap {
        return Err(Error::CapExceeded { needed: total, cap });
    }
    match kind {
        PolytopeKind::Lhv => {
            let (na, nb) = (s.n_a, s.n_b);
            let a_total = (na as u128).pow(s.m_x as u32);
            let b_total = (nb as u128).pow(s.m_y as u32);
            let mut list = Vec::with_capacity(total as usize);
            for ac in 0..a_total {
                let a = digits(ac, na, s.m_x);
                for bc in 0..b_total {
                    list.push(LhvStrategy { a: a.clone(), b: digits(bc, nb, s.m_y) });
                }
            }
            Ok(Strategies::Lhv(list))
        }
        PolytopeKind::Out => {
            let (na, nb) = (s.n_a, s.n_b);
            let a_total = (na as u128).pow(s.m_x as u32);
            let b_total = (nb as u128).pow((na * s.m_y) as u32);
            let mut list = Vec::with_capacity(total as usize);
            for ac in 0..a_total {
                let a = digits(ac, na, s.m_x);
                for bc in 0..b_total {
                    let flat = digits(bc, nb, na * s.m_y);
                    list.push(OutStrategy {
                        a: a.clone(),
                        b: flat.chunks(s.m_y).map(|c| c.to_vec()).collect(),
                    });
                }
            }
            Ok(Strategies::Out(list))
        }
    }
}

/// [`enumerate_vertices_capped`] with the default cap.
pub fn enumerate_vertices(s: Scenario, kind: PolytopeKind) -> Result<Strategies> {
    enumerate_vertices_capped(s, kind, DEFAULT_VERTEX_CAP)
}

/// A strategy of either kind, as produced by the separation oracle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnyStrategy {
    Lhv(LhvStrategy),
    Out(OutStrategy),
}

impl AnyStrategy {
    pub fn behaviour(&self, s: Scenario) -> Behaviour {
        match self {
            AnyStrategy::Lhv(st) => st.behaviour(s),
            AnyStrategy::Out(st) => st.behaviour(s),
        }
    }
}

/// Maximizes `sum_xyab g(x,y,a,b) * D(ab|xy)` over deterministic strategies.
///
/// For a fixed Alice assignment the optimal Bob response decouples per
/// setting (and per received outcome in the LHV+Out case), so only the
/// `n_a^{m_x}` Alice assignments are enumerated. Ties resolve to the
/// lexicographically first assignment and outcome.
pub fn best_strategy(s: Scenario, kind: PolytopeKind, g: &[f64]) -> (f64, AnyStrategy) {
    debug_assert_eq!(g.len(), s.table_len());
    let a_total = (s.n_a as u128).pow(s.m_x as u32);
    debug_assert!(a_total <= u128::from(u64::MAX));
    let a_total = a_total as u64;

    let eval = |ac: u64| -> f64 {
        let a = digits(u128::from(ac), s.n_a, s.m_x);
        let mut value = 0.0;
        match kind {
            PolytopeKind::Lhv => {
                for y in 0..s.m_y {
                    let mut best = f64::NEG_INFINITY;
                    for b in 0..s.n_b {
                        let mut acc = 0.0;
                        for (x, &ax) in a.iter().enumerate() {
                            acc += g[s.index(x, y, ax as usize, b)];
                        }
                        if acc > best {
                            best = acc;
                        }
                    }
                    value += best;
                }
            }
            PolytopeKind::Out => {
                for y in 0..s.m_y {
                    for alpha in 0..s.n_a {
                        let mut best = f64::NEG_INFINITY;
                        let mut any = false;
                        for b in 0..s.n_b {
                            let mut acc = 0.0;
                            for (x, &ax) in a.iter().enumerate() {
                                if ax as usize == alpha {
                                    acc += g[s.index(x, y, alpha, b)];
                                    any = true;
                                }
                            }
                            if acc > best {
                                best = acc;
                            }
                        }
                        if any {
                            value += best;
                        }
                    }
                }
            }
        }
        value
    };

    let ranges = crate::exec::chunk_ranges(a_total, 256);
    let best = crate::exec::reduce_ranges(
        ranges,
        |range| {
            let mut best = (f64::NEG_INFINITY, u64::MAX);
            for ac in range {
                let v = eval(ac);
                if v > best.0 {
                    best = (v, ac);
                }
            }
            best
        },
        |x, y| {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                y
            } else {
                x
            }
        },
    )
    .expect("at least one Alice assignment");

    // Rebuild the winning strategy with the same tie-breaking as eval().
    let a = digits(u128::from(best.1), s.n_a, s.m_x);
    let strat = match kind {
        PolytopeKind::Lhv => {
            let mut bmap = vec![0u8; s.m_y];
            for (y, slot) in bmap.iter_mut().enumerate() {
                let mut best_b = (f64::NEG_INFINITY, 0usize);
                for b in 0..s.n_b {
                    let mut acc = 0.0;
                    for (x, &ax) in a.iter().enumerate() {
                        acc += g[s.index(x, y, ax as usize, b)];
                    }
                    if acc > best_b.0 {
                        best_b = (acc, b);
                    }
                }
                *slot = best_b.1 as u8;
            }
            AnyStrategy::Lhv(LhvStrategy { a, b: bmap })
        }
        PolytopeKind::Out => {
            let mut bmap = vec![vec![0u8; s.m_y]; s.n_a];
            for alpha in 0..s.n_a {
                for y in 0..s.m_y {
                    let mut best_b = (f64::NEG_INFINITY, 0usize);
                    for b in 0..s.n_b {
                        let mut acc = 0.0;
                        for (x, &ax) in a.iter().enumerate() {
                            if ax as usize == alpha {
                                acc += g[s.index(x, y, alpha, b)];
                            }
                        }
                        if acc > best_b.0 {
                            best_b = (acc, b);
                        }
                    }
                    bmap[alpha][y] = best_b.1 as u8;
                }
            }
            AnyStrategy::Out(OutStrategy { a, b: bmap })
        }
    };
    (best.0, strat)
}

/// Separating inequality certifying non-membership. The inequality is the
/// raw (unnormalized) LP dual in `(x, y, a, b)` settings-major coordinates;
/// both bound and value are re-verified exactly before being returned.
#[derive(Debug, Clone)]
pub struct NonMemberCertificate {
    pub inequality: Vec<f64>,
    /// `max_vertices <inequality, vertex>`, computed by the exact oracle.
    pub polytope_bound: f64,
    /// `<inequality, behaviour>`.
    pub behaviour_value: f64,
}

impl NonMemberCertificate {
    /// Rescales so the polytope bound becomes 1 (requires a positive bound).
    pub fn normalized(&self) -> Result<NonMemberCertificate> {
        self.normalized_to(1.0)
    }

    /// Rescales so the polytope bound becomes `target`.
    pub fn normalized_to(&self, target: f64) -> Result<NonMemberCertificate> {
        if self.polytope_bound <= 1e-12 {
            return Err(Error::InvalidInput(format!(
                "cannot normalize a certificate with bound {}",
                self.polytope_bound
            )));
        }
        let scale = target / self.polytope_bound;
        Ok(NonMemberCertificate {
            inequality: self.inequality.iter().map(|v| v * scale).collect(),
            polytope_bound: target,
            behaviour_value: self.behaviour_value * scale,
        })
    }
}

/// Outcome of a membership query.
#[derive(Debug, Clone)]
pub enum MembershipResult {
    /// The behaviour is a member; the model reproduces it within tolerance.
    Member(Model),
    /// The behaviour lies outside; the inequality separates it.
    NonMember(NonMemberCertificate),
}

impl MembershipResult {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipResult::Member(_))
    }
}

/// Decides membership of `b` in the LHV or LHV+Out polytope.
///
/// Member results are re-verified by substitution (`max |model - b| <= tol`)
/// and non-member inequalities against the exact vertex maximizer, so the
/// answer never rests on LP numerics alone.
pub fn membership(b: &Behaviour, kind: PolytopeKind, tol: f64) -> Result<MembershipResult> {
    membership_capped(b, kind, tol, DEFAULT_VERTEX_CAP)
}

/// [`membership`] with an explicit vertex cap.
pub fn membership_capped(
    b: &Behaviour,
    kind: PolytopeKind,
    tol: f64,
    cap: u128,
) -> Result<MembershipResult> {
    let s = b.scenario;
    let total = vertex_count(s, kind);
    if total > cap {
        return Err(Error::CapExceeded { needed: total, cap });
    }
    let d = s.table_len();
    let mut rhs: Vec<f64> = b.table().to_vec();
    rhs.push(1.0);

    let column_of = |strat: &AnyStrategy| -> Vec<f64> {
        let mut col: Vec<f64> = strat.behaviour(s).table().to_vec();
        col.push(1.0);
        col
    };

    let mut active: Vec<AnyStrategy> = Vec::new();
    let mut seen: HashSet<AnyStrategy> = HashSet::new();
    let add = |strat: AnyStrategy, active: &mut Vec<AnyStrategy>, seen: &mut HashSet<AnyStrategy>| -> bool {
        if seen.insert(strat.clone()) {
            active.push(strat);
            true
        } else {
            false
        }
    };

    if total <= DIRECT_SOLVE_LIMIT {
        let all = enumerate_vertices_capped(s, kind, cap)?;
        match all {
            Strategies::Lhv(list) => {
                for st in list {
                    add(AnyStrategy::Lhv(st), &mut active, &mut seen);
                }
            }
            Strategies::Out(list) => {
                for st in list {
                    add(AnyStrategy::Out(st), &mut active, &mut seen);
                }
            }
        }
    } else {
        for g in [b.table().to_vec(), b.table().iter().map(|v| -v).collect()] {
            let (_, strat) = best_strategy(s, kind, &g);
            add(strat, &mut active, &mut seen);
        }
    }

    let max_rounds = 20_000usize;
    for _ in 0..max_rounds {
        let columns: Vec<Vec<f64>> = active.iter().map(&column_of).collect();
        match lp::feasibility(&columns, &rhs, tol)? {
            LpOutcome::Optimal { x, .. } => {
                return finish_member(b, kind, tol, &active, &x);
            }
            LpOutcome::Infeasible { farkas } => {
                let g = &farkas[..d];
                let offset = farkas[d];
                let (best_val, strat) = best_strategy(s, kind, g);
                if best_val + offset > tol.max(1e-9) {
                    if !add(strat, &mut active, &mut seen) {
                        return Err(Error::LpFailure(
                            "column generation stalled on a repeated vertex".into(),
                        ));
                    }
                    continue;
                }
                return finish_non_member(b, kind, tol, g.to_vec(), best_val);
            }
            LpOutcome::Unbounded => {
                return Err(Error::LpFailure("feasibility phase reported unbounded".into()))
            }
        }
    }
    Err(Error::LpFailure("column generation did not converge".into()))
}

fn finish_member(
    b: &Behaviour,
    kind: PolytopeKind,
    tol: f64,
    active: &[AnyStrategy],
    weights: &[f64],
) -> Result<MembershipResult> {
    let s = b.scenario;
    let mut w = Vec::new();
    let mut lhv = Vec::new();
    let mut out = Vec::new();
    for (strat, &wi) in active.iter().zip(weights) {
        if wi <= crate::model::WEIGHT_EPS {
            continue;
        }
        w.push(wi);
        match strat {
            AnyStrategy::Lhv(st) => lhv.push(st.clone()),
            AnyStrategy::Out(st) => out.push(st.clone()),
        }
    }
    let total: f64 = w.iter().sum();
    for wi in w.iter_mut() {
        *wi /= total;
    }
    let strategies = match kind {
        PolytopeKind::Lhv => Strategies::Lhv(lhv),
        PolytopeKind::Out => Strategies::Out(out),
    };
    let model = Model::new(s, w, strategies)?;
    let reproduced = model.behaviour();
    let err = reproduced
        .table()
        .iter()
        .zip(b.table())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    if err > tol {
        return Err(Error::LpFailure(format!(
            "member model fails substitution check: residual {err:.3e} > {tol:.3e}"
        )));
    }
    Ok(MembershipResult::Member(model))
}

fn finish_non_member(
    b: &Behaviour,
    kind: PolytopeKind,
    tol: f64,
    farkas_g: Vec<f64>,
    farkas_bound: f64,
) -> Result<MembershipResult> {
    let s = b.scenario;
    // For dichotomic LHV queries on nonsignalling behaviours, sharpen the
    // raw Farkas dual into a maximum-margin inequality; the raw dual is the
    // fallback everywhere else.
    let sharpened = if kind == PolytopeKind::Lhv && s.is_dichotomic() {
        max_margin_inequality(b, tol).ok().flatten()
    } else {
        None
    };
    let (g, bound) = match sharpened {
        Some(g) => {
            let (bound, _) = best_strategy(s, kind, &g);
            (g, bound)
        }
        None => (farkas_g, farkas_bound),
    };
    let value: f64 = g.iter().zip(b.table()).map(|(gi, pi)| gi * pi).sum();
    if value <= bound {
        return Err(Error::LpFailure(format!(
            "separating inequality failed re-verification: value {value:.6e} <= bound {bound:.6e}"
        )));
    }
    Ok(MembershipResult::NonMember(NonMemberCertificate {
        inequality: g,
        polytope_bound: bound,
        behaviour_value: value,
    }))
}

/// Maximum-margin separating inequality for dichotomic LHV queries, found by
/// row generation over the LHV vertices in correlator coordinates
/// `(alpha_x, beta_y, C_xy)` boxed to `[-1, 1]`.
///
/// Returns the inequality in probability coordinates, or `None` when the
/// behaviour is signalling (correlator coordinates do not apply) or the
/// margin is not positive.
fn max_margin_inequality(b: &Behaviour, tol: f64) -> Result<Option<Vec<f64>>> {
    let s = b.scenario;
    let Ok(target) = b.to_correlators(tol) else {
        return Ok(None);
    };
    let (m, n) = (s.m_x, s.m_y);
    let dim = m + n + m * n;
    if m > 16 {
        return Ok(None);
    }

    // Objective direction: the behaviour's own correlator coordinates.
    let mut vb = Vec::with_capacity(dim);
    vb.extend_from_slice(&target.alice_marginals);
    vb.extend_from_slice(&target.bob_marginals);
    vb.extend_from_slice(&target.correlators);

    // LHV vertex coordinates for a sign assignment (a, b).
    let vertex_coords = |a: &[i8], bv: &[i8]| -> Vec<f64> {
        let mut v = Vec::with_capacity(dim);
        v.extend(a.iter().map(|&x| f64::from(x)));
        v.extend(bv.iter().map(|&y| f64::from(y)));
        for &ax in a {
            for &by in bv {
                v.push(f64::from(ax) * f64::from(by));
            }
        }
        v
    };

    // Exact maximizer of the affine functional over LHV sign vertices.
    let best_vertex = |coef: &[f64]| -> (f64, Vec<i8>, Vec<i8>) {
        let (alpha, rest) = coef.split_at(m);
        let (beta, c) = rest.split_at(n);
        let mut best: Option<(f64, Vec<i8>, Vec<i8>)> = None;
        for mask in 0..(1u32 << m) {
            let a: Vec<i8> = (0..m).map(|x| if mask >> x & 1 == 0 { 1 } else { -1 }).collect();
            let mut val = 0.0;
            let mut bv = vec![1i8; n];
            for x in 0..m {
                val += alpha[x] * f64::from(a[x]);
            }
            for y in 0..n {
                let mut col = beta[y];
                for x in 0..m {
                    col += c[x * n + y] * f64::from(a[x]);
                }
                if col < 0.0 {
                    bv[y] = -1;
                }
                val += col.abs();
            }
            if best.as_ref().is_none_or(|(bv0, _, _)| val > *bv0) {
                best = Some((val, a, bv));
            }
        }
        best.expect("at least one vertex")
    };

    // Row-generated LP:  max  vb . v - t   s.t.  vertex . v <= t, |v| <= 1.
    // Standard form via v = u - 1 (u in [0, 2]) and t = tp - tm.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    {
        let (_, a0, b0) = best_vertex(&vb);
        rows.push(vertex_coords(&a0, &b0));
        let neg: Vec<f64> = vb.iter().map(|v| -v).collect();
        let (_, a1, b1) = best_vertex(&neg);
        rows.push(vertex_coords(&a1, &b1));
    }

    for _ in 0..10_000 {
        let n_rows = dim + rows.len();
        // Columns: u (dim), tp, tm, box slacks (dim), vertex slacks.
        let n_cols = dim + 2 + dim + rows.len();
        let mut columns: Vec<Vec<f64>> = vec![vec![0.0; n_rows]; n_cols];
        let mut rhs = vec![0.0; n_rows];
        let mut costs = vec![0.0; n_cols];
        for i in 0..dim {
            // Box row: u_i + s_i = 2.
            columns[i][i] = 1.0;
            columns[dim + 2 + i][i] = 1.0;
            rhs[i] = 2.0;
            costs[i] = -vb[i];
        }
        costs[dim] = 1.0; // tp
        costs[dim + 1] = -1.0; // tm
        for (k, row) in rows.iter().enumerate() {
            let r = dim + k;
            for i in 0..dim {
                columns[i][r] = row[i];
            }
            columns[dim][r] = -1.0;
            columns[dim + 1][r] = 1.0;
            columns[dim + 2 + dim + k][r] = 1.0;
            rhs[r] = row.iter().sum();
        }
        match lp::solve(&columns, &rhs, &costs, tol)? {
            LpOutcome::Optimal { x, .. } => {
                let v: Vec<f64> = (0..dim).map(|i| x[i] - 1.0).collect();
                let t = x[dim] - x[dim + 1];
                let (best_val, a, bv) = best_vertex(&v);
                if best_val > t + 1e-9 {
                    rows.push(vertex_coords(&a, &bv));
                    continue;
                }
                let value_b: f64 = vb.iter().zip(&v).map(|(p, q)| p * q).sum();
                if value_b - best_val <= 1e-9 {
                    return Ok(None);
                }
                // Probability coordinates of the affine functional.
                let (alpha, rest) = v.split_at(m);
                let (beta, c) = rest.split_at(n);
                let mut g = vec![0.0; s.table_len()];
                for x in 0..m {
                    for y in 0..n {
                        for a_idx in 0..2usize {
                            for b_idx in 0..2usize {
                                let sa = 1.0 - 2.0 * a_idx as f64;
                                let sb = 1.0 - 2.0 * b_idx as f64;
                                g[s.index(x, y, a_idx, b_idx)] = alpha[x] * sa / n as f64
                                    + beta[y] * sb / m as f64
                                    + c[x * n + y] * sa * sb;
                            }
                        }
                    }
                }
                return Ok(Some(g));
            }
            LpOutcome::Infeasible { .. } => {
                return Err(Error::LpFailure("margin LP infeasible".into()))
            }
            LpOutcome::Unbounded => {
                return Err(Error::LpFailure("margin LP unbounded".into()))
            }
        }
    }
    Err(Error::LpFailure("margin LP row generation did not converge".into()))
}
