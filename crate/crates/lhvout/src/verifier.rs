//! Independent certification of LHV+Out correlator models.
//!
//! This module is the artifact's ground truth: it reconstructs a model's
//! statistics from scratch and assembles end-to-end visibility certificates.
//! The accumulation here deliberately does not share code with the solver in
//! [`crate::fw`] — it iterates strategies branching on Alice's sign per
//! setting, over its own fixed midpoint summation tree, so results are
//! bit-stable across runs and thread counts.

use crate::behaviour::CorrelatorTable;
use crate::error::{Error, Result};
use crate::fw::nu_scaling;
use crate::geometry::{final_visibility, hemisphere_radius, sphere_radius, VisibilityCertificate};
use crate::model::CorrModel;
use crate::quantum::{double_set, state_behaviour, werner_state, MeasurementSet};

/// Published lower bound on the critical visibility of the two-qubit Werner
/// state: `W(v)` violates a Bell inequality for `v > 0.69604`
/// (Designolle, Vertesi, Pokutta, arXiv:2409.03739).
pub const NONLOCALITY_THRESHOLD: f64 = 0.69604;

/// Accumulated statistics of a model: two-body correlators, Alice marginals,
/// and Bob marginals conditioned on each Alice setting.
struct Stats {
    corr: Vec<f64>,
    alice: Vec<f64>,
    /// `bob[x * n + y] = sum_lambda w b_{y, a_x^lambda}`.
    bob: Vec<f64>,
}

impl Stats {
    fn zero(m: usize, n: usize) -> Self {
        Stats { corr: vec![0.0; m * n], alice: vec![0.0; m], bob: vec![0.0; m * n] }
    }

    fn add(&mut self, other: &Stats) {
        for (a, b) in self.corr.iter_mut().zip(&other.corr) {
            *a += b;
        }
        for (a, b) in self.alice.iter_mut().zip(&other.alice) {
            *a += b;
        }
        for (a, b) in self.bob.iter_mut().zip(&other.bob) {
            *a += b;
        }
    }
}

const LEAF: usize = 64;
const PAR_CUTOFF: usize = 1024;

/// Midpoint-split accumulation over the strategy range; the tree shape is a
/// function of the range alone, never of the thread count.
fn accumulate(model: &CorrModel, range: std::ops::Range<usize>, parallel: bool) -> Stats {
    let (m, n) = (model.m_x(), model.m_y());
    let len = range.len();
    if len <= LEAF {
        let mut acc = Stats::zero(m, n);
        for i in range {
            let w = model.weights[i];
            let st = &model.strategies[i];
            for x in 0..m {
                if st.a[x] > 0 {
                    acc.alice[x] += w;
                    for y in 0..n {
                        // a_x = +1: a_x b_y contributes b_{y,+1}.
                        let b = f64::from(st.b_plus[y]);
                        acc.corr[x * n + y] += w * b;
                        acc.bob[x * n + y] += w * b;
                    }
                } else {
                    acc.alice[x] -= w;
                    for y in 0..n {
                        // a_x = -1: a_x b_y contributes -b_{y,-1}.
                        let b = f64::from(st.b_minus[y]);
                        acc.corr[x * n + y] -= w * b;
                        acc.bob[x * n + y] += w * b;
                    }
                }
            }
        }
        return acc;
    }
    let mid = range.start + len / 2;
    let (left, right) = (range.start..mid, mid..range.end);
    let (mut a, b) = if parallel && len >= PAR_CUTOFF {
        #[cfg(feature = "parallel")]
        {
            rayon::join(
                || accumulate(model, left, true),
                || accumulate(model, right, true),
            )
        }
        #[cfg(not(feature = "parallel"))]
        {
            unreachable!()
        }
    } else {
        (
            accumulate(model, left, parallel),
            accumulate(model, right, parallel),
        )
    };
    a.add(&b);
    a
}

fn stats_of(model: &CorrModel, parallel: bool) -> Stats {
    accumulate(model, 0..model.len(), parallel && cfg!(feature = "parallel"))
}

/// Rebuilds the correlator table implied by a model.
///
/// Bob's marginal is accumulated conditioned on every Alice setting and must
/// be independent of it within `1e-9` — a model violating that consistency
/// cannot reproduce any nonsignalling behaviour and is rejected.
pub fn reconstruct(model: &CorrModel) -> Result<CorrelatorTable> {
    model.validate()?;
    let (m, n) = (model.m_x(), model.m_y());
    let stats = stats_of(model, true);
    let mut worst = 0.0f64;
    for x in 1..m {
        for y in 0..n {
            worst = worst.max((stats.bob[x * n + y] - stats.bob[y]).abs());
        }
    }
    if worst > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "Bob's implied marginal depends on Alice's setting by {worst:.3e}; \
             the model is inconsistent with a nonsignalling behaviour"
        )));
    }
    CorrelatorTable::new(stats.alice, stats.bob[..n].to_vec(), stats.corr)
}

#[doc(hidden)]
pub fn reconstruct_correlators_seq(model: &CorrModel) -> Vec<f64> {
    stats_of(model, false).corr
}

/// Frobenius distance between the model's two-body correlators and the
/// target's. Marginals are not part of the distance; for zero-marginal
/// targets they are checked separately by [`reconstruct`].
pub fn distance(model: &CorrModel, target: &CorrelatorTable) -> Result<f64> {
    model.validate()?;
    let (m, n) = (model.m_x(), model.m_y());
    if m != target.m_x() || n != target.m_y() {
        return Err(Error::DimensionMismatch(format!(
            "model is {m} x {n}, target is {} x {}",
            target.m_x(),
            target.m_y()
        )));
    }
    let stats = stats_of(model, true);
    let sq: f64 = stats
        .corr
        .iter()
        .zip(&target.correlators)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq.sqrt())
}

/// Outcome of [`certify`].
#[derive(Debug, Clone, Copy)]
pub struct CertifyReport {
    pub certificate: VisibilityCertificate,
    pub threshold: f64,
    /// True when the certified visibility exceeds the nonlocality threshold:
    /// the model then covers a nonlocal Werner state.
    pub nonlocal_but_out: bool,
}

/// End-to-end certification of an LHV+Out model for the Werner state at
/// `v_model` over the given measurement sets.
///
/// Pipeline: reconstruct, distance to the closed-form Werner correlators,
/// `nu` rescaling, hemisphere radius of Alice's hull, sphere radius of
/// Bob's doubled hull, final visibility. Bob's set alone is doubled: Alice
/// communicates her outcome, so her directions cannot be replaced by
/// antipodes without altering the strategy.
pub fn certify(
    model: &CorrModel,
    alice: &MeasurementSet,
    bob: &MeasurementSet,
    v_model: f64,
    threshold: f64,
) -> Result<CertifyReport> {
    if model.m_x() != alice.len() || model.m_y() != bob.len() {
        return Err(Error::DimensionMismatch(format!(
            "model is {} x {}, measurement sets are {} and {}",
            model.m_x(),
            model.m_y(),
            alice.len(),
            bob.len()
        ))
        .at_stage("load"));
    }
    reconstruct(model).map_err(|e| e.at_stage("reconstruct"))?;
    let state = werner_state(v_model).map_err(|e| e.at_stage("target"))?;
    let target = state_behaviour(&state, alice, bob).map_err(|e| e.at_stage("target"))?;
    let epsilon = distance(model, &target).map_err(|e| e.at_stage("distance"))?;
    let _nu = nu_scaling(epsilon).map_err(|e| e.at_stage("nu"))?;
    let eta_a = hemisphere_radius(alice).map_err(|e| e.at_stage("eta_A"))?;
    let eta_b = sphere_radius(&double_set(bob)).map_err(|e| e.at_stage("eta_B"))?;
    let certificate =
        final_visibility(v_model, epsilon, eta_a, eta_b).map_err(|e| e.at_stage("final_visibility"))?;
    Ok(CertifyReport {
        certificate,
        threshold,
        nonlocal_but_out: certificate.v_final > threshold,
    })
}
