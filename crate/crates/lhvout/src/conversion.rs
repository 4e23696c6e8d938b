//! Constructive LHV+Out-to-LHV conversion.
//!
//! For a nonsignalling behaviour with dichotomic Alice outcomes and an input
//! `x'` where Alice's marginal is deterministic, every LHV+Out model of it
//! is forced to answer the deterministic outcome at `x'` on every positive
//! weight strategy. Fixing Bob's response map to the branch of that outcome
//! then yields an LHV model reproducing the same behaviour.

use crate::behaviour::Behaviour;
use crate::error::{Error, Result};
use crate::model::{LhvStrategy, Model, Strategies, WEIGHT_EPS};

/// An Alice input whose marginal is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicInputWitness {
    pub x_prime: usize,
    /// Outcome index carrying all the mass (0 maps to +1, 1 to -1).
    pub outcome_index: u8,
}

impl DeterministicInputWitness {
    /// The witness outcome in sign convention.
    pub fn sign(&self) -> i8 {
        if self.outcome_index == 0 {
            1
        } else {
            -1
        }
    }
}

/// Finds the smallest Alice input with `max_a p_A(a|x) >= 1 - tol`, if any.
/// Marginals are averaged over Bob's settings.
pub fn find_deterministic_input(
    b: &Behaviour,
    tol: f64,
) -> Result<Option<DeterministicInputWitness>> {
    let s = b.scenario;
    if s.n_a != 2 {
        return Err(Error::NotDichotomic("the witness needs dichotomic Alice outcomes".into()));
    }
    for x in 0..s.m_x {
        for a in 0..2u8 {
            let mean: f64 = (0..s.m_y)
                .map(|y| b.alice_marginal(x, y, a as usize))
                .sum::<f64>()
                / s.m_y as f64;
            if mean >= 1.0 - tol {
                return Ok(Some(DeterministicInputWitness { x_prime: x, outcome_index: a }));
            }
        }
    }
    Ok(None)
}

/// Result of [`convert`]: the LHV model plus the max-norm deviation between
/// the input and output behaviours (zero up to round-off when the
/// preconditions hold).
#[derive(Debug, Clone)]
pub struct ConversionOutcome {
    pub model: Model,
    pub residual: f64,
}

/// Converts an LHV+Out model with a deterministic Alice input into an LHV
/// model for the same behaviour.
///
/// Weights and Alice assignments are untouched; Bob's map becomes the branch
/// he would play on receiving the witness outcome. Errors when the model's
/// behaviour is signalling beyond `tol`, or when a strategy with weight
/// above `1e-12` disagrees with the witness at `x'` (either the behaviour is
/// signalling or the witness is false).
pub fn convert(
    model: &Model,
    witness: DeterministicInputWitness,
    tol: f64,
) -> Result<ConversionOutcome> {
    let s = model.scenario;
    let Strategies::Out(list) = &model.strategies else {
        return Err(Error::InvalidInput("convert expects an LHV+Out model".into()));
    };
    if s.n_a != 2 {
        return Err(Error::NotDichotomic("convert needs dichotomic Alice outcomes".into()));
    }
    if witness.x_prime >= s.m_x {
        return Err(Error::InvalidInput(format!(
            "witness input {} out of range (m_x = {})",
            witness.x_prime, s.m_x
        )));
    }
    let original = model.behaviour();
    let (ok, violation) = original.is_nonsignalling(tol);
    if !ok {
        return Err(Error::Signalling { violation, tol });
    }
    let marginal: f64 = (0..s.m_y)
        .map(|y| original.alice_marginal(witness.x_prime, y, witness.outcome_index as usize))
        .sum::<f64>()
        / s.m_y as f64;
    if marginal < 1.0 - tol {
        return Err(Error::InvalidInput(format!(
            "witness marginal p({}|x'={}) = {marginal} is not deterministic",
            witness.sign(),
            witness.x_prime
        )));
    }
    for (idx, (st, &w)) in list.iter().zip(&model.weights).enumerate() {
        if w > WEIGHT_EPS && st.a[witness.x_prime] != witness.outcome_index {
            return Err(Error::InvalidInput(format!(
                "strategy {idx} (weight {w:.3e}) answers {} at x' = {}, witness demands {}; \
                 the model is signalling or the witness is false",
                st.a[witness.x_prime], witness.x_prime, witness.outcome_index
            )));
        }
    }

    let branch = witness.outcome_index as usize;
    let strategies: Vec<LhvStrategy> = list
        .iter()
        .map(|st| LhvStrategy { a: st.a.clone(), b: st.b[branch].clone() })
        .collect();
    let converted = Model::new(s, model.weights.clone(), Strategies::Lhv(strategies))?;
    let residual = converted
        .behaviour()
        .table()
        .iter()
        .zip(original.table())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    Ok(ConversionOutcome { model: converted, residual })
}

/// Replaces Alice's input `x'` by a deterministic setting: the new block is
/// `p(a, b|x', y) = delta(a, outcome) * p_B(b|y)` with Bob's marginal
/// averaged over Alice's other settings. Models the trivial measurement that
/// always answers `outcome` while leaving Bob's statistics untouched.
pub fn force_deterministic_input(b: &Behaviour, x_prime: usize, outcome: u8) -> Result<Behaviour> {
    let s = b.scenario;
    if x_prime >= s.m_x || (outcome as usize) >= s.n_a {
        return Err(Error::InvalidInput("forced setting out of range".into()));
    }
    let mut table = b.table().to_vec();
    for y in 0..s.m_y {
        let mut bob = vec![0.0; s.n_b];
        for (bb, slot) in bob.iter_mut().enumerate() {
            *slot = (0..s.m_x).map(|x| b.bob_marginal(x, y, bb)).sum::<f64>() / s.m_x as f64;
        }
        for a in 0..s.n_a {
            for bb in 0..s.n_b {
                let v = if a == outcome as usize { bob[bb] } else { 0.0 };
                table[s.index(x_prime, y, a, bb)] = v;
            }
        }
    }
    Behaviour::new(s, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour::{random_nonsignalling, Scenario};
    use crate::polytope::{membership, MembershipResult, PolytopeKind};
    use crate::quantum::{pr_box, state_behaviour, werner_state, MeasurementSet};
    use crate::DEFAULT_TOL;

    #[test]
    fn pr_box_has_no_witness() {
        assert_eq!(find_deterministic_input(&pr_box(), DEFAULT_TOL).unwrap(), None);
    }

    #[test]
    fn deterministic_product_witness_at_zero() {
        let s = Scenario::chsh();
        let mut table = vec![0.0; s.table_len()];
        for x in 0..2 {
            for y in 0..2 {
                table[s.index(x, y, 1, 0)] = 1.0;
            }
        }
        let b = Behaviour::new(s, table).unwrap();
        let w = find_deterministic_input(&b, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(w.x_prime, 0);
        assert_eq!(w.outcome_index, 1);
        assert_eq!(w.sign(), -1);
    }

    #[test]
    fn forced_setting_yields_witness() {
        let b = random_nonsignalling(Scenario::new(3, 2, 2, 2).unwrap(), 9, false).unwrap();
        let forced = force_deterministic_input(&b, 1, 0).unwrap();
        assert!(forced.is_nonsignalling(DEFAULT_TOL).0);
        let w = find_deterministic_input(&forced, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(w.x_prime, 1);
        assert_eq!(w.outcome_index, 0);
    }

    #[test]
    fn convert_out_model_of_forced_behaviour() {
        for seed in 0..20 {
            let s = Scenario::new(2, 2, 2, 2).unwrap();
            let b = random_nonsignalling(s, seed, false).unwrap();
            let forced = force_deterministic_input(&b, 0, 0).unwrap();
            // CHSH scenario: every nonsignalling behaviour is LHV+Out.
            let MembershipResult::Member(out_model) =
                membership(&forced, PolytopeKind::Out, DEFAULT_TOL).unwrap()
            else {
                panic!("nonsignalling CHSH behaviour must be LHV+Out");
            };
            let witness = find_deterministic_input(&forced, DEFAULT_TOL).unwrap().unwrap();
            let outcome = convert(&out_model, witness, 1e-7).unwrap();
            assert!(outcome.residual <= 1e-9, "residual {} too large", outcome.residual);
            assert_eq!(outcome.model.kind(), PolytopeKind::Lhv);
            assert_eq!(outcome.model.weights, out_model.weights);
            let lhv = membership(&outcome.model.behaviour(), PolytopeKind::Lhv, 1e-7).unwrap();
            assert!(lhv.is_member());
        }
    }

    #[test]
    fn convert_rejects_pr_box_models() {
        let MembershipResult::Member(model) =
            membership(&pr_box(), PolytopeKind::Out, DEFAULT_TOL).unwrap()
        else {
            panic!("PR box is LHV+Out");
        };
        assert_eq!(find_deterministic_input(&pr_box(), DEFAULT_TOL).unwrap(), None);
        // A made-up witness must be rejected by the forcing check.
        let fake = DeterministicInputWitness { x_prime: 0, outcome_index: 0 };
        assert!(convert(&model, fake, DEFAULT_TOL).is_err());
    }

    #[test]
    fn out_model_ignoring_alice_outcome_is_already_lhv() {
        use crate::model::{OutStrategy, Strategies};
        let s = Scenario::chsh();
        let st = OutStrategy { a: vec![0, 0], b: vec![vec![0, 1], vec![0, 1]] };
        let model = Model::new(s, vec![1.0], Strategies::Out(vec![st])).unwrap();
        let witness = DeterministicInputWitness { x_prime: 0, outcome_index: 0 };
        let outcome = convert(&model, witness, DEFAULT_TOL).unwrap();
        assert_eq!(outcome.residual, 0.0);
    }

    /// Werner behaviour on CHSH angles with an adjoined deterministic Alice
    /// setting: LHV+Out membership must track LHV membership exactly.
    #[test]
    fn sentinel_setting_equates_out_and_lhv() {
        let s2 = std::f64::consts::SQRT_2;
        let alice = MeasurementSet::new(vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let bob = MeasurementSet::new(vec![
            [-1.0 / s2, 0.0, -1.0 / s2],
            [-1.0 / s2, 0.0, 1.0 / s2],
        ])
        .unwrap();
        let extend = |v: f64| -> Behaviour {
            let table = state_behaviour(&werner_state(v).unwrap(), &alice, &bob).unwrap();
            let base = table.to_behaviour().unwrap();
            let s = Scenario::new(3, 2, 2, 2).unwrap();
            let mut t = vec![0.25; s.table_len()];
            for x in 0..2 {
                for y in 0..2 {
                    for a in 0..2 {
                        for b_idx in 0..2 {
                            t[s.index(x, y, a, b_idx)] = base.get(x, y, a, b_idx);
                        }
                    }
                }
            }
            let stub = Behaviour::new(s, t).unwrap();
            force_deterministic_input(&stub, 2, 0).unwrap()
        };

        // Below the CHSH threshold: LHV, hence LHV+Out.
        let local = extend(0.5);
        assert!(membership(&local, PolytopeKind::Lhv, DEFAULT_TOL).unwrap().is_member());
        assert!(membership(&local, PolytopeKind::Out, DEFAULT_TOL).unwrap().is_member());

        // Above it: not LHV, and with the deterministic setting present the
        // behaviour cannot be LHV+Out either.
        let nonlocal = extend(0.9);
        assert!(!membership(&nonlocal, PolytopeKind::Lhv, DEFAULT_TOL).unwrap().is_member());
        assert!(!membership(&nonlocal, PolytopeKind::Out, DEFAULT_TOL).unwrap().is_member());
    }
}
