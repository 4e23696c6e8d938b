//! Empirical testing of the antipodal-symmetry question: does every
//! nonsignalling behaviour satisfying `p(ab|xy) = p(-a, b|x + m_x, y)` that
//! admits an LHV+Out model also admit an LHV model?
//!
//! This module gathers evidence, it proves nothing: sampled sweeps and
//! exhaustive vertex scans either report zero counterexamples or persist a
//! re-verifiable bundle (behaviour, LHV+Out decomposition, separating LHV
//! inequality) and fail loudly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::behaviour::{
    check_antipodal, random_nonsignalling, read_behaviour, write_behaviour, Behaviour, Scenario,
};
use crate::bounds::{local_bound, out_bound, symmetrize, BellCoefficients};
use crate::error::{Error, Result};
use crate::exec;
use crate::model::{read_model, write_model};
use crate::polytope::{membership, MembershipResult, NonMemberCertificate, PolytopeKind};

/// Outcome of testing one behaviour.
#[derive(Debug, Clone)]
pub struct ImplicationReport {
    pub out_member: bool,
    pub lhv_member: bool,
    /// LHV+Out member that is not LHV: a counterexample to the conjecture.
    pub counterexample: bool,
    /// Files written when a counterexample was persisted.
    pub artifacts: Vec<PathBuf>,
}

/// Runs both membership tests on an antipodally symmetric nonsignalling
/// behaviour. On a counterexample, and given a path prefix, persists the
/// behaviour, the LHV+Out model and the separating LHV inequality, then
/// re-verifies the whole bundle from disk.
pub fn check_implication(
    b: &Behaviour,
    tol: f64,
    artifact_prefix: Option<&Path>,
) -> Result<ImplicationReport> {
    if !check_antipodal(b)? {
        return Err(Error::InvalidInput("behaviour is not antipodally symmetric".into()));
    }
    let (ns, violation) = b.is_nonsignalling(tol);
    if !ns {
        return Err(Error::Signalling { violation, tol });
    }
    let out = membership(b, PolytopeKind::Out, tol)?;
    let lhv = membership(b, PolytopeKind::Lhv, tol)?;
    let counterexample = out.is_member() && !lhv.is_member();
    let mut artifacts = Vec::new();
    if counterexample {
        if let Some(prefix) = artifact_prefix {
            let MembershipResult::Member(out_model) = &out else { unreachable!() };
            let MembershipResult::NonMember(cert) = &lhv else { unreachable!() };
            artifacts = persist_counterexample(prefix, b, out_model, cert)?;
            reverify_bundle(prefix, tol)?;
        }
    }
    Ok(ImplicationReport {
        out_member: out.is_member(),
        lhv_member: lhv.is_member(),
        counterexample,
        artifacts,
    })
}

fn persist_counterexample(
    prefix: &Path,
    b: &Behaviour,
    out_model: &crate::model::Model,
    cert: &NonMemberCertificate,
) -> Result<Vec<PathBuf>> {
    if let Some(dir) = prefix.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let with_ext = |ext: &str| -> PathBuf {
        let mut os = prefix.as_os_str().to_owned();
        os.push(ext);
        PathBuf::from(os)
    };
    let beh = with_ext(".behaviour");
    let model = with_ext(".out-model");
    let ineq = with_ext(".lhv-inequality");
    fs::write(&beh, write_behaviour(b))?;
    fs::write(&model, write_model(out_model))?;
    fs::write(&ineq, write_inequality(b.scenario, cert))?;
    Ok(vec![beh, model, ineq])
}

/// Re-checks a persisted counterexample bundle from disk: the stored model
/// must reproduce the behaviour and the stored inequality must separate it
/// from the LHV polytope.
pub fn reverify_bundle(prefix: &Path, tol: f64) -> Result<()> {
    let with_ext = |ext: &str| -> PathBuf {
        let mut os = prefix.as_os_str().to_owned();
        os.push(ext);
        PathBuf::from(os)
    };
    let b = read_behaviour(&fs::read_to_string(with_ext(".behaviour"))?)?;
    let model = read_model(&fs::read_to_string(with_ext(".out-model"))?)?.into_model()?;
    let reproduced = model.behaviour();
    let err = reproduced
        .table()
        .iter()
        .zip(b.table())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    if err > tol.max(1e-9) * 10.0 {
        return Err(Error::InvalidInput(format!(
            "persisted model misses the behaviour by {err:.3e}"
        )));
    }
    let (scenario, cert) = read_inequality(&fs::read_to_string(with_ext(".lhv-inequality"))?)?;
    if scenario != b.scenario {
        return Err(Error::DimensionMismatch("bundle scenario mismatch".into()));
    }
    let value: f64 = cert.inequality.iter().zip(b.table()).map(|(g, p)| g * p).sum();
    let (bound, _) = crate::polytope::best_strategy(scenario, PolytopeKind::Lhv, &cert.inequality);
    if value <= bound {
        return Err(Error::InvalidInput(format!(
            "persisted inequality does not separate: value {value:.6e} <= bound {bound:.6e}"
        )));
    }
    Ok(())
}

/// Summary of a randomized sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub tested: usize,
    pub out_members: usize,
    pub counterexamples: usize,
}

/// Samples `samples` antipodal nonsignalling behaviours (deterministically
/// in `seed`) and tests the implication on each. Samples run in parallel;
/// per-sample seeds derive from `(seed, index)` and the summary is pure
/// counting, so the result is thread-count independent.
pub fn sweep(
    s: Scenario,
    samples: usize,
    seed: u64,
    tol: f64,
    artifact_dir: Option<&Path>,
) -> Result<SweepSummary> {
    let results: Vec<Result<(bool, bool)>> = exec::map_collect(samples, |i| {
        let sample_seed = seed ^ (i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
        let b = random_nonsignalling(s, sample_seed, true)?;
        let report = check_implication(&b, tol, None)?;
        Ok((report.out_member, report.counterexample))
    });
    let mut summary = SweepSummary { tested: 0, out_members: 0, counterexamples: 0 };
    for (i, r) in results.into_iter().enumerate() {
        let (out_member, counterexample) = r?;
        summary.tested += 1;
        summary.out_members += usize::from(out_member);
        if counterexample {
            summary.counterexamples += 1;
            // Persist with full artifacts, re-deriving the same sample.
            if let Some(dir) = artifact_dir {
                let sample_seed = seed ^ (i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
                let b = random_nonsignalling(s, sample_seed, true)?;
                let prefix = dir.join(format!("counterexample-{i:06}"));
                check_implication(&b, tol, Some(&prefix))?;
            }
        }
    }
    Ok(summary)
}

/// Bound-level form of the dichotomic uniform-marginal case: for the stacked
/// matrix `M' = (M; -M)` the LHV and LHV+Out bounds coincide.
pub fn dichotomic_uniform_check(m: &BellCoefficients) -> Result<bool> {
    let sym = symmetrize(m);
    let out = out_bound(&sym)?;
    let local = local_bound(&sym)?;
    Ok((out - local).abs() <= 1e-9 * out.abs().max(1.0))
}

/// Summary of an exhaustive vertex scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexScanSummary {
    pub vertices: usize,
    pub nonsignalling: usize,
    pub lhv_members: usize,
}

/// Enumerates every LHV+Out vertex of the scenario and LP-tests each vertex
/// behaviour for LHV membership. Vertices are typically signalling; the scan
/// reports how many are nonsignalling and how many are LHV.
pub fn exhaustive_vertex_scan(s: Scenario, tol: f64) -> Result<VertexScanSummary> {
    let vertices = match crate::polytope::enumerate_vertices(s, PolytopeKind::Out)? {
        crate::model::Strategies::Out(list) => list,
        _ => unreachable!(),
    };
    let results: Vec<Result<(bool, bool)>> = exec::map_collect(vertices.len(), |i| {
        let beh = vertices[i].behaviour(s);
        let ns = beh.is_nonsignalling(tol).0;
        let lhv = membership(&beh, PolytopeKind::Lhv, tol)?.is_member();
        Ok((ns, lhv))
    });
    let mut summary =
        VertexScanSummary { vertices: vertices.len(), nonsignalling: 0, lhv_members: 0 };
    for r in results {
        let (ns, lhv) = r?;
        summary.nonsignalling += usize::from(ns);
        summary.lhv_members += usize::from(lhv);
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Inequality file: "INEQ 1", scenario line, BOUND/VALUE lines, then the
// coefficients in (x, y, a, b) settings-major order.
// ---------------------------------------------------------------------------

pub fn write_inequality(s: Scenario, cert: &NonMemberCertificate) -> String {
    let mut out = String::new();
    out.push_str("INEQ 1\n");
    let _ = writeln!(out, "mx {} my {} na {} nb {}", s.m_x, s.m_y, s.n_a, s.n_b);
    let _ = writeln!(out, "BOUND {:.17e}", cert.polytope_bound);
    let _ = writeln!(out, "VALUE {:.17e}", cert.behaviour_value);
    for chunk in cert.inequality.chunks(s.n_a * s.n_b) {
        let row: Vec<String> = chunk.iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn read_inequality(text: &str) -> Result<(Scenario, NonMemberCertificate)> {
    let mut lines = crate::behaviour::content_lines(text);
    let (ln, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
    if header != "INEQ 1" {
        return Err(Error::Parse { line: ln, msg: format!("expected 'INEQ 1', got '{header}'") });
    }
    let (ln, dims) = lines.next().ok_or(Error::Parse { line: ln, msg: "missing scenario".into() })?;
    let toks: Vec<&str> = dims.split_whitespace().collect();
    if toks.len() != 8 {
        return Err(Error::Parse { line: ln, msg: "bad scenario line".into() });
    }
    let mut vals = [0usize; 4];
    for (i, v) in vals.iter_mut().enumerate() {
        *v = toks[2 * i + 1]
            .parse()
            .map_err(|_| Error::Parse { line: ln, msg: "bad scenario count".into() })?;
    }
    let scenario = Scenario::new(vals[0], vals[1], vals[2], vals[3])?;
    let mut bound = None;
    let mut value = None;
    let mut coeffs = Vec::new();
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first().copied() {
            Some("BOUND") => {
                bound = Some(toks[1].parse::<f64>().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "bad bound".into(),
                })?)
            }
            Some("VALUE") => {
                value = Some(toks[1].parse::<f64>().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "bad value".into(),
                })?)
            }
            _ => {
                for tok in toks {
                    coeffs.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                        line: ln,
                        msg: format!("bad coefficient '{tok}'"),
                    })?);
                }
            }
        }
    }
    if coeffs.len() != scenario.table_len() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {} coefficients, got {}", scenario.table_len(), coeffs.len()),
        });
    }
    Ok((
        scenario,
        NonMemberCertificate {
            inequality: coeffs,
            polytope_bound: bound.ok_or(Error::Parse { line: 0, msg: "missing BOUND".into() })?,
            behaviour_value: value.ok_or(Error::Parse { line: 0, msg: "missing VALUE".into() })?,
        },
    ))
}
