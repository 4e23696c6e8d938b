//! Deterministic strategies and weighted models over them.
//!
//! Strategies come in two shapes: outcome-index form (general scenarios) and
//! correlator form (dichotomic, outcomes in `{+1, -1}`), related by the
//! bijection `index 0 <-> +1`, `index 1 <-> -1`. A model is a convex mixture
//! of homogeneous strategies; the LHV+Out case keys Bob's response by the
//! outcome Alice communicated.

use std::fmt::Write as _;

use crate::behaviour::{Behaviour, Scenario};
use crate::error::{Error, Result};
use crate::polytope::PolytopeKind;
use crate::DEFAULT_TOL;

/// Weights below this are treated as exactly zero.
pub const WEIGHT_EPS: f64 = 1e-12;

/// A local deterministic strategy: outcome index per setting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LhvStrategy {
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

/// An outcome-communication strategy: Bob's outcome index depends on his
/// setting and on the outcome Alice announced (`b[alice_outcome][y]`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutStrategy {
    pub a: Vec<u8>,
    pub b: Vec<Vec<u8>>,
}

impl LhvStrategy {
    /// Deterministic 0/1 probability table of this strategy.
    pub fn behaviour(&self, s: Scenario) -> Behaviour {
        let mut table = vec![0.0; s.table_len()];
        for x in 0..s.m_x {
            for y in 0..s.m_y {
                table[s.index(x, y, self.a[x] as usize, self.b[y] as usize)] = 1.0;
            }
        }
        Behaviour::new(s, table).expect("deterministic table is valid")
    }
}

impl OutStrategy {
    pub fn behaviour(&self, s: Scenario) -> Behaviour {
        let mut table = vec![0.0; s.table_len()];
        for x in 0..s.m_x {
            let a = self.a[x] as usize;
            for y in 0..s.m_y {
                table[s.index(x, y, a, self.b[a][y] as usize)] = 1.0;
            }
        }
        Behaviour::new(s, table).expect("deterministic table is valid")
    }
}

/// Homogeneous strategy list of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategies {
    Lhv(Vec<LhvStrategy>),
    Out(Vec<OutStrategy>),
}

impl Strategies {
    pub fn len(&self) -> usize {
        match self {
            Strategies::Lhv(v) => v.len(),
            Strategies::Out(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> PolytopeKind {
        match self {
            Strategies::Lhv(_) => PolytopeKind::Lhv,
            Strategies::Out(_) => PolytopeKind::Out,
        }
    }
}

/// A weighted convex combination of deterministic strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub scenario: Scenario,
    pub weights: Vec<f64>,
    pub strategies: Strategies,
}

impl Model {
    pub fn new(scenario: Scenario, weights: Vec<f64>, strategies: Strategies) -> Result<Self> {
        let m = Model { scenario, weights, strategies };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.strategies.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} strategies",
                self.weights.len(),
                self.strategies.len()
            )));
        }
        let mut sum = 0.0;
        for &w in &self.weights {
            if !w.is_finite() || w < -WEIGHT_EPS {
                return Err(Error::InvalidInput(format!("negative model weight {w}")));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidInput(format!("model weights sum to {sum}, expected 1")));
        }
        let s = self.scenario;
        let check_a = |a: &[u8]| -> Result<()> {
            if a.len() != s.m_x || a.iter().any(|&v| v as usize >= s.n_a) {
                return Err(Error::InvalidInput("Alice assignment out of bounds".into()));
            }
            Ok(())
        };
        match &self.strategies {
            Strategies::Lhv(list) => {
                for st in list {
                    check_a(&st.a)?;
                    if st.b.len() != s.m_y || st.b.iter().any(|&v| v as usize >= s.n_b) {
                        return Err(Error::InvalidInput("Bob assignment out of bounds".into()));
                    }
                }
            }
            Strategies::Out(list) => {
                for st in list {
                    check_a(&st.a)?;
                    if st.b.len() != s.n_a
                        || st.b.iter().any(|row| row.len() != s.m_y)
                        || st.b.iter().flatten().any(|&v| v as usize >= s.n_b)
                    {
                        return Err(Error::InvalidInput("Bob response map out of bounds".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn kind(&self) -> PolytopeKind {
        self.strategies.kind()
    }

    /// The mixture behaviour `sum_lambda w_lambda D_lambda`.
    pub fn behaviour(&self) -> Behaviour {
        let s = self.scenario;
        let mut table = vec![0.0; s.table_len()];
        let add = |table: &mut Vec<f64>, w: f64, beh: Behaviour| {
            for (t, p) in table.iter_mut().zip(beh.table()) {
                *t += w * p;
            }
        };
        match &self.strategies {
            Strategies::Lhv(list) => {
                for (st, &w) in list.iter().zip(&self.weights) {
                    add(&mut table, w, st.behaviour(s));
                }
            }
            Strategies::Out(list) => {
                for (st, &w) in list.iter().zip(&self.weights) {
                    add(&mut table, w, st.behaviour(s));
                }
            }
        }
        for t in table.iter_mut() {
            *t = t.max(0.0);
        }
        Behaviour::new(s, table).expect("convex mixture of behaviours is a behaviour")
    }

    /// Drops strategies with weight below `threshold` and renormalizes.
    pub fn prune(&mut self, threshold: f64) {
        let keep: Vec<bool> = self.weights.iter().map(|&w| w > threshold).collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut weights = Vec::new();
        for (&w, &k) in self.weights.iter().zip(&keep) {
            if k {
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        self.weights = weights;
        self.strategies = match &self.strategies {
            Strategies::Lhv(list) => Strategies::Lhv(
                list.iter().zip(&keep).filter(|(_, &k)| k).map(|(s, _)| s.clone()).collect(),
            ),
            Strategies::Out(list) => Strategies::Out(
                list.iter().zip(&keep).filter(|(_, &k)| k).map(|(s, _)| s.clone()).collect(),
            ),
        };
    }
}

// ---------------------------------------------------------------------------
// Correlator form (dichotomic).
// ---------------------------------------------------------------------------

/// A dichotomic outcome-communication strategy in correlator form:
/// `a[x]`, `b_plus[y]`, `b_minus[y]` all in `{+1, -1}`, where `b_plus` is
/// Bob's response to a communicated `+1` and `b_minus` to `-1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorrStrategy {
    pub a: Vec<i8>,
    pub b_plus: Vec<i8>,
    pub b_minus: Vec<i8>,
}

impl CorrStrategy {
    /// Correlator-matrix entry `a_x * b_{y, a_x}`.
    #[inline]
    pub fn matrix_entry(&self, x: usize, y: usize) -> f64 {
        if self.a[x] > 0 {
            f64::from(self.b_plus[y])
        } else {
            -f64::from(self.b_minus[y])
        }
    }
}

/// A weighted mixture of correlator-form LHV+Out strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrModel {
    pub weights: Vec<f64>,
    pub strategies: Vec<CorrStrategy>,
}

impl CorrModel {
    pub fn new(weights: Vec<f64>, strategies: Vec<CorrStrategy>) -> Result<Self> {
        let m = CorrModel { weights, strategies };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.strategies.len() || self.strategies.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} strategies",
                self.weights.len(),
                self.strategies.len()
            )));
        }
        let mut sum = 0.0;
        for &w in &self.weights {
            if !w.is_finite() || w < -WEIGHT_EPS {
                return Err(Error::InvalidInput(format!("negative model weight {w}")));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidInput(format!("model weights sum to {sum}, expected 1")));
        }
        let (m_x, m_y) = (self.m_x(), self.m_y());
        for st in &self.strategies {
            if st.a.len() != m_x || st.b_plus.len() != m_y || st.b_minus.len() != m_y {
                return Err(Error::DimensionMismatch("ragged strategy list".into()));
            }
            if st
                .a
                .iter()
                .chain(&st.b_plus)
                .chain(&st.b_minus)
                .any(|&v| v != 1 && v != -1)
            {
                return Err(Error::InvalidInput("invalid element in a strategy: expected +1/-1".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn m_x(&self) -> usize {
        self.strategies.first().map_or(0, |s| s.a.len())
    }

    pub fn m_y(&self) -> usize {
        self.strategies.first().map_or(0, |s| s.b_plus.len())
    }

    /// Rewrites the model in outcome-index form (`+1 -> 0`, `-1 -> 1`).
    pub fn to_index_model(&self) -> Result<Model> {
        let scenario = Scenario::new(self.m_x(), self.m_y(), 2, 2)?;
        let to_idx = |v: i8| -> u8 { u8::from(v < 0) };
        let strategies = self
            .strategies
            .iter()
            .map(|st| OutStrategy {
                a: st.a.iter().map(|&v| to_idx(v)).collect(),
                b: vec![
                    st.b_plus.iter().map(|&v| to_idx(v)).collect(),
                    st.b_minus.iter().map(|&v| to_idx(v)).collect(),
                ],
            })
            .collect();
        Model::new(scenario, self.weights.clone(), Strategies::Out(strategies))
    }

    /// Converts a dichotomic outcome-index LHV+Out model to correlator form.
    pub fn from_index_model(model: &Model) -> Result<CorrModel> {
        let s = model.scenario;
        if s.n_a != 2 || s.n_b != 2 {
            return Err(Error::NotDichotomic("correlator form needs a dichotomic scenario".into()));
        }
        let Strategies::Out(list) = &model.strategies else {
            return Err(Error::InvalidInput("expected an LHV+Out model".into()));
        };
        let to_sign = |v: u8| -> i8 { if v == 0 { 1 } else { -1 } };
        let strategies = list
            .iter()
            .map(|st| CorrStrategy {
                a: st.a.iter().map(|&v| to_sign(v)).collect(),
                b_plus: st.b[0].iter().map(|&v| to_sign(v)).collect(),
                b_minus: st.b[1].iter().map(|&v| to_sign(v)).collect(),
            })
            .collect();
        CorrModel::new(model.weights.clone(), strategies)
    }

    /// Drops strategies with weight below `threshold` and renormalizes.
    pub fn prune(&mut self, threshold: f64) {
        let keep: Vec<bool> = self.weights.iter().map(|&w| w > threshold).collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut weights = Vec::new();
        let mut strategies = Vec::new();
        for ((&w, st), &k) in self.weights.iter().zip(&self.strategies).zip(&keep) {
            if k {
                weights.push(w);
                strategies.push(st.clone());
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        self.weights = weights;
        self.strategies = strategies;
    }
}

// ---------------------------------------------------------------------------
// Text format.
//
//   line 1: "LHVOUT-MODEL 1" or "LHV-MODEL 1"
//   line 2: "mx <m_x> my <m_y> L <count>"
//   line 3 (index form only): "na <n_a> nb <n_b>"
//   sections: "WEIGHTS" (L decimals); correlator form: "A" (+1/-1),
//   "BPLUS"/"BMINUS" (LHV+Out) or "B" (LHV); index form: "A-IDX" and
//   "B-IDX" (outcome indices; LHV+Out lines hold n_a blocks of m_y entries).
// ---------------------------------------------------------------------------

/// A parsed model file.
#[derive(Debug, Clone)]
pub enum ModelDocument {
    /// LHV model in outcome-index form.
    Lhv(Model),
    /// LHV+Out model in outcome-index form.
    Out(Model),
    /// Dichotomic LHV+Out model in correlator form.
    OutCorr(CorrModel),
}

impl ModelDocument {
    /// The model as a correlator-form LHV+Out model, converting if needed.
    pub fn into_out_corr(self) -> Result<CorrModel> {
        match self {
            ModelDocument::OutCorr(m) => Ok(m),
            ModelDocument::Out(m) => CorrModel::from_index_model(&m),
            ModelDocument::Lhv(_) => {
                Err(Error::InvalidInput("expected an LHV+Out model, found an LHV model".into()))
            }
        }
    }

    /// The model in outcome-index form, converting if needed.
    pub fn into_model(self) -> Result<Model> {
        match self {
            ModelDocument::Lhv(m) | ModelDocument::Out(m) => Ok(m),
            ModelDocument::OutCorr(c) => c.to_index_model(),
        }
    }
}

/// Serializes a correlator-form LHV+Out model.
pub fn write_corr_model(m: &CorrModel) -> String {
    let mut out = String::new();
    out.push_str("LHVOUT-MODEL 1\n");
    let _ = writeln!(out, "mx {} my {} L {}", m.m_x(), m.m_y(), m.len());
    out.push_str("WEIGHTS\n");
    for w in &m.weights {
        let _ = writeln!(out, "{w:.17e}");
    }
    for (name, pick) in [
        ("A", 0usize),
        ("BPLUS", 1),
        ("BMINUS", 2),
    ] {
        let _ = writeln!(out, "{name}");
        for st in &m.strategies {
            let row: &[i8] = match pick {
                0 => &st.a,
                1 => &st.b_plus,
                _ => &st.b_minus,
            };
            let items: Vec<String> = row.iter().map(|v| format!("{v:+}")).collect();
            let _ = writeln!(out, "{}", items.join(" "));
        }
    }
    out
}

/// Serializes an outcome-index model (LHV or LHV+Out). Dichotomic LHV
/// models are written in the +1/-1 "A"/"B" sections; everything else in the
/// explicit index sections.
pub fn write_model(m: &Model) -> String {
    let s = m.scenario;
    let mut out = String::new();
    match &m.strategies {
        Strategies::Lhv(list) => {
            out.push_str("LHV-MODEL 1\n");
            let _ = writeln!(out, "mx {} my {} L {}", s.m_x, s.m_y, m.len());
            if s.is_dichotomic() {
                out.push_str("WEIGHTS\n");
                for w in &m.weights {
                    let _ = writeln!(out, "{w:.17e}");
                }
                let sign = |v: u8| if v == 0 { "+1" } else { "-1" };
                out.push_str("A\n");
                for st in list {
                    let items: Vec<&str> = st.a.iter().map(|&v| sign(v)).collect();
                    let _ = writeln!(out, "{}", items.join(" "));
                }
                out.push_str("B\n");
                for st in list {
                    let items: Vec<&str> = st.b.iter().map(|&v| sign(v)).collect();
                    let _ = writeln!(out, "{}", items.join(" "));
                }
            } else {
                let _ = writeln!(out, "na {} nb {}", s.n_a, s.n_b);
                out.push_str("WEIGHTS\n");
                for w in &m.weights {
                    let _ = writeln!(out, "{w:.17e}");
                }
                out.push_str("A-IDX\n");
                for st in list {
                    let items: Vec<String> = st.a.iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(out, "{}", items.join(" "));
                }
                out.push_str("B-IDX\n");
                for st in list {
                    let items: Vec<String> = st.b.iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(out, "{}", items.join(" "));
                }
            }
        }
        Strategies::Out(list) => {
            if s.is_dichotomic() {
                let corr = CorrModel::from_index_model(m).expect("dichotomic LHV+Out model");
                return write_corr_model(&corr);
            }
            out.push_str("LHVOUT-MODEL 1\n");
            let _ = writeln!(out, "mx {} my {} L {}", s.m_x, s.m_y, m.len());
            let _ = writeln!(out, "na {} nb {}", s.n_a, s.n_b);
            out.push_str("WEIGHTS\n");
            for w in &m.weights {
                let _ = writeln!(out, "{w:.17e}");
            }
            out.push_str("A-IDX\n");
            for st in list {
                let items: Vec<String> = st.a.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", items.join(" "));
            }
            out.push_str("B-IDX\n");
            for st in list {
                let items: Vec<String> =
                    st.b.iter().flatten().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", items.join(" "));
            }
        }
    }
    out
}

/// Parses a model file in any of the documented layouts.
pub fn read_model(text: &str) -> Result<ModelDocument> {
    let lines: Vec<(usize, String)> = crate::behaviour::content_lines(text).collect();
    let mut pos = 0;
    let take = |pos: &mut usize| -> Option<&(usize, String)> {
        let item = lines.get(*pos);
        *pos += 1;
        item
    };

    let (ln, header) = take(&mut pos)
        .ok_or(Error::Parse { line: 0, msg: "empty model file".into() })?
        .clone();
    let is_out = match header.as_str() {
        "LHVOUT-MODEL 1" => true,
        "LHV-MODEL 1" => false,
        other => {
            return Err(Error::Parse { line: ln, msg: format!("unknown model header '{other}'") })
        }
    };

    let (ln, dims) = take(&mut pos)
        .ok_or(Error::Parse { line: ln, msg: "missing dimension line".into() })?
        .clone();
    let toks: Vec<&str> = dims.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "mx" || toks[2] != "my" || toks[4] != "L" {
        return Err(Error::Parse { line: ln, msg: format!("expected 'mx <> my <> L <>', got '{dims}'") });
    }
    let parse_usize = |tok: &str, ln: usize| -> Result<usize> {
        tok.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad count '{tok}'") })
    };
    let m_x = parse_usize(toks[1], ln)?;
    let m_y = parse_usize(toks[3], ln)?;
    let count = parse_usize(toks[5], ln)?;

    // Optional outcome-count line switches to the index layout.
    let mut outcomes: Option<(usize, usize)> = None;
    if let Some((ln2, line)) = lines.get(pos) {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() == 4 && t[0] == "na" && t[2] == "nb" {
            outcomes = Some((parse_usize(t[1], *ln2)?, parse_usize(t[3], *ln2)?));
            pos += 1;
        }
    }

    // Section reader: a title line, then `count` rows of numbers.
    let mut sections: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    while let Some((ln, title)) = lines.get(pos) {
        let title = title.clone();
        if title.split_whitespace().count() != 1 {
            return Err(Error::Parse { line: *ln, msg: format!("expected a section title, got '{title}'") });
        }
        pos += 1;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut pending: Vec<f64> = Vec::new();
        // WEIGHTS may spread entries across lines; strategy sections are
        // one row per strategy but we accept free-form whitespace too.
        while rows.len() < count {
            let Some((ln2, line)) = lines.get(pos) else {
                return Err(Error::Parse {
                    line: *ln,
                    msg: format!("section '{title}' ended early ({} of {count} rows)", rows.len()),
                });
            };
            if title == "WEIGHTS" {
                for tok in line.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| Error::Parse {
                        line: *ln2,
                        msg: format!("bad number '{tok}'"),
                    })?;
                    pending.push(v);
                }
                pos += 1;
                while pending.len() > rows.len() && rows.len() < count {
                    rows.push(vec![pending[rows.len()]]);
                }
            } else {
                let mut row = Vec::new();
                for tok in line.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| Error::Parse {
                        line: *ln2,
                        msg: format!("bad number '{tok}'"),
                    })?;
                    row.push(v);
                }
                rows.push(row);
                pos += 1;
            }
        }
        sections.push((title, rows));
    }

    let find = |name: &str| -> Option<&Vec<Vec<f64>>> {
        sections.iter().find(|(t, _)| t == name).map(|(_, r)| r)
    };
    let weights: Vec<f64> = find("WEIGHTS")
        .ok_or(Error::Parse { line: ln, msg: "missing WEIGHTS section".into() })?
        .iter()
        .map(|r| r[0])
        .collect();

    let sign_rows = |rows: &Vec<Vec<f64>>, width: usize, what: &str| -> Result<Vec<Vec<i8>>> {
        rows.iter()
            .map(|r| {
                if r.len() != width {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("{what} row has {} entries, expected {width}", r.len()),
                    });
                }
                r.iter()
                    .map(|&v| {
                        if v == 1.0 {
                            Ok(1i8)
                        } else if v == -1.0 {
                            Ok(-1i8)
                        } else {
                            Err(Error::Parse { line: ln, msg: format!("{what} entry {v} is not +1/-1") })
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let idx_rows = |rows: &Vec<Vec<f64>>, width: usize, bound: usize, what: &str| -> Result<Vec<Vec<u8>>> {
        rows.iter()
            .map(|r| {
                if r.len() != width {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("{what} row has {} entries, expected {width}", r.len()),
                    });
                }
                r.iter()
                    .map(|&v| {
                        let i = v as usize;
                        if v.fract() != 0.0 || v < 0.0 || i >= bound {
                            Err(Error::Parse { line: ln, msg: format!("{what} index {v} out of range") })
                        } else {
                            Ok(i as u8)
                        }
                    })
                    .collect()
            })
            .collect()
    };

    if let Some((n_a, n_b)) = outcomes {
        let scenario = Scenario::new(m_x, m_y, n_a, n_b)?;
        let a = idx_rows(
            find("A-IDX").ok_or(Error::Parse { line: ln, msg: "missing A-IDX section".into() })?,
            m_x,
            n_a,
            "A-IDX",
        )?;
        let b_rows = find("B-IDX").ok_or(Error::Parse { line: ln, msg: "missing B-IDX section".into() })?;
        if is_out {
            let b = idx_rows(b_rows, n_a * m_y, n_b, "B-IDX")?;
            let strategies = a
                .into_iter()
                .zip(b)
                .map(|(a, flat)| OutStrategy {
                    a,
                    b: flat.chunks(m_y).map(|c| c.to_vec()).collect(),
                })
                .collect();
            Ok(ModelDocument::Out(Model::new(scenario, weights, Strategies::Out(strategies))?))
        } else {
            let b = idx_rows(b_rows, m_y, n_b, "B-IDX")?;
            let strategies = a
                .into_iter()
                .zip(b)
                .map(|(a, b)| LhvStrategy { a, b })
                .collect();
            Ok(ModelDocument::Lhv(Model::new(scenario, weights, Strategies::Lhv(strategies))?))
        }
    } else if is_out {
        let a = sign_rows(
            find("A").ok_or(Error::Parse { line: ln, msg: "missing A section".into() })?,
            m_x,
            "A",
        )?;
        let bp = sign_rows(
            find("BPLUS").ok_or(Error::Parse { line: ln, msg: "missing BPLUS section".into() })?,
            m_y,
            "BPLUS",
        )?;
        let bm = sign_rows(
            find("BMINUS").ok_or(Error::Parse { line: ln, msg: "missing BMINUS section".into() })?,
            m_y,
            "BMINUS",
        )?;
        let strategies = a
            .into_iter()
            .zip(bp.into_iter().zip(bm))
            .map(|(a, (b_plus, b_minus))| CorrStrategy { a, b_plus, b_minus })
            .collect();
        Ok(ModelDocument::OutCorr(CorrModel::new(weights, strategies)?))
    } else {
        let scenario = Scenario::new(m_x, m_y, 2, 2)?;
        let to_idx = |v: i8| -> u8 { u8::from(v < 0) };
        let a = sign_rows(
            find("A").ok_or(Error::Parse { line: ln, msg: "missing A section".into() })?,
            m_x,
            "A",
        )?;
        let b = sign_rows(
            find("B").ok_or(Error::Parse { line: ln, msg: "missing B section".into() })?,
            m_y,
            "B",
        )?;
        let strategies = a
            .into_iter()
            .zip(b)
            .map(|(a, b)| LhvStrategy {
                a: a.into_iter().map(to_idx).collect(),
                b: b.into_iter().map(to_idx).collect(),
            })
            .collect();
        Ok(ModelDocument::Lhv(Model::new(scenario, weights, Strategies::Lhv(strategies))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_corr_model() -> CorrModel {
        CorrModel::new(
            vec![0.5, 0.5],
            vec![
                CorrStrategy { a: vec![1, -1], b_plus: vec![1, 1], b_minus: vec![-1, 1] },
                CorrStrategy { a: vec![-1, 1], b_plus: vec![1, -1], b_minus: vec![-1, -1] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn corr_model_round_trip_through_file() {
        let m = sample_corr_model();
        let text = write_corr_model(&m);
        match read_model(&text).unwrap() {
            ModelDocument::OutCorr(parsed) => assert_eq!(parsed, m),
            other => panic!("expected correlator model, got {other:?}"),
        }
    }

    #[test]
    fn corr_index_round_trip() {
        let m = sample_corr_model();
        let idx = m.to_index_model().unwrap();
        let back = CorrModel::from_index_model(&idx).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn index_model_round_trip_general_outcomes() {
        let scenario = Scenario::new(2, 2, 2, 3).unwrap();
        let st = OutStrategy { a: vec![0, 1], b: vec![vec![0, 2], vec![1, 1]] };
        let m = Model::new(scenario, vec![1.0], Strategies::Out(vec![st])).unwrap();
        let text = write_model(&m);
        match read_model(&text).unwrap() {
            ModelDocument::Out(parsed) => assert_eq!(parsed, m),
            other => panic!("expected index model, got {other:?}"),
        }
    }

    #[test]
    fn lhv_model_round_trip_dichotomic() {
        let scenario = Scenario::chsh();
        let st = LhvStrategy { a: vec![0, 1], b: vec![1, 0] };
        let m = Model::new(scenario, vec![1.0], Strategies::Lhv(vec![st])).unwrap();
        let text = write_model(&m);
        match read_model(&text).unwrap() {
            ModelDocument::Lhv(parsed) => assert_eq!(parsed, m),
            other => panic!("expected LHV model, got {other:?}"),
        }
    }

    #[test]
    fn weight_validation() {
        let st = CorrStrategy { a: vec![1], b_plus: vec![1], b_minus: vec![1] };
        assert!(CorrModel::new(vec![0.9], vec![st.clone()]).is_err());
        assert!(CorrModel::new(vec![-0.1, 1.1], vec![st.clone(), st]).is_err());
    }

    #[test]
    fn prune_renormalizes() {
        let mut m = sample_corr_model();
        m.weights = vec![1.0 - 1e-16, 1e-16];
        m.prune(1e-12);
        assert_eq!(m.len(), 1);
        assert!((m.weights[0] - 1.0).abs() < 1e-15);
    }
}
