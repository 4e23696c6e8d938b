//! Bell scenarios, behaviours and correlator tables.
//!
//! A behaviour is the full table of conditional probabilities `p(ab|xy)` of
//! a bipartite scenario, stored settings-major in `(x, y, a, b)` order. For
//! dichotomic scenarios the equivalent correlator representation stores the
//! marginals `<a_x>`, `<b_y>` and two-body terms `<a_x b_y>`, with outcome
//! index 0 mapped to +1 and index 1 to -1.

use std::fmt::Write as _;
use std::ops::Range;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::DEFAULT_TOL;

/// Measurement and outcome counts of a bipartite Bell scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    /// Number of Alice settings.
    pub m_x: usize,
    /// Number of Bob settings.
    pub m_y: usize,
    /// Number of Alice outcomes.
    pub n_a: usize,
    /// Number of Bob outcomes.
    pub n_b: usize,
}

impl Scenario {
    pub fn new(m_x: usize, m_y: usize, n_a: usize, n_b: usize) -> Result<Self> {
        if m_x == 0 || m_y == 0 || n_a == 0 || n_b == 0 {
            return Err(Error::InvalidScenario(format!(
                "all counts must be >= 1, got ({m_x}, {m_y}, {n_a}, {n_b})"
            )));
        }
        Ok(Scenario { m_x, m_y, n_a, n_b })
    }

    /// The CHSH scenario: two dichotomic settings per party.
    pub fn chsh() -> Self {
        Scenario { m_x: 2, m_y: 2, n_a: 2, n_b: 2 }
    }

    /// Both parties dichotomic.
    pub fn is_dichotomic(&self) -> bool {
        self.n_a == 2 && self.n_b == 2
    }

    /// Number of table entries.
    pub fn table_len(&self) -> usize {
        self.m_x * self.m_y * self.n_a * self.n_b
    }

    /// Flat index of `(x, y, a, b)` in settings-major order.
    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.m_y + y) * self.n_a + a) * self.n_b + b
    }
}

/// Correlator value of an outcome index: 0 maps to +1, 1 maps to -1.
#[inline]
pub fn outcome_sign(index: usize) -> f64 {
    1.0 - 2.0 * index as f64
}

/// A full conditional-probability table `p(ab|xy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behaviour {
    pub scenario: Scenario,
    table: Vec<f64>,
}

impl Behaviour {
    /// Builds a behaviour from a settings-major table, validating
    /// nonnegativity and per-setting normalization.
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        if table.len() != scenario.table_len() {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.table_len()
            )));
        }
        let b = Behaviour { scenario, table };
        b.validate(DEFAULT_TOL)?;
        Ok(b)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        for (i, &p) in self.table.iter().enumerate() {
            if !p.is_finite() || p < -tol {
                return Err(Error::InvalidInput(format!(
                    "table entry {i} is {p}, expected a probability"
                )));
            }
        }
        let s = self.scenario;
        for x in 0..s.m_x {
            for y in 0..s.m_y {
                let sum: f64 = self.block(x, y).iter().sum();
                if (sum - 1.0).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "block (x={x}, y={y}) sums to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The uniform behaviour `p = 1/(n_a n_b)`.
    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / (scenario.n_a * scenario.n_b) as f64;
        Behaviour { scenario, table: vec![p; scenario.table_len()] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.table[self.scenario.index(x, y, a, b)]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn block_range(&self, x: usize, y: usize) -> Range<usize> {
        let start = self.scenario.index(x, y, 0, 0);
        start..start + self.scenario.n_a * self.scenario.n_b
    }

    /// The `n_a * n_b` slice of outcome probabilities for settings `(x, y)`.
    pub fn block(&self, x: usize, y: usize) -> &[f64] {
        &self.table[self.block_range(x, y)]
    }

    /// Alice's marginal `p(a|x)` as seen through Bob setting `y`.
    pub fn alice_marginal(&self, x: usize, y: usize, a: usize) -> f64 {
        (0..self.scenario.n_b).map(|b| self.get(x, y, a, b)).sum()
    }

    /// Bob's marginal `p(b|y)` as seen through Alice setting `x`.
    pub fn bob_marginal(&self, x: usize, y: usize, b: usize) -> f64 {
        (0..self.scenario.n_a).map(|a| self.get(x, y, a, b)).sum()
    }

    /// Checks the nonsignalling conditions and reports the largest deviation
    /// of either party's marginal across the other party's settings.
    pub fn is_nonsignalling(&self, tol: f64) -> (bool, f64) {
        let s = self.scenario;
        let mut worst: f64 = 0.0;
        for x in 0..s.m_x {
            for a in 0..s.n_a {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for y in 0..s.m_y {
                    let m = self.alice_marginal(x, y, a);
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
                worst = worst.max(hi - lo);
            }
        }
        for y in 0..s.m_y {
            for b in 0..s.n_b {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for x in 0..s.m_x {
                    let m = self.bob_marginal(x, y, b);
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
                worst = worst.max(hi - lo);
            }
        }
        (worst <= tol, worst)
    }

    /// Converts a dichotomic nonsignalling behaviour to correlator form.
    pub fn to_correlators(&self, tol: f64) -> Result<CorrelatorTable> {
        let s = self.scenario;
        if s.n_a != 2 || s.n_b != 2 {
            return Err(Error::NotDichotomic(format!(
                "to_correlators needs n_a = n_b = 2, got ({}, {})",
                s.n_a, s.n_b
            )));
        }
        let (ok, violation) = self.is_nonsignalling(tol);
        if !ok {
            return Err(Error::Signalling { violation, tol });
        }
        // Marginals averaged over the other party's settings; nonsignalling
        // makes the choice immaterial up to tol.
        let mut alice = vec![0.0; s.m_x];
        for (x, slot) in alice.iter_mut().enumerate() {
            let mut acc = 0.0;
            for y in 0..s.m_y {
                for a in 0..2 {
                    acc += outcome_sign(a) * self.get(x, y, a, 0);
                    acc += outcome_sign(a) * self.get(x, y, a, 1);
                }
            }
            *slot = acc / s.m_y as f64;
        }
        let mut bob = vec![0.0; s.m_y];
        for (y, slot) in bob.iter_mut().enumerate() {
            let mut acc = 0.0;
            for x in 0..s.m_x {
                for b in 0..2 {
                    acc += outcome_sign(b) * self.bob_marginal(x, y, b);
                }
            }
            *slot = acc / s.m_x as f64;
        }
        let mut corr = vec![0.0; s.m_x * s.m_y];
        for x in 0..s.m_x {
            for y in 0..s.m_y {
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += outcome_sign(a) * outcome_sign(b) * self.get(x, y, a, b);
                    }
                }
                corr[x * s.m_y + y] = acc;
            }
        }
        Ok(CorrelatorTable { alice_marginals: alice, bob_marginals: bob, correlators: corr, m_y: s.m_y })
    }
}

/// Marginal and two-body correlators of a dichotomic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTable {
    pub alice_marginals: Vec<f64>,
    pub bob_marginals: Vec<f64>,
    /// Row-major `m_x * m_y` matrix of `<a_x b_y>`.
    pub correlators: Vec<f64>,
    m_y: usize,
}

impl CorrelatorTable {
    pub fn new(alice_marginals: Vec<f64>, bob_marginals: Vec<f64>, correlators: Vec<f64>) -> Result<Self> {
        let (m_x, m_y) = (alice_marginals.len(), bob_marginals.len());
        if m_x == 0 || m_y == 0 || correlators.len() != m_x * m_y {
            return Err(Error::DimensionMismatch(format!(
                "correlator block is {} entries, expected {m_x} x {m_y}",
                correlators.len()
            )));
        }
        let t = CorrelatorTable { alice_marginals, bob_marginals, correlators, m_y };
        for v in t
            .alice_marginals
            .iter()
            .chain(&t.bob_marginals)
            .chain(&t.correlators)
        {
            if !v.is_finite() || v.abs() > 1.0 + DEFAULT_TOL {
                return Err(Error::InvalidInput(format!("correlator entry {v} outside [-1, 1]")));
            }
        }
        Ok(t)
    }

    /// Zero-marginal table from a correlator block alone.
    pub fn from_correlator_matrix(m_x: usize, m_y: usize, correlators: Vec<f64>) -> Result<Self> {
        CorrelatorTable::new(vec![0.0; m_x], vec![0.0; m_y], correlators)
    }

    pub fn m_x(&self) -> usize {
        self.alice_marginals.len()
    }

    pub fn m_y(&self) -> usize {
        self.m_y
    }

    #[inline]
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        self.correlators[x * self.m_y + y]
    }

    /// Smallest value of the probability expansion
    /// `1 + a<a_x> + b<b_y> + ab<a_x b_y>` over all sign choices.
    pub fn min_expansion(&self) -> f64 {
        let mut min = f64::INFINITY;
        for x in 0..self.m_x() {
            for y in 0..self.m_y {
                for a in [1.0, -1.0] {
                    for b in [1.0, -1.0] {
                        let v = 1.0
                            + a * self.alice_marginals[x]
                            + b * self.bob_marginals[y]
                            + a * b * self.correlator(x, y);
                        min = min.min(v);
                    }
                }
            }
        }
        min
    }

    /// Expands the table back into a probability behaviour via
    /// `p(ab|xy) = [1 + a<a_x> + b<b_y> + ab<a_x b_y>] / 4`.
    pub fn to_behaviour(&self) -> Result<Behaviour> {
        let min = self.min_expansion();
        if min < -4.0 * DEFAULT_TOL {
            return Err(Error::InvalidInput(format!(
                "correlator table is not a behaviour: expansion term {min:.3e} < 0"
            )));
        }
        let scenario = Scenario::new(self.m_x(), self.m_y, 2, 2)?;
        let mut table = vec![0.0; scenario.table_len()];
        for x in 0..scenario.m_x {
            for y in 0..scenario.m_y {
                for a in 0..2 {
                    for b in 0..2 {
                        let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                        let v = 0.25
                            * (1.0
                                + sa * self.alice_marginals[x]
                                + sb * self.bob_marginals[y]
                                + sa * sb * self.correlator(x, y));
                        table[scenario.index(x, y, a, b)] = v.max(0.0);
                    }
                }
            }
        }
        Behaviour::new(scenario, table)
    }

    /// Frobenius distance between the correlator blocks of two tables.
    pub fn correlator_distance(&self, other: &CorrelatorTable) -> Result<f64> {
        if self.m_x() != other.m_x() || self.m_y != other.m_y {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.m_x(),
                self.m_y,
                other.m_x(),
                other.m_y
            )));
        }
        let sq: f64 = self
            .correlators
            .iter()
            .zip(&other.correlators)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(sq.sqrt())
    }
}

/// Converts a dichotomic nonsignalling behaviour to correlators.
pub fn to_correlators(b: &Behaviour, tol: f64) -> Result<CorrelatorTable> {
    b.to_correlators(tol)
}

/// Expands a correlator table into a behaviour.
pub fn from_correlators(c: &CorrelatorTable) -> Result<Behaviour> {
    c.to_behaviour()
}

/// Tests the antipodal symmetry `p(ab|xy) = p(-a, b|x + m_x, y)` with
/// setting addition modulo `2 m_x`, where the scenario has `2 m_x` Alice
/// settings and dichotomic Alice outcomes.
pub fn check_antipodal(b: &Behaviour) -> Result<bool> {
    let s = b.scenario;
    if s.n_a != 2 {
        return Err(Error::NotDichotomic("check_antipodal needs n_a = 2".into()));
    }
    if !s.m_x.is_multiple_of(2) {
        return Err(Error::InvalidScenario(format!(
            "check_antipodal needs an even Alice setting count, got {}",
            s.m_x
        )));
    }
    let half = s.m_x / 2;
    for x in 0..s.m_x {
        let xp = (x + half) % s.m_x;
        for y in 0..s.m_y {
            for a in 0..2 {
                for bb in 0..s.n_b {
                    if (b.get(x, y, a, bb) - b.get(xp, y, 1 - a, bb)).abs() > DEFAULT_TOL {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Doubles Alice's settings, mirroring the table with flipped Alice
/// outcomes so the result satisfies [`check_antipodal`].
pub fn antipodal_extend(b: &Behaviour) -> Result<Behaviour> {
    let s = b.scenario;
    if s.n_a != 2 {
        return Err(Error::NotDichotomic("antipodal_extend needs n_a = 2".into()));
    }
    let ext = Scenario::new(2 * s.m_x, s.m_y, 2, s.n_b)?;
    let mut table = vec![0.0; ext.table_len()];
    for x in 0..ext.m_x {
        for y in 0..s.m_y {
            for a in 0..2 {
                for bb in 0..s.n_b {
                    let v = if x < s.m_x {
                        b.get(x, y, a, bb)
                    } else {
                        b.get(x - s.m_x, y, 1 - a, bb)
                    };
                    table[ext.index(x, y, a, bb)] = v;
                }
            }
        }
    }
    Behaviour::new(ext, table)
}

/// Samples a random nonsignalling behaviour, deterministically in `seed`.
///
/// A random point of the nonsignalling affine subspace (random marginals
/// plus a doubly-centered correlation block per setting pair) is mixed with
/// the uniform behaviour using the smallest coefficient restoring
/// nonnegativity, which biases samples toward the nonsignalling boundary.
/// With `antipodal` set, the scenario must have `2 m_x` Alice settings and
/// dichotomic Alice outcomes; the sample then satisfies [`check_antipodal`].
pub fn random_nonsignalling(s: Scenario, seed: u64, antipodal: bool) -> Result<Behaviour> {
    if antipodal {
        if s.n_a != 2 {
            return Err(Error::NotDichotomic("antipodal sampling needs n_a = 2".into()));
        }
        if !s.m_x.is_multiple_of(2) {
            return Err(Error::InvalidScenario(
                "antipodal sampling needs an even Alice setting count".into(),
            ));
        }
        let base = Scenario::new(s.m_x / 2, s.m_y, 2, s.n_b)?;
        return antipodal_extend(&random_nonsignalling(base, seed, false)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alice = vec![0.0; s.m_x * s.n_a];
    for x in 0..s.m_x {
        let row = &mut alice[x * s.n_a..(x + 1) * s.n_a];
        random_distribution(&mut rng, row);
    }
    let mut bob = vec![0.0; s.m_y * s.n_b];
    for y in 0..s.m_y {
        let row = &mut bob[y * s.n_b..(y + 1) * s.n_b];
        random_distribution(&mut rng, row);
    }

    let mut table = vec![0.0; s.table_len()];
    for x in 0..s.m_x {
        for y in 0..s.m_y {
            // Correlation block with vanishing marginals on both axes.
            let mut chi = vec![0.0; s.n_a * s.n_b];
            for v in chi.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            double_center(&mut chi, s.n_a, s.n_b);
            for a in 0..s.n_a {
                for bb in 0..s.n_b {
                    table[s.index(x, y, a, bb)] =
                        alice[x * s.n_a + a] * bob[y * s.n_b + bb] + chi[a * s.n_b + bb];
                }
            }
        }
    }

    // Smallest uniform admixture restoring nonnegativity.
    let u = 1.0 / (s.n_a * s.n_b) as f64;
    let mut t: f64 = 0.0;
    for &p in &table {
        if p < 0.0 {
            t = t.max(-p / (u - p));
        }
    }
    // Nudge past the boundary so validation tolerances hold exactly.
    let t = (t * (1.0 + 1e-12) + 1e-15).min(1.0);
    for p in table.iter_mut() {
        *p = (1.0 - t) * *p + t * u;
        *p = p.max(0.0);
    }
    Behaviour::new(s, table)
}

fn random_distribution<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = rng.gen_range(0.01..1.0);
        sum += *v;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
}

fn double_center(block: &mut [f64], n_a: usize, n_b: usize) {
    let total: f64 = block.iter().sum::<f64>() / (n_a * n_b) as f64;
    let mut row_mean = vec![0.0; n_a];
    let mut col_mean = vec![0.0; n_b];
    for a in 0..n_a {
        row_mean[a] = block[a * n_b..(a + 1) * n_b].iter().sum::<f64>() / n_b as f64;
    }
    for b in 0..n_b {
        col_mean[b] = (0..n_a).map(|a| block[a * n_b + b]).sum::<f64>() / n_a as f64;
    }
    for a in 0..n_a {
        for b in 0..n_b {
            block[a * n_b + b] += total - row_mean[a] - col_mean[b];
        }
    }
}

// ---------------------------------------------------------------------------
// Text format: "BEHAVIOUR 1" header, dimension line, settings-major entries.
// ---------------------------------------------------------------------------

/// Serializes a behaviour in the text format (`#` starts a comment).
pub fn write_behaviour(b: &Behaviour) -> String {
    let s = b.scenario;
    let mut out = String::new();
    out.push_str("BEHAVIOUR 1\n");
    let _ = writeln!(out, "mx {} my {} na {} nb {}", s.m_x, s.m_y, s.n_a, s.n_b);
    for x in 0..s.m_x {
        for y in 0..s.m_y {
            let row: Vec<String> = b.block(x, y).iter().map(|p| format!("{p:.17e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

/// Parses the behaviour text format.
pub fn read_behaviour(text: &str) -> Result<Behaviour> {
    let mut lines = content_lines(text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 0, msg: "empty file".into() })?;
    if header.trim() != "BEHAVIOUR 1" {
        return Err(Error::Parse { line: ln, msg: format!("expected 'BEHAVIOUR 1', got '{header}'") });
    }
    let (ln, dims) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: ln, msg: "missing dimension line".into() })?;
    let scenario = parse_dims(&dims, ln)?;
    let mut table = Vec::with_capacity(scenario.table_len());
    let mut last_line = ln;
    for (ln, line) in lines {
        last_line = ln;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse { line: ln, msg: format!("bad number '{tok}'") })?;
            table.push(v);
        }
    }
    if table.len() != scenario.table_len() {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("expected {} entries, got {}", scenario.table_len(), table.len()),
        });
    }
    Behaviour::new(scenario, table)
}

fn parse_dims(line: &str, ln: usize) -> Result<Scenario> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let want = ["mx", "my", "na", "nb"];
    if toks.len() != 8 || toks.iter().step_by(2).zip(want).any(|(t, w)| *t != w) {
        return Err(Error::Parse { line: ln, msg: format!("expected 'mx <> my <> na <> nb <>', got '{line}'") });
    }
    let mut vals = [0usize; 4];
    for (i, v) in vals.iter_mut().enumerate() {
        *v = toks[2 * i + 1]
            .parse()
            .map_err(|_| Error::Parse { line: ln, msg: format!("bad count '{}'", toks[2 * i + 1]) })?;
    }
    Scenario::new(vals[0], vals[1], vals[2], vals[3])
}

/// Strips `#` comments and blank lines, keeping 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some((i + 1, trimmed.to_string()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pr_box;

    #[test]
    fn uniform_correlators_vanish() {
        let b = Behaviour::uniform(Scenario::chsh());
        let c = b.to_correlators(DEFAULT_TOL).unwrap();
        assert!(c.alice_marginals.iter().all(|v| v.abs() < 1e-15));
        assert!(c.bob_marginals.iter().all(|v| v.abs() < 1e-15));
        assert!(c.correlators.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn pr_box_correlators() {
        let c = pr_box().to_correlators(DEFAULT_TOL).unwrap();
        assert!(c.alice_marginals.iter().all(|v| v.abs() < 1e-15));
        assert!(c.bob_marginals.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(c.correlators, vec![1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn deterministic_correlators_are_one() {
        let s = Scenario::chsh();
        let mut table = vec![0.0; s.table_len()];
        for x in 0..2 {
            for y in 0..2 {
                table[s.index(x, y, 0, 0)] = 1.0;
            }
        }
        let c = Behaviour::new(s, table).unwrap().to_correlators(DEFAULT_TOL).unwrap();
        assert!(c.alice_marginals.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(c.bob_marginals.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(c.correlators.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn from_correlators_rebuilds_pr_box() {
        let c = CorrelatorTable::from_correlator_matrix(2, 2, vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let b = c.to_behaviour().unwrap();
        assert_eq!(b, pr_box());
    }

    #[test]
    fn from_correlators_deterministic_alice() {
        // <a_1> = 1 with a nonzero correlator at x = 1 would need the
        // correlator to match Bob's marginal; inconsistent choices violate
        // the expansion positivity.
        let bad = CorrelatorTable::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(bad.to_behaviour().is_err());
        let c = CorrelatorTable::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.5, 0.0, 0.0, 0.0]).unwrap();
        let b = c.to_behaviour().unwrap();
        for y in 0..2 {
            assert!((b.alice_marginal(1, y, 0) - 1.0).abs() < 1e-15, "p(+1|x=1) must carry all mass");
        }
    }

    #[test]
    fn signalling_detected_with_violation() {
        let s = Scenario::chsh();
        let mut table = vec![0.25; s.table_len()];
        // Make Bob's marginal p(b=0|y=0) depend on x by 0.1.
        for (a, delta) in [(0usize, 0.05), (1usize, 0.05)] {
            table[s.index(1, 0, a, 0)] += delta;
            table[s.index(1, 0, a, 1)] -= delta;
        }
        let b = Behaviour::new(s, table).unwrap();
        let (ok, violation) = b.is_nonsignalling(DEFAULT_TOL);
        assert!(!ok);
        assert!((violation - 0.1).abs() < 1e-12);
    }

    #[test]
    fn pr_box_is_nonsignalling_exactly() {
        let (ok, violation) = pr_box().is_nonsignalling(DEFAULT_TOL);
        assert!(ok);
        assert_eq!(violation, 0.0);
    }

    #[test]
    fn product_behaviour_is_nonsignalling() {
        let s = Scenario::new(2, 3, 2, 3).unwrap();
        let b = random_nonsignalling(s, 7, false).unwrap();
        assert!(b.is_nonsignalling(DEFAULT_TOL).0);
    }

    #[test]
    fn antipodal_extend_passes_check() {
        let b = random_nonsignalling(Scenario::new(2, 2, 2, 2).unwrap(), 3, false).unwrap();
        let ext = antipodal_extend(&b).unwrap();
        assert!(check_antipodal(&ext).unwrap());
        assert!(ext.is_nonsignalling(DEFAULT_TOL).0);
    }

    #[test]
    fn pr_box_is_not_antipodal() {
        assert!(!check_antipodal(&pr_box()).unwrap());
    }

    #[test]
    fn uniform_is_antipodal() {
        let b = Behaviour::uniform(Scenario::chsh());
        assert!(check_antipodal(&b).unwrap());
    }

    #[test]
    fn antipodal_extend_deterministic_table() {
        let s = Scenario::new(1, 1, 2, 2).unwrap();
        let mut table = vec![0.0; 4];
        table[s.index(0, 0, 0, 0)] = 1.0;
        let ext = antipodal_extend(&Behaviour::new(s, table).unwrap()).unwrap();
        assert_eq!(ext.get(1, 0, 1, 0), 1.0);
        assert_eq!(ext.get(1, 0, 0, 0), 0.0);
    }

    #[test]
    fn random_nonsignalling_is_deterministic() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        let a = random_nonsignalling(s, 42, false).unwrap();
        let b = random_nonsignalling(s, 42, false).unwrap();
        assert_eq!(a, b);
        let c = random_nonsignalling(s, 43, false).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_antipodal_contract() {
        let s = Scenario::new(4, 2, 2, 2).unwrap();
        for seed in 0..20 {
            let b = random_nonsignalling(s, seed, true).unwrap();
            assert!(check_antipodal(&b).unwrap());
            assert!(b.is_nonsignalling(DEFAULT_TOL).0);
        }
    }

    #[test]
    fn round_trip_through_text_format() {
        let b = random_nonsignalling(Scenario::new(2, 3, 2, 2).unwrap(), 5, false).unwrap();
        let text = write_behaviour(&b);
        let parsed = read_behaviour(&text).unwrap();
        for (p, q) in b.table().iter().zip(parsed.table()) {
            assert!((p - q).abs() < 1e-16);
        }
    }

    #[test]
    fn format_rejects_bad_header() {
        assert!(read_behaviour("BEHAVIOR 1\nmx 1 my 1 na 2 nb 2\n0.25 0.25 0.25 0.25").is_err());
    }

    #[test]
    fn round_trip_correlators() {
        for seed in 0..50 {
            let b = random_nonsignalling(Scenario::new(3, 2, 2, 2).unwrap(), seed, false).unwrap();
            let c = b.to_correlators(DEFAULT_TOL).unwrap();
            assert!(c.min_expansion() > -1e-12);
            let back = c.to_behaviour().unwrap();
            for (p, q) in b.table().iter().zip(back.table()) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
