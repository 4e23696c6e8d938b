//! Closed-form quantum behaviours for two-qubit states with maximally mixed
//! marginals, under projective measurements given as Bloch vectors.
//!
//! No operator algebra appears anywhere: a projective qubit measurement is a
//! unit vector `u`, a state is its 3x3 correlation matrix `T`, and all
//! statistics reduce to inner products `u_x^T T u_y`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::behaviour::{Behaviour, CorrelatorTable, Scenario};
use crate::error::{Error, Result};
use crate::DEFAULT_TOL;

/// A finite set of measurement directions on the Bloch sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    vectors: Vec<[f64; 3]>,
}

impl MeasurementSet {
    /// Builds a set, requiring unit norm within `1e-9` per vector.
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            let n = norm(v);
            if (n - 1.0).abs() > DEFAULT_TOL {
                return Err(Error::InvalidInput(format!(
                    "measurement vector {i} has norm {n}, expected 1"
                )));
            }
        }
        Ok(MeasurementSet { vectors })
    }

    /// Builds a set, normalizing each vector first.
    pub fn new_normalized(vectors: Vec<[f64; 3]>) -> Result<Self> {
        let mut out = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            let n = norm(&v);
            if n < 1e-12 {
                return Err(Error::InvalidInput(format!("measurement vector {i} is zero")));
            }
            out.push([v[0] / n, v[1] / n, v[2] / n]);
        }
        Ok(MeasurementSet { vectors: out })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.vectors
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64; 3]> {
        self.vectors.iter()
    }
}

/// Two-qubit correlation matrix `T`; the state's behaviour under Bloch
/// measurements `u, v` is `<a b> = u^T T v` with vanishing marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorState {
    pub t: [[f64; 3]; 3],
}

impl CorrelatorState {
    pub fn new(t: [[f64; 3]; 3]) -> Self {
        CorrelatorState { t }
    }

    /// `u^T T v`.
    pub fn correlator(&self, u: &[f64; 3], v: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.t.iter().enumerate() {
            for (j, tij) in row.iter().enumerate() {
                acc += u[i] * tij * v[j];
            }
        }
        acc
    }
}

/// The two-qubit Werner state with visibility `v`: a `v`-weighted mixture of
/// the singlet with white noise, whose correlation matrix is `-v * I`.
pub fn werner_state(v: f64) -> Result<CorrelatorState> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!("visibility {v} outside [0, 1]")));
    }
    Ok(CorrelatorState::new([
        [-v, 0.0, 0.0],
        [0.0, -v, 0.0],
        [0.0, 0.0, -v],
    ]))
}

/// Correlator table of a state under the given measurement sets:
/// zero marginals and `<a_x b_y> = u_x^T T u_y`.
pub fn state_behaviour(
    st: &CorrelatorState,
    alice: &MeasurementSet,
    bob: &MeasurementSet,
) -> Result<CorrelatorTable> {
    if alice.is_empty() || bob.is_empty() {
        return Err(Error::InvalidInput("measurement sets must be nonempty".into()));
    }
    let (m, n) = (alice.len(), bob.len());
    let mut corr = vec![0.0; m * n];
    for (x, u) in alice.iter().enumerate() {
        for (y, v) in bob.iter().enumerate() {
            corr[x * n + y] = st.correlator(u, v);
        }
    }
    CorrelatorTable::from_correlator_matrix(m, n, corr)
}

/// The Popescu-Rohrlich box: `p(ab|xy) = delta(a xor b, xy) / 2` in the bit
/// convention (outcome indices are the bits).
pub fn pr_box() -> Behaviour {
    let s = Scenario::chsh();
    let mut table = vec![0.0; s.table_len()];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    if a ^ b == x & y {
                        table[s.index(x, y, a, b)] = 0.5;
                    }
                }
            }
        }
    }
    Behaviour::new(s, table).expect("PR box table is a valid behaviour")
}

/// Ring-structured unit vectors covering the upper hemisphere.
///
/// Rings sit at polar angles `theta_k = k pi / (2 rings)` for `k = 1..rings`
/// (the last ring is the equator), each carrying `points_per_ring` equally
/// spaced azimuths, plus the pole `(0, 0, 1)`. `offsets` gives one azimuth
/// shift per ring; `None` staggers consecutive rings by half a step.
pub fn hemisphere_grid(
    rings: usize,
    points_per_ring: usize,
    offsets: Option<&[f64]>,
) -> Result<MeasurementSet> {
    if rings == 0 || points_per_ring == 0 {
        return Err(Error::InvalidInput("hemisphere_grid needs rings >= 1 and points >= 1".into()));
    }
    if let Some(o) = offsets {
        if o.len() != rings {
            return Err(Error::DimensionMismatch(format!(
                "got {} offsets for {} rings",
                o.len(),
                rings
            )));
        }
    }
    let step = 2.0 * PI / points_per_ring as f64;
    let mut vectors = Vec::with_capacity(rings * points_per_ring + 1);
    for k in 1..=rings {
        let theta = k as f64 * PI / (2.0 * rings as f64);
        let (sin_t, cos_t) = theta.sin_cos();
        let offset = match offsets {
            Some(o) => o[k - 1],
            None => {
                if k % 2 == 0 {
                    0.5 * step
                } else {
                    0.0
                }
            }
        };
        for j in 0..points_per_ring {
            let phi = offset + j as f64 * step;
            vectors.push([sin_t * phi.cos(), sin_t * phi.sin(), cos_t.max(0.0)]);
        }
    }
    vectors.push([0.0, 0.0, 1.0]);
    MeasurementSet::new_normalized(vectors)
}

/// The aligned `10 x 40 + pole` hemisphere grid (401 directions) whose hull
/// contains a half-sphere of radius `cos(pi/40)^2`.
pub fn hemisphere_grid_401() -> MeasurementSet {
    hemisphere_grid(10, 40, Some(&[0.0; 10])).expect("static parameters are valid")
}

/// Adjoins the antipode of every direction, deduplicating within `1e-12`.
pub fn double_set(set: &MeasurementSet) -> MeasurementSet {
    let mut vectors: Vec<[f64; 3]> = set.vectors.clone();
    for v in &set.vectors {
        let anti = [-v[0], -v[1], -v[2]];
        let dup = vectors.iter().any(|w| {
            (w[0] - anti[0]).abs() <= 1e-12
                && (w[1] - anti[1]).abs() <= 1e-12
                && (w[2] - anti[2]).abs() <= 1e-12
        });
        if !dup {
            vectors.push(anti);
        }
    }
    MeasurementSet { vectors }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

// ---------------------------------------------------------------------------
// Text format: one "x y z" triple per line, '#' comments.
// ---------------------------------------------------------------------------

/// Serializes a measurement set, one vector per line.
pub fn write_measurements(set: &MeasurementSet) -> String {
    let mut out = String::new();
    for v in set.iter() {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
    }
    out
}

/// Parses a measurement file; unless `normalize` is set, rows must be unit
/// vectors within `1e-9`.
pub fn read_measurements(text: &str, normalize: bool) -> Result<MeasurementSet> {
    let mut vectors = Vec::new();
    for (ln, line) in crate::behaviour::content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse { line: ln, msg: format!("expected 3 coordinates, got {}", toks.len()) });
        }
        let mut v = [0.0; 3];
        for (slot, tok) in v.iter_mut().zip(&toks) {
            *slot = tok
                .parse()
                .map_err(|_| Error::Parse { line: ln, msg: format!("bad number '{tok}'") })?;
        }
        vectors.push(v);
    }
    if normalize {
        MeasurementSet::new_normalized(vectors)
    } else {
        MeasurementSet::new(vectors)
    }
}
