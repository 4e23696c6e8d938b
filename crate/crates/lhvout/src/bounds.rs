//! Full-correlator Bell bounds.
//!
//! For a coefficient matrix `M`, the LHV bound is
//! `L(M) = max_{a, b in {+-1}} sum_xy M_xy a_x b_y` and the LHV+Out bound
//! lets Bob's sign depend on Alice's outcome:
//! `L_Out(M) = max sum_xy M_xy a_x b_{y, a_x}`. Both collapse to a maximum
//! over Alice sign vectors with Bob eliminated analytically, enumerated over
//! `2^(m-1)` canonical representatives (`a` and `-a` are equivalent).
//! Integer inputs are summed in integer arithmetic, so those bounds are
//! exact; the float path carries an error below `m * n * max|M| * 2^-50`.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::quantum::{CorrelatorState, MeasurementSet};

/// Largest Alice setting count for the exact `2^(m-1)` enumerations.
pub const EXACT_M_CAP: usize = 26;
/// Cap on `m + 2n` for the brute-force LHV+Out bound.
pub const BRUTEFORCE_CAP: usize = 24;

/// A real coefficient matrix of a full-correlator Bell expression.
#[derive(Debug, Clone, PartialEq)]
pub struct BellCoefficients {
    m: usize,
    n: usize,
    entries: Vec<f64>,
}

impl BellCoefficients {
    pub fn new(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 || entries.len() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {m} x {n} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite Bell coefficient".into()));
        }
        Ok(BellCoefficients { m, n, entries })
    }

    /// The CHSH expression `[[1, 1], [1, -1]]`.
    pub fn chsh() -> Self {
        BellCoefficients { m: 2, n: 2, entries: vec![1.0, 1.0, 1.0, -1.0] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.n + y]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn integer_entries(&self) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.entries.len());
        for &v in &self.entries {
            if v.fract() != 0.0 || v.abs() > 2f64.powi(40) {
                return None;
            }
            out.push(v as i64);
        }
        Some(out)
    }

    /// Sum of absolute coefficients; a trivial upper bound on both bounds.
    pub fn abs_sum(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }
}

/// Stacks `M` on top of `-M`, doubling Alice's settings.
pub fn symmetrize(m: &BellCoefficients) -> BellCoefficients {
    let mut entries = m.entries.clone();
    entries.extend(m.entries.iter().map(|v| -v));
    BellCoefficients { m: 2 * m.m, n: m.n, entries }
}

trait Accum: Copy + Send + Sync + PartialOrd {
    fn zero() -> Self;

    fn to_f64(self) -> f64;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn abs_val(self) -> Self;
}

impl Accum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn abs_val(self) -> Self {
        self.abs()
    }
}

impl Accum for i64 {
    fn zero() -> Self {
        0
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn abs_val(self) -> Self {
        self.abs()
    }
}

/// Sign of Alice's `x`-th entry under canonical counter `c`: `a_0 = +1`, the
/// remaining signs follow the bits of `c` with `x = 1` most significant, so
/// ascending counters enumerate sign vectors in lexicographic order.
#[inline]
fn sign_at(c: u64, x: usize, m: usize) -> bool {
    // true = +1. x in 1..m maps to bit m-1-x.
    debug_assert!(x >= 1 && x < m);
    c >> (m - 1 - x) & 1 == 0
}

/// Shared kernel: scans counters in `range`, tracking per-column partial
/// sums over the +1 and -1 groups incrementally, and returns the best
/// `(value, counter)` with ties to the smaller counter.
fn scan_out<T: Accum>(entries: &[T], m: usize, n: usize, range: std::ops::Range<u64>, local: bool) -> (T, u64) {
    let mut plus: Vec<T> = vec![T::zero(); n];
    let mut minus: Vec<T> = vec![T::zero(); n];
    for x in 0..m {
        let positive = x == 0 || sign_at(range.start, x, m);
        for y in 0..n {
            let v = entries[x * n + y];
            if positive {
                plus[y] = plus[y].add(v);
            } else {
                minus[y] = minus[y].add(v);
            }
        }
    }
    let value_of = |plus: &[T], minus: &[T]| -> T {
        let mut acc = T::zero();
        if local {
            // Bob ignores Alice: max_b sum_y |plus_y - minus_y| ... the
            // eliminated form is sum_y |sum_x a_x M_xy|.
            for y in 0..n {
                acc = acc.add(plus[y].sub(minus[y]).abs_val());
            }
        } else {
            for y in 0..n {
                acc = acc.add(plus[y].abs_val()).add(minus[y].abs_val());
            }
        }
        acc
    };

    let mut best_v = value_of(&plus, &minus);
    let mut best_c = range.start;
    let mut c = range.start;
    while c + 1 < range.end {
        let flipped = c ^ (c + 1);
        c += 1;
        for bit in 0..m.saturating_sub(1) {
            if flipped >> bit & 1 == 1 {
                let x = m - 1 - bit;
                let now_positive = sign_at(c, x, m);
                for y in 0..n {
                    let v = entries[x * n + y];
                    if now_positive {
                        minus[y] = minus[y].sub(v);
                        plus[y] = plus[y].add(v);
                    } else {
                        plus[y] = plus[y].sub(v);
                        minus[y] = minus[y].add(v);
                    }
                }
            }
        }
        let v = value_of(&plus, &minus);
        if v > best_v {
            best_v = v;
            best_c = c;
        }
    }
    (best_v, best_c)
}

fn exact_scan<T: Accum>(entries: &[T], m: usize, n: usize, local: bool, sequential: bool) -> f64 {
    let total: u64 = 1 << (m - 1);
    let ranges = exec::chunk_ranges(total, 256);
    let kernel = |r: std::ops::Range<u64>| scan_out(entries, m, n, r, local);
    let merge = |a: (T, u64), b: (T, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let best = if sequential {
        exec::reduce_ranges_seq(ranges, kernel, merge)
    } else {
        exec::reduce_ranges(ranges, kernel, merge)
    };
    best.expect("nonempty counter space").0.to_f64()
}

fn exact_bound(m: &BellCoefficients, local: bool, sequential: bool) -> Result<f64> {
    if m.m > EXACT_M_CAP {
        return Err(Error::CapExceeded { needed: 1u128 << (m.m - 1), cap: 1u128 << (EXACT_M_CAP - 1) });
    }
    Ok(match m.integer_entries() {
        Some(ints) => exact_scan::<i64>(&ints, m.m, m.n, local, sequential),
        None => exact_scan::<f64>(&m.entries, m.m, m.n, local, sequential),
    })
}

/// Exact LHV bound `L(M)`, for `m <= 26` Alice settings.
pub fn local_bound(m: &BellCoefficients) -> Result<f64> {
    exact_bound(m, true, false)
}

/// Exact LHV+Out bound `L_Out(M)` via the closed form
/// `max_a sum_y |sum_{x: a_x=+1} M_xy| + sum_y |sum_{x: a_x=-1} M_xy|`.
pub fn out_bound(m: &BellCoefficients) -> Result<f64> {
    exact_bound(m, false, false)
}

#[doc(hidden)]
pub fn local_bound_seq(m: &BellCoefficients) -> Result<f64> {
    exact_bound(m, true, true)
}

#[doc(hidden)]
pub fn out_bound_seq(m: &BellCoefficients) -> Result<f64> {
    exact_bound(m, false, true)
}

/// Independent oracle for `L_Out(M)`: enumerates every Alice sign vector and
/// every pair of Bob response vectors. Requires `m + 2n <= 24`.
pub fn out_bound_bruteforce(m: &BellCoefficients) -> Result<f64> {
    if m.m + 2 * m.n > BRUTEFORCE_CAP {
        return Err(Error::CapExceeded {
            needed: 1u128 << (m.m + 2 * m.n),
            cap: 1u128 << BRUTEFORCE_CAP,
        });
    }
    let (mm, nn) = (m.m, m.n);
    let mut best = f64::NEG_INFINITY;
    for amask in 0u32..1 << mm {
        for bmask in 0u32..1 << (2 * nn) {
            let mut acc = 0.0;
            for x in 0..mm {
                let ax = if amask >> x & 1 == 0 { 1.0 } else { -1.0 };
                for y in 0..nn {
                    let bit = if ax > 0.0 { y } else { nn + y };
                    let b = if bmask >> bit & 1 == 0 { 1.0 } else { -1.0 };
                    acc += m.get(x, y) * ax * b;
                }
            }
            if acc > best {
                best = acc;
            }
        }
    }
    Ok(best)
}

/// Lower bound on `L(M)` by steepest-ascent bit flips with seeded restarts.
pub fn local_bound_heuristic(m: &BellCoefficients, restarts: usize, seed: u64) -> f64 {
    heuristic_bound(m, true, restarts, seed, false)
}

/// Lower bound on `L_Out(M)` by steepest-ascent bit flips with seeded restarts.
pub fn out_bound_heuristic(m: &BellCoefficients, restarts: usize, seed: u64) -> f64 {
    heuristic_bound(m, false, restarts, seed, false)
}

#[doc(hidden)]
pub fn out_bound_heuristic_seq(m: &BellCoefficients, restarts: usize, seed: u64) -> f64 {
    heuristic_bound(m, false, restarts, seed, true)
}

fn heuristic_bound(m: &BellCoefficients, local: bool, restarts: usize, seed: u64, sequential: bool) -> f64 {
    let runs = restarts.max(1);
    let run = |r: usize| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut signs: Vec<f64> = (0..m.m)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let value = |signs: &[f64]| -> f64 {
            let mut acc = 0.0;
            for y in 0..m.n {
                let mut plus = 0.0;
                let mut minus = 0.0;
                for (x, &s) in signs.iter().enumerate() {
                    if s > 0.0 {
                        plus += m.get(x, y);
                    } else {
                        minus += m.get(x, y);
                    }
                }
                if local {
                    acc += (plus - minus).abs();
                } else {
                    acc += plus.abs() + minus.abs();
                }
            }
            acc
        };
        let mut cur = value(&signs);
        for _ in 0..10_000 {
            let mut best_flip: Option<(usize, f64)> = None;
            for x in 0..m.m {
                signs[x] = -signs[x];
                let v = value(&signs);
                signs[x] = -signs[x];
                if v > cur + 1e-15 && best_flip.is_none_or(|(_, bv)| v > bv) {
                    best_flip = Some((x, v));
                }
            }
            match best_flip {
                Some((x, v)) => {
                    signs[x] = -signs[x];
                    cur = v;
                }
                None => break,
            }
        }
        cur
    };
    let values = if sequential {
        exec::map_collect_seq(runs, run)
    } else {
        exec::map_collect(runs, run)
    };
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Quantum value `Q_rho(M) = sum_xy M_xy u_x^T T u_y`.
pub fn quantum_value(
    m: &BellCoefficients,
    st: &CorrelatorState,
    alice: &MeasurementSet,
    bob: &MeasurementSet,
) -> Result<f64> {
    if alice.len() != m.m || bob.len() != m.n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {} x {}, measurement sets are {} and {}",
            m.m,
            m.n,
            alice.len(),
            bob.len()
        )));
    }
    let mut acc = 0.0;
    for (x, u) in alice.iter().enumerate() {
        for (y, v) in bob.iter().enumerate() {
            acc += m.get(x, y) * st.correlator(u, v);
        }
    }
    Ok(acc)
}

/// Report of the symmetrised-witness test.
#[derive(Debug, Clone, Copy)]
pub struct WitnessReport {
    /// Value of the doubled expression on the extended configuration.
    pub lhs: f64,
    /// `L_Out(M') = 2 L(M)` for the symmetrised matrix `M'`.
    pub bound: f64,
    pub violated: bool,
}

/// Builds the symmetrised witness: extends Alice's observables with their
/// negations, evaluates the doubled Bell expression there, and compares
/// against the LHV+Out bound of the stacked matrix, which equals `2 L(M)`.
pub fn theorem2_witness(
    m: &BellCoefficients,
    st: &CorrelatorState,
    alice: &MeasurementSet,
    bob: &MeasurementSet,
) -> Result<WitnessReport> {
    if alice.len() != m.m || bob.len() != m.n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {} x {}, measurement sets are {} and {}",
            m.m,
            m.n,
            alice.len(),
            bob.len()
        )));
    }
    // Extended Alice directions: u_x for x < m, then -u_x.
    let mut extended: Vec<[f64; 3]> = alice.vectors().to_vec();
    extended.extend(alice.vectors().iter().map(|u| [-u[0], -u[1], -u[2]]));
    let mut lhs = 0.0;
    for x in 0..m.m {
        for (y, v) in bob.iter().enumerate() {
            let direct = st.correlator(&extended[x], v);
            let mirrored = st.correlator(&extended[m.m + x], v);
            lhs += m.get(x, y) * (direct - mirrored);
        }
    }
    let bound = out_bound(&symmetrize(m))?;
    Ok(WitnessReport { lhs, bound, violated: lhs > bound })
}

// ---------------------------------------------------------------------------
// Text format: "BELLM 1", "m <m> n <n>", m rows of n decimals.
// ---------------------------------------------------------------------------

pub fn write_bellm(m: &BellCoefficients) -> String {
    let mut out = String::new();
    out.push_str("BELLM 1\n");
    let _ = writeln!(out, "m {} n {}", m.m, m.n);
    for x in 0..m.m {
        let row: Vec<String> = (0..m.n).map(|y| format!("{}", m.get(x, y))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn read_bellm(text: &str) -> Result<BellCoefficients> {
    let mut lines = crate::behaviour::content_lines(text);
    let (ln, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
    if header.trim() != "BELLM 1" {
        return Err(Error::Parse { line: ln, msg: format!("expected 'BELLM 1', got '{header}'") });
    }
    let (ln, dims) = lines.next().ok_or(Error::Parse { line: ln, msg: "missing dimension line".into() })?;
    let toks: Vec<&str> = dims.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "m" || toks[2] != "n" {
        return Err(Error::Parse { line: ln, msg: format!("expected 'm <> n <>', got '{dims}'") });
    }
    let m: usize = toks[1].parse().map_err(|_| Error::Parse { line: ln, msg: "bad m".into() })?;
    let n: usize = toks[3].parse().map_err(|_| Error::Parse { line: ln, msg: "bad n".into() })?;
    let mut entries = Vec::with_capacity(m * n);
    let mut last = ln;
    for (ln, line) in lines {
        last = ln;
        for tok in line.split_whitespace() {
            entries.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse { line: ln, msg: format!("bad number '{tok}'") })?,
            );
        }
    }
    if entries.len() != m * n {
        return Err(Error::Parse {
            line: last,
            msg: format!("expected {} entries, got {}", m * n, entries.len()),
        });
    }
    BellCoefficients::new(m, n, entries)
}
