//! Lie closure of matrix generators over a small prime field, and the
//! surjectivity checks built on it.
//!
//! Matrices of side `n` are flattened to vectors of length `L = n²` with one
//! byte per entry. The span is kept in semi-echelon form: every row has a
//! distinct pivot column, a `1` there and zeros to its left, and only the
//! tail from the pivot on is stored. Candidates are reduced with `u32`
//! accumulators that are only taken modulo `p` when a pivot entry is read.

use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coxeter::{
    build_system, folding_table, CoxeterSystem, FoldSource, FoldingMap, TypeSpec,
};
use crate::error::{Error, Result};
use crate::field::{bigint_mod, inv_mod, is_prime};
use crate::krammer::{tau, tau_sum};
use crate::matrix::{format_rational, rat, Rational, RationalMatrix};
use crate::poly::UnivariatePolynomial;
use crate::report::Verification;

pub const DEFAULT_PRIME: u64 = 19;
/// Largest modulus whose residues fit one byte.
pub const MAX_PRIME: u64 = 251;

/// Accepts primes `5 <= p <= 251`.
pub fn validate_prime(p: u64) -> Result<()> {
    let reason = if !is_prime(p) {
        "not prime"
    } else if p < 5 {
        "primes below 5 are rejected"
    } else if p > MAX_PRIME {
        "residues must fit in one byte (p <= 251)"
    } else {
        return Ok(());
    };
    Err(Error::BadPrime {
        p,
        reason: reason.into(),
    })
}

/// Dense matrix over `F_p`, one byte per entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeFieldMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl PrimeFieldMatrix {
    pub fn new(p: u64, rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        validate_prime(p)?;
        assert_eq!(data.len(), rows * cols, "entry count");
        if data.iter().any(|&x| u64::from(x) >= p) {
            return Err(Error::Parse(format!("entry not reduced modulo {p}")));
        }
        Ok(Self {
            p,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(p: u64, n: usize) -> Result<Self> {
        Self::new(p, n, n, vec![0; n * n])
    }

    pub fn identity(p: u64, n: usize) -> Result<Self> {
        let mut m = Self::zeros(p, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        Ok(m)
    }

    pub fn from_fn(p: u64, n: usize, mut f: impl FnMut(usize, usize) -> u64) -> Result<Self> {
        let data = (0..n * n).map(|k| (f(k / n, k % n) % p) as u8).collect();
        Self::new(p, n, n, data)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[u8] {
        &self.data
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let p = self.p;
        let mut data = vec![0u8; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                let s: u64 = (0..self.cols)
                    .map(|k| u64::from(self.get(i, k)) * u64::from(other.get(k, j)))
                    .sum();
                data[i * other.cols + j] = (s % p) as u8;
            }
        }
        Self {
            p,
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    /// Inverse by Gauss-Jordan elimination, if invertible.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p = self.p;
        let mut a: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut r: Vec<u64> = (0..n).map(|j| u64::from(self.get(i, j))).collect();
                r.extend((0..n).map(|j| u64::from(i == j)));
                r
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).find(|&r| a[r][c] != 0)?;
            a.swap(c, piv);
            let inv = inv_mod(a[c][c], p);
            for x in a[c].iter_mut() {
                *x = *x * inv % p;
            }
            for r in 0..n {
                if r != c && a[r][c] != 0 {
                    let f = a[r][c];
                    for k in 0..2 * n {
                        a[r][k] = (a[r][k] + (p - f) * a[c][k]) % p;
                    }
                }
            }
        }
        let data = a
            .iter()
            .flat_map(|r| r[n..].iter().map(|&x| x as u8))
            .collect();
        Some(Self {
            p,
            rows: n,
            cols: n,
            data,
        })
    }

    fn sparse(&self) -> SparseGenerator {
        let n = self.rows;
        let entries = (0..n * n)
            .filter(|&k| self.data[k] != 0)
            .map(|k| ((k / n) as u32, (k % n) as u32, u32::from(self.data[k])))
            .collect();
        SparseGenerator { entries }
    }
}

/// Entry-wise image in `F_p`.
pub fn reduce_mod_p(mat: &RationalMatrix, p: u64) -> Result<PrimeFieldMatrix> {
    validate_prime(p)?;
    let mut data = Vec::with_capacity(mat.rows() * mat.cols());
    for x in mat.entries() {
        let d = bigint_mod(x.denom(), p);
        if d == 0 {
            return Err(Error::BadPrime {
                p,
                reason: format!("denominator {} vanishes modulo {p}", x.denom()),
            });
        }
        let v = bigint_mod(x.numer(), p) * inv_mod(d, p) % p;
        data.push(v as u8);
    }
    PrimeFieldMatrix::new(p, mat.rows(), mat.cols(), data)
}

/// Rejects `m` whose denominator is divisible by `p`.
pub fn check_parameter_mod_p(m: &Rational, p: u64) -> Result<()> {
    if bigint_mod(m.denom(), p) == 0 {
        return Err(Error::BadPrime {
            p,
            reason: format!(
                "denominator of m = {} vanishes modulo {p}",
                format_rational(m)
            ),
        });
    }
    Ok(())
}

/// Nonzero entries `(row, col, value)`.
struct SparseGenerator {
    entries: Vec<(u32, u32, u32)>,
}

/// Semi-echelon basis of a subspace of `F_p^{n²}`.
#[derive(Clone, Debug)]
pub struct ClosureBasis {
    p: u32,
    n: usize,
    len: usize,
    /// Row `k` restricted to columns `pivots[k]..len`.
    tails: Vec<Vec<u8>>,
    pivots: Vec<usize>,
    row_of_col: Vec<u32>,
    /// Additions an accumulator can absorb between reductions.
    max_adds: usize,
}

const NO_ROW: u32 = u32::MAX;

impl ClosureBasis {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        validate_prime(p)?;
        let len = n * n;
        let sq = (p - 1) * (p - 1);
        Ok(Self {
            p: p as u32,
            n,
            len,
            tails: Vec::new(),
            pivots: Vec::new(),
            row_of_col: vec![NO_ROW; len],
            max_adds: ((u64::from(u32::MAX) - p) / sq) as usize,
        })
    }

    pub fn p(&self) -> u64 {
        u64::from(self.p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.tails.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Row `k` as a full vector.
    pub fn row(&self, k: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.len];
        v[self.pivots[k]..].copy_from_slice(&self.tails[k]);
        v
    }

    /// Distinct pivots, pivot entry 1, zeros left of the pivot.
    pub fn check_invariant(&self) -> bool {
        let mut seen = vec![false; self.len];
        self.tails
            .iter()
            .zip(&self.pivots)
            .enumerate()
            .all(|(k, (t, &c))| {
                let ok = !seen[c]
                    && t.len() == self.len - c
                    && t[0] == 1
                    && self.row_of_col[c] == k as u32;
                seen[c] = true;
                ok
            })
    }

    /// Rows in increasing pivot order, restricted to indices `>= from`.
    fn pivot_order(&self, from: usize) -> Vec<u32> {
        self.row_of_col
            .iter()
            .copied()
            .filter(|&r| r != NO_ROW && r as usize >= from)
            .collect()
    }

    /// Eliminates the pivot columns of `order` from every accumulator in
    /// `accs`. Rows are streamed once for the whole batch.
    fn eliminate(&self, accs: &mut [Vec<u32>], order: &[u32]) {
        let p = self.p;
        let mut adds = vec![0usize; accs.len()];
        for &r in order {
            let r = r as usize;
            let c = self.pivots[r];
            let tail = &self.tails[r];
            for (acc, cnt) in accs.iter_mut().zip(adds.iter_mut()) {
                let x = acc[c] % p;
                if x == 0 {
                    continue;
                }
                if *cnt == self.max_adds {
                    acc[c..].iter_mut().for_each(|a| *a %= p);
                    *cnt = 0;
                }
                *cnt += 1;
                axpy(&mut acc[c..], p - x, tail);
            }
        }
    }

    /// Reduces a vector modulo the span; returns the residue.
    pub fn reduce(&self, v: &[u8]) -> Vec<u8> {
        let mut acc = vec![v.iter().map(|&x| u32::from(x)).collect::<Vec<u32>>()];
        self.eliminate(&mut acc, &self.pivot_order(0));
        acc[0].iter().map(|&x| (x % self.p) as u8).collect()
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Inserts a fully reduced residue if it is nonzero.
    fn push_residue(&mut self, acc: &[u32]) -> bool {
        let p = self.p;
        let Some(c) = acc.iter().position(|&x| x % p != 0) else {
            return false;
        };
        let inv = inv_mod(u64::from(acc[c] % p), u64::from(p)) as u32;
        let tail: Vec<u8> = acc[c..]
            .iter()
            .map(|&x| ((x % p) * inv % p) as u8)
            .collect();
        self.row_of_col[c] = self.tails.len() as u32;
        self.pivots.push(c);
        self.tails.push(tail);
        true
    }

    /// Reduces and inserts; true if the dimension grew.
    pub fn insert(&mut self, v: &[u8]) -> bool {
        let r = self.reduce(v);
        let acc: Vec<u32> = r.iter().map(|&x| u32::from(x)).collect();
        self.push_residue(&acc)
    }
}

#[inline]
fn axpy(acc: &mut [u32], f: u32, row: &[u8]) {
    for (a, &t) in acc.iter_mut().zip(row) {
        *a += f * u32::from(t);
    }
}

/// `[X, G] = XG - GX` into a `u32` accumulator.
fn bracket_into(x: &[u8], g: &SparseGenerator, n: usize, p: u32, out: &mut [u32]) {
    out.iter_mut().for_each(|a| *a = 0);
    for &(k, j, v) in &g.entries {
        let (k, j) = (k as usize, j as usize);
        // (XG)[i][j] += X[i][k] g
        for i in 0..n {
            out[i * n + j] += u32::from(x[i * n + k]) * v;
        }
    }
    for &(i, k, v) in &g.entries {
        let (i, k) = (i as usize, k as usize);
        let neg = p - v;
        // (GX)[i][j] -= g X[k][j]
        axpy(&mut out[i * n..(i + 1) * n], neg, &x[k * n..(k + 1) * n]);
    }
    out.iter_mut().for_each(|a| *a %= p);
}

/// Progress callback: `(dimension, target)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

#[derive(Clone, Copy, Default)]
pub struct ClosureOptions<'a> {
    /// Maximum number of brackets to evaluate.
    pub budget: Option<usize>,
    pub progress: Option<Progress<'a>>,
    /// Basis rows processed between progress calls.
    pub progress_every: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureOutcome {
    pub dimension: usize,
    pub target: usize,
    /// False when the budget ran out before a fixpoint or full dimension.
    pub saturated: bool,
    pub brackets: usize,
}

pub fn closure_dimension(
    generators: &[PrimeFieldMatrix],
    budget: Option<usize>,
) -> Result<ClosureOutcome> {
    closure_dimension_with(
        generators,
        &ClosureOptions {
            budget,
            ..Default::default()
        },
    )
}

/// Dimension of the Lie algebra generated by `generators`. Basis rows are
/// bracketed against the generators in insertion order until a fixpoint,
/// full dimension `n²`, or the budget.
pub fn closure_dimension_with(
    generators: &[PrimeFieldMatrix],
    opts: &ClosureOptions,
) -> Result<ClosureOutcome> {
    let Some(first) = generators.first() else {
        return Ok(ClosureOutcome {
            dimension: 0,
            target: 0,
            saturated: true,
            brackets: 0,
        });
    };
    let (n, p) = (first.rows, first.p);
    for g in generators {
        if g.rows != n || g.cols != n || g.p != p {
            return Err(Error::SizeMismatch {
                expected: n,
                got: g.rows.max(g.cols),
                p,
                q: g.p,
            });
        }
    }
    let mut basis = ClosureBasis::new(p, n)?;
    let target = n * n;
    for g in generators {
        basis.insert(&g.data);
    }
    let sparse: Vec<SparseGenerator> = generators.iter().map(PrimeFieldMatrix::sparse).collect();
    let per_batch = (256 / sparse.len()).max(1);
    let chunk = 8;
    let mut next = 0;
    let mut brackets = 0;
    let mut last_report = 0;
    let mut exhausted = false;
    while next < basis.dimension() && basis.dimension() < target {
        let mut take = per_batch.min(basis.dimension() - next);
        if let Some(b) = opts.budget {
            let left = b.saturating_sub(brackets) / sparse.len();
            if left == 0 {
                exhausted = true;
                break;
            }
            take = take.min(left);
        }
        let rows: Vec<Vec<u8>> = (next..next + take).map(|k| basis.row(k)).collect();
        let mut cands: Vec<Vec<u32>> = rows
            .par_iter()
            .flat_map_iter(|x| {
                sparse.iter().map(move |g| {
                    let mut out = vec![0u32; target];
                    bracket_into(x, g, n, p as u32, &mut out);
                    out
                })
            })
            .collect();
        brackets += cands.len();
        next += take;

        let order = basis.pivot_order(0);
        cands
            .par_chunks_mut(chunk)
            .for_each(|c| basis.eliminate(c, &order));
        let start = basis.dimension();
        for cand in cands.iter_mut() {
            let fresh = basis.pivot_order(start);
            basis.eliminate(std::slice::from_mut(cand), &fresh);
            basis.push_residue(cand);
            if basis.dimension() == target {
                break;
            }
        }
        if let Some(cb) = opts.progress {
            if next - last_report >= opts.progress_every.max(1) || basis.dimension() == target {
                cb(basis.dimension(), target);
                last_report = next;
            }
        }
    }
    debug_assert!(basis.check_invariant());
    let dimension = basis.dimension();
    Ok(ClosureOutcome {
        dimension,
        target,
        saturated: dimension == target || (!exhausted && next >= dimension),
        brackets,
    })
}

/// Which reflections supply generators.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GeneratorSet {
    All,
    Simple,
    /// Type A only: the transpositions `(i n)`.
    LastColumn,
}

impl FromStr for GeneratorSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "all" | "all_reflections" => Ok(Self::All),
            "simple" | "simple_reflections" => Ok(Self::Simple),
            "last_column" => Ok(Self::LastColumn),
            _ => Err(Error::Parse(format!("unknown generator set {s:?}"))),
        }
    }
}

impl std::fmt::Display for GeneratorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::All => "all_reflections",
            Self::Simple => "simple_reflections",
            Self::LastColumn => "last_column",
        })
    }
}

/// Reflection indices selected by `set`.
pub fn select_reflections(sys: &CoxeterSystem, set: GeneratorSet) -> Result<Vec<usize>> {
    match set {
        GeneratorSet::All => Ok((0..sys.len()).collect()),
        GeneratorSet::Simple => Ok(sys.simple_indices().to_vec()),
        GeneratorSet::LastColumn => {
            let spec = sys.spec();
            if spec.family() != crate::coxeter::Family::A {
                return Err(Error::InvalidSelector {
                    selector: set.to_string(),
                    type_string: spec.to_string(),
                });
            }
            let n = spec.rank_or_order() + 1;
            Ok((1..n).map(|i| sys.transposition(i, n)).collect())
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub label: String,
    pub m: Rational,
    pub prime: u64,
    pub generators: usize,
    pub n: usize,
    pub outcome: ClosureOutcome,
    pub seconds: f64,
}

impl Verification for ClosureReport {
    fn passed(&self) -> bool {
        self.outcome.dimension == self.outcome.target
    }

    fn details(&self) -> Value {
        json!({
            "generator_set": self.label,
            "m": format_rational(&self.m),
            "prime": self.prime,
            "generators": self.generators,
            "n": self.n,
            "dimension": self.outcome.dimension,
            "target": self.outcome.target,
            "saturated": self.outcome.saturated,
            "brackets": self.outcome.brackets,
            "seconds": self.seconds,
        })
    }
}

fn run_closure(
    label: String,
    mats: &[RationalMatrix],
    m: &Rational,
    p: u64,
    opts: &ClosureOptions,
) -> Result<ClosureReport> {
    validate_prime(p)?;
    check_parameter_mod_p(m, p)?;
    let gens = mats
        .iter()
        .map(|x| reduce_mod_p(x, p))
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    let outcome = closure_dimension_with(&gens, opts)?;
    Ok(ClosureReport {
        label,
        m: m.clone(),
        prime: p,
        generators: gens.len(),
        n: mats.first().map_or(0, RationalMatrix::rows),
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Closure of `{τ_s : s ∈ set}` modulo `p` compared with `N²`.
pub fn check_surjectivity(
    sys: &CoxeterSystem,
    set: GeneratorSet,
    m: &Rational,
    p: u64,
    opts: &ClosureOptions,
) -> Result<ClosureReport> {
    if !sys.is_ade() {
        return Err(Error::WrongType {
            expected: "A, D or E".into(),
            got: sys.spec().to_string(),
        });
    }
    let idx = select_reflections(sys, set)?;
    let mats: Vec<RationalMatrix> = idx.iter().map(|&s| tau(sys, s, m)).collect();
    run_closure(set.to_string(), &mats, m, p, opts)
}

/// One matrix per source generator: the sum of `τ` over its image set.
pub fn folded_generators(
    sys: &CoxeterSystem,
    fold: &FoldingMap,
    m: &Rational,
) -> Result<Vec<RationalMatrix>> {
    Ok(fold
        .image_reflections(sys)?
        .iter()
        .map(|set| tau_sum(sys, set, m))
        .collect())
}

/// Splitting of `V` for `E_6` by the diagram automorphism `γ`.
#[derive(Clone, Debug)]
pub struct F4Split {
    /// `v_s` for fixed `s`, then `v_s + v_{γ s}` per two-element orbit.
    pub plus_basis: Vec<Vec<Rational>>,
    /// `v_s - v_{γ s}` per orbit.
    pub minus_basis: Vec<Vec<Rational>>,
    /// Folded generators in the `plus_basis` coordinates.
    pub restricted: Vec<RationalMatrix>,
}

/// Restricts a matrix to a subspace spanned by vectors with disjoint
/// supports; `reps[k]` is a coordinate where only `basis[k]` is nonzero.
fn restrict_to(
    g: &RationalMatrix,
    basis: &[Vec<Rational>],
    reps: &[usize],
    generator: usize,
    label: &str,
) -> Result<RationalMatrix> {
    let k = basis.len();
    let mut out = RationalMatrix::zeros(k, k);
    for (j, b) in basis.iter().enumerate() {
        let img = g.mul_vec(b);
        let coeffs: Vec<Rational> = reps
            .iter()
            .zip(basis)
            .map(|(&r, br)| &img[r] / &br[r])
            .collect();
        let mut rebuilt = vec![Rational::zero(); img.len()];
        for (c, br) in coeffs.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            for (x, y) in rebuilt.iter_mut().zip(br) {
                *x += c * y;
            }
        }
        if rebuilt != img {
            return Err(Error::StabilityFailure {
                generator,
                block: label.into(),
            });
        }
        for (i, c) in coeffs.into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Ok(out)
}

pub fn f4_split(sys: &CoxeterSystem, m: &Rational) -> Result<F4Split> {
    let gamma = sys.diagram_automorphism_e6()?;
    let n = sys.len();
    let unit = |k: usize| {
        let mut v = vec![Rational::zero(); n];
        v[k] = Rational::one();
        v
    };
    let mut plus = Vec::new();
    let mut plus_reps = Vec::new();
    let mut minus = Vec::new();
    let mut minus_reps = Vec::new();
    for s in (0..n).filter(|&s| gamma[s] == s) {
        plus.push(unit(s));
        plus_reps.push(s);
    }
    for s in (0..n).filter(|&s| gamma[s] > s) {
        let (a, b) = (unit(s), unit(gamma[s]));
        plus.push(a.iter().zip(&b).map(|(x, y)| x + y).collect());
        plus_reps.push(s);
        minus.push(a.iter().zip(&b).map(|(x, y)| x - y).collect());
        minus_reps.push(s);
    }
    let gens = folded_generators(sys, &folding_table(FoldSource::F4), m)?;
    let mut restricted = Vec::new();
    for (k, g) in gens.iter().enumerate() {
        restricted.push(restrict_to(g, &plus, &plus_reps, k + 1, "plus")?);
        restrict_to(g, &minus, &minus_reps, k + 1, "minus")?;
    }
    Ok(F4Split {
        plus_basis: plus,
        minus_basis: minus,
        restricted,
    })
}

/// Closure of the folded generators: `F4` on the 24-dimensional block of
/// `E_6`, `H3` in `D_6`, `H4` in `E_8`.
pub fn check_folded_surjectivity(
    source: FoldSource,
    m: &Rational,
    p: u64,
    opts: &ClosureOptions,
) -> Result<ClosureReport> {
    let fold = folding_table(source);
    let sys = build_system(fold.target)?;
    let mats = match source {
        FoldSource::F4 => f4_split(&sys, m)?.restricted,
        _ => folded_generators(&sys, &fold, m)?,
    };
    run_closure(
        format!("folded {source} in {}", fold.target),
        &mats,
        m,
        p,
        opts,
    )
}

/// Lie closure dimension of rational matrices, exact; for small sizes.
pub fn rational_closure_dimension(generators: &[RationalMatrix]) -> usize {
    let mut basis: Vec<RationalMatrix> = Vec::new();
    let mut queue: Vec<RationalMatrix> = generators.to_vec();
    let rank_of = |b: &[RationalMatrix]| -> usize {
        if b.is_empty() {
            return 0;
        }
        let cols: Vec<Vec<Rational>> = b.iter().map(|x| x.entries().to_vec()).collect();
        RationalMatrix::from_columns(&cols, cols[0].len()).rank()
    };
    while let Some(x) = queue.pop() {
        let mut trial = basis.clone();
        trial.push(x.clone());
        if rank_of(&trial) > basis.len() {
            basis = trial;
            for g in generators {
                queue.push(x.bracket(g));
            }
        }
    }
    basis.len()
}

/// `2x2` matrices with entries in `Q[c]`.
type PolyMatrix2 = [[UnivariatePolynomial; 2]; 2];

fn poly_bracket(a: &PolyMatrix2, b: &PolyMatrix2) -> PolyMatrix2 {
    let prod = |x: &PolyMatrix2, y: &PolyMatrix2| -> PolyMatrix2 {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| &(&x[i][0] * &y[0][j]) + &(&x[i][1] * &y[1][j]))
        })
    };
    let (ab, ba) = (prod(a, b), prod(b, a));
    std::array::from_fn(|i| std::array::from_fn(|j| &ab[i][j] - &ba[i][j]))
}

fn flatten(a: &PolyMatrix2) -> Vec<UnivariatePolynomial> {
    vec![
        a[0][0].clone(),
        a[0][1].clone(),
        a[1][0].clone(),
        a[1][1].clone(),
    ]
}

/// Rank over `Q(c)` of polynomial row vectors, by fraction-free elimination.
fn poly_rank(rows: &[Vec<UnivariatePolynomial>]) -> usize {
    let mut a: Vec<Vec<UnivariatePolynomial>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..a.len() {
            if a[r][c].is_zero() {
                continue;
            }
            let (f, g) = (a[rank][c].clone(), a[r][c].clone());
            for k in c..cols {
                a[r][k] = &(&a[r][k] * &f) - &(&a[rank][k] * &g);
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant of a square polynomial matrix by cofactor expansion.
fn poly_det(m: &[Vec<UnivariatePolynomial>]) -> UnivariatePolynomial {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = UnivariatePolynomial::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<UnivariatePolynomial>> = m[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &poly_det(&minor);
        acc = if j % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// Rational roots of a nonzero polynomial, by the rational root theorem.
fn rational_roots(p: &UnivariatePolynomial) -> Vec<Rational> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let mut q = p.clone();
    let mut roots = Vec::new();
    while q.degree().unwrap_or(0) > 0 && q.coeffs()[0].is_zero() {
        if !roots.contains(&rat(0)) {
            roots.push(rat(0));
        }
        q = q.deflate(&rat(0)).0;
    }
    let Some(deg) = q.degree() else { return roots };
    if deg == 0 {
        return roots;
    }
    let l = q
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = q
        .coeffs()
        .iter()
        .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let divisors = |x: &BigInt| -> Vec<i64> {
        let x = x.abs().to_i64().expect("small coefficient");
        (1..=x).filter(|d| x % d == 0).collect()
    };
    for a in divisors(&ints[0]) {
        for b in divisors(&ints[deg]) {
            for sign in [1, -1] {
                let r = Rational::new(BigInt::from(sign * a), BigInt::from(b));
                if q.eval(&r).is_zero() && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Specialization at `c` of a polynomial `2x2` matrix.
fn specialize(a: &PolyMatrix2, c: &Rational) -> RationalMatrix {
    RationalMatrix::from_fn(2, 2, |i, j| a[i][j].eval(c))
}

#[derive(Clone, Debug)]
pub struct BurauReport {
    pub generic_dimension: usize,
    /// Determinant of the generic basis, a polynomial in `c`.
    pub basis_determinant: UnivariatePolynomial,
    /// `(c, closure dimension at c)` for each rational root of the determinant.
    pub exceptional: Vec<(Rational, usize)>,
    /// Closure dimension at `c = -1`.
    pub at_minus_one: usize,
}

impl Verification for BurauReport {
    fn passed(&self) -> bool {
        self.generic_dimension == 4
    }

    fn details(&self) -> Value {
        json!({
            "generic_dimension": self.generic_dimension,
            "basis_determinant_in_c": self.basis_determinant.to_string(),
            "exceptional": self.exceptional.iter().map(|(c, d)| json!({
                "c": format_rational(c),
                "dimension": d,
            })).collect::<Vec<_>>(),
            "dimension_at_c_minus_one": self.at_minus_one,
        })
    }
}

/// Lie closure over `Q(c)` of `[[0, 0], [-c, 2]]` and `[[2, -c], [0, 0]]`,
/// with the values of `c` where the generic basis degenerates and the
/// closure dimension actually reached there.
pub fn burau_dihedral_closure() -> BurauReport {
    let k = |x: i64| UnivariatePolynomial::constant(rat(x));
    let minus_c = UnivariatePolynomial::new(vec![rat(0), rat(-1)]);
    let s: PolyMatrix2 = [[k(0), k(0)], [minus_c.clone(), k(2)]];
    let t: PolyMatrix2 = [[k(2), minus_c], [k(0), k(0)]];
    let gens = [s.clone(), t.clone()];
    let mut basis: Vec<PolyMatrix2> = Vec::new();
    let mut queue: Vec<PolyMatrix2> = gens.to_vec();
    while let Some(x) = queue.pop() {
        if basis.len() == 4 {
            break;
        }
        let mut rows: Vec<Vec<UnivariatePolynomial>> = basis.iter().map(flatten).collect();
        rows.push(flatten(&x));
        if poly_rank(&rows) > basis.len() {
            for g in &gens {
                queue.insert(0, poly_bracket(&x, g));
            }
            basis.push(x);
        }
    }
    let generic_dimension = basis.len();
    let det = if generic_dimension == 4 {
        poly_det(&basis.iter().map(flatten).collect::<Vec<_>>())
    } else {
        UnivariatePolynomial::zero()
    };
    let closure_at =
        |c: &Rational| rational_closure_dimension(&[specialize(&s, c), specialize(&t, c)]);
    let exceptional = if det.is_zero() {
        Vec::new()
    } else {
        rational_roots(&det)
            .into_iter()
            .map(|c| {
                let d = closure_at(&c);
                (c, d)
            })
            .collect()
    };
    BurauReport {
        generic_dimension,
        basis_determinant: det,
        exceptional,
        at_minus_one: closure_at(&rat(-1)),
    }
}

/// Folding images as a list of sets of reflection indices, for reports.
pub fn folding_summary(source: FoldSource) -> Result<(TypeSpec, Vec<Vec<usize>>)> {
    let fold = folding_table(source);
    Ok((fold.target, fold.generator_images))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sys(s: &str) -> CoxeterSystem {
        build_system(s.parse().unwrap()).unwrap()
    }

    fn opts() -> ClosureOptions<'static> {
        ClosureOptions::default()
    }

    #[test]
    fn reduction_mod_p() {
        let a2 = sys("A2");
        let (s1, s2) = (a2.simple(1), a2.simple(2));
        let s3 = a2.conjugate(s1, s2);
        let t = reduce_mod_p(&tau(&a2, s1, &rat(7)), 19).unwrap();
        let idx = [s1, s2, s3];
        let reordered: Vec<u8> = (0..9).map(|k| t.get(idx[k / 3], idx[k % 3])).collect();
        assert_eq!(reordered, vec![7, 18, 18, 0, 0, 1, 0, 1, 0]);
        assert_eq!(
            reduce_mod_p(&RationalMatrix::identity(4), 19).unwrap(),
            PrimeFieldMatrix::identity(19, 4).unwrap()
        );
        let bad = RationalMatrix::scalar(2, &crate::matrix::ratio(1, 19));
        assert!(matches!(
            reduce_mod_p(&bad, 19),
            Err(Error::BadPrime { .. })
        ));
        assert!(matches!(validate_prime(3), Err(Error::BadPrime { .. })));
        assert!(matches!(validate_prime(21), Err(Error::BadPrime { .. })));
        assert!(matches!(validate_prime(257), Err(Error::BadPrime { .. })));
    }

    #[test]
    fn trivial_closures() {
        let id = PrimeFieldMatrix::identity(19, 3).unwrap();
        let out = closure_dimension(&[id], None).unwrap();
        assert_eq!(out.dimension, 1);
        assert!(out.saturated);
        let a = PrimeFieldMatrix::identity(19, 3).unwrap();
        let b = PrimeFieldMatrix::identity(23, 3).unwrap();
        assert!(matches!(
            closure_dimension(&[a, b], None),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn basis_invariant_and_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut b = ClosureBasis::new(19, 3).unwrap();
        let vecs: Vec<Vec<u8>> = (0..6)
            .map(|_| (0..9).map(|_| rng.gen_range(0..19)).collect())
            .collect();
        for v in &vecs {
            b.insert(v);
            assert!(b.check_invariant());
        }
        assert!(vecs.iter().all(|v| b.contains(v)));
        let sum: Vec<u8> = vecs[0]
            .iter()
            .zip(&vecs[1])
            .map(|(x, y)| (x + y) % 19)
            .collect();
        assert!(b.contains(&sum));
    }

    #[test]
    fn small_surjectivity() {
        let r = check_surjectivity(&sys("A2"), GeneratorSet::Simple, &rat(7), 19, &opts()).unwrap();
        assert_eq!(r.outcome.dimension, 9);
        let r = check_surjectivity(&sys("A3"), GeneratorSet::Simple, &rat(7), 19, &opts()).unwrap();
        assert_eq!(r.outcome.dimension, 36);
        assert!(r.passed());
        let r =
            check_surjectivity(&sys("A4"), GeneratorSet::LastColumn, &rat(8), 19, &opts()).unwrap();
        assert_eq!(r.outcome.dimension, 100);
        assert!(matches!(
            select_reflections(&sys("D4"), GeneratorSet::LastColumn),
            Err(Error::InvalidSelector { .. })
        ));
    }

    #[test]
    fn budget_is_reported() {
        let a4 = sys("A4");
        let gens: Vec<PrimeFieldMatrix> = a4
            .simple_indices()
            .iter()
            .map(|&s| reduce_mod_p(&tau(&a4, s, &rat(8)), 19).unwrap())
            .collect();
        let out = closure_dimension(&gens, Some(8)).unwrap();
        assert!(!out.saturated);
        assert!(out.dimension < 100);
    }

    #[test]
    fn conjugation_invariance() {
        let a3 = sys("A3");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gens: Vec<PrimeFieldMatrix> = [0usize, 1]
            .iter()
            .map(|&s| reduce_mod_p(&tau(&a3, s, &rat(7)), 19).unwrap())
            .collect();
        let base = closure_dimension(&gens, None).unwrap().dimension;
        let q = loop {
            let q = PrimeFieldMatrix::from_fn(19, 6, |_, _| rng.gen_range(0..19)).unwrap();
            if q.inverse().is_some() {
                break q;
            }
        };
        let qi = q.inverse().unwrap();
        let conj: Vec<PrimeFieldMatrix> = gens.iter().map(|g| q.mul(g).mul(&qi)).collect();
        assert_eq!(closure_dimension(&conj, None).unwrap().dimension, base);
    }

    #[test]
    fn folded_generator_images() {
        let d6 = sys("D6");
        let gens = folded_generators(&d6, &folding_table(FoldSource::H3), &rat(5)).unwrap();
        assert_eq!(
            gens[0],
            &tau(&d6, d6.simple(4), &rat(5)) + &tau(&d6, d6.simple(1), &rat(5))
        );
        let e6 = sys("E6");
        let gens = folded_generators(&e6, &folding_table(FoldSource::F4), &rat(5)).unwrap();
        assert_eq!(gens[0], tau(&e6, e6.simple(2), &rat(5)));
    }

    #[test]
    fn f4_split_dimensions() {
        let e6 = sys("E6");
        let split = f4_split(&e6, &rat(5)).unwrap();
        assert_eq!(split.plus_basis.len(), 24);
        assert_eq!(split.minus_basis.len(), 12);
        assert!(split
            .restricted
            .iter()
            .all(|g| g.rows() == 24 && g.cols() == 24));
        let g = crate::form::form_matrix(&e6, &rat(5));
        for a in &split.plus_basis {
            for b in &split.minus_basis {
                assert!(crate::matrix::form_value(&g, a, b).is_zero());
            }
        }
    }

    #[test]
    fn h3_folded_closure() {
        let r = check_folded_surjectivity(FoldSource::H3, &rat(7), 19, &opts()).unwrap();
        assert_eq!(r.outcome.dimension, 900);
        // 5 is a root of the D_6 discriminant: the radical of the form is stable
        let r = check_folded_surjectivity(FoldSource::H3, &rat(5), 19, &opts()).unwrap();
        assert_eq!(r.outcome.dimension, 774);
    }

    #[test]
    fn burau() {
        let r = burau_dihedral_closure();
        assert_eq!(r.generic_dimension, 4);
        assert_eq!(r.at_minus_one, 4);
        let cs: Vec<Rational> = r.exceptional.iter().map(|(c, _)| c.clone()).collect();
        assert!(cs.contains(&rat(0)));
        let at_zero = r.exceptional.iter().find(|(c, _)| c.is_zero()).unwrap().1;
        assert_eq!(at_zero, 2);
    }

    #[test]
    fn rational_closure_matches_mod_p_on_a2() {
        let a2 = sys("A2");
        let gens: Vec<RationalMatrix> = a2
            .simple_indices()
            .iter()
            .map(|&s| tau(&a2, s, &rat(7)))
            .collect();
        assert_eq!(rational_closure_dimension(&gens), 9);
    }
}
