//! Infinitesimal braid relations on codimension-2 flats, spectra of
//! `τ_{s0} + τ_{si} + τ_{sj}`, the adapted `w`-basis, and vanishing of
//! `p_{si} p_{sj}` on commuting pairs.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coxeter::{CoxeterSystem, DihedralType};
use crate::error::{Error, Result};
use crate::krammer::{eigen_multiplicity, p_op, tau, tau_sum, w_action};
use crate::matrix::{combine, format_rational, rat, Rational, RationalMatrix};
use crate::report::Verification;

fn require_ade(sys: &CoxeterSystem) -> Result<()> {
    if sys.is_ade() {
        Ok(())
    } else {
        Err(Error::WrongType {
            expected: "A, D or E".into(),
            got: sys.spec().to_string(),
        })
    }
}

/// Pairs `(i, j)`, `i < j`, of 1-based simple nodes whose reflections do
/// not commute.
pub fn adjacent_simple_pairs(sys: &CoxeterSystem) -> Vec<(usize, usize)> {
    let r = sys.simple_indices().len();
    let mut out = Vec::new();
    for i in 1..=r {
        for j in i + 1..=r {
            if !sys.commute(sys.simple(i), sys.simple(j)) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Pairs of distinct commuting simple nodes, `i < j`.
pub fn commuting_simple_pairs(sys: &CoxeterSystem) -> Vec<(usize, usize)> {
    let r = sys.simple_indices().len();
    let mut out = Vec::new();
    for i in 1..=r {
        for j in i + 1..=r {
            if sys.commute(sys.simple(i), sys.simple(j)) {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FlatReport {
    pub m: Rational,
    pub flats: usize,
    /// `(flat members, s)` with `[τ_s, τ_X] ≠ 0`.
    pub commutator_failures: Vec<(Vec<usize>, usize)>,
    /// Flats on which `τ_X` is not the expected scalar on `E_X`.
    pub scalar_failures: Vec<Vec<usize>>,
}

impl Verification for FlatReport {
    fn passed(&self) -> bool {
        self.commutator_failures.is_empty() && self.scalar_failures.is_empty()
    }

    fn details(&self) -> Value {
        json!({
            "m": format_rational(&self.m),
            "flats": self.flats,
            "commutator_failures": self.commutator_failures,
            "scalar_failures": self.scalar_failures,
        })
    }
}

/// `[τ_s, τ_X] = 0` for every flat `X` and `s ∈ R_X`; `τ_X` restricted to
/// `E_X` is `(m+1)` on `I2(2)` flats and `m` on `I2(3)` flats.
pub fn verify_flat_relations(sys: &CoxeterSystem, m: &Rational) -> Result<FlatReport> {
    require_ade(sys)?;
    let flats = sys.codim2_flats()?;
    let taus: Vec<RationalMatrix> = (0..sys.len()).map(|s| tau(sys, s, m)).collect();
    let mut commutator_failures = Vec::new();
    let mut scalar_failures = Vec::new();
    for flat in &flats {
        let members = &flat.reflection_indices;
        let tx = members
            .iter()
            .skip(1)
            .fold(taus[members[0]].clone(), |acc, &u| &acc + &taus[u]);
        for &s in members {
            if !taus[s].bracket(&tx).is_zero() {
                commutator_failures.push((members.clone(), s));
            }
        }
        let lambda = match flat.dihedral_type {
            DihedralType::I2_2 => m + Rational::one(),
            DihedralType::I2_3 => m.clone(),
        };
        let scalar_ok = members.iter().all(|&u| {
            let col = tx.column(u);
            col.iter()
                .enumerate()
                .all(|(i, x)| if i == u { *x == lambda } else { x.is_zero() })
        });
        if !scalar_ok {
            scalar_failures.push(members.clone());
        }
    }
    Ok(FlatReport {
        m: m.clone(),
        flats: flats.len(),
        commutator_failures,
        scalar_failures,
    })
}

/// Reflections of the triple `s0 = si•sj, si, sj`.
fn triple(sys: &CoxeterSystem, i: usize, j: usize) -> Result<[usize; 3]> {
    let r = sys.simple_indices().len();
    if i == 0 || j == 0 || i > r || j > r || i == j {
        return Err(Error::InvalidSelector {
            selector: format!("simple pair ({i}, {j})"),
            type_string: sys.spec().to_string(),
        });
    }
    let (si, sj) = (sys.simple(i), sys.simple(j));
    if sys.commute(si, sj) {
        return Err(Error::InvalidSelector {
            selector: format!("non-adjacent simple pair ({i}, {j})"),
            type_string: sys.spec().to_string(),
        });
    }
    Ok([sys.conjugate(si, sj), si, sj])
}

fn check_pole(m: &Rational) -> Result<()> {
    if m.is_zero() || *m == rat(3) {
        Err(Error::PoleParameter(format!(
            "m = {} is a pole of the w-basis",
            format_rational(m)
        )))
    } else {
        Ok(())
    }
}

/// How a reflection sits relative to the triple `{s0, si, sj}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleClassification {
    pub in_triple: Vec<usize>,
    pub commuting_all: Vec<usize>,
    /// Orbits `[u, si•u, sj•u]` with `u` commuting with `s0`.
    pub orbits: Vec<[usize; 3]>,
    /// Reflections commuting with none (or exactly two) of the triple.
    pub orphans: Vec<usize>,
}

pub fn classify_against_triple(sys: &CoxeterSystem, t: [usize; 3]) -> TripleClassification {
    let [s0, si, sj] = t;
    let mut c = TripleClassification::default();
    for x in 0..sys.len() {
        if t.contains(&x) {
            c.in_triple.push(x);
            continue;
        }
        let k = t.iter().filter(|&&s| sys.commute(s, x)).count();
        match k {
            3 => c.commuting_all.push(x),
            1 if sys.commute(s0, x) => {
                c.orbits
                    .push([x, sys.conjugate(si, x), sys.conjugate(sj, x)])
            }
            1 => {}
            _ => c.orphans.push(x),
        }
    }
    c
}

#[derive(Clone, Debug)]
pub struct TripleSpectrum {
    pub pair: (usize, usize),
    pub m: Rational,
    /// Observed multiplicities keyed by eigenvalue.
    pub multiplicities: Vec<(Rational, usize)>,
    /// Multiplicities predicted from the orbit structure
    /// (`m:3`, `3: #commuting + #orbits`, `0: 2 #orbits`, `-3: 0`).
    pub predicted: Vec<(Rational, usize)>,
    pub n: usize,
}

impl TripleSpectrum {
    pub fn multiplicity(&self, lambda: &Rational) -> usize {
        self.multiplicities
            .iter()
            .find(|(l, _)| l == lambda)
            .map_or(0, |(_, k)| *k)
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().map(|(_, k)| k).sum()
    }

    pub fn matches_prediction(&self) -> bool {
        self.predicted
            .iter()
            .all(|(l, k)| self.multiplicity(l) == *k)
    }
}

impl Verification for TripleSpectrum {
    fn passed(&self) -> bool {
        self.total() == self.n && self.multiplicity(&self.m) >= 3.min(self.n)
    }

    fn details(&self) -> Value {
        let fmt = |v: &[(Rational, usize)]| -> BTreeMap<String, usize> {
            v.iter().map(|(l, k)| (format_rational(l), *k)).collect()
        };
        json!({
            "pair": [self.pair.0, self.pair.1],
            "m": format_rational(&self.m),
            "multiplicities": fmt(&self.multiplicities),
            "predicted": fmt(&self.predicted),
            "matches_prediction": self.matches_prediction(),
            "minus_three": self.multiplicity(&rat(-3)),
            "total": self.total(),
            "n": self.n,
        })
    }
}

/// Spectrum of `T' = τ_{s0} + τ_{si} + τ_{sj}` by exact rank deficiencies at
/// `λ ∈ {3, -3, 0, m}`. Fails with `SpectrumEscape` when these do not
/// account for all of `V`.
pub fn triple_spectrum(
    sys: &CoxeterSystem,
    i: usize,
    j: usize,
    m: &Rational,
) -> Result<TripleSpectrum> {
    require_ade(sys)?;
    check_pole(m)?;
    let t = triple(sys, i, j)?;
    let tp = tau_sum(sys, &t, m);
    let mut lambdas = vec![m.clone(), rat(3), rat(0), rat(-3)];
    if *m == rat(-3) {
        lambdas.truncate(3);
    }
    let multiplicities: Vec<(Rational, usize)> = lambdas
        .into_iter()
        .map(|l| {
            let k = eigen_multiplicity(&tp, &l);
            (l, k)
        })
        .collect();
    let cls = classify_against_triple(sys, t);
    let o = cls.orbits.len();
    let predicted = vec![
        (m.clone(), 3),
        (rat(3), cls.commuting_all.len() + o),
        (rat(0), 2 * o),
        (rat(-3), 0),
    ];
    let spec = TripleSpectrum {
        pair: (i, j),
        m: m.clone(),
        multiplicities,
        predicted,
        n: sys.len(),
    };
    if spec.total() != spec.n {
        return Err(Error::SpectrumEscape {
            found: spec.total(),
            expected: spec.n,
        });
    }
    Ok(spec)
}

#[derive(Clone, Debug)]
pub struct WBasisReport {
    pub pair: (usize, usize),
    pub m: Rational,
    pub classification: TripleClassification,
    /// Column `x` is `w_x`.
    pub basis: RationalMatrix,
    pub is_basis: bool,
    /// `(s, x)` with `τ_s w_x ≠ w_{s•x}`.
    pub action_failures: Vec<(usize, usize)>,
}

impl Verification for WBasisReport {
    fn passed(&self) -> bool {
        self.is_basis && self.action_failures.is_empty() && self.classification.orphans.is_empty()
    }

    fn details(&self) -> Value {
        json!({
            "pair": [self.pair.0, self.pair.1],
            "m": format_rational(&self.m),
            "commuting_all": self.classification.commuting_all.len(),
            "orbits": self.classification.orbits.len(),
            "orphans": self.classification.orphans,
            "is_basis": self.is_basis,
            "action_failures": self.action_failures,
        })
    }
}

/// Builds `w_x` for every reflection, checks it is a basis, that the
/// classification leaves no orphan, and that `τ_s w_x = w_{s•x}` for `s` in
/// the triple and `x` in each orbit.
pub fn w_basis(sys: &CoxeterSystem, i: usize, j: usize, m: &Rational) -> Result<WBasisReport> {
    require_ade(sys)?;
    check_pole(m)?;
    let t = triple(sys, i, j)?;
    let [s0, si, sj] = t;
    let cls = classify_against_triple(sys, t);
    if let Some(&x) = cls.orphans.first() {
        return Err(Error::OrphanReflection(x));
    }
    let n = sys.len();
    let e = |k: usize| {
        let mut v = vec![Rational::zero(); n];
        v[k] = Rational::one();
        v
    };
    let denom = m * (m - rat(3));
    let a = rat(2) / &denom;
    let b = (m - Rational::one()) / &denom;
    let mut cols: Vec<Vec<Rational>> = (0..n).map(e).collect();
    for orbit in &cls.orbits {
        let [u, _, _] = *orbit;
        let (vu, v0, vi, vj) = (e(u), e(s0), e(si), e(sj));
        let wu = combine(&[
            (rat(1), &vu),
            (a.clone(), &v0),
            (b.clone(), &vi),
            (b.clone(), &vj),
        ]);
        let wi = w_action(sys, si).mul_vec(&wu);
        let wj = w_action(sys, sj).mul_vec(&wu);
        cols[orbit[0]] = wu;
        cols[orbit[1]] = wi;
        cols[orbit[2]] = wj;
    }
    let basis = RationalMatrix::from_columns(&cols, n);
    let is_basis = basis.rank() == n;
    let mut action_failures = Vec::new();
    for &s in &t {
        let ts = tau(sys, s, m);
        for x in cls.orbits.iter().flatten() {
            if ts.mul_vec(&cols[*x]) != cols[sys.conjugate(s, *x)] {
                action_failures.push((s, *x));
            }
        }
    }
    Ok(WBasisReport {
        pair: (i, j),
        m: m.clone(),
        classification: cls,
        basis,
        is_basis,
        action_failures,
    })
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub pair: (usize, usize),
    pub samples: Vec<Rational>,
    /// Sample values where the product is nonzero.
    pub failures: Vec<Rational>,
}

impl Verification for VanishingReport {
    fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn details(&self) -> Value {
        json!({
            "pair": [self.pair.0, self.pair.1],
            "samples": self.samples.iter().map(format_rational).collect::<Vec<_>>(),
            "failures": self.failures.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

/// `(si - τ_{si})(sj - τ_{sj}) = p_{si} p_{sj} = 0` for commuting simple
/// `si, sj`, at `m` and at enough further points to certify the identity.
pub fn verify_commuting_product_vanishes(
    sys: &CoxeterSystem,
    i: usize,
    j: usize,
    m: &Rational,
) -> Result<VanishingReport> {
    require_ade(sys)?;
    let r = sys.simple_indices().len();
    if r < 3 {
        return Err(Error::NoCommutingPair(sys.spec().to_string()));
    }
    if i == 0 || j == 0 || i > r || j > r || i == j || !sys.commute(sys.simple(i), sys.simple(j)) {
        return Err(Error::NoCommutingPair(format!(
            "{}: simple nodes {i} and {j} are not a commuting pair",
            sys.spec()
        )));
    }
    let (si, sj) = (sys.simple(i), sys.simple(j));
    let mut samples = vec![m.clone()];
    for x in [2, 5, 7] {
        if samples.len() < 3 && !samples.contains(&rat(x)) {
            samples.push(rat(x));
        }
    }
    let failures = samples
        .iter()
        .filter(|m| {
            let a = &w_action(sys, si) - &tau(sys, si, m);
            let b = &w_action(sys, sj) - &tau(sys, sj, m);
            !(&a * &b).is_zero()
        })
        .cloned()
        .collect();
    Ok(VanishingReport {
        pair: (i, j),
        samples,
        failures,
    })
}

/// `p_s p_u = 0` for every commuting pair of distinct reflections; returns
/// the offending pairs.
pub fn commuting_products_all_pairs(sys: &CoxeterSystem, m: &Rational) -> Vec<(usize, usize)> {
    let ps: Vec<RationalMatrix> = (0..sys.len()).map(|s| p_op(sys, s, m)).collect();
    let mut bad = Vec::new();
    for s in 0..sys.len() {
        for u in 0..sys.len() {
            if s != u && sys.commute(s, u) && !(&ps[s] * &ps[u]).is_zero() {
                bad.push((s, u));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::build_system;

    fn sys(s: &str) -> CoxeterSystem {
        build_system(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn flats_a2_and_a3() {
        let a2 = sys("A2");
        let r = verify_flat_relations(&a2, &rat(5)).unwrap();
        assert!(r.passed());
        assert_eq!(r.flats, 1);
        assert_eq!(
            tau_sum(&a2, &[0, 1, 2], &rat(5)),
            RationalMatrix::scalar(3, &rat(5))
        );
        for m in [2, 5, 7] {
            let r = verify_flat_relations(&sys("A3"), &rat(m)).unwrap();
            assert!(r.passed());
            assert_eq!(r.flats, 7);
        }
    }

    #[test]
    fn flat_scalar_on_commuting_pair_d4() {
        let d4 = sys("D4");
        let (a, b) = (d4.simple(1), d4.simple(2));
        let m = rat(6);
        let tx = &tau(&d4, a, &m) + &tau(&d4, b, &m);
        assert_eq!(
            tx.principal_submatrix(&[a, b]),
            RationalMatrix::scalar(2, &rat(7))
        );
    }

    #[test]
    fn triple_a2_is_scalar() {
        let s = triple_spectrum(&sys("A2"), 1, 2, &rat(7)).unwrap();
        assert_eq!(s.multiplicity(&rat(7)), 3);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn triple_a3() {
        let a3 = sys("A3");
        let s = triple_spectrum(&a3, 1, 2, &rat(7)).unwrap();
        assert!(s.passed());
        assert_eq!(s.multiplicity(&rat(7)), 3);
        assert!(s.matches_prediction());
        assert!(matches!(
            triple_spectrum(&a3, 1, 2, &rat(3)),
            Err(Error::PoleParameter(_))
        ));
        assert!(matches!(
            triple_spectrum(&a3, 1, 3, &rat(5)),
            Err(Error::InvalidSelector { .. })
        ));
    }

    #[test]
    fn w_basis_a3() {
        let a3 = sys("A3");
        // (3 4) commutes with exactly one of (1 2), (2 3), (1 3)
        let t = triple(&a3, 1, 2).unwrap();
        let u = a3.transposition(3, 4);
        assert_eq!(t.iter().filter(|&&s| a3.commute(s, u)).count(), 1);
        let r = w_basis(&a3, 1, 2, &rat(7)).unwrap();
        assert!(r.passed(), "{}", r.details());
        assert_eq!(r.classification.orbits.len(), 1);
    }

    #[test]
    fn vanishing() {
        let a3 = sys("A3");
        assert!(verify_commuting_product_vanishes(&a3, 1, 3, &rat(2))
            .unwrap()
            .passed());
        assert!(verify_commuting_product_vanishes(&sys("D4"), 1, 2, &rat(5))
            .unwrap()
            .passed());
        assert!(matches!(
            verify_commuting_product_vanishes(&sys("A2"), 1, 2, &rat(5)),
            Err(Error::NoCommutingPair(_))
        ));
        assert!(commuting_products_all_pairs(&sys("D4"), &rat(5)).is_empty());
    }
}
