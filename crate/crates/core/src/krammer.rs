//! The infinitesimal Krammer operators `τ_s`, the rank-one parts `p_s`, and
//! the action of the reflections on `V = span{v_s}`.
//!
//! Matrices act on column vectors: column `u` of `τ_s` is `τ_s · v_u`
//! written in the reflection-ordered basis.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coxeter::CoxeterSystem;
use crate::error::{Error, Result};
use crate::matrix::{format_rational, rat, Rational, RationalMatrix};
use crate::report::Verification;

/// Sample values of `m` used to certify polynomial identities.
pub const DEFAULT_SAMPLE_POINTS: [i64; 4] = [2, 5, 7, 11];

pub fn default_samples() -> Vec<Rational> {
    DEFAULT_SAMPLE_POINTS.iter().map(|&x| rat(x)).collect()
}

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

/// `τ_s`: `v_u ↦ v_{s•u} - v_s` if `s, u` do not commute, `v_u` if they
/// commute and differ, `m v_s` if `u = s`.
pub fn tau(sys: &CoxeterSystem, s: usize, m: &Rational) -> RationalMatrix {
    let n = sys.len();
    let mut t = RationalMatrix::zeros(n, n);
    for u in 0..n {
        if u == s {
            t[(s, s)] = m.clone();
        } else if sys.commute(s, u) {
            t[(u, u)] = Rational::one();
        } else {
            t[(sys.conjugate(s, u), u)] += Rational::one();
            t[(s, u)] -= Rational::one();
        }
    }
    t
}

/// `p_s = s - τ_s`.
pub fn p_op(sys: &CoxeterSystem, s: usize, m: &Rational) -> RationalMatrix {
    let n = sys.len();
    let mut p = RationalMatrix::zeros(n, n);
    for u in 0..n {
        if u == s {
            p[(s, s)] = Rational::one() - m;
        } else if !sys.commute(s, u) {
            p[(s, u)] = Rational::one();
        }
    }
    p
}

/// Permutation matrix of `v_u ↦ v_{s•u}`.
pub fn w_action(sys: &CoxeterSystem, s: usize) -> RationalMatrix {
    RationalMatrix::permutation(sys.conjugation_permutation(s))
}

/// Sum of `τ_u` over a set of reflections.
pub fn tau_sum(sys: &CoxeterSystem, set: &[usize], m: &Rational) -> RationalMatrix {
    let n = sys.len();
    set.iter().fold(RationalMatrix::zeros(n, n), |acc, &u| {
        &acc + &tau(sys, u, m)
    })
}

/// Geometric multiplicity `N - rank(M - λ I)`.
pub fn eigen_multiplicity(mat: &RationalMatrix, lambda: &Rational) -> usize {
    let n = mat.rows();
    n - (mat - &RationalMatrix::scalar(n, lambda)).rank()
}

/// Eigenvalue with its observed geometric multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigen {
    pub value: Rational,
    pub multiplicity: usize,
}

fn eigen_json(e: &[Eigen]) -> Value {
    Value::Array(
        e.iter()
            .map(|x| json!({"value": format_rational(&x.value), "multiplicity": x.multiplicity}))
            .collect(),
    )
}

#[derive(Clone, Debug)]
pub struct CubicReport {
    pub m: Rational,
    /// Reflections whose operator violates the cubic relation.
    pub cubic_failures: Vec<usize>,
    /// Observed multiplicities of `m, 1, -1` (absent when degenerate).
    pub spectrum: Option<Vec<Eigen>>,
    pub expected_spectrum: Option<Vec<Eigen>>,
    /// Reflections whose spectrum was examined.
    pub spectrum_checked: Vec<usize>,
    pub spectrum_failures: Vec<usize>,
}

impl Verification for CubicReport {
    fn passed(&self) -> bool {
        self.cubic_failures.is_empty() && self.spectrum_failures.is_empty()
    }

    fn degenerate(&self) -> bool {
        self.spectrum.is_none()
    }

    fn details(&self) -> Value {
        json!({
            "m": format_rational(&self.m),
            "cubic_failures": self.cubic_failures,
            "spectrum": self.spectrum.as_deref().map(eigen_json),
            "expected_spectrum": self.expected_spectrum.as_deref().map(eigen_json),
            "spectrum_checked": self.spectrum_checked.len(),
            "spectrum_failures": self.spectrum_failures,
        })
    }
}

/// Checks `τ_s³ - m τ_s² - τ_s + m = 0` for every reflection, and the
/// eigenvalue multiplicities `m:1, 1:c+c'/2, -1:c'/2` when `m ∉ {1, -1}`.
///
/// Spectra of conjugate reflections agree, so for `N > 40` only the first
/// reflection's spectrum is computed.
pub fn verify_cubic(sys: &CoxeterSystem, m: &Rational) -> Result<CubicReport> {
    require_ade(sys)?;
    let counts = sys.counts()?;
    let n = sys.len();
    let id = RationalMatrix::identity(n);
    let mut cubic_failures = Vec::new();
    for s in 0..n {
        let t = tau(sys, s, m);
        let t2 = &t * &t;
        let t3 = &t2 * &t;
        let lhs = &(&(&t3 - &t2.scale(m)) - &t) + &id.scale(m);
        if !lhs.is_zero() {
            cubic_failures.push(s);
        }
    }

    let degenerate = m.is_one() || *m == -Rational::one();
    let (mut spectrum, mut expected, mut checked, mut failures) =
        (None, None, Vec::new(), Vec::new());
    if !degenerate {
        let exp = vec![
            Eigen {
                value: m.clone(),
                multiplicity: 1,
            },
            Eigen {
                value: rat(1),
                multiplicity: counts.c + counts.c_prime / 2,
            },
            Eigen {
                value: rat(-1),
                multiplicity: counts.c_prime / 2,
            },
        ];
        checked = if n <= 40 { (0..n).collect() } else { vec![0] };
        for &s in &checked {
            let t = tau(sys, s, m);
            let obs: Vec<Eigen> = exp
                .iter()
                .map(|e| Eigen {
                    value: e.value.clone(),
                    multiplicity: eigen_multiplicity(&t, &e.value),
                })
                .collect();
            if obs != exp {
                failures.push(s);
            }
            if spectrum.is_none() {
                spectrum = Some(obs);
            }
        }
        expected = Some(exp);
    }
    Ok(CubicReport {
        m: m.clone(),
        cubic_failures,
        spectrum,
        expected_spectrum: expected,
        spectrum_checked: checked,
        spectrum_failures: failures,
    })
}

#[derive(Clone, Debug)]
pub struct CentralReport {
    pub m: Rational,
    pub expected_scalar: Rational,
    pub sum_is_scalar: bool,
    pub trace_failures: Vec<usize>,
    pub invariant_vector_failures: Vec<usize>,
}

impl Verification for CentralReport {
    fn passed(&self) -> bool {
        self.sum_is_scalar
            && self.trace_failures.is_empty()
            && self.invariant_vector_failures.is_empty()
    }

    fn details(&self) -> Value {
        json!({
            "m": format_rational(&self.m),
            "scalar": format_rational(&self.expected_scalar),
            "sum_is_scalar": self.sum_is_scalar,
            "trace_failures": self.trace_failures,
            "invariant_vector_failures": self.invariant_vector_failures,
        })
    }
}

/// `Σ τ_s = (m + c) I`, `tr τ_s = m + c`, and `τ_s v = (m - 1 - c') v_s + v`
/// for `v = Σ v_u`.
pub fn verify_central(sys: &CoxeterSystem, m: &Rational) -> Result<CentralReport> {
    require_ade(sys)?;
    let counts = sys.counts()?;
    let n = sys.len();
    let scalar = m + rat(counts.c as i64);
    let all: Vec<usize> = (0..n).collect();
    let sum = tau_sum(sys, &all, m);
    let sum_is_scalar = sum == RationalMatrix::scalar(n, &scalar);
    let ones = vec![Rational::one(); n];
    let coeff = m - rat(1 + counts.c_prime as i64);
    let mut trace_failures = Vec::new();
    let mut vec_failures = Vec::new();
    for s in 0..n {
        let t = tau(sys, s, m);
        if t.trace() != scalar {
            trace_failures.push(s);
        }
        let mut expected = ones.clone();
        expected[s] += &coeff;
        if t.mul_vec(&ones) != expected {
            vec_failures.push(s);
        }
    }
    Ok(CentralReport {
        m: m.clone(),
        expected_scalar: scalar,
        sum_is_scalar,
        trace_failures,
        invariant_vector_failures: vec_failures,
    })
}

#[derive(Clone, Debug)]
pub struct EquivarianceReport {
    pub samples: Vec<Rational>,
    /// `(m, s, u)` triples where `s τ_u s⁻¹ ≠ τ_{s•u}`.
    pub failures: Vec<(String, usize, usize)>,
    pub projector_failures: Vec<usize>,
}

impl Verification for EquivarianceReport {
    fn passed(&self) -> bool {
        self.failures.is_empty() && self.projector_failures.is_empty()
    }

    fn details(&self) -> Value {
        json!({
            "samples": self.samples.iter().map(format_rational).collect::<Vec<_>>(),
            "failures": self.failures,
            "projector_failures": self.projector_failures,
        })
    }
}

/// `w τ_u w⁻¹ = τ_{s•u}` for every pair, plus the `p_s` identities
/// (`p_s = s - τ_s`, `p_s² = (1-m) p_s`, `τ_s p_s = p_s τ_s = m p_s`,
/// `s p_s = p_s`), at each sample value of `m`.
pub fn verify_equivariance(
    sys: &CoxeterSystem,
    samples: &[Rational],
) -> Result<EquivarianceReport> {
    require_ade(sys)?;
    let n = sys.len();
    let mut failures = Vec::new();
    let mut projector_failures = Vec::new();
    for m in samples {
        let taus: Vec<RationalMatrix> = (0..n).map(|s| tau(sys, s, m)).collect();
        for s in 0..n {
            let perm = sys.conjugation_permutation(s);
            for u in 0..n {
                if taus[u].conjugate_by_permutation(perm) != taus[sys.conjugate(s, u)] {
                    failures.push((format_rational(m), s, u));
                }
            }
            let p = p_op(sys, s, m);
            let w = w_action(sys, s);
            let ok = p == &w - &taus[s]
                && &p * &p == p.scale(&(Rational::one() - m))
                && &taus[s] * &p == p.scale(m)
                && &p * &taus[s] == p.scale(m)
                && &w * &p == p;
            if !ok && !projector_failures.contains(&s) {
                projector_failures.push(s);
            }
        }
    }
    Ok(EquivarianceReport {
        samples: samples.to_vec(),
        failures,
        projector_failures,
    })
}

/// True when `τ_s` differs from the permutation matrix of `s` only in row `s`.
pub fn differs_from_permutation_only_in_row(sys: &CoxeterSystem, s: usize, m: &Rational) -> bool {
    let d = &w_action(sys, s) - &tau(sys, s, m);
    (0..sys.len()).all(|i| i == s || d.row(i).iter().all(Zero::is_zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::build_system;

    fn sys(s: &str) -> CoxeterSystem {
        build_system(s.parse().unwrap()).unwrap()
    }

    /// Reorders `τ` of A_2 into the basis `(v_{s1}, v_{s2}, v_{s1•s2})`.
    fn a2_in_flat_basis(m: i64) -> RationalMatrix {
        let a2 = sys("A2");
        let s1 = a2.simple(1);
        let s2 = a2.simple(2);
        let s3 = a2.conjugate(s1, s2);
        let t = tau(&a2, s1, &rat(m));
        let idx = [s1, s2, s3];
        RationalMatrix::from_fn(3, 3, |i, j| t[(idx[i], idx[j])].clone())
    }

    #[test]
    fn tau_a2_matches_explicit_matrix() {
        let m = 5;
        let expected =
            RationalMatrix::from_i64_rows(&[vec![m, -1, -1], vec![0, 0, 1], vec![0, 1, 0]]);
        assert_eq!(a2_in_flat_basis(m), expected);
    }

    #[test]
    fn tau_a1() {
        let a1 = sys("A1");
        assert_eq!(
            tau(&a1, 0, &rat(4)),
            RationalMatrix::from_i64_rows(&[vec![4]])
        );
        assert_eq!(
            p_op(&a1, 0, &rat(4)),
            RationalMatrix::from_i64_rows(&[vec![-3]])
        );
    }

    #[test]
    fn commuting_pair_block_is_diagonal() {
        let d4 = sys("D4");
        let (a, b) = (d4.simple(1), d4.simple(2));
        assert!(d4.commute(a, b));
        let m = rat(6);
        let t = tau(&d4, a, &m);
        assert_eq!(t[(a, a)], m);
        assert_eq!(t[(b, b)], rat(1));
        assert_eq!(t[(a, b)], rat(0));
        assert_eq!(t[(b, a)], rat(0));
    }

    #[test]
    fn p_columns() {
        let a2 = sys("A2");
        let (s1, s2) = (a2.simple(1), a2.simple(2));
        let p = p_op(&a2, s1, &rat(3));
        let mut e = vec![rat(0); 3];
        e[s1] = rat(1);
        assert_eq!(p.column(s2), e);
    }

    #[test]
    fn p_squared_a3() {
        let a3 = sys("A3");
        let m = rat(5);
        for s in 0..a3.len() {
            let p = p_op(&a3, s, &m);
            assert!((&(&p * &p) - &p.scale(&(rat(1) - &m))).is_zero());
        }
    }

    #[test]
    fn w_action_a2() {
        let a2 = sys("A2");
        let (s1, s2) = (a2.simple(1), a2.simple(2));
        let s3 = a2.conjugate(s1, s2);
        let w = w_action(&a2, s1);
        assert_eq!(&w * &w, RationalMatrix::identity(3));
        assert_eq!(w[(s1, s1)], rat(1));
        assert_eq!(w[(s3, s2)], rat(1));
        assert_eq!(w[(s2, s3)], rat(1));
    }

    #[test]
    fn equivariance_via_products_a3() {
        let a3 = sys("A3");
        let m = rat(2);
        for s in 0..6 {
            let w = w_action(&a3, s);
            for u in 0..6 {
                let lhs = &(&w * &tau(&a3, u, &m)) * &w;
                assert_eq!(lhs, tau(&a3, a3.conjugate(s, u), &m));
            }
        }
        assert!(verify_equivariance(&a3, &[rat(2), rat(5), rat(7)])
            .unwrap()
            .passed());
    }

    #[test]
    fn cubic_spectra() {
        let r = verify_cubic(&sys("A2"), &rat(5)).unwrap();
        assert!(r.passed());
        let spec = r.spectrum.unwrap();
        assert_eq!(
            spec.iter().map(|e| e.multiplicity).collect::<Vec<_>>(),
            vec![1, 1, 1]
        );

        let r = verify_cubic(&sys("A4"), &rat(3)).unwrap();
        assert!(r.passed());
        let spec = r.spectrum.unwrap();
        assert_eq!(
            spec.iter().map(|e| e.multiplicity).collect::<Vec<_>>(),
            vec![1, 6, 3]
        );

        let r = verify_cubic(&sys("A3"), &rat(0)).unwrap();
        assert!(r.passed());

        let r = verify_cubic(&sys("A3"), &rat(1)).unwrap();
        assert!(r.passed() && r.degenerate());
    }

    #[test]
    fn central_scalar() {
        let r = verify_central(&sys("A2"), &rat(5)).unwrap();
        assert!(r.passed());
        assert_eq!(r.expected_scalar, rat(5));
        let r = verify_central(&sys("E6"), &rat(2)).unwrap();
        assert!(r.passed());
        assert_eq!(r.expected_scalar, rat(17));
        let r = verify_central(&sys("A1"), &rat(-4)).unwrap();
        assert!(r.passed());
        assert_eq!(r.expected_scalar, rat(-4));
    }

    #[test]
    fn row_sparsity() {
        let d5 = sys("D5");
        for s in 0..d5.len() {
            assert!(differs_from_permutation_only_in_row(&d5, s, &rat(7)));
        }
    }
}
