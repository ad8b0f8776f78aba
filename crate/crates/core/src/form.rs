//! The invariant symmetric form `( | )` on `V` and its discriminant.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::coxeter::CoxeterSystem;
use crate::error::{Error, Result};
use crate::field::integer_charpoly;
use crate::krammer::{p_op, tau};
use crate::matrix::{form_value, format_rational, rat, ratio, Rational, RationalMatrix};
use crate::poly::{coefficient_strings, FactoredDiscriminant, UnivariatePolynomial};
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

/// Non-commutation adjacency matrix `A`: `A[r][s] = 1` iff `rs ≠ sr`.
pub fn adjacency(sys: &CoxeterSystem) -> Vec<Vec<i64>> {
    let n = sys.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|s| i64::from(r != s && !sys.commute(r, s)))
                .collect()
        })
        .collect()
}

/// Gram matrix `(m - 1) I - A`.
pub fn form_matrix(sys: &CoxeterSystem, m: &Rational) -> RationalMatrix {
    let diag = m - Rational::one();
    RationalMatrix::from_fn(sys.len(), sys.len(), |r, s| {
        if r == s {
            diag.clone()
        } else if sys.commute(r, s) {
            Rational::zero()
        } else {
            rat(-1)
        }
    })
}

/// `det((m-1) I - A)` as a polynomial in `m`, i.e. `χ_A(m - 1)`.
pub fn discriminant(sys: &CoxeterSystem) -> Result<UnivariatePolynomial> {
    require_ade(sys)?;
    let chi = integer_charpoly(&adjacency(sys));
    Ok(compose_shift(&chi, &rat(-1)))
}

/// `p(x + a)` by Horner's rule.
fn compose_shift(p: &UnivariatePolynomial, a: &Rational) -> UnivariatePolynomial {
    let x_plus_a = UnivariatePolynomial::new(vec![a.clone(), Rational::one()]);
    p.coeffs()
        .iter()
        .rev()
        .fold(UnivariatePolynomial::zero(), |acc, c| {
            &(&acc * &x_plus_a) + &UnivariatePolynomial::constant(c.clone())
        })
}

/// Splits the discriminant into integer linear factors and checks that the
/// product expands back to it.
pub fn factor_discriminant(sys: &CoxeterSystem) -> Result<FactoredDiscriminant> {
    let d = discriminant(sys)?;
    let f = d.integer_roots()?;
    if f.expand() != d || f.degree() != sys.len() {
        return Err(Error::NonIntegerRoot(d.degree().unwrap_or(0)));
    }
    Ok(f)
}

/// True iff every leading principal minor of the Gram matrix is positive.
pub fn positive_definite(sys: &CoxeterSystem, m: &Rational) -> bool {
    let minors = form_matrix(sys, m).leading_principal_minors();
    minors.len() == sys.len() && minors.iter().all(Signed::is_positive)
}

/// Fixed non-integral sample values used to cross-check the discriminant
/// against direct determinants.
pub fn cross_check_points() -> Vec<Rational> {
    vec![
        ratio(7, 3),
        ratio(-5, 2),
        ratio(11, 4),
        ratio(13, 5),
        ratio(1, 7),
    ]
}

#[derive(Clone, Debug)]
pub struct DiscriminantReport {
    pub polynomial: UnivariatePolynomial,
    pub factors: Option<FactoredDiscriminant>,
    pub expected: Option<FactoredDiscriminant>,
    /// Sample points where `χ_A(m-1)` disagreed with the determinant.
    pub cross_check_failures: Vec<Rational>,
    /// `#R - c`.
    pub threshold: i64,
    pub largest_root: Option<BigInt>,
    pub invariance_failures: Vec<usize>,
}

impl DiscriminantReport {
    pub fn matches_expected(&self) -> bool {
        match (&self.expected, &self.factors) {
            (None, _) => true,
            (Some(e), Some(f)) => e == f,
            (Some(_), None) => false,
        }
    }
}

impl Verification for DiscriminantReport {
    fn passed(&self) -> bool {
        self.factors.is_some()
            && self.cross_check_failures.is_empty()
            && self.largest_root == Some(BigInt::from(self.threshold))
            && self.invariance_failures.is_empty()
            && self.matches_expected()
    }

    fn details(&self) -> Value {
        json!({
            "factored": self.factors.as_ref().map(|f| f.to_string()),
            "factors": self.factors,
            "coefficients": coefficient_strings(&self.polynomial),
            "expected": self.expected.as_ref().map(|f| f.to_string()),
            "matches_expected": self.matches_expected(),
            "cross_check_failures": self.cross_check_failures.iter().map(format_rational).collect::<Vec<_>>(),
            "threshold": self.threshold,
            "largest_root": self.largest_root.as_ref().map(|r| r.to_string()),
            "invariance_failures": self.invariance_failures,
        })
    }
}

/// Computes and factors the discriminant, cross-checks it against direct
/// determinants, checks `W`-invariance of the form and that the largest root
/// is `#R - c`; optionally compares against an expected factorization.
pub fn verify_discriminant(
    sys: &CoxeterSystem,
    expected: Option<FactoredDiscriminant>,
) -> Result<DiscriminantReport> {
    require_ade(sys)?;
    let counts = sys.counts()?;
    let polynomial = discriminant(sys)?;
    let factors = factor_discriminant(sys).ok();
    let cross_check_failures = cross_check_points()
        .into_iter()
        .filter(|m| form_matrix(sys, m).determinant() != polynomial.eval(m))
        .collect();
    let g = form_matrix(sys, &rat(2));
    let invariance_failures = (0..sys.len())
        .filter(|&s| g.conjugate_by_permutation(sys.conjugation_permutation(s)) != g)
        .collect();
    let largest_root = factors
        .as_ref()
        .and_then(FactoredDiscriminant::largest_root);
    Ok(DiscriminantReport {
        polynomial,
        factors,
        expected,
        cross_check_failures,
        threshold: (sys.len() - counts.c) as i64,
        largest_root,
        invariance_failures,
    })
}

#[derive(Clone, Debug)]
pub struct SelfAdjointReport {
    pub m: Rational,
    pub symmetric: bool,
    pub selfadjoint_failures: Vec<usize>,
    /// `None` when the projector sub-check was skipped.
    pub projector_failures: Option<Vec<usize>>,
    pub skip_reason: Option<String>,
}

impl Verification for SelfAdjointReport {
    fn passed(&self) -> bool {
        self.symmetric
            && self.selfadjoint_failures.is_empty()
            && self.projector_failures.as_ref().is_none_or(Vec::is_empty)
    }

    fn degenerate(&self) -> bool {
        self.projector_failures.is_none()
    }

    fn details(&self) -> Value {
        json!({
            "m": format_rational(&self.m),
            "symmetric": self.symmetric,
            "selfadjoint_failures": self.selfadjoint_failures,
            "projector_failures": self.projector_failures,
            "skip_reason": self.skip_reason,
        })
    }
}

/// `G τ_s = τ_sᵀ G` for all `s`; when `m ≠ 1` and the form is nondegenerate,
/// `p_s / (1-m)` is the `G`-orthogonal projector onto the line `v_s`.
pub fn verify_selfadjoint(sys: &CoxeterSystem, m: &Rational) -> Result<SelfAdjointReport> {
    require_ade(sys)?;
    let n = sys.len();
    let g = form_matrix(sys, m);
    let symmetric = g.transpose() == g;
    let mut selfadjoint_failures = Vec::new();
    for s in 0..n {
        let t = tau(sys, s, m);
        if &g * &t != &t.transpose() * &g {
            selfadjoint_failures.push(s);
        }
    }

    let skip_reason = if m.is_one() {
        Some("m = 1".to_string())
    } else if discriminant(sys)?.eval(m).is_zero() {
        Some("discriminant vanishes".to_string())
    } else {
        None
    };
    let projector_failures = skip_reason.is_none().then(|| {
        let k = (Rational::one() - m).recip();
        (0..n)
            .filter(|&s| !is_orthogonal_line_projector(&g, &p_op(sys, s, m).scale(&k), s))
            .collect()
    });
    Ok(SelfAdjointReport {
        m: m.clone(),
        symmetric,
        selfadjoint_failures,
        projector_failures,
        skip_reason,
    })
}

fn is_orthogonal_line_projector(g: &RationalMatrix, p: &RationalMatrix, s: usize) -> bool {
    let n = g.rows();
    let mut vs = vec![Rational::zero(); n];
    vs[s] = Rational::one();
    if &(p * p) != p || p.rank() != 1 || p.mul_vec(&vs) != vs {
        return false;
    }
    let kernel = p.nullspace();
    kernel.len() == n - 1 && kernel.iter().all(|x| form_value(g, &vs, x).is_zero())
}
