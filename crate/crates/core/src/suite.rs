//! Batch execution of checks into [`CheckReport`]s.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::branching::verify_branch;
use crate::closure::{
    check_folded_surjectivity, check_surjectivity, ClosureOptions, GeneratorSet, DEFAULT_PRIME,
};
use crate::coxeter::{build_system, CoxeterSystem, Family, FoldSource, TypeSpec};
use crate::error::{Error, Result};
use crate::form::verify_discriminant;
use crate::form::verify_selfadjoint;
use crate::holonomy::{
    adjacent_simple_pairs, commuting_simple_pairs, triple_spectrum,
    verify_commuting_product_vanishes, verify_flat_relations, w_basis,
};
use crate::krammer::{verify_central, verify_cubic, verify_equivariance};
use crate::matrix::{format_rational, rat, Rational};
use crate::poly::FactoredDiscriminant;
use crate::report::{CheckReport, Status, Verification};

/// Reflection count above which spectral checks need `allow_long`.
pub const LONG_SPECTRAL_N: usize = 100;
/// Matrix side above which closures need `allow_long`.
pub const LONG_CLOSURE_N: usize = 100;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Counts,
    Holonomy,
    Cubic,
    Central,
    Equivariance,
    Selfadjoint,
    Triples,
    Wbasis,
    Vanishing,
    Branch,
    Discriminant,
    Closure,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        Self::Counts,
        Self::Holonomy,
        Self::Cubic,
        Self::Central,
        Self::Equivariance,
        Self::Selfadjoint,
        Self::Triples,
        Self::Wbasis,
        Self::Vanishing,
        Self::Branch,
        Self::Discriminant,
        Self::Closure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Counts => "counts",
            Self::Holonomy => "holonomy",
            Self::Cubic => "cubic",
            Self::Central => "central",
            Self::Equivariance => "equivariance",
            Self::Selfadjoint => "selfadjoint",
            Self::Triples => "triples",
            Self::Wbasis => "wbasis",
            Self::Vanishing => "vanishing",
            Self::Branch => "branch",
            Self::Discriminant => "discriminant",
            Self::Closure => "closure",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub types: Vec<TypeSpec>,
    pub m: Vec<Rational>,
    pub prime: u64,
    pub checks: Vec<CheckKind>,
    pub generator_set: GeneratorSet,
    /// Closure of folded generators instead of reflections of `types`.
    pub folded: Option<FoldSource>,
    /// Expected factorization for discriminant checks.
    pub expect: Option<FactoredDiscriminant>,
    pub allow_long: bool,
    pub closure_budget: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            types: Vec::new(),
            m: vec![rat(5), rat(7)],
            prime: DEFAULT_PRIME,
            checks: Vec::new(),
            generator_set: GeneratorSet::Simple,
            folded: None,
            expect: None,
            allow_long: false,
            closure_budget: None,
        }
    }
}

/// Types used when none are given: every family at small rank.
pub fn default_types() -> Vec<TypeSpec> {
    ["A2", "A3", "A4", "A5", "D4", "D5", "D6", "E6"]
        .iter()
        .map(|s| s.parse().expect("valid type"))
        .collect()
}

/// A check that was skipped because it is gated as long-running.
fn gated(check: CheckKind, spec: &str, what: &str) -> Task {
    let (check, spec, what) = (check, spec.to_string(), what.to_string());
    Task {
        check,
        type_string: spec,
        params: BTreeMap::new(),
        run: Box::new(move || {
            Ok((
                Status::SkippedDegenerate,
                json!({ "skipped": format!("{what} needs allow_long") }),
            ))
        }),
    }
}

type Outcome = Result<(Status, Value)>;

struct Task {
    check: CheckKind,
    type_string: String,
    params: BTreeMap<String, String>,
    run: Box<dyn Fn() -> Outcome + Send + Sync>,
}

fn outcome<V: Verification>(r: Result<V>) -> Outcome {
    r.map(|v| (v.status(), v.details()))
}

fn task(
    check: CheckKind,
    sys: &CoxeterSystem,
    params: &[(&str, String)],
    run: impl Fn() -> Outcome + Send + Sync + 'static,
) -> Task {
    Task {
        check,
        type_string: sys.spec().to_string(),
        params: params
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
        run: Box::new(run),
    }
}

/// True for errors that falsify the checked statement rather than the request.
fn is_mathematical(e: &Error) -> bool {
    matches!(
        e,
        Error::SpectrumEscape { .. }
            | Error::OrphanReflection(_)
            | Error::NonIntegerRoot(_)
            | Error::StabilityFailure { .. }
    )
}

fn plan(config: &SuiteConfig, spec: TypeSpec, check: CheckKind, out: &mut Vec<Task>) -> Result<()> {
    let sys = std::sync::Arc::new(build_system(spec)?);
    let name = spec.to_string();
    let n = sys.len();
    let per_m = |out: &mut Vec<Task>, f: fn(&CoxeterSystem, &Rational) -> Outcome| {
        for m in &config.m {
            let (s, m2) = (sys.clone(), m.clone());
            out.push(task(check, &sys, &[("m", format_rational(m))], move || {
                f(&s, &m2)
            }));
        }
    };
    match check {
        CheckKind::Counts => {
            let s = sys.clone();
            out.push(task(check, &sys, &[], move || {
                let c = s.counts()?;
                let ok = c.c + c.c_prime + 1 == c.n;
                Ok((
                    if ok { Status::Pass } else { Status::Fail },
                    json!({ "n": c.n, "c": c.c, "c_prime": c.c_prime, "rank": s.simple_indices().len() }),
                ))
            }));
        }
        CheckKind::Holonomy => per_m(out, |s, m| outcome(verify_flat_relations(s, m))),
        CheckKind::Cubic => per_m(out, |s, m| outcome(verify_cubic(s, m))),
        CheckKind::Central => per_m(out, |s, m| outcome(verify_central(s, m))),
        CheckKind::Selfadjoint => per_m(out, |s, m| outcome(verify_selfadjoint(s, m))),
        CheckKind::Equivariance => {
            let (s, ms) = (sys.clone(), config.m.clone());
            let label = ms.iter().map(format_rational).collect::<Vec<_>>().join(",");
            out.push(task(check, &sys, &[("m", label)], move || {
                outcome(verify_equivariance(&s, &ms))
            }));
        }
        CheckKind::Triples | CheckKind::Wbasis => {
            if n > LONG_SPECTRAL_N && !config.allow_long {
                out.push(gated(check, &name, "spectral checks at this size"));
                return Ok(());
            }
            for (i, j) in adjacent_simple_pairs(&sys) {
                for m in &config.m {
                    let (s, m2) = (sys.clone(), m.clone());
                    let params = [("m", format_rational(m)), ("pair", format!("{i},{j}"))];
                    out.push(task(check, &sys, &params, move || {
                        if check == CheckKind::Triples {
                            outcome(triple_spectrum(&s, i, j, &m2))
                        } else {
                            outcome(w_basis(&s, i, j, &m2))
                        }
                    }));
                }
            }
        }
        CheckKind::Vanishing => {
            for (i, j) in commuting_simple_pairs(&sys) {
                let m = config.m.first().cloned().unwrap_or_else(|| rat(5));
                let s = sys.clone();
                let params = [("m", format_rational(&m)), ("pair", format!("{i},{j}"))];
                out.push(task(check, &sys, &params, move || {
                    outcome(verify_commuting_product_vanishes(&s, i, j, &m))
                }));
            }
        }
        CheckKind::Branch => {
            if !matches!(spec.family(), Family::A | Family::D) {
                return Err(Error::WrongType {
                    expected: "A or D".into(),
                    got: name,
                });
            }
            per_m(out, |s, m| match verify_branch(s, m) {
                Err(Error::PoleParameter(p)) => {
                    Ok((Status::SkippedDegenerate, json!({ "pole": p })))
                }
                r => outcome(r),
            });
        }
        CheckKind::Discriminant => {
            let (s, e) = (sys.clone(), config.expect.clone());
            let mut params = Vec::new();
            if let Some(e) = &config.expect {
                params.push(("expect", e.to_string()));
            }
            out.push(task(check, &sys, &params, move || {
                outcome(verify_discriminant(&s, e.clone()))
            }));
        }
        CheckKind::Closure => plan_closure(config, &sys, out)?,
    }
    Ok(())
}

fn plan_closure(
    config: &SuiteConfig,
    sys: &std::sync::Arc<CoxeterSystem>,
    out: &mut Vec<Task>,
) -> Result<()> {
    let name = sys.spec().to_string();
    let prime = config.prime;
    let budget = config.closure_budget;
    if let Some(src) = config.folded {
        let target = crate::coxeter::folding_table(src).target;
        if target != sys.spec() {
            return Err(Error::WrongType {
                expected: target.to_string(),
                got: name,
            });
        }
        if src == FoldSource::H4 && !config.allow_long {
            out.push(gated(CheckKind::Closure, &name, "the folded H4 closure"));
            return Ok(());
        }
        for m in &config.m {
            let m2 = m.clone();
            let params = [
                ("m", format_rational(m)),
                ("prime", prime.to_string()),
                ("folded", src.to_string()),
            ];
            out.push(task(CheckKind::Closure, sys, &params, move || {
                let opts = ClosureOptions {
                    budget,
                    ..Default::default()
                };
                outcome(check_folded_surjectivity(src, &m2, prime, &opts))
            }));
        }
        return Ok(());
    }
    crate::closure::select_reflections(sys, config.generator_set)?;
    if sys.len() > LONG_CLOSURE_N && !config.allow_long {
        out.push(gated(CheckKind::Closure, &name, "closures at this size"));
        return Ok(());
    }
    for m in &config.m {
        crate::closure::check_parameter_mod_p(m, prime)?;
        let (s, m2, set) = (sys.clone(), m.clone(), config.generator_set);
        let params = [
            ("m", format_rational(m)),
            ("prime", prime.to_string()),
            ("generator_set", set.to_string()),
        ];
        out.push(task(CheckKind::Closure, sys, &params, move || {
            let opts = ClosureOptions {
                budget,
                ..Default::default()
            };
            outcome(check_surjectivity(&s, set, &m2, prime, &opts))
        }));
    }
    Ok(())
}

/// Runs every selected check on every type. Reports come back in plan order
/// (type, then check, then parameters). Errors describing an invalid request
/// are returned; errors that falsify a statement become failing reports.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    crate::closure::validate_prime(config.prime)?;
    if config.m.is_empty() {
        return Err(Error::Parse("no values of m given".into()));
    }
    let mut tasks = Vec::new();
    for &spec in &config.types {
        for &check in &config.checks {
            plan(config, spec, check, &mut tasks)?;
        }
    }
    let results: Vec<std::result::Result<CheckReport, Error>> = tasks
        .into_par_iter()
        .map(|t| {
            let start = Instant::now();
            let (status, details) = match (t.run)() {
                Ok(x) => x,
                Err(e) if is_mathematical(&e) => (Status::Fail, json!({ "error": e.to_string() })),
                Err(e) => return Err(e),
            };
            Ok(CheckReport {
                check_id: t.check.to_string(),
                type_string: t.type_string,
                params: t.params,
                status,
                details,
                elapsed: start.elapsed().as_millis() as u64,
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Exit code: 0 when nothing failed, 1 otherwise.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    i32::from(reports.iter().any(|r| r.status == Status::Fail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(types: &[&str], checks: &[CheckKind]) -> SuiteConfig {
        SuiteConfig {
            types: types.iter().map(|t| t.parse().unwrap()).collect(),
            checks: checks.to_vec(),
            ..Default::default()
        }
    }

    #[test]
    fn small_suite_passes_in_order() {
        let c = config(
            &["A3"],
            &[CheckKind::Counts, CheckKind::Holonomy, CheckKind::Closure],
        );
        let c = SuiteConfig {
            m: vec![rat(7), rat(8)],
            ..c
        };
        let r = run_suite(&c).unwrap();
        let ids: Vec<&str> = r.iter().map(|x| x.check_id.as_str()).collect();
        assert_eq!(
            ids,
            ["counts", "holonomy", "holonomy", "closure", "closure"]
        );
        assert_eq!(exit_code(&r), 0);
        assert_eq!(r[1].params["m"], "7/1");
    }

    #[test]
    fn request_errors_propagate() {
        let mut c = config(&["E6"], &[CheckKind::Branch]);
        assert!(matches!(run_suite(&c), Err(Error::WrongType { .. })));
        c.checks = vec![CheckKind::Counts];
        c.prime = 4;
        assert!(matches!(run_suite(&c), Err(Error::BadPrime { .. })));
    }

    #[test]
    fn long_closures_are_gated() {
        let mut c = config(&["E8"], &[CheckKind::Closure]);
        c.folded = Some(FoldSource::H4);
        let r = run_suite(&c).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].status, Status::SkippedDegenerate);
    }

    #[test]
    fn wrong_expectation_fails() {
        let mut c = config(&["A2"], &[CheckKind::Discriminant]);
        c.expect = Some(FactoredDiscriminant::parse("(m-3)(m+1)^2").unwrap());
        let r = run_suite(&c).unwrap();
        assert_eq!(exit_code(&r), 1);
    }
}
