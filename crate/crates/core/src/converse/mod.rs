//! Linear entropy-inequality certificates for rate-memory lower bounds.
//!
//! A certificate lists axiom instances with rational multipliers. It proves
//! `cM M + cR R >= c` when the weighted sum of the instances has no entropy
//! terms left and its `(M, R, 1)` part is dominated by the target.

pub mod axiom;
pub mod check;
pub mod entropy;
pub mod generate;
pub mod tables;
pub mod text;

pub use axiom::Axiom;
pub use check::{check_certificate, CheckError, CheckReport};
pub use entropy::{EntropyLinComb, EntropyTerm, RandomVar, VarSet};
pub use generate::{gen_certificate_theorem2, gen_certificate_theorem4, theorem2_target, theorem4_target};
pub use tables::{Case, DemandTable};

use crate::baselines::rate_yu;
use crate::scheme::scheme_point;
use crate::tradeoff::{in_case1_range, in_case2_range};
use crate::{fmt_ratio, rat, Rational};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConverseError {
    #[error("(N,K)=({n},{k}) is outside the range of case {case}")]
    OutOfCaseRange { n: usize, k: usize, case: u8 },
    #[error("the demand table is undefined for (N,K)=({n},{k}): it would need K-2N+1 < 0 trailing entries")]
    UndefinedDemandTable { n: usize, k: usize },
    #[error("index {index} is outside its range")]
    IndexOutOfRange { index: usize },
    #[error("generator produced an invalid step: {0}")]
    InvalidStep(String),
}

/// `cm M + cr R >= c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub cm: Rational,
    pub cr: Rational,
    pub c: Rational,
}

impl Target {
    /// Smallest rate the inequality allows at memory `m`.
    pub fn rate_at(&self, m: Rational) -> Rational {
        (self.c - self.cm * m) / self.cr
    }

    /// `4M+8R >= 11` style, integers shown without denominators.
    pub fn compact(&self) -> String {
        let show = |q: &Rational| if q.is_integer() { q.numer().to_string() } else { fmt_ratio(q) };
        format!("{}M+{}R >= {}", show(&self.cm), show(&self.cr), show(&self.c))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} M + {} R >= {}", fmt_ratio(&self.cm), fmt_ratio(&self.cr), fmt_ratio(&self.c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub table: DemandTable,
    pub axioms: Vec<(Axiom, Rational)>,
    pub target: Target,
}

/// Which lower bound to work with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    ManyFiles,
    FewFiles,
}

impl Bound {
    /// The many-files bound where it is stated, otherwise the few-files one.
    pub fn auto(n: usize, k: usize) -> Bound {
        if in_case1_range(n, k) {
            Bound::ManyFiles
        } else {
            Bound::FewFiles
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Bound::ManyFiles => 2,
            Bound::FewFiles => 4,
        }
    }
}

pub fn generate(n: usize, k: usize, bound: Bound) -> Result<Certificate, ConverseError> {
    match bound {
        Bound::ManyFiles => gen_certificate_theorem2(n, k),
        Bound::FewFiles => gen_certificate_theorem4(n, k),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightnessReport {
    pub target: Target,
    /// Memory of the corner the bound is compared against.
    pub m: Rational,
    pub bound_rate: Rational,
    pub achievable_rate: Rational,
    pub tight: bool,
    /// The bound evaluated at `N(K-1)/K` against `1/K`.
    pub corner_tight: bool,
}

/// Evaluates a bound at the corner that should meet it: `(M_A, 1/(K-1))`
/// for the many-files bound and `(N(K-2)/K, R_{K-2})` for the few-files one.
pub fn tightness_check(n: usize, k: usize, bound: Bound) -> Result<TightnessReport, ConverseError> {
    let (target, m, achievable_rate) = match bound {
        Bound::ManyFiles => {
            if !in_case1_range(n, k) || n < 2 {
                return Err(ConverseError::OutOfCaseRange { n, k, case: 1 });
            }
            let (m, r) = scheme_point(n, k);
            (theorem2_target(n, k), m, r)
        }
        Bound::FewFiles => {
            if !in_case2_range(n, k) || k < 2 {
                return Err(ConverseError::OutOfCaseRange { n, k, case: 2 });
            }
            let r = rate_yu(n, k, k - 2).map_err(|e| ConverseError::InvalidStep(e.to_string()))?;
            (theorem4_target(n, k), rat((n * (k - 2)) as i64, k as i64), r)
        }
    };
    let bound_rate = target.rate_at(m);
    let man_m = rat((n * (k - 1)) as i64, k as i64);
    Ok(TightnessReport {
        target,
        m,
        bound_rate,
        achievable_rate,
        tight: bound_rate == achievable_rate,
        corner_tight: target.rate_at(man_m) == rat(1, k as i64),
    })
}
