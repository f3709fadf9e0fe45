//! Exact verification of certificates.

use super::axiom::AxiomFault;
use super::entropy::{EntropyLinComb, VarSet};
use super::Certificate;
use crate::{fmt_ratio, Rational};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("axiom {index} is malformed: {reason}")]
    MalformedAxiom { index: usize, reason: String },
    #[error("axiom {index} relabels a broadcast outside the table: {reason}")]
    SymmetryOutsideTable { index: usize, reason: String },
    #[error("axiom {index} is an inequality with negative multiplier {multiplier}")]
    NegativeMultiplierOnInequality { index: usize, multiplier: Rational },
    #[error("demand table is malformed: {0}")]
    MalformedTable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Entropy terms survive the weighted sum; the first one is named.
    NonCancelling { term: VarSet, coeff: Rational, remaining: usize },
    /// Terms cancel but the residual does not imply the target.
    NotDominated { residual: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub axiom_count: usize,
    pub sum: EntropyLinComb,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn describe(&self) -> String {
        match &self.verdict {
            Verdict::Pass => "PASS".into(),
            Verdict::NonCancelling { term, coeff, remaining } => format!(
                "FAIL: {remaining} entropy terms do not cancel, first {} H{term}",
                fmt_ratio(coeff)
            ),
            Verdict::NotDominated { residual } => format!("FAIL: residual {residual} does not imply the target"),
        }
    }
}

/// Validates every instance, then sums `multiplier * form` exactly.
pub fn check_certificate(cert: &Certificate) -> Result<CheckReport, CheckError> {
    let table = &cert.table;
    if table.demands.len() != table.k {
        return Err(CheckError::MalformedTable(format!("{} demands for K={}", table.demands.len(), table.k)));
    }
    for d in &table.demands {
        d.validate(table.n, table.k).map_err(|e| CheckError::MalformedTable(e.to_string()))?;
    }
    let mut sum = EntropyLinComb::new();
    for (index, (ax, mult)) in cert.axioms.iter().enumerate() {
        let form = ax.form(table).map_err(|fault| match fault {
            AxiomFault::Malformed(reason) => CheckError::MalformedAxiom { index, reason },
            AxiomFault::SymmetryOutsideTable(reason) => CheckError::SymmetryOutsideTable { index, reason },
        })?;
        if !ax.is_equality() && *mult < Rational::zero() {
            return Err(CheckError::NegativeMultiplierOnInequality { index, multiplier: *mult });
        }
        sum.add_scaled(&form, *mult);
    }
    let verdict = if let Some((term, coeff)) = sum.terms().next() {
        Verdict::NonCancelling { term: term.clone(), coeff: *coeff, remaining: sum.terms().count() }
    } else {
        // sum = aM + bR + s0 >= 0 implies cm M + cr R - c >= 0 when the
        // difference has nonnegative coefficients (M, R >= 0).
        let t = &cert.target;
        let dominated =
            t.cm >= sum.const_m && t.cr >= sum.const_r && -t.c >= sum.const_abs;
        if dominated {
            Verdict::Pass
        } else {
            Verdict::NotDominated { residual: sum.to_string() }
        }
    };
    Ok(CheckReport { verdict, axiom_count: cert.axioms.len(), sum })
}

#[cfg(test)]
mod tests {
    use super::super::axiom::{swap, Axiom};
    use super::super::tables::build_demand_table_case1;
    use super::super::Target;
    use super::*;
    use crate::int;

    fn empty_cert() -> Certificate {
        Certificate {
            table: build_demand_table_case1(3, 4).unwrap(),
            axioms: vec![],
            target: Target { cm: int(0), cr: int(0), c: int(0) },
        }
    }

    #[test]
    fn empty_certificate_passes() {
        assert!(check_certificate(&empty_cert()).unwrap().passed());
    }

    #[test]
    fn cut_set_style_bound() {
        // M + R >= H(Z1) + H(X1) >= H(Z1, X1) = H(W1, Z1, X1) >= H(W1) = 1
        let mut c = empty_cert();
        let z = VarSet::new().with_cache(1);
        let x = VarSet::new().with_bcasts(&[1]);
        let zx = z.union(&x);
        let wzx = zx.clone().with_files([1]);
        c.axioms = vec![
            (Axiom::CacheBound { user: 1 }, int(1)),
            (Axiom::RateBound { demand: 1 }, int(1)),
            (Axiom::Submodularity { a: z, b: x }, int(1)),
            (Axiom::Decodability { user: 1, demand: 1, set: zx }, int(-1)),
            (Axiom::Monotonicity { a: VarSet::files([1]), b: wzx.clone() }, int(1)),
            (Axiom::FileIndependence { files: VarSet::files([1]) }, int(1)),
        ];
        c.target = Target { cm: int(1), cr: int(1), c: int(1) };
        assert!(check_certificate(&c).unwrap().passed());
        c.target.c = int(2);
        assert!(matches!(check_certificate(&c).unwrap().verdict, Verdict::NotDominated { .. }));
        c.target.c = int(1);
        c.axioms[2].1 = int(2);
        assert!(matches!(check_certificate(&c).unwrap().verdict, Verdict::NonCancelling { .. }));
        c.axioms[2].1 = int(-1);
        assert!(matches!(
            check_certificate(&c),
            Err(CheckError::NegativeMultiplierOnInequality { index: 2, .. })
        ));
    }

    #[test]
    fn structural_rejections() {
        let mut c = empty_cert();
        c.axioms = vec![(
            Axiom::Decodability { user: 2, demand: 1, set: VarSet::new().with_cache(1).with_bcasts(&[1]) },
            int(1),
        )];
        assert!(matches!(check_certificate(&c), Err(CheckError::MalformedAxiom { index: 0, .. })));

        let s = VarSet::new().with_cache(1);
        c.axioms = vec![(Axiom::Submodularity { a: s.clone(), b: s }, int(1))];
        assert!(matches!(check_certificate(&c), Err(CheckError::MalformedAxiom { .. })));

        // d_1 = (1,2,3,1); swapping users 1 and 2 gives (2,1,3,1), not a table row
        c.axioms = vec![(
            Axiom::PermSymmetry { perm: swap(1, 2, 4), set: VarSet::new().with_bcasts(&[1]) },
            int(1),
        )];
        assert!(matches!(check_certificate(&c), Err(CheckError::SymmetryOutsideTable { .. })));

        c.axioms = vec![(Axiom::Totality { set: VarSet::files([1, 2]) }, int(1))];
        assert!(matches!(check_certificate(&c), Err(CheckError::MalformedAxiom { .. })));
    }
}
