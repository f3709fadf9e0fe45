//! Coded caching on an `(N, K)` broadcast network: a two-stage
//! coded-placement scheme, the corner baseline, closed-form rate curves and
//! a checker for linear entropy-inequality certificates.

pub mod baselines;
pub mod converse;
pub mod field;
pub mod model;
pub mod scheme;
pub mod tradeoff;
pub mod verify;

/// Exact rational used for coefficients, memory sizes and rates.
pub type Rational = num_rational::Ratio<i64>;

/// Renders a rational as `u/v`, always with an explicit denominator.
pub fn fmt_ratio(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `u/v` or a bare integer.
pub fn parse_ratio(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((u, v)) => {
            let v: i64 = v.trim().parse().ok()?;
            if v == 0 {
                return None;
            }
            Some(Rational::new(u.trim().parse().ok()?, v))
        }
        None => Some(Rational::from_integer(s.trim().parse().ok()?)),
    }
}

pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub(crate) fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_text_round_trip() {
        assert_eq!(fmt_ratio(&rat(25, 12)), "25/12");
        assert_eq!(fmt_ratio(&int(3)), "3/1");
        assert_eq!(fmt_ratio(&rat(-2, 4)), "-1/2");
        assert_eq!(parse_ratio("6/4"), Some(rat(3, 2)));
        assert_eq!(parse_ratio("-7"), Some(int(-7)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("x"), None);
    }
}
