//! Exact rate-memory values in the large-cache regime, lower convex
//! envelopes of achievable points, and CSV output.

use crate::baselines::{man_point, rate_gomez, yu_point};
use crate::scheme::scheme_point;
use crate::{fmt_ratio, int, rat, Rational};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TradeoffError {
    #[error("M={m} is outside the characterized region for N={n}, K={k}")]
    OutsideCharacterizedRegion { n: usize, k: usize, m: Rational },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("need 1 <= N <= K and K >= 2, got N={n}, K={k}")]
    BadShape { n: usize, k: usize },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

pub const TAG_CASE1: &str = "theorem-case1";
pub const TAG_CASE2: &str = "theorem-case2";
pub const TAG_BOTH: &str = "theorem-case1+theorem-case2";
pub const TAG_MAN: &str = "maddah-ali-niesen";
pub const TAG_SHARING: &str = "memory-sharing";

/// `ceil((K+1)/2)`.
pub fn half_ceiling(k: usize) -> usize {
    (k + 2) / 2
}

/// Range in which the many-files bound is stated: `ceil((K+1)/2) <= N <= K`.
pub fn in_case1_range(n: usize, k: usize) -> bool {
    half_ceiling(k) <= n && n <= k
}

/// Range in which the few-files bound is stated: `1 <= N <= ceil((K+1)/2)`.
pub fn in_case2_range(n: usize, k: usize) -> bool {
    1 <= n && n <= half_ceiling(k) && n <= k
}

/// Where the many-files line is actually exact (it needs `N >= 2`).
pub fn case1_holds(n: usize, k: usize) -> bool {
    n >= 2 && in_case1_range(n, k)
}

/// Where the few-files line is actually exact: `2 <= N <= floor((K+1)/2)`.
/// At `N = 1` and at `N = K/2 + 1` for even `K` an achievable point lies
/// strictly below it.
pub fn case2_holds(n: usize, k: usize) -> bool {
    n >= 2 && n <= k.div_ceil(2)
}

/// `(KN-1)/(K(N-1)) - M/(N-1)`.
pub fn case1_line(n: usize, k: usize, m: Rational) -> Rational {
    let (n, k) = (n as i64, k as i64);
    rat(k * n - 1, k * (n - 1)) - m / int(n - 1)
}

/// `(K^2+K-2)/(K(K-1)) - (K+1) M / (N(K-1))`.
pub fn case2_line(n: usize, k: usize, m: Rational) -> Rational {
    let (n, k) = (n as i64, k as i64);
    rat(k * k + k - 2, k * (k - 1)) - rat(k + 1, n * (k - 1)) * m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactValue {
    pub rate: Rational,
    pub provenance: &'static str,
}

/// `R*(M)` where it is known exactly for large caches.
pub fn exact_tradeoff(n: usize, k: usize, m: Rational) -> Result<ExactValue, TradeoffError> {
    if n == 0 || n > k || k < 2 {
        return Err(TradeoffError::BadShape { n, k });
    }
    let nn = int(n as i64);
    if m >= nn {
        return Ok(ExactValue { rate: int(0), provenance: TAG_MAN });
    }
    if m >= man_point(n, k).0 {
        return Ok(ExactValue { rate: int(1) - m / nn, provenance: TAG_MAN });
    }
    let c1 = case1_holds(n, k) && m >= scheme_point(n, k).0;
    let c2 = case2_holds(n, k) && m >= rat((n * (k - 2)) as i64, k as i64);
    match (c1, c2) {
        (true, true) => {
            let rate = case1_line(n, k, m).min(case2_line(n, k, m));
            Ok(ExactValue { rate, provenance: TAG_BOTH })
        }
        (true, false) => Ok(ExactValue { rate: case1_line(n, k, m), provenance: TAG_CASE1 }),
        (false, true) => Ok(ExactValue { rate: case2_line(n, k, m), provenance: TAG_CASE2 }),
        (false, false) => Err(TradeoffError::OutsideCharacterizedRegion { n, k, m }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub m_lo: Rational,
    pub m_hi: Rational,
    pub intercept: Rational,
    pub slope: Rational,
    pub provenance: String,
}

impl Segment {
    fn through(a: (Rational, Rational), b: (Rational, Rational), provenance: &str) -> Self {
        let slope = (b.1 - a.1) / (b.0 - a.0);
        Segment {
            m_lo: a.0,
            m_hi: b.0,
            intercept: a.1 - slope * a.0,
            slope,
            provenance: provenance.to_string(),
        }
    }

    pub fn at(&self, m: Rational) -> Rational {
        self.intercept + self.slope * m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvePoint {
    pub m: Rational,
    pub r: Rational,
    pub tag: String,
}

/// Piecewise-linear `R(M)`; `points` are the tagged points lying on it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TradeoffCurve {
    pub segments: Vec<Segment>,
    pub points: Vec<CurvePoint>,
}

impl TradeoffCurve {
    pub fn evaluate(&self, m: Rational) -> Option<Rational> {
        self.segment_at(m).map(|s| s.at(m))
    }

    pub fn segment_at(&self, m: Rational) -> Option<&Segment> {
        let last = self.segments.len().checked_sub(1)?;
        self.segments
            .iter()
            .enumerate()
            .find(|(i, s)| s.m_lo <= m && (m < s.m_hi || (*i == last && m == s.m_hi)))
            .map(|(_, s)| s)
    }

    pub fn has_point(&self, m: Rational, r: Rational) -> bool {
        self.points.iter().any(|p| p.m == m && p.r == r)
    }

    /// The segment covering exactly `[lo, hi]` with the given line, if any.
    pub fn find_segment(&self, lo: Rational, hi: Rational, intercept: Rational, slope: Rational) -> Option<&Segment> {
        self.segments
            .iter()
            .find(|s| s.m_lo == lo && s.m_hi == hi && s.intercept == intercept && s.slope == slope)
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] R = {} + ({})M ({})",
            self.m_lo, self.m_hi, self.intercept, self.slope, self.provenance
        )
    }
}

fn cross(o: (Rational, Rational), a: (Rational, Rational), b: (Rational, Rational)) -> Rational {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Vertices of the lower convex hull, collinear interior points removed.
fn hull(points: &[(Rational, Rational)]) -> Result<Vec<(Rational, Rational)>, TradeoffError> {
    if points.len() < 2 {
        return Err(TradeoffError::DegenerateInput(format!("{} points", points.len())));
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(TradeoffError::DegenerateInput(format!("repeated M={}", w[0].0)));
    }
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    for p in sorted {
        while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= int(0) {
            out.pop();
        }
        out.push(p);
    }
    Ok(out)
}

/// Lower convex envelope of achievable points (memory sharing).
pub fn lower_envelope(points: &[(Rational, Rational)]) -> Result<TradeoffCurve, TradeoffError> {
    let v = hull(points)?;
    Ok(TradeoffCurve {
        segments: v.windows(2).map(|w| Segment::through(w[0], w[1], TAG_SHARING)).collect(),
        points: v.iter().map(|&(m, r)| CurvePoint { m, r, tag: String::new() }).collect(),
    })
}

fn known_points(n: usize, k: usize) -> Vec<CurvePoint> {
    let (ni, ki) = (n as i64, k as i64);
    let mut pts = vec![
        CurvePoint { m: int(0), r: int(ni), tag: "uncached".into() },
        CurvePoint { m: rat(1, ki), r: rat(ni * (ki - 1), ki), tag: "chen-point".into() },
    ];
    if n == k && n >= 2 {
        for m in [rat(1, ni), rat(1, ni - 1)] {
            if let Ok(r) = rate_gomez(n, m) {
                pts.push(CurvePoint { m, r, tag: "gomez-point".into() });
            }
        }
    }
    let (ma, ra) = scheme_point(n, k);
    pts.push(CurvePoint { m: ma, r: ra, tag: "theorem-1-point".into() });
    let (mm, rm) = man_point(n, k);
    pts.push(CurvePoint { m: mm, r: rm, tag: "man-point".into() });
    pts.push(CurvePoint { m: int(ni), r: int(0), tag: "full-cache".into() });
    for r in 1..k {
        let (m, rate) = yu_point(n, k, r).expect("r < K");
        pts.push(CurvePoint { m, r: rate, tag: format!("yu-r{r}") });
    }
    // keep the first tag at each point and the lowest rate at each memory
    let mut kept: Vec<CurvePoint> = Vec::new();
    for p in pts {
        match kept.iter_mut().find(|q| q.m == p.m) {
            Some(q) if p.r < q.r => *q = p,
            Some(_) => {}
            None => kept.push(p),
        }
    }
    kept.sort_by_key(|a| a.m);
    kept
}

fn is_yu_like(tag: &str) -> bool {
    tag.starts_with("yu-r") || matches!(tag, "uncached" | "man-point" | "full-cache")
}

fn segment_tag(n: usize, k: usize, a: &str, b: &str) -> String {
    let second_last = format!("yu-r{}", k - 2);
    let tag = match (a, b) {
        ("uncached", "chen-point") => "chen",
        ("gomez-point", "gomez-point") => "gomez",
        ("man-point", "full-cache") => TAG_MAN,
        ("theorem-1-point", "man-point") if case1_holds(n, k) && case2_holds(n, k) => TAG_BOTH,
        ("theorem-1-point", "man-point") if case1_holds(n, k) => TAG_CASE1,
        (x, "theorem-1-point") if x == second_last && case1_holds(n, k) && case2_holds(n, k) => {
            TAG_CASE2
        }
        (x, "man-point") if x == second_last && case2_holds(n, k) => TAG_CASE2,
        (x, y) if is_yu_like(x) && is_yu_like(y) => "yu",
        _ => TAG_SHARING,
    };
    tag.to_string()
}

/// The best known achievable curve, with every piece tagged by its source.
pub fn assemble_known_curve(n: usize, k: usize) -> Result<TradeoffCurve, TradeoffError> {
    if n == 0 || n > k || k < 2 {
        return Err(TradeoffError::BadShape { n, k });
    }
    let pts = known_points(n, k);
    let coords: Vec<(Rational, Rational)> = pts.iter().map(|p| (p.m, p.r)).collect();
    let env = lower_envelope(&coords)?;
    // Split hull edges at any tagged point that lies on them.
    let on_curve: Vec<CurvePoint> = pts
        .into_iter()
        .filter(|p| env.evaluate(p.m) == Some(p.r))
        .collect();
    let segments = on_curve
        .windows(2)
        .map(|w| {
            Segment::through((w[0].m, w[0].r), (w[1].m, w[1].r), &segment_tag(n, k, &w[0].tag, &w[1].tag))
        })
        .collect();
    Ok(TradeoffCurve { segments, points: on_curve })
}

pub const CSV_HEADER: [&str; 5] = ["M_exact", "M_decimal", "R_exact", "R_decimal", "provenance"];

fn decimal(q: &Rational) -> String {
    format!("{:.6}", *q.numer() as f64 / *q.denom() as f64)
}

/// Vertex rows plus `samples` evenly spaced rows across the curve's domain.
pub fn emit_csv(curve: &TradeoffCurve, samples: usize) -> Result<String, TradeoffError> {
    if samples < 2 {
        return Err(TradeoffError::TooFewSamples(samples));
    }
    let mut rows: Vec<(Rational, Rational, String)> =
        curve.points.iter().map(|p| (p.m, p.r, p.tag.clone())).collect();
    if let (Some(first), Some(last)) = (curve.segments.first(), curve.segments.last()) {
        let (lo, hi) = (first.m_lo, last.m_hi);
        for i in 0..samples {
            let m = lo + (hi - lo) * rat(i as i64, samples as i64 - 1);
            if let Some(s) = curve.segment_at(m) {
                rows.push((m, s.at(m), s.provenance.clone()));
            }
        }
    }
    // stable sort keeps vertex rows ahead of samples at the same M
    rows.sort_by_key(|a| a.0);
    rows.dedup_by(|b, a| a.0 == b.0);

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| TradeoffError::DegenerateInput(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for (m, r, tag) in rows {
        w.write_record([fmt_ratio(&m), decimal(&m), fmt_ratio(&r), decimal(&r), tag]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| TradeoffError::DegenerateInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::rate_yu;
    use proptest::prelude::*;

    #[test]
    fn exact_values_at_known_points() {
        for m in [rat(25, 12), rat(13, 6), rat(9, 4)] {
            assert_eq!(exact_tradeoff(3, 4, m).unwrap().rate, rat(11, 8) - m / int(2));
        }
        for m in [int(1), rat(5, 4), rat(3, 2)] {
            assert_eq!(exact_tradeoff(2, 4, m).unwrap().rate, rat(3, 2) - rat(5, 6) * m);
        }
        for (n, k) in [(1, 3), (3, 4), (2, 5)] {
            assert_eq!(exact_tradeoff(n, k, int(n as i64)).unwrap().rate, int(0));
        }
    }

    #[test]
    fn exact_outside_region() {
        assert!(matches!(
            exact_tradeoff(3, 4, int(2)),
            Err(TradeoffError::OutsideCharacterizedRegion { .. })
        ));
        // the few-files line is not exact for a single file
        assert!(exact_tradeoff(1, 4, rat(1, 2)).is_err());
        assert_eq!(exact_tradeoff(1, 4, rat(3, 4)).unwrap().rate, rat(1, 4));
        // even-K boundary: only the many-files line
        assert!(exact_tradeoff(3, 4, rat(3, 2)).is_err());
    }

    #[test]
    fn corner_identities() {
        for k in 2..=12 {
            for n in 1..=k {
                let (mm, rm) = man_point(n, k);
                assert_eq!(exact_tradeoff(n, k, mm).unwrap().rate, rm);
                if case1_holds(n, k) {
                    let (ma, ra) = scheme_point(n, k);
                    assert_eq!(case1_line(n, k, ma), ra);
                    assert_eq!(case1_line(n, k, mm), rm);
                    assert_eq!(exact_tradeoff(n, k, ma).unwrap().rate, ra);
                }
                if n >= 2 {
                    let lo = rat((n * (k - 2)) as i64, k as i64);
                    assert_eq!(case2_line(n, k, lo), rate_yu(n, k, k - 2).unwrap());
                    assert_eq!(case2_line(n, k, mm), rm);
                }
            }
        }
    }

    #[test]
    fn lines_coincide_at_odd_boundary() {
        for k in (3usize..=15).step_by(2) {
            let n = k.div_ceil(2);
            for m in [int(0), int(1), rat(7, 3)] {
                assert_eq!(case1_line(n, k, m), case2_line(n, k, m), "K={k}");
            }
            assert_eq!(exact_tradeoff(n, k, scheme_point(n, k).0).unwrap().provenance, TAG_BOTH);
        }
        assert_eq!(case1_line(3, 5, int(0)), rat(7, 5));
    }

    #[test]
    fn envelope_examples() {
        let c = lower_envelope(&[(rat(25, 12), rat(1, 3)), (rat(9, 4), rat(1, 4))]).unwrap();
        assert_eq!(c.segments.len(), 1);
        assert_eq!((c.segments[0].intercept, c.segments[0].slope), (rat(11, 8), rat(-1, 2)));

        let c = lower_envelope(&[(int(0), int(3)), (int(3), int(0))]).unwrap();
        assert_eq!(c.segments[0].slope, int(-1));

        let c = lower_envelope(&[(int(1), rat(2, 3)), (rat(3, 2), rat(1, 4)), (rat(5, 4), rat(1, 2))]).unwrap();
        assert_eq!(c.segments.len(), 1);
        assert_eq!(c.evaluate(rat(5, 4)), Some(rat(11, 24)));

        assert!(lower_envelope(&[(int(1), int(1))]).is_err());
        assert!(lower_envelope(&[(int(1), int(1)), (int(1), int(0))]).is_err());
    }

    #[test]
    fn known_curves() {
        let c = assemble_known_curve(3, 4).unwrap();
        let seg = c.find_segment(rat(25, 12), rat(9, 4), rat(11, 8), rat(-1, 2)).unwrap();
        assert_eq!(seg.provenance, TAG_CASE1);
        assert!(c.has_point(rat(1, 4), rat(9, 4)));
        assert!(c.has_point(rat(9, 4), rat(1, 4)));
        assert_eq!(c.evaluate(int(3)), Some(int(0)));

        let c = assemble_known_curve(2, 4).unwrap();
        let seg = c.find_segment(int(1), rat(3, 2), rat(3, 2), rat(-5, 6)).unwrap();
        assert_eq!(seg.provenance, TAG_CASE2);
        assert!(c.has_point(rat(1, 4), rat(3, 2)));
        assert!(c.has_point(rat(3, 2), rat(1, 4)));
        assert!(c.has_point(int(1), rat(2, 3)));
        assert_eq!(c.segments.first().unwrap().provenance, "chen");
        assert_eq!(c.segments.last().unwrap().provenance, TAG_MAN);
    }

    #[test]
    fn odd_boundary_curve_splits_at_scheme_point() {
        let c = assemble_known_curve(3, 5).unwrap();
        let tags: Vec<&str> = c.segments.iter().map(|s| s.provenance.as_str()).collect();
        assert!(tags.contains(&TAG_CASE2) && tags.contains(&TAG_BOTH), "{tags:?}");
    }

    #[test]
    fn known_curves_are_convex_and_decreasing() {
        for k in 2..=10 {
            for n in 1..=k {
                let c = assemble_known_curve(n, k).unwrap();
                assert!(c.segments.iter().all(|s| s.slope < int(0) && s.m_lo < s.m_hi));
                assert!(c.segments.windows(2).all(|w| w[0].slope <= w[1].slope && w[0].m_hi == w[1].m_lo));
                assert_eq!(c.segments.first().unwrap().m_lo, int(0));
                assert_eq!(c.evaluate(int(n as i64)), Some(int(0)));
            }
        }
    }

    #[test]
    fn csv_rows() {
        let c = assemble_known_curve(3, 4).unwrap();
        let out = emit_csv(&c, 2).unwrap();
        assert!(out.starts_with("M_exact,M_decimal,R_exact,R_decimal,provenance\n"));
        assert!(out.contains("25/12,2.083333,1/3,0.333333,theorem-1-point\n"));
        assert!(out.ends_with("3/1,3.000000,0/1,0.000000,full-cache\n"));

        let empty = emit_csv(&TradeoffCurve::default(), 5).unwrap();
        assert_eq!(empty, "M_exact,M_decimal,R_exact,R_decimal,provenance\n");

        let c = assemble_known_curve(2, 4).unwrap();
        let out = emit_csv(&c, 9).unwrap();
        assert!(out.contains("5/4,1.250000,11/24,0.458333,theorem-case2\n"), "{out}");
        assert!(emit_csv(&c, 1).is_err());
    }

    proptest! {
        #[test]
        fn envelope_is_convex_and_below_inputs(
            raw in proptest::collection::btree_map(0i64..60, 0i64..60, 2..12)
        ) {
            let pts: Vec<(Rational, Rational)> =
                raw.iter().map(|(&m, &r)| (rat(m, 4), rat(r, 3))).collect();
            let c = lower_envelope(&pts).unwrap();
            prop_assert!(c.segments.windows(2).all(|w| w[0].slope < w[1].slope));
            for (m, r) in pts {
                prop_assert!(c.evaluate(m).unwrap() <= r);
            }
        }
    }
}
