//! Classification of `(s, x)` against the strata of the positive tangent cone.

use serde::Serialize;

use super::{direction, ExpansionData};
use super::curves::{solve_on_torus, TorusDomain};

/// Strata of the positive tangent cone of the `m = 2` discriminant:
/// `T0` the origin, `T1 = {b1 = 0, b3 < 0, b2 ≠ 0}`, `T1prime = {b1 = b3 = 0, b2 ≠ 0}`,
/// `T2 = {b1 = b2 = 0, b3 < 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TangentConeStratum {
    T0,
    T1,
    T1prime,
    T2,
    NotInT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    Interior,
    End,
    Intersection,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedPoint {
    pub s: Vec<f64>,
    pub x: f64,
    pub kind: PointKind,
    pub stratum: TangentConeStratum,
    /// `(b1, b2, b3)` for `m = 2`; `(b0, b̄0, b1, b2)` for `m ≥ 3`.
    pub residuals: Vec<f64>,
}

/// Default gate: `1e-6 · max(1, |b(x)|)`.
pub fn default_tol(data: &ExpansionData, x: f64) -> f64 {
    1e-6 * (data.b)(x).norm().max(1.0)
}

/// Classify the linear coefficient `b(x) s = (b1, b2, b3)` for `m = 2`.
pub fn classify_point_m2(data: &ExpansionData, s: &[f64], x: f64, tol: f64) -> ClassifiedPoint {
    let r = data.bs(s, x);
    classify_m2_values(s.to_vec(), x, [r[0], r[1], r[2]], tol)
}

pub(crate) fn classify_m2_values(s: Vec<f64>, x: f64, b: [f64; 3], tol: f64) -> ClassifiedPoint {
    let [b1, b2, b3] = b;
    let (kind, stratum) = if b1.abs() <= tol && b2.abs() <= tol && b3.abs() <= tol {
        (PointKind::None, TangentConeStratum::T0)
    } else if b1.abs() > tol || b3 > tol {
        (PointKind::None, TangentConeStratum::NotInT)
    } else if b3 < -tol && b2.abs() > tol {
        (PointKind::Interior, TangentConeStratum::T1)
    } else if b3.abs() <= tol && b2.abs() > tol {
        (PointKind::End, TangentConeStratum::T1prime)
    } else {
        // here |b1| <= tol, |b2| <= tol and b3 < -tol
        (PointKind::Intersection, TangentConeStratum::T2)
    };
    ClassifiedPoint {
        s,
        x,
        kind,
        stratum,
        residuals: vec![b1, b2, b3],
    }
}

/// Classification for `m ≥ 3` on `(b0, b̄0, b1, b2)`.
///
/// The tangent cone is the hyperplane `b0 = 0`. On it, case (i) `b̄0 b1 ≠ 0` is
/// reported as `Interior`, case (ii) `b̄0 = 0, b1 ≠ 0` as `End` and case (iii)
/// `b1 = 0` (no arc) as `None` with stratum `T2`.
pub fn classify_point_m(m: usize, data: &ExpansionData, s: &[f64], x: f64, tol: f64) -> ClassifiedPoint {
    let v = data.bs(s, x);
    classify_m_values(s.to_vec(), x, [v[0], v[m], v[1], v[2]], tol)
}

fn classify_m_values(s: Vec<f64>, x: f64, b: [f64; 4], tol: f64) -> ClassifiedPoint {
    let [b0, bb0, b1, b2] = b;
    let (kind, stratum) = if b0.abs() > tol {
        (PointKind::None, TangentConeStratum::NotInT)
    } else if b1.abs() <= tol {
        if b2.abs() > tol {
            (PointKind::None, TangentConeStratum::T2)
        } else {
            (PointKind::None, TangentConeStratum::T0)
        }
    } else if bb0.abs() <= tol {
        (PointKind::End, TangentConeStratum::T1prime)
    } else {
        (PointKind::Interior, TangentConeStratum::T1)
    };
    ClassifiedPoint {
        s,
        x,
        kind,
        stratum,
        residuals: b.to_vec(),
    }
}

/// Stratum of the versal coefficient vector `b = (b_0..b_{m-1}, b̄_0..b̄_{m-2})`.
pub fn tangent_cone_stratum(m: usize, b: &[f64], tol: f64) -> TangentConeStratum {
    if m == 2 {
        classify_m2_values(Vec::new(), 0.0, [b[0], b[1], b[2]], tol).stratum
    } else {
        classify_m_values(Vec::new(), 0.0, [b[0], b[m], b[1], b[2]], tol).stratum
    }
}

/// End points (`b1 = b3 = 0`) and intersection points (`b1 = b2 = 0`) of an
/// `m = 2` expansion on a periodic chart, each returned with its classification.
pub fn find_special_points_m2(
    data: &ExpansionData,
    x_range: [f64; 2],
    grid: usize,
) -> Vec<ClassifiedPoint> {
    let mut out = Vec::new();
    for (rows, want) in [((0, 2), PointKind::End), ((0, 1), PointKind::Intersection)] {
        let f = |th: f64, x: f64| {
            let v = data.bs(&direction(th), x);
            [v[rows.0], v[rows.1]]
        };
        let domain = TorusDomain::periodic(x_range);
        for (th, x) in solve_on_torus(&f, &domain, grid, 1e-12) {
            let s = direction(th);
            let cp = classify_point_m2(data, &s, x, default_tol(data, x));
            if cp.kind == want {
                out.push(cp);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gate(b: [f64; 3]) -> PointKind {
        classify_m2_values(vec![1.0, 0.0], 0.0, b, 1e-6).kind
    }

    #[test]
    fn m2_examples() {
        assert_eq!(gate([0.0, 1.0, -1.0]), PointKind::Interior);
        assert_eq!(gate([0.0, 1.0, 0.0]), PointKind::End);
        assert_eq!(gate([0.0, 0.0, -1.0]), PointKind::Intersection);
        assert_eq!(gate([0.5, 1.0, -1.0]), PointKind::None);
        let z = classify_m2_values(vec![1.0, 0.0], 0.0, [0.0; 3], 1e-6);
        assert_eq!((z.kind, z.stratum), (PointKind::None, TangentConeStratum::T0));
    }

    proptest! {
        #[test]
        fn classification_is_total_and_consistent(
            b1 in prop_oneof![Just(0.0), -1.0..1.0f64],
            b2 in prop_oneof![Just(0.0), -1.0..1.0f64],
            b3 in prop_oneof![Just(0.0), -1.0..1.0f64],
        ) {
            let tol = 1e-6;
            let p = classify_m2_values(vec![1.0, 0.0], 0.0, [b1, b2, b3], tol);
            if p.kind != PointKind::None {
                prop_assert!(b3 <= tol);
                prop_assert!(b1.abs() <= tol);
            }
            let expect_stratum = match p.kind {
                PointKind::Interior => TangentConeStratum::T1,
                PointKind::End => TangentConeStratum::T1prime,
                PointKind::Intersection => TangentConeStratum::T2,
                PointKind::None => p.stratum,
            };
            prop_assert_eq!(p.stratum, expect_stratum);
            // b is linear in s, so the antipode classifies as End exactly when (s, x) does,
            // except that the sign of b3 flips for other kinds
            let q = classify_m2_values(vec![-1.0, 0.0], 0.0, [-b1, -b2, -b3], tol);
            prop_assert_eq!(p.kind == PointKind::End, q.kind == PointKind::End);
        }
    }
}
