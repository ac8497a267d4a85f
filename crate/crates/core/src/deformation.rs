//! Versal normal forms and reduced bifurcation fields.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar callable of `(eps, x, y)`.
pub type Fn3 = Arc<dyn Fn(&[f64], f64, f64) -> f64 + Send + Sync>;
/// Scalar callable of `(x, y)`.
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Versal parameter map `(eps, x) -> (a_0..a_{m-1}, abar_0..abar_{m-2})`.
pub type ParamMap = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDimensions {
    pub d: usize,
    pub k: usize,
    pub q: usize,
    pub m: usize,
}

impl ProblemDimensions {
    pub fn new(q: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParams(format!("degeneracy degree m = {m} < 2")));
        }
        if q == 0 || q > 2 {
            return Err(Error::UnsupportedDimension(format!(
                "q = {q}; only one or two perturbation parameters are supported"
            )));
        }
        Ok(Self { d: 1, k: 1, q, m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Circle,
    Interval,
}

/// Coordinate chart on the equilibrium manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldChart {
    pub kind: ChartKind,
    pub range: [f64; 2],
}

impl ManifoldChart {
    pub fn circle() -> Self {
        Self {
            kind: ChartKind::Circle,
            range: [0.0, TAU],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self {
            kind: ChartKind::Interval,
            range: [lo, hi],
        }
    }

    pub fn periodic(&self) -> bool {
        self.kind == ChartKind::Circle
    }

    pub fn length(&self) -> f64 {
        self.range[1] - self.range[0]
    }

    /// Canonical representative of `x`: reduced into `[lo, hi)` on a circle,
    /// range-checked on an interval.
    pub fn normalize(&self, x: f64) -> Result<f64> {
        let [lo, hi] = self.range;
        match self.kind {
            ChartKind::Circle => {
                let p = hi - lo;
                let mut r = (x - lo).rem_euclid(p) + lo;
                if r >= hi {
                    r = lo;
                }
                Ok(r)
            }
            ChartKind::Interval => {
                if x < lo || x > hi {
                    Err(Error::Domain { x, lo, hi })
                } else {
                    Ok(x)
                }
            }
        }
    }

    /// Signed distance `b - a`, taking the short way round on a circle.
    pub fn delta(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        if self.periodic() {
            let p = self.length();
            d - p * (d / p).round()
        } else {
            d
        }
    }
}

/// Versal parameters `(a_0..a_{m-1}; abar_0..abar_{m-2})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub m: usize,
    pub a: Vec<f64>,
    pub abar: Vec<f64>,
}

impl DeformationParams {
    pub fn new(a: Vec<f64>, abar: Vec<f64>) -> Result<Self> {
        let m = a.len();
        if m < 2 || abar.len() + 1 != m {
            return Err(Error::InvalidParams(format!(
                "expected m >= 2 coefficients a and m - 1 coefficients abar, got {} and {}",
                a.len(),
                abar.len()
            )));
        }
        Ok(Self { m, a, abar })
    }

    /// Split a flat vector of length `2m - 1`.
    pub fn from_flat(m: usize, v: &[f64]) -> Result<Self> {
        if m < 2 || v.len() != 2 * m - 1 {
            return Err(Error::InvalidParams(format!(
                "flat parameter vector of length {} does not fit m = {m}",
                v.len()
            )));
        }
        Ok(Self {
            m,
            a: v[..m].to_vec(),
            abar: v[m..].to_vec(),
        })
    }

    /// The `m = 2` labelling `(a_1, a_2, a_3) = (a_0, a_1, abar_0)`.
    pub fn from_m2(a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            m: 2,
            a: vec![a1, a2],
            abar: vec![a3],
        }
    }

    pub fn zero(m: usize) -> Self {
        Self {
            m,
            a: vec![0.0; m],
            abar: vec![0.0; m.saturating_sub(1)],
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.a.clone();
        v.extend_from_slice(&self.abar);
        v
    }

    pub fn norm(&self) -> f64 {
        self.a
            .iter()
            .chain(self.abar.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    fn check(&self) -> Result<()> {
        if self.m < 2 || self.a.len() != self.m || self.abar.len() + 1 != self.m {
            return Err(Error::InvalidParams(format!(
                "inconsistent parameters: m = {}, |a| = {}, |abar| = {}",
                self.m,
                self.a.len(),
                self.abar.len()
            )));
        }
        Ok(())
    }
}

/// `(a_1 + a_2 y, a_3 + y^2)`.
pub fn eval_versal_m2(p: &DeformationParams, y: f64) -> Result<[f64; 2]> {
    p.check()?;
    if p.m != 2 {
        return Err(Error::InvalidParams(format!("expected m = 2, got m = {}", p.m)));
    }
    Ok([p.a[0] + p.a[1] * y, p.abar[0] + y * y])
}

fn horner(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * y + ci)
}

/// `(sum a_i y^i, sum abar_j y^j + y^m)`.
pub fn eval_versal_general(p: &DeformationParams, y: f64) -> Result<[f64; 2]> {
    p.check()?;
    Ok([versal_first(&p.a, y), versal_second(&p.abar, y)])
}

pub(crate) fn versal_first(a: &[f64], y: f64) -> f64 {
    horner(a, y)
}

pub(crate) fn versal_second(abar: &[f64], y: f64) -> f64 {
    let m = abar.len() + 1;
    horner(abar, y) + y.powi(m as i32)
}

/// Anything that behaves like a two-component reduced field on `(eps, x, y)`.
pub trait Field2: Send + Sync {
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2];
    fn q(&self) -> usize;
    fn chart(&self) -> ManifoldChart;
}

impl<T: Field2 + ?Sized> Field2 for Arc<T> {
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        (**self).eval(eps, x, y)
    }
    fn q(&self) -> usize {
        (**self).q()
    }
    fn chart(&self) -> ManifoldChart {
        (**self).chart()
    }
}

impl<T: Field2 + ?Sized> Field2 for &T {
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        (**self).eval(eps, x, y)
    }
    fn q(&self) -> usize {
        (**self).q()
    }
    fn chart(&self) -> ManifoldChart {
        (**self).chart()
    }
}

/// Closure-backed field.
pub struct FnField<F> {
    pub f: F,
    pub q: usize,
    pub chart: ManifoldChart,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], f64, f64) -> [f64; 2] + Send + Sync,
{
    pub fn new(q: usize, chart: ManifoldChart, f: F) -> Self {
        Self { f, q, chart }
    }
}

impl<F> Field2 for FnField<F>
where
    F: Fn(&[f64], f64, f64) -> [f64; 2] + Send + Sync,
{
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        (self.f)(eps, x, y)
    }
    fn q(&self) -> usize {
        self.q
    }
    fn chart(&self) -> ManifoldChart {
        self.chart
    }
}

/// One component `F_i = sum_j eps_j g_ij(eps,x,y) + y^{m_i} r_i(x,y)`.
#[derive(Clone)]
pub struct Component {
    pub m: usize,
    pub g: Vec<Fn3>,
    pub r: Fn2,
}

impl fmt::Debug for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Component")
            .field("m", &self.m)
            .field("g", &format_args!("[{} callables]", self.g.len()))
            .finish_non_exhaustive()
    }
}

/// Reduced field in the split form used by the branch-point conditions.
#[derive(Clone, Debug)]
pub struct ReducedFieldModel {
    pub dims: ProblemDimensions,
    pub components: [Component; 2],
    pub chart: ManifoldChart,
}

impl ReducedFieldModel {
    pub fn new(q: usize, components: [Component; 2], chart: ManifoldChart) -> Result<Self> {
        let m = components.iter().map(|c| c.m).max().unwrap_or(0);
        let dims = ProblemDimensions::new(q, m)?;
        for (i, c) in components.iter().enumerate() {
            if c.m < 2 {
                return Err(Error::InvalidParams(format!(
                    "component {} has exponent {} < 2",
                    i + 1,
                    c.m
                )));
            }
            if c.g.len() != q {
                return Err(Error::InvalidParams(format!(
                    "component {} has {} g-callables, expected q = {q}",
                    i + 1,
                    c.g.len()
                )));
            }
        }
        let model = Self {
            dims,
            components,
            chart,
        };
        model.check_r_nonzero()?;
        Ok(model)
    }

    /// Convenience constructor for `q = 1` with `g_i(x)` and `r_i(x)` independent of `y`.
    pub fn simple_q1(
        m: [usize; 2],
        g: [fn(f64) -> f64; 2],
        r: [fn(f64) -> f64; 2],
        chart: ManifoldChart,
    ) -> Result<Self> {
        let comp = |i: usize| Component {
            m: m[i],
            g: vec![{
                let gi = g[i];
                Arc::new(move |_e: &[f64], x: f64, _y: f64| gi(x)) as Fn3
            }],
            r: {
                let ri = r[i];
                Arc::new(move |x: f64, _y: f64| ri(x)) as Fn2
            },
        };
        Self::new(1, [comp(0), comp(1)], chart)
    }

    // r_i(., 0) must not vanish identically on the chart
    fn check_r_nonzero(&self) -> Result<()> {
        let [lo, hi] = self.chart.range;
        for (i, c) in self.components.iter().enumerate() {
            let nonzero = (0..64).any(|k| {
                let x = lo + (hi - lo) * (k as f64 + 0.5) / 64.0;
                (c.r)(x, 0.0).abs() > 1e-14
            });
            if !nonzero {
                return Err(Error::ModelInconsistency(format!(
                    "r_{}(x, 0) vanishes identically on the chart",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn g_at(&self, i: usize, j: usize, eps: &[f64], x: f64, y: f64) -> f64 {
        (self.components[i].g[j])(eps, x, y)
    }

    pub fn r_at(&self, i: usize, x: f64, y: f64) -> f64 {
        (self.components[i].r)(x, y)
    }

    fn eval_unchecked(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, c) in self.components.iter().enumerate() {
            let lin: f64 = c
                .g
                .iter()
                .zip(eps)
                .map(|(g, &e)| if e == 0.0 { 0.0 } else { e * g(eps, x, y) })
                .sum();
            out[i] = lin + y.powi(c.m as i32) * (c.r)(x, y);
        }
        out
    }
}

impl Field2 for ReducedFieldModel {
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        self.eval_unchecked(eps, x, y)
    }
    fn q(&self) -> usize {
        self.dims.q
    }
    fn chart(&self) -> ManifoldChart {
        self.chart
    }
}

/// Evaluate the reduced field, rejecting `x` outside a non-periodic chart.
pub fn eval_reduced_field(
    model: &ReducedFieldModel,
    eps: &[f64],
    x: f64,
    y: f64,
) -> Result<[f64; 2]> {
    if eps.len() != model.dims.q {
        return Err(Error::InvalidParams(format!(
            "eps has length {}, model has q = {}",
            eps.len(),
            model.dims.q
        )));
    }
    let x = model.chart.normalize(x)?;
    Ok(model.eval_unchecked(eps, x, y))
}

/// A family `H(a(eps, x), y)` built from a versal parameter map.
#[derive(Clone)]
pub struct VersalFamily {
    pub m: usize,
    pub q: usize,
    pub a: ParamMap,
    pub chart: ManifoldChart,
}

impl fmt::Debug for VersalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VersalFamily")
            .field("m", &self.m)
            .field("q", &self.q)
            .field("chart", &self.chart)
            .finish_non_exhaustive()
    }
}

impl VersalFamily {
    pub fn new(m: usize, q: usize, chart: ManifoldChart, a: ParamMap) -> Result<Self> {
        ProblemDimensions::new(q, m)?;
        let probe = a(&vec![0.0; q], chart.range[0]);
        if probe.len() != 2 * m - 1 {
            return Err(Error::InvalidParams(format!(
                "parameter map returns {} values, expected {}",
                probe.len(),
                2 * m - 1
            )));
        }
        Ok(Self { m, q, a, chart })
    }

    pub fn params(&self, eps: &[f64], x: f64) -> DeformationParams {
        DeformationParams::from_flat(self.m, &(self.a)(eps, x)).expect("length checked at construction")
    }
}

impl Field2 for VersalFamily {
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        let v = (self.a)(eps, x);
        let (a, abar) = v.split_at(self.m);
        [versal_first(a, y), versal_second(abar, y)]
    }
    fn q(&self) -> usize {
        self.q
    }
    fn chart(&self) -> ManifoldChart {
        self.chart
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example1() -> ReducedFieldModel {
        ReducedFieldModel::simple_q1([2, 3], [|_| 1.0, f64::sin], [|_| 1.0, |_| 1.0], ManifoldChart::circle())
            .unwrap()
    }

    #[test]
    fn versal_m2_values() {
        let z = DeformationParams::from_m2(0.0, 0.0, 0.0);
        assert_eq!(eval_versal_m2(&z, 0.0).unwrap(), [0.0, 0.0]);
        let p = DeformationParams::from_m2(2.0, 1.0, -4.0);
        assert_eq!(eval_versal_m2(&p, -2.0).unwrap(), [0.0, 0.0]);
        let p = DeformationParams::from_m2(0.0, 1.0, -1.0);
        assert_eq!(eval_versal_m2(&p, 1.0).unwrap(), [1.0, 0.0]);
        let p3 = DeformationParams::zero(3);
        assert!(eval_versal_m2(&p3, 0.0).is_err());
    }

    #[test]
    fn versal_general_values() {
        let z = DeformationParams::zero(3);
        assert_eq!(eval_versal_general(&z, 2.0).unwrap(), [0.0, 8.0]);
        let p = DeformationParams::new(vec![-1.0, 1.0, 0.0], vec![-2.0, 1.0]).unwrap();
        assert_eq!(eval_versal_general(&p, 1.0).unwrap(), [0.0, 0.0]);
        assert!(DeformationParams::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(DeformationParams::from_flat(3, &[0.0; 4]).is_err());
    }

    #[test]
    fn example1_field() {
        let model = example1();
        let v = eval_reduced_field(&model, &[-0.01], 0.1, 0.1).unwrap();
        assert!(v[0].abs() < 1e-15);
        let expect = -0.01 * 0.1f64.sin() + 0.001;
        assert!((v[1] - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_g_reproduces_germ() {
        let model =
            ReducedFieldModel::simple_q1([2, 3], [|_| 0.0, |_| 0.0], [|_| 1.0, |x| 2.0 + x.cos()], ManifoldChart::circle())
                .unwrap();
        for &e in &[0.0, 0.3, -1.0] {
            let v = eval_reduced_field(&model, &[e], 1.0, 0.5).unwrap();
            assert_eq!(v, [0.25, 0.125 * (2.0 + 1f64.cos())]);
        }
    }

    #[test]
    fn interval_chart_rejects_outside() {
        let model = ReducedFieldModel::simple_q1([2, 2], [|_| 1.0, |_| 1.0], [|_| 1.0, |_| 1.0], ManifoldChart::interval(-1.0, 1.0))
            .unwrap();
        assert!(matches!(
            eval_reduced_field(&model, &[0.0], 2.0, 0.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn vanishing_r_rejected() {
        let res = ReducedFieldModel::simple_q1([2, 2], [|_| 1.0, |_| 1.0], [|_| 0.0, |_| 1.0], ManifoldChart::circle());
        assert!(matches!(res, Err(Error::ModelInconsistency(_))));
    }

    #[test]
    fn rejects_large_q() {
        assert!(matches!(ProblemDimensions::new(3, 2), Err(Error::UnsupportedDimension(_))));
        assert!(ProblemDimensions::new(1, 1).is_err());
    }

    #[test]
    fn circle_normalisation() {
        let c = ManifoldChart::circle();
        assert!((c.normalize(-0.5).unwrap() - (TAU - 0.5)).abs() < 1e-15);
        assert!((c.normalize(TAU + 0.25).unwrap() - 0.25).abs() < 1e-12);
        assert!((c.delta(6.2, 0.1) - (0.1 + TAU - 6.2)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn m2_and_general_agree(a1 in -10.0..10.0f64, a2 in -10.0..10.0f64, a3 in -10.0..10.0f64, y in -3.0..3.0f64) {
            let p = DeformationParams::from_m2(a1, a2, a3);
            prop_assert_eq!(eval_versal_m2(&p, y).unwrap(), eval_versal_general(&p, y).unwrap());
        }

        #[test]
        fn field_vanishes_on_unperturbed_manifold(x in 0.0..TAU) {
            let model = example1();
            prop_assert_eq!(eval_reduced_field(&model, &[0.0], x, 0.0).unwrap(), [0.0, 0.0]);
            let h = 1e-4;
            let p = eval_reduced_field(&model, &[0.0], x, h).unwrap();
            let n = eval_reduced_field(&model, &[0.0], x, -h).unwrap();
            for i in 0..2 {
                prop_assert!(((p[i] - n[i]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }
}
