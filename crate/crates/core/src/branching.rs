//! Branch-point conditions for `d = 1`: which points `x0` of the equilibrium
//! curve emit solution branches as `ε` leaves zero.
//!
//! Components are `F_i = ε g_i + y^{m_i} r_i`. Everything here works on the
//! values `g_i(0, x, 0)` and `r_i(x, 0)` along the curve.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{ManifoldChart, ReducedFieldModel};
use crate::error::{Error, Result};
use crate::lyapunov_schmidt::{extract_branch_data, LSReduction};
use crate::numerics::{d1, d2, scalar_zeros};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentData {
    pub m: usize,
    pub g: f64,
    pub r: f64,
}

/// Leading coefficients of every component at one point `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchData {
    pub x: f64,
    pub components: Vec<ComponentData>,
}

impl BranchData {
    pub fn new(x: f64, components: Vec<ComponentData>) -> Self {
        Self { x, components }
    }

    /// `d_ij = r_i g_j − r_j g_i` (0-based indices).
    pub fn d(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.components[i], &self.components[j]);
        a.r * b.g - b.r * a.g
    }

    /// Component indices sorted by exponent (stable).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.components.len()).collect();
        idx.sort_by_key(|&i| self.components[i].m);
        idx
    }

    /// Position in [`order`](Self::order) of the last component with `g ≠ 0`.
    pub fn n(&self, tol: f64) -> Option<usize> {
        let ord = self.order();
        ord.iter().rposition(|&i| self.components[i].g.abs() >= tol.max(f64::MIN_POSITIVE))
    }

    /// The equal-exponent block `[l, p]` (positions in sorted order) containing `n`.
    pub fn block(&self, n: usize) -> (usize, usize) {
        let ord = self.order();
        let mn = self.components[ord[n]].m;
        let l = ord.iter().position(|&i| self.components[i].m == mn).unwrap_or(n);
        let p = ord.iter().rposition(|&i| self.components[i].m == mn).unwrap_or(n);
        (l, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    /// `r_i = 0` required.
    RZero,
    /// `d_ij = 0` required.
    DZero,
    /// `r_i g_j = 0` required (full form).
    RgZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FailedCondition {
    pub i: usize,
    pub j: usize,
    pub kind: ConditionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryReport {
    pub pass: bool,
    /// Every `g_i` vanishes: the conditions hold vacuously.
    pub all_g_zero: bool,
    /// Original index of the last nonzero `g` in exponent order.
    pub n: Option<usize>,
    pub failed: Vec<FailedCondition>,
}

/// Reduced necessary conditions: with `n` the last nonzero `g` in exponent
/// order, `r_i = 0` for `m_i < m_n` and `d_ij = 0` inside the block of `m_n`.
pub fn necessary_conditions(data: &BranchData, tol: f64) -> NecessaryReport {
    let zero = |v: f64| v.abs() <= tol;
    let ord = data.order();
    let Some(n) = data.n(tol) else {
        return NecessaryReport {
            pass: true,
            all_g_zero: true,
            n: None,
            failed: Vec::new(),
        };
    };
    let mn = data.components[ord[n]].m;
    let mut failed = Vec::new();
    for &i in &ord {
        let c = &data.components[i];
        if c.m < mn && !zero(c.r) {
            failed.push(FailedCondition { i, j: i, kind: ConditionKind::RZero });
        }
    }
    let (l, p) = data.block(n);
    for a in l..=p {
        for b in a + 1..=p {
            let (i, j) = (ord[a].min(ord[b]), ord[a].max(ord[b]));
            if !zero(data.d(i, j)) {
                failed.push(FailedCondition { i, j, kind: ConditionKind::DZero });
            }
        }
    }
    NecessaryReport {
        pass: failed.is_empty(),
        all_g_zero: false,
        n: Some(ord[n]),
        failed,
    }
}

/// The unreduced conditions: `r_i g_j = 0` when `m_i < m_j` and `d_ij = 0`
/// when `m_i = m_j`, over all pairs. Kept as a cross-check of the reduced form.
pub fn necessary_conditions_full(data: &BranchData, tol: f64) -> NecessaryReport {
    let k = data.components.len();
    let mut failed = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let (a, b) = (&data.components[i], &data.components[j]);
            if a.m < b.m && (a.r * b.g).abs() > tol {
                failed.push(FailedCondition { i, j, kind: ConditionKind::RgZero });
            }
            if i < j && a.m == b.m && data.d(i, j).abs() > tol {
                failed.push(FailedCondition { i, j, kind: ConditionKind::DZero });
            }
        }
    }
    let all_g_zero = data.components.iter().all(|c| c.g.abs() < tol.max(f64::MIN_POSITIVE));
    NecessaryReport {
        pass: failed.is_empty(),
        all_g_zero,
        n: data.n(tol).map(|n| data.order()[n]),
        failed,
    }
}

/// Anything that yields [`BranchData`] along a chart.
pub trait BranchDataSource: Sync {
    fn data_at(&self, x: f64) -> Result<BranchData>;
    fn chart(&self) -> ManifoldChart;
}

/// A reduced model probed in the parameter direction `direction`:
/// `g_i = Σ_j direction_j g_ij(0, x, 0)`.
pub struct ModelSource<'a> {
    pub model: &'a ReducedFieldModel,
    pub direction: Vec<f64>,
}

impl<'a> ModelSource<'a> {
    /// Probe along the first parameter axis (`+ε` when `q = 1`).
    pub fn new(model: &'a ReducedFieldModel) -> Self {
        let mut direction = vec![0.0; model.dims.q];
        direction[0] = 1.0;
        Self { model, direction }
    }

    pub fn with_direction(model: &'a ReducedFieldModel, direction: Vec<f64>) -> Result<Self> {
        if direction.len() != model.dims.q {
            return Err(Error::InvalidParams(format!(
                "direction has {} components, model has q = {}",
                direction.len(),
                model.dims.q
            )));
        }
        Ok(Self { model, direction })
    }
}

impl BranchDataSource for ModelSource<'_> {
    fn data_at(&self, x: f64) -> Result<BranchData> {
        let q = self.model.dims.q;
        let zero = vec![0.0; q];
        let comps = (0..2)
            .map(|i| ComponentData {
                m: self.model.components[i].m,
                g: (0..q).map(|j| self.direction[j] * self.model.g_at(i, j, &zero, x, 0.0)).sum(),
                r: self.model.r_at(i, x, 0.0),
            })
            .collect();
        Ok(BranchData::new(x, comps))
    }
    fn chart(&self) -> ManifoldChart {
        self.model.chart
    }
}

/// Coefficients read off a numerical reduction by differencing.
pub struct ExtractedSource<'a> {
    pub reduction: &'a LSReduction,
    pub direction: Vec<f64>,
    pub y_box: f64,
    pub eps_probe: f64,
}

impl BranchDataSource for ExtractedSource<'_> {
    fn data_at(&self, x: f64) -> Result<BranchData> {
        let e = extract_branch_data(self.reduction, x, self.y_box, self.eps_probe)?;
        let comps = (0..2)
            .map(|i| ComponentData {
                m: e.m[i],
                g: e.g[i].iter().zip(&self.direction).map(|(g, s)| g * s).sum(),
                r: e.r[i],
            })
            .collect();
        Ok(BranchData::new(x, comps))
    }
    fn chart(&self) -> ManifoldChart {
        self.reduction.system.chart
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    General,
    Uniform,
    Variational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchStatus {
    NecessaryOnly,
    Sufficient,
    DegenerateZero,
}

/// Which scalar condition map produced the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionSet {
    /// `g_{l,n}` with positions `l`, `n` (0-based, exponent order).
    General { l: usize, n: usize },
    /// `g_[n]` when exponents are equal.
    Uniform,
    /// `(g_2, ..)` when `m_1 < m_2`.
    BarG,
    /// Critical point of `g` with `r ≠ 0`.
    VariationalCritical,
    /// Regular zero of `m r`.
    VariationalRZero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub x0: f64,
    /// Sign of `ε` along the branch (`q = 1`); `None` when both signs occur.
    pub eps_sign: Option<f64>,
    pub status: BranchStatus,
    pub condition: ConditionSet,
    /// Derivative of the condition map at the zero.
    pub jacobian: f64,
    /// Value of the condition map after polishing.
    pub residual: f64,
    pub interpretation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOptions {
    pub grid: usize,
    /// Zero test for `g_i`, `r_i`, `d_ij`, relative to the sup of the map.
    pub tol: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self { grid: 2048, tol: 1e-6 }
    }
}

/// First-order versal coefficients per unit `ε` of a two-component germ.
///
/// With `m = m_lo ≤ m_hi`, `p̄ = F_lo / r_lo` gives `ā_0 = g_lo / r_lo` and
/// `p = F_hi − (r_hi / r_lo) y^{m_hi − m_lo} F_lo` gives `a_0 = g_hi` (or
/// `d / r_lo` for equal exponents) and `a_{m_hi − m_lo} = −r_hi g_lo / r_lo`
/// when that index is below `m`. Returns `(m, b)` with
/// `b = (a_0..a_{m−1}, ā_0..ā_{m−2})`.
pub fn versal_linear_part(data: &BranchData) -> Result<(usize, Vec<f64>)> {
    if data.components.len() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "versal coefficients need two components, got {}",
            data.components.len()
        )));
    }
    let ord = data.order();
    let (lo, hi) = (data.components[ord[0]], data.components[ord[1]]);
    if lo.r == 0.0 {
        return Err(Error::DegeneracyCheck(format!("r vanishes at x = {}", data.x)));
    }
    let m = lo.m;
    if m < 2 {
        return Err(Error::DegeneracyCheck(format!("exponent {m} at x = {} is not degenerate", data.x)));
    }
    let mut b = vec![0.0; 2 * m - 1];
    let shift = hi.m - lo.m;
    let q = hi.r / lo.r;
    if shift == 0 {
        b[0] = hi.g - q * lo.g;
    } else {
        b[0] = hi.g;
        if shift < m {
            b[shift] = -q * lo.g;
        }
    }
    b[m] = lo.g / lo.r;
    Ok((m, b))
}

#[derive(Clone, Copy)]
enum MapKind {
    G(usize),
    R(usize),
    D(usize, usize),
}

fn map_value(data: &BranchData, k: MapKind) -> f64 {
    match k {
        MapKind::G(i) => data.components[i].g,
        MapKind::R(i) => data.components[i].r,
        MapKind::D(i, j) => data.d(i, j),
    }
}

// sign of ε on the branch from ε ≈ −y^{m_n} r_n / g_n
fn eps_sign(data: &BranchData, n: usize) -> Option<f64> {
    let c = &data.components[n];
    if c.m % 2 == 1 || c.g == 0.0 || c.r == 0.0 {
        return None;
    }
    Some((-c.r / c.g).signum())
}

/// Branch points on the chart for `d = 1`.
///
/// Each candidate condition map is sampled on `opts.grid` points; sign changes
/// are bisected and tangential zeros picked up from minima of `|map|`. A zero is
/// `Sufficient` when the map crosses with `|map'| > tol (1 + sup|map|)` and the
/// side conditions hold, `DegenerateZero` when the derivative fails that gate.
pub fn find_branch_points(
    source: &dyn BranchDataSource,
    variant: Variant,
    opts: &BranchOptions,
) -> Result<Vec<BranchPoint>> {
    if variant == Variant::Variational {
        return Err(Error::VariantMismatch(
            "the variational variant takes a VariationalModel".into(),
        ));
    }
    let chart = source.chart();
    let [lo, hi] = chart.range;
    let periodic = chart.periodic();
    let npts = if periodic { opts.grid } else { opts.grid + 1 };
    let h = (hi - lo) / opts.grid as f64;
    let samples: Vec<BranchData> = (0..npts)
        .into_par_iter()
        .map(|i| source.data_at(lo + i as f64 * h))
        .collect::<Result<_>>()?;
    let first = &samples[0];
    if first.components.len() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "branch-point search needs d = 1 (two components), got {}",
            first.components.len()
        )));
    }
    let ord = first.order();
    let (i1, i2) = (ord[0], ord[1]);
    let equal = first.components[i1].m == first.components[i2].m;
    if samples.iter().any(|s| s.components[i1].m != first.components[i1].m || s.components[i2].m != first.components[i2].m) {
        return Err(Error::VariantMismatch("exponents change along the chart".into()));
    }
    let sup_r = |i: usize| samples.iter().map(|s| s.components[i].r.abs()).fold(0.0, f64::max);
    let min_r = |i: usize| samples.iter().map(|s| s.components[i].r.abs()).fold(f64::INFINITY, f64::min);
    if variant == Variant::Uniform {
        for i in [i1, i2] {
            if min_r(i) <= opts.tol * (1.0 + sup_r(i)) {
                return Err(Error::VariantMismatch(format!(
                    "uniform variant needs r_{} nonvanishing on the chart",
                    i + 1
                )));
            }
        }
    }

    let maps: Vec<MapKind> = match (variant, equal) {
        (Variant::Uniform, false) => vec![MapKind::G(i2)],
        (Variant::Uniform, true) => vec![MapKind::D(i1, i2)],
        (_, false) => vec![MapKind::G(i2), MapKind::R(i1)],
        (_, true) => vec![MapKind::D(i1, i2)],
    };

    let mut out: Vec<BranchPoint> = Vec::new();
    for kind in maps {
        let vals: Vec<f64> = samples.iter().map(|s| map_value(s, kind)).collect();
        let sup = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = 1.0 + sup;
        let eval = |x: f64| source.data_at(x).map(|d| map_value(&d, kind)).unwrap_or(f64::NAN);
        let touch = opts.tol * scale;
        let zeros = scalar_zeros(&eval, lo, hi, opts.grid, periodic, touch);
        for z in zeros {
            let data = source.data_at(z.x)?;
            let deriv = z.derivative;
            let regular = !z.touching && deriv.abs() > opts.tol * scale;
            let ztol = opts.tol * scale;
            let nz = |v: f64| v.abs() > ztol;
            let (c1, c2) = (data.components[i1], data.components[i2]);
            let (condition, side_ok, n_pos, relevant) = match kind {
                // g2 = 0: n is the lower component, r_n ≠ 0 needed
                MapKind::G(_) => (
                    if variant == Variant::Uniform {
                        ConditionSet::BarG
                    } else {
                        ConditionSet::General { l: 0, n: 0 }
                    },
                    nz(c1.r),
                    i1,
                    nz(c1.g),
                ),
                // r1 = 0: n is the upper component
                MapKind::R(_) => (ConditionSet::General { l: 1, n: 1 }, nz(c2.r), i2, nz(c2.g)),
                MapKind::D(..) => {
                    let cs = if variant == Variant::Uniform {
                        ConditionSet::Uniform
                    } else {
                        ConditionSet::General { l: 0, n: 1 }
                    };
                    if nz(c2.g) {
                        (cs, nz(c2.r), i2, true)
                    } else {
                        // g2 = 0 forces r2 g1 = 0 as well; only necessary
                        (cs, false, i1, nz(c1.g))
                    }
                }
            };
            if !relevant && !necessary_conditions(&data, ztol).all_g_zero {
                continue;
            }
            let status = if !regular {
                BranchStatus::DegenerateZero
            } else if side_ok {
                BranchStatus::Sufficient
            } else {
                BranchStatus::NecessaryOnly
            };
            let dup = out.iter().any(|p| chart.delta(p.x0, z.x).abs() < 0.5 * h);
            if dup {
                continue;
            }
            out.push(BranchPoint {
                x0: z.x,
                eps_sign: eps_sign(&data, n_pos),
                status,
                condition,
                jacobian: deriv,
                residual: map_value(&data, kind),
                interpretation: None,
            });
        }
    }
    out.sort_by(|a, b| a.x0.total_cmp(&b.x0));
    Ok(out)
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Gradient problem `f = ε g(x) + y^m r(x)` restricted to `ε = 0`, `y = 0`
/// coefficient data.
#[derive(Clone)]
pub struct VariationalModel {
    pub m: usize,
    pub g: ScalarFn,
    pub r: ScalarFn,
    pub chart: ManifoldChart,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalReport {
    pub necessary: bool,
    pub sufficient_i: bool,
    pub sufficient_ii: bool,
    pub interpretation: Option<String>,
}

pub const VARBRANCH_I_D1: &str = "varbranch-i-d1";

const DIFF_STEP: f64 = 1e-3;

/// Necessary condition `r ∂x g = 0`; sufficient (ii): `r ≠ 0` at a
/// nondegenerate critical point of `g`; sufficient (i): `x0` a regular zero of `m r`.
pub fn variational_conditions(
    g: &dyn Fn(f64) -> f64,
    r: &dyn Fn(f64) -> f64,
    m: usize,
    x0: f64,
    tol: f64,
) -> VariationalReport {
    let gx = d1(g, x0, DIFF_STEP);
    let gxx = d2(g, x0, DIFF_STEP);
    let rv = r(x0);
    let rx = d1(|x| m as f64 * r(x), x0, DIFF_STEP);
    let sufficient_i = rv.abs() <= tol && rx.abs() > tol;
    VariationalReport {
        necessary: (rv * gx).abs() <= tol,
        sufficient_i,
        sufficient_ii: rv.abs() > tol && gx.abs() <= tol && gxx.abs() > tol,
        interpretation: sufficient_i.then(|| VARBRANCH_I_D1.to_string()),
    }
}

/// Branch points of the gradient problem: critical points of `g` where
/// `r ≠ 0`, and zeros of `r`.
pub fn find_variational_branch_points(model: &VariationalModel, opts: &BranchOptions) -> Result<Vec<BranchPoint>> {
    let [lo, hi] = model.chart.range;
    let periodic = model.chart.periodic();
    let n = opts.grid;
    let gx = |x: f64| d1(&*model.g, x, DIFF_STEP);
    let sup = |f: &dyn Fn(f64) -> f64| {
        (0..n).map(|i| f(lo + (hi - lo) * i as f64 / n as f64).abs()).fold(0.0, f64::max)
    };
    let scale_g = 1.0 + sup(&gx);
    let scale_r = 1.0 + sup(&*model.r);
    let mut out = Vec::new();
    for z in scalar_zeros(&gx, lo, hi, n, periodic, opts.tol * scale_g) {
        let rv = (model.r)(z.x);
        if rv.abs() <= opts.tol * scale_r {
            continue;
        }
        let rep = variational_conditions(&*model.g, &*model.r, model.m, z.x, opts.tol * scale_g);
        out.push(BranchPoint {
            x0: z.x,
            eps_sign: None,
            status: if rep.sufficient_ii && !z.touching {
                BranchStatus::Sufficient
            } else {
                BranchStatus::DegenerateZero
            },
            condition: ConditionSet::VariationalCritical,
            jacobian: z.derivative,
            residual: gx(z.x),
            interpretation: None,
        });
    }
    let mr = |x: f64| model.m as f64 * (model.r)(x);
    for z in scalar_zeros(&mr, lo, hi, n, periodic, opts.tol * scale_r) {
        let regular = !z.touching && z.derivative.abs() > opts.tol * scale_r;
        out.push(BranchPoint {
            x0: z.x,
            eps_sign: None,
            status: if regular {
                BranchStatus::Sufficient
            } else {
                BranchStatus::DegenerateZero
            },
            condition: ConditionSet::VariationalRZero,
            jacobian: z.derivative,
            residual: mr(z.x),
            interpretation: Some(VARBRANCH_I_D1.to_string()),
        });
    }
    out.sort_by(|a, b| a.x0.total_cmp(&b.x0));
    Ok(out)
}

/// Minimum number of branch points in the variational case on a circle: a
/// smooth function on a circle has at least two critical points.
pub fn count_lower_bound(variant: Variant, chart: &ManifoldChart) -> usize {
    if variant == Variant::Variational && chart.periodic() {
        2
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{example1, example2};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bd(c: &[(usize, f64, f64)]) -> BranchData {
        BranchData::new(0.0, c.iter().map(|&(m, g, r)| ComponentData { m, g, r }).collect())
    }

    #[test]
    fn versal_part_lands_on_the_cone() {
        use crate::blowup::{tangent_cone_stratum, TangentConeStratum};
        // ε = −1 on (ε + y², ε sin x + y³) at x = 0
        let (m, b) = versal_linear_part(&bd(&[(2, -1.0, 1.0), (3, 0.0, 1.0)])).unwrap();
        assert_eq!((m, b.clone()), (2, vec![0.0, 1.0, -1.0]));
        assert_eq!(tangent_cone_stratum(m, &b, 1e-9), TangentConeStratum::T1);
        // the opposite sign leaves the cone
        let (_, b) = versal_linear_part(&bd(&[(2, 1.0, 1.0), (3, 0.0, 1.0)])).unwrap();
        assert_eq!(tangent_cone_stratum(2, &b, 1e-9), TangentConeStratum::NotInT);
        // equal exponents put d12 / r1 in a_0
        let (m, b) = versal_linear_part(&bd(&[(3, 2.0, 1.0), (3, 4.0, 2.0)])).unwrap();
        assert_eq!((m, b), (3, vec![0.0, 0.0, 0.0, 2.0, 0.0]));
    }

    #[test]
    fn example1_reduces_to_g2() {
        let ok = necessary_conditions(&bd(&[(2, 1.0, 1.0), (3, 0.0, 1.0)]), 1e-12);
        assert!(ok.pass && ok.n == Some(0));
        let bad = necessary_conditions(&bd(&[(2, 1.0, 1.0), (3, 0.5, 1.0)]), 1e-12);
        assert!(!bad.pass);
        assert_eq!(bad.failed[0].kind, ConditionKind::RZero);
    }

    #[test]
    fn vacuous_when_all_g_vanish() {
        let r = necessary_conditions(&bd(&[(2, 0.0, 1.0), (2, 0.0, 3.0)]), 1e-12);
        assert!(r.pass && r.all_g_zero);
    }

    #[test]
    fn example1_branch_points() {
        let model = example1(f64::sin).unwrap();
        let pts = find_branch_points(&ModelSource::new(&model), Variant::General, &BranchOptions::default()).unwrap();
        assert_eq!(pts.len(), 2, "{pts:?}");
        for (p, x) in pts.iter().zip([0.0, PI]) {
            assert!((p.x0 - x).abs() < 1e-10);
            assert_eq!(p.status, BranchStatus::Sufficient);
            assert_eq!(p.eps_sign, Some(-1.0));
        }
    }

    #[test]
    fn example2_degenerate_zero() {
        let model = example2(|_| 1.0, f64::cos).unwrap();
        let pts = find_branch_points(&ModelSource::new(&model), Variant::General, &BranchOptions::default()).unwrap();
        assert_eq!(pts.len(), 1, "{pts:?}");
        assert!(pts[0].x0.abs() < 1e-6);
        assert_eq!(pts[0].status, BranchStatus::DegenerateZero);
    }

    #[test]
    fn three_components_unsupported() {
        struct Three;
        impl BranchDataSource for Three {
            fn data_at(&self, x: f64) -> Result<BranchData> {
                Ok(BranchData::new(x, vec![ComponentData { m: 2, g: 1.0, r: 1.0 }; 3]))
            }
            fn chart(&self) -> ManifoldChart {
                ManifoldChart::circle()
            }
        }
        let r = find_branch_points(&Three, Variant::General, &BranchOptions { grid: 64, ..Default::default() });
        assert!(matches!(r, Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn variational_cos() {
        let rep = variational_conditions(&f64::cos, &|_| 1.0, 4, 0.0, 1e-6);
        assert!(rep.necessary && rep.sufficient_ii && !rep.sufficient_i);
        let rep = variational_conditions(&f64::cos, &|_| 1.0, 4, 1.0, 1e-6);
        assert!(!rep.necessary);
        let model = VariationalModel {
            m: 4,
            g: Arc::new(|x: f64| (3.0 * x).sin()),
            r: Arc::new(|_| 1.0),
            chart: ManifoldChart::circle(),
        };
        let pts = find_variational_branch_points(&model, &BranchOptions::default()).unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.len() >= count_lower_bound(Variant::Variational, &model.chart));
    }

    #[test]
    fn variational_r_zero_is_tagged() {
        let model = VariationalModel {
            m: 3,
            g: Arc::new(|x: f64| x.cos()),
            r: Arc::new(|x: f64| x.sin() - 0.5),
            chart: ManifoldChart::circle(),
        };
        let pts = find_variational_branch_points(&model, &BranchOptions::default()).unwrap();
        let rz: Vec<_> = pts.iter().filter(|p| p.condition == ConditionSet::VariationalRZero).collect();
        assert_eq!(rz.len(), 2);
        assert!(rz.iter().all(|p| p.interpretation.as_deref() == Some(VARBRANCH_I_D1)));
    }

    proptest! {
        #[test]
        fn reduced_conditions_match_full(
            ms in proptest::collection::vec(2usize..5, 2..5),
            gs in proptest::collection::vec(prop_oneof![Just(0i32), -3i32..4i32].prop_map(|v| v as f64), 4),
            rs in proptest::collection::vec(prop_oneof![Just(0i32), -3i32..4i32].prop_map(|v| v as f64), 4),
        ) {
            let comps: Vec<ComponentData> = ms.iter().enumerate()
                .map(|(i, &m)| ComponentData { m, g: gs[i], r: rs[i] })
                .collect();
            let data = BranchData::new(0.0, comps);
            prop_assert_eq!(necessary_conditions(&data, 0.0).pass, necessary_conditions_full(&data, 0.0).pass);
            for i in 0..data.components.len() {
                for j in 0..data.components.len() {
                    prop_assert_eq!(data.d(i, j), -data.d(j, i));
                }
            }
        }
    }
}
