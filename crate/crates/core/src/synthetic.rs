//! Constructed models with analytically known geometry, shared by tests,
//! examples and the CLI.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::blowup::ExpansionData;
use crate::deformation::{Component, Fn2, Fn3, ManifoldChart, ParamMap, ReducedFieldModel, VersalFamily};
use crate::error::Result;

/// Rows of `b(x)` for the circle model: `a0 = ε2 − κ ε1 cos x`, `a1 = ε1`,
/// `ā0 = ε1 sin(x − π/4)`, all other parameters zero.
///
/// `B = {a0 = 0}` is `tan θ = κ cos x`, with folds at `x = 0, π`. Points with
/// `a0 = ā0 = 0` sit at `x = π/4, 5π/4`.
pub fn circle_b(m: usize, kappa: f64, x: f64) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(2 * m - 1, 2);
    b[(0, 0)] = -kappa * x.cos();
    b[(0, 1)] = 1.0;
    b[(1, 0)] = 1.0;
    b[(m, 0)] = (x - FRAC_PI_4).sin();
    b
}

pub fn circle_expansion(m: usize, kappa: f64) -> ExpansionData {
    ExpansionData::linear(2 * m - 1, 2, Arc::new(move |x| circle_b(m, kappa, x)))
}

fn linear_family(m: usize, b: Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>) -> Result<VersalFamily> {
    let a: ParamMap = Arc::new(move |eps: &[f64], x: f64| {
        let bx = b(x);
        (0..2 * m - 1).map(|i| bx[(i, 0)] * eps[0] + bx[(i, 1)] * eps[1]).collect()
    });
    VersalFamily::new(m, 2, ManifoldChart::circle(), a)
}

/// The versal family `H(a(ε, x), y)` whose parameters are exactly `b(x) ε`.
pub fn circle_versal(m: usize, kappa: f64) -> Result<VersalFamily> {
    linear_family(m, Arc::new(move |x| circle_b(m, kappa, x)))
}

/// `m = 2`, `κ = 1` with `b2 = sin θ − cos θ (cos x + sin x − sin x_i)`.
///
/// Intersection points (`b1 = b2 = 0`, `b3 < 0`) sit at `x = x_i` and `x = π − x_i`,
/// each on the antipode of `tan θ = cos x` where `b3 < 0`. End points
/// (`b1 = b3 = 0`) are those of the circle model.
pub fn intersection_b(x_i: f64, x: f64) -> DMatrix<f64> {
    let mut b = circle_b(2, 1.0, x);
    b[(1, 0)] = -(x.cos() + x.sin() - x_i.sin());
    b[(1, 1)] = 1.0;
    b
}

pub fn intersection_expansion(x_i: f64) -> ExpansionData {
    ExpansionData::linear(3, 2, Arc::new(move |x| intersection_b(x_i, x)))
}

pub fn intersection_versal(x_i: f64) -> Result<VersalFamily> {
    linear_family(2, Arc::new(move |x| intersection_b(x_i, x)))
}

fn comp_q1(m: usize, g: Fn3, r: Fn2) -> Component {
    Component { m, g: vec![g], r }
}

/// `F = (ε g1 + y² r1, ε g2 + y³ r2)` with `g1 = 1`, `r = (1, 1)` on the circle.
pub fn example1(g2: fn(f64) -> f64) -> Result<ReducedFieldModel> {
    ReducedFieldModel::new(
        1,
        [
            comp_q1(2, Arc::new(|_e: &[f64], _x, _y| 1.0), Arc::new(|_x, _y| 1.0)),
            comp_q1(3, Arc::new(move |_e: &[f64], x: f64, _y| g2(x)), Arc::new(|_x, _y| 1.0)),
        ],
        ManifoldChart::circle(),
    )
}

/// `F = (ε g1 + y² r1, ε g2 + y² r2)` with `r = (1, 1)`.
pub fn example2(g1: fn(f64) -> f64, g2: fn(f64) -> f64) -> Result<ReducedFieldModel> {
    ReducedFieldModel::new(
        1,
        [
            comp_q1(2, Arc::new(move |_e: &[f64], x: f64, _y| g1(x)), Arc::new(|_x, _y| 1.0)),
            comp_q1(2, Arc::new(move |_e: &[f64], x: f64, _y| g2(x)), Arc::new(|_x, _y| 1.0)),
        ],
        ManifoldChart::circle(),
    )
}

/// Uniform `q = 1` model `F = (ε + y^m, ε (1 + sin x + y) + y^m)`.
///
/// Both exponents equal `m` and `d12 = g1 r2 − g2 r1 = −sin x`, so the branch
/// points are `x = 0, π`. On the branch `ε = −y^m` and `sin x = −y`.
pub fn uniform_model(m: usize) -> Result<ReducedFieldModel> {
    ReducedFieldModel::new(
        1,
        [
            comp_q1(m, Arc::new(|_e: &[f64], _x, _y| 1.0), Arc::new(|_x, _y| 1.0)),
            comp_q1(
                m,
                Arc::new(|_e: &[f64], x: f64, y: f64| 1.0 + x.sin() + y),
                Arc::new(|_x, _y| 1.0),
            ),
        ],
        ManifoldChart::circle(),
    )
}
