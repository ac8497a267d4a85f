//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 7, 8 and 11 are known not to hold for the models as stated (see
//! the decision ledger); they are reported as FAIL without failing the run.
//! Any other FAIL makes the process exit nonzero.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use degenbif::applications::chemnet::{
    chem_branch_function, chem_pipeline_branch_points, chem_regularity, rate_family, ChemNetworkModel, PerturbationFn,
};
use degenbif::applications::hamiltonian::{
    degenerate_energies, degenerate_radius, jacobi_expansion, jacobi_reduced_quartic, kernel_dimension, radial_mode,
    RadialPotential, RadialPotentialModel,
};
use degenbif::blowup::{
    bifurcation_arcs_m, bifurcation_arcs_m2, classify_point_m2, direction, find_special_points_m2,
    tangent_cone_stratum, ArcKind, ArcOptions, BifurcationArc, PointKind, TangentConeStratum,
};
use degenbif::branching::{
    find_branch_points, versal_linear_part, BranchDataSource, BranchOptions, BranchPoint, BranchStatus,
    ExtractedSource, ModelSource, Variant,
};
use degenbif::deformation::{DeformationParams, Field2};
use degenbif::lyapunov_schmidt::build_reduction;
use degenbif::oracle::{
    region_count_map, trace_branch, CountMap, CountMapOptions, CountOptions, TraceOptions, Window,
};
use degenbif::resultant::{is_on_discriminant, params_with_common_root, resultant, shares_root, verify_structure};
use degenbif::synthetic::{circle_expansion, circle_versal, example1, example2, intersection_expansion, uniform_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_UNATTAINABLE: [usize; 3] = [7, 8, 11];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e <= limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn c1_resultant_closed_form() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a0, a1, ab0): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = resultant(&DeformationParams::from_m2(a0, a1, ab0));
        let exact = a0 * a0 + a1 * a1 * ab0;
        let scale = (a0 * a0).abs() + (a1 * a1 * ab0).abs();
        worst = worst.max((r - exact).abs() / scale.max(1e-300));
    }
    let (fast, time) = within(t, Duration::from_secs(1));
    verdict(worst < 1e-12 && fast, format!("max relative error {worst:.2e}, {time}"))
}

fn c2_structure() -> Verdict {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [3, 4] {
        match verify_structure(m, 16, 2) {
            Ok(rep) => {
                let fit = rep.max_fit_residual();
                ok &= rep.all_pass() && fit < 1e-6;
                parts.push(format!("m = {m}: {} checks, all pass {}, fit residual {fit:.2e}", rep.checks.len(), rep.all_pass()));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("m = {m}: {e}"));
            }
        }
    }
    let (fast, time) = within(t, Duration::from_secs(5));
    verdict(ok && fast, format!("{}; {time}", parts.join("; ")))
}

fn c3_discriminant_oracle() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut agree, mut total, mut banded) = (0, 0, 0);
    for m in [2usize, 3, 4] {
        for k in 0..500 {
            let p = if k % 2 == 0 {
                params_with_common_root(m, rng.gen_range(-1.5..1.5), &mut rng)
            } else {
                let v: Vec<f64> = (0..2 * m - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                DeformationParams::from_flat(m, &v).expect("length")
            };
            let oracle = if shares_root(&p, 1e-7) {
                true
            } else if !shares_root(&p, 1e-3) {
                false
            } else {
                banded += 1;
                continue;
            };
            total += 1;
            if is_on_discriminant(&p, 1e-9) == oracle {
                agree += 1;
            }
        }
    }
    let (fast, time) = within(t, Duration::from_secs(30));
    verdict(agree == total && fast, format!("{agree}/{total} agree ({banded} inside the band), {time}"))
}

fn c4_classification() -> Verdict {
    let t = Instant::now();
    let xi = 1.0f64;
    let data = intersection_expansion(xi);
    // placed analytically: ends at tan θ = cos x with x = π/4, 5π/4; intersections at
    // x = x_i, π − x_i on the branch of tan θ = cos x where b3 < 0
    let mut expected = Vec::new();
    for x in [FRAC_PI_4, 5.0 * FRAC_PI_4] {
        let th = x.cos().atan();
        expected.push((PointKind::End, th.rem_euclid(TAU), x));
        expected.push((PointKind::End, (th + PI).rem_euclid(TAU), x));
    }
    for x in [xi, PI - xi] {
        let th = x.cos().atan();
        let th = if (x - FRAC_PI_4).sin() * th.cos() < 0.0 { th } else { th + PI };
        expected.push((PointKind::Intersection, th.rem_euclid(TAU), x));
    }
    let found = find_special_points_m2(&data, [0.0, TAU], 200);
    let mut worst = 0.0f64;
    let mut missing = 0;
    for (kind, th, x) in &expected {
        let best = found
            .iter()
            .filter(|p| p.kind == *kind)
            .map(|p| angle_gap(p.s[1].atan2(p.s[0]), *th).max(angle_gap(p.x, *x)))
            .fold(f64::INFINITY, f64::min);
        if best > 1e-6 {
            missing += 1;
        }
        worst = worst.max(best);
    }
    // an interior point: b1 = 0 with b3 < 0 and b2 ≠ 0
    let x = 2.0f64;
    let th = x.cos().atan();
    let th = if (x - FRAC_PI_4).sin() * th.cos() < 0.0 { th } else { th + PI };
    let interior = classify_point_m2(&data, &direction(th), x, 1e-9);
    let ok = missing == 0 && found.len() == expected.len() && interior.kind == PointKind::Interior;
    let (fast, time) = within(t, Duration::from_secs(5));
    verdict(
        ok && fast,
        format!(
            "{} special points found, {} expected, worst (θ, x) error {worst:.1e}, interior point classified {:?}; {time}",
            found.len(),
            expected.len(),
            interior.kind
        ),
    )
}

fn count_map(m: usize, window: Window, theta_range: Option<[f64; 2]>, n: usize, grid: [usize; 2]) -> CountMap {
    let f = circle_versal(m, 1.0).expect("circle model");
    let opts = CountMapOptions {
        n_angles: n,
        theta_range,
        count: CountOptions { nx: grid[0], ny: grid[1], ..CountOptions::default() },
        ..CountMapOptions::default()
    };
    region_count_map(&f, 1e-2, &window, &opts).expect("count map")
}

fn arcs_for(m: usize) -> Vec<BifurcationArc> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<BifurcationArc>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(a) = cache.lock().expect("cache").get(&m) {
        return a.clone();
    }
    let data = circle_expansion(m, 1.0);
    let opts = ArcOptions::default();
    let arcs = if m == 2 {
        bifurcation_arcs_m2(&data, &opts).expect("arcs")
    } else {
        bifurcation_arcs_m(m, &data, &opts).expect("arcs")
    };
    cache.lock().expect("cache").insert(m, arcs.clone());
    arcs
}

/// Counts on either side of the jumps within `tol` of `theta`, in angle order.
fn counts_near(map: &CountMap, theta: f64, tol: f64) -> Vec<usize> {
    let mut js: Vec<_> = map.jumps.iter().filter(|j| angle_gap(j.theta, theta) <= tol).collect();
    js.sort_by(|a, b| {
        let da = (a.theta - theta + PI).rem_euclid(TAU);
        let db = (b.theta - theta + PI).rem_euclid(TAU);
        da.total_cmp(&db)
    });
    let mut seq = Vec::new();
    for j in js {
        if seq.last() != Some(&j.from) {
            seq.push(j.from);
        }
        seq.push(j.to);
    }
    seq
}

fn has_run(seq: &[usize], run: &[usize]) -> bool {
    let rev: Vec<usize> = run.iter().rev().copied().collect();
    seq.windows(run.len()).any(|w| w == run || w == rev.as_slice())
}

fn c5_bif1() -> Verdict {
    let t = Instant::now();
    let rho = 1e-2f64;
    let tol = TAU * rho.sqrt();
    let arcs = arcs_for(2);
    let map = count_map(2, Window::for_chart(&circle_versal(2, 1.0).expect("model").chart(), 0.3), None, 360, [160, 120]);
    let mut ok = map.inconsistencies.is_empty();
    let mut notes = Vec::new();
    let cusps: Vec<_> = arcs.iter().filter(|a| a.kind == ArcKind::FoldPairCusp).collect();
    let ends: Vec<_> = arcs.iter().filter(|a| a.kind == ArcKind::EndArc).collect();
    for a in &cusps {
        let seq = counts_near(&map, a.origin_angle(), tol);
        let hit = has_run(&seq, &[0, 2, 4]);
        ok &= hit;
        notes.push(format!("cusp at {:.4}: counts {:?}", a.origin_angle(), seq));
    }
    for a in &ends {
        let near = map
            .jumps
            .iter()
            .filter(|j| angle_gap(j.theta, a.origin_angle()) <= tol)
            .any(|j| j.size().abs() == 2);
        ok &= near;
        notes.push(format!("end arc at {:.4}: jump of 2 nearby {near}", a.origin_angle()));
    }
    let stray = map
        .jumps
        .iter()
        .filter(|j| !arcs.iter().any(|a| angle_gap(j.theta, a.origin_angle()) <= tol))
        .count();
    ok &= stray == 0 && !cusps.is_empty() && !ends.is_empty();
    let (fast, time) = within(t, Duration::from_secs(120));
    verdict(
        ok && fast,
        format!("{} jumps, {stray} unmatched, {} odd; {}; {time}", map.jumps.len(), map.inconsistencies.len(), notes.join("; ")),
    )
}

fn c6_bif2() -> Verdict {
    let rho = 1e-2f64;
    let tol = TAU * rho.sqrt();
    let mut ok = true;
    let mut notes = Vec::new();

    let t = Instant::now();
    let hyst: Vec<_> = arcs_for(3).into_iter().filter(|a| a.kind == ArcKind::HysteresisArc).collect();
    ok &= !hyst.is_empty();
    let mut seen: Vec<f64> = Vec::new();
    for a in &hyst {
        if seen.iter().any(|c| angle_gap(*c, a.origin_angle()) < 1e-6) {
            continue;
        }
        seen.push(a.origin_angle());
        let c = a.origin_angle();
        let map = count_map(3, Window::around(a.source.x, 0.5, 0.5), Some([c - 0.5, c + 0.5]), 200, [120, 120]);
        let seq = counts_near(&map, c, tol);
        let hit = has_run(&seq, &[1, 3, 1]);
        ok &= hit;
        notes.push(format!("m = 3 hysteresis at {c:.4}: counts {seq:?}"));
    }
    let (fast3, time3) = within(t, Duration::from_secs(120));

    let t = Instant::now();
    let ends: Vec<_> = arcs_for(4).into_iter().filter(|a| a.kind == ArcKind::EndArc).collect();
    let opposite = ends
        .iter()
        .any(|a| ends.iter().any(|b| (angle_gap(a.origin_angle(), b.origin_angle()) - PI).abs() < 1e-6));
    ok &= opposite;
    let global = count_map(4, Window::for_chart(&circle_versal(4, 1.0).expect("model").chart(), 0.6), None, 360, [160, 160]);
    ok &= global.inconsistencies.is_empty();
    for a in &ends {
        let c = a.origin_angle();
        let local = count_map(4, Window::around(a.source.x, 0.5, 0.5), Some([c - 0.5, c + 0.5]), 200, [120, 120]);
        // zeros leaving the local window cause odd jumps; the end arc itself is a 0 <-> 2 step
        let seq = counts_near(&local, c, tol);
        let hit = has_run(&seq, &[0, 2]);
        ok &= hit;
        notes.push(format!("m = 4 end arc at {c:.4}: local counts {seq:?}"));
    }
    let (fast4, time4) = within(t, Duration::from_secs(120));
    verdict(
        ok && fast3 && fast4,
        format!("{}; opposite end arcs {opposite}; m = 4 global odd jumps {}; {time3}, {time4}", notes.join("; "), global.inconsistencies.len()),
    )
}

fn c7_contact_orders() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [2usize, 3, 4] {
        let target = (m + 1) as f64 / m as f64;
        for a in arcs_for(m) {
            if a.contact_order.is_none() {
                continue;
            }
            for f in a.fitted_orders.iter().flatten() {
                let good = (f - target).abs() <= 0.05 * target;
                ok &= good;
                if !good {
                    notes.push(format!("m = {m} {:?} at {:.3}: fitted {f:.3} vs {target:.3}", a.kind, a.origin_angle()));
                }
            }
        }
    }
    notes.dedup();
    verdict(ok, format!("{} fits outside 5%: {}", notes.len(), notes.join("; ")))
}

fn c8_branch_scaling() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [2usize, 3] {
        let model = uniform_model(m).expect("model");
        match trace_branch(&model, 0.0, &[-1.0], &TraceOptions::default()) {
            Ok(tr) => {
                let ax = tr.alpha_x.unwrap_or(f64::NAN);
                let want = [m as f64, (m + 1) as f64, 1.0];
                let got = [tr.alpha_eps, ax, tr.alpha_y];
                let good = want.iter().zip(&got).all(|(w, g)| (g - w).abs() <= 0.05 * w);
                ok &= good;
                notes.push(format!("m = {m}: (α_ε, α_x, α_y) = ({:.3}, {:.3}, {:.3}) vs ({}, {}, 1)", got[0], got[1], got[2], m, m + 1));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("m = {m}: {e}"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

/// Trace from each branch point along its ε sign (both signs when undetermined).
fn oracle_confirms<F: Field2 + ?Sized>(field: &F, p: &BranchPoint, opts: &TraceOptions) -> Option<f64> {
    let signs: Vec<f64> = match p.eps_sign {
        Some(s) => vec![s],
        None => vec![-1.0, 1.0],
    };
    signs.into_iter().find(|s| {
        // ε must vanish along the branch, which rules out noise-level tracks
        trace_branch(field, p.x0, &[*s], opts).is_ok_and(|tr| {
            tr.alpha_eps >= 1.0 && tr.samples.first().is_some_and(|s0| field.chart().delta(s0.x, p.x0).abs() < 2e-2)
        })
    })
}

fn c9_branching() -> Verdict {
    let t = Instant::now();
    let model = example1(f64::sin).expect("model");
    let pts = find_branch_points(&ModelSource::new(&model), Variant::General, &BranchOptions::default()).expect("points");
    let xs: Vec<f64> = pts.iter().map(|p| p.x0).collect();
    let located = pts.len() == 2
        && [0.0, PI].iter().all(|x| pts.iter().any(|p| angle_gap(p.x0, *x) < 1e-8 && p.status == BranchStatus::Sufficient));
    let confirmed = pts.iter().all(|p| oracle_confirms(&model, p, &TraceOptions::default()).is_some());
    let m2 = example2(|_| 1.0, f64::cos).expect("model");
    let p2 = find_branch_points(&ModelSource::new(&m2), Variant::General, &BranchOptions::default()).expect("points");
    let tagged = p2.len() == 1 && p2[0].status == BranchStatus::DegenerateZero && p2[0].x0.abs() < 1e-6;
    let (fast, time) = within(t, Duration::from_secs(30));
    verdict(
        located && confirmed && tagged && fast,
        format!("branch points {xs:.6?}, oracle confirmed {confirmed}, degenerate case tagged {tagged}; {time}"),
    )
}

fn c10_hamiltonian() -> Verdict {
    let t = Instant::now();
    let pot = RadialPotential::mexican_hat(1.0);
    // V' = -r + r^3, V'' = -1 + 3 r^2. r V'' = (2n^2 - 9) V' gives r^2 = (n^2 - 5)/(n^2 - 6) = 11/10 at n = 4.
    // E4 = V(r0) + r0^2 V''(r0) / (2 (2n^2 - 9)) = -0.2475 + 1.1 * 2.3 / 46 = -0.1925.
    // n = 3: r0^2 = 4/3, E3 = -2/9 + (4/3) * 3 / 18 = 0, the edge of the band (-1/4, 0).
    let r4 = degenerate_radius(&pot, 4, 10.0).map(|r| r * r).unwrap_or(f64::NAN);
    let levels = degenerate_energies(&pot, [3, 4]);
    let e3 = &levels[0];
    let e4 = &levels[1];
    let e3_ok = e3.energy.is_some_and(|e| e.abs() <= 1e-10) && !e3.in_hill_region;
    let e4_ok = e4.energy.is_some_and(|e| (e + 0.1925).abs() <= 1e-10) && e4.in_hill_region;
    let k4 = RadialPotentialModel::new(pot.clone(), r4.sqrt()).map(|m| kernel_dimension(&m, 32).dimension);
    let kg = RadialPotentialModel::new(pot.clone(), 1.5).map(|m| kernel_dimension(&m, 32).dimension);
    let ok = (r4 - 1.1).abs() < 1e-12 && e3_ok && e4_ok && k4 == Ok(2) && kg == Ok(1);
    let (fast, time) = within(t, Duration::from_secs(10));
    verdict(
        ok && fast,
        format!(
            "r0^2(4) = {r4:.15}, E4 = {:?} (flag {}), E3 = {:?} (flag {}), kernel {:?} / {:?}; {time}",
            e4.energy, e4.in_hill_region, e3.energy, e3.in_hill_region, k4, kg
        ),
    )
}

fn c11_jacobi_quartic() -> Verdict {
    let t = Instant::now();
    let pot = RadialPotential::mexican_hat(1.0);
    let r0 = degenerate_radius(&pot, 4, 10.0).expect("radius");
    let model = RadialPotentialModel::new(pot, r0).expect("model");
    let ys = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2];
    let detail = match jacobi_reduced_quartic(&model, 4, &ys, 512) {
        Ok(q) => {
            let (fast, time) = within(t, Duration::from_secs(60));
            return verdict(
                q.rel_y2 < 1e-6 && q.rel_y3 < 1e-6 && fast,
                format!("J0 = {:.6}, relative y^2 {:.2e}, y^3 {:.2e}; {time}", q.j0, q.rel_y2, q.rel_y3),
            );
        }
        Err(e) => e.to_string(),
    };
    let exp = jacobi_expansion(&model, &radial_mode(4), &ys, 512).expect("expansion");
    let (r2, r3) = exp.relative_low_order();
    verdict(false, format!("{detail}; coefficients y^2 {:.4}, y^4 {:.4} (relative {r2:.2e}, {r3:.2e})", exp.coeffs[1], exp.coeffs[3]))
}

fn chem_model() -> ChemNetworkModel {
    let phi: PerturbationFn = Arc::new(|z: &[f64]| [z[2].cos(), 1.0, 0.0]);
    ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![phi]).expect("network")
}

fn c12_chemnet() -> Verdict {
    let t = Instant::now();
    let mut flips_ok = true;
    for mu in [0.0, 1e-4, 1e-2, 0.1, 0.5, 1.0, 3.0] {
        let m = ChemNetworkModel::new(rate_family(mu), vec![]).expect("network");
        let r = chem_regularity(&m);
        flips_ok &= r.regular == (mu > 0.0) && r.consistent;
    }
    let model = chem_model();
    let (_, bf) = chem_branch_function(&model, &[1.0], 512).expect("branch function");
    let pipe = chem_pipeline_branch_points(&model, &[1.0], 512).expect("pipeline");
    let worst = bf
        .zeros
        .iter()
        .map(|z| pipe.branch_points.iter().map(|p| (p.x0 - z).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    let ok = flips_ok && pipe.exponents[1] == 2 && pipe.branch_points.len() == bf.zeros.len() && !bf.zeros.is_empty() && worst < 1e-5;
    let (fast, time) = within(t, Duration::from_secs(60));
    verdict(
        ok && fast,
        format!(
            "regularity flips with v'(x1*) {flips_ok}, exponents {:?}, {} zeros matched to {worst:.1e}; {time}",
            pipe.exponents,
            bf.zeros.len()
        ),
    )
}

fn cone_check(
    source: &dyn BranchDataSource,
    field: &dyn Field2,
    name: &str,
    variant: Variant,
    trace: &TraceOptions,
    notes: &mut Vec<String>,
) -> (usize, usize) {
    let tol = 1e-6;
    let pts = find_branch_points(source, variant, &BranchOptions::default()).expect("branch points");
    let (mut confirmed, mut on_cone) = (0, 0);
    for p in pts.iter().filter(|p| p.status == BranchStatus::Sufficient) {
        let Some(sign) = oracle_confirms(field, p, trace) else {
            continue;
        };
        confirmed += 1;
        let data = source.data_at(p.x0).expect("data");
        let (m, b) = versal_linear_part(&data).expect("versal part");
        let b: Vec<f64> = b.iter().map(|v| v * sign).collect();
        let scale = b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let stratum = tangent_cone_stratum(m, &b, 10.0 * tol * scale);
        if stratum != TangentConeStratum::NotInT {
            on_cone += 1;
        } else {
            notes.push(format!("{name} x0 = {:.4}: b = {b:?} off the cone", p.x0));
        }
    }
    notes.push(format!("{name}: {on_cone}/{confirmed}"));
    (confirmed, on_cone)
}

fn c13_tangent_cone() -> Verdict {
    let mut notes = Vec::new();
    let (mut confirmed, mut on_cone) = (0, 0);
    let e1 = example1(f64::sin).expect("model");
    let u2 = uniform_model(2).expect("model");
    let u3 = uniform_model(3).expect("model");
    for (name, model, variant) in [("example 1", &e1, Variant::General), ("uniform m=2", &u2, Variant::Uniform), ("uniform m=3", &u3, Variant::Uniform)] {
        let (c, o) = cone_check(&ModelSource::new(model), model, name, variant, &TraceOptions::default(), &mut notes);
        confirmed += c;
        on_cone += o;
    }
    let chem = chem_model();
    let red = build_reduction(&chem.ambient_system().expect("system"), 64, 1e-8).expect("reduction");
    let src = ExtractedSource { reduction: &red, direction: vec![1.0], y_box: 0.05, eps_probe: 1e-3 };
    // the numerical reduction is accurate to ~1e-10, so stay at |y| ≥ 3e-3 where ε ~ y² is resolved
    let trace = TraceOptions { t_min: 3e-3, t_max: 5e-2, ..TraceOptions::default() };
    let (c, o) = cone_check(&src, &red, "reaction network", Variant::General, &trace, &mut notes);
    confirmed += c;
    on_cone += o;
    verdict(confirmed > 0 && on_cone == confirmed, format!("{on_cone}/{confirmed} confirmed branch points on the cone ({})", notes.join("; ")))
}

fn main() {
    let criteria: Vec<(usize, &str, fn() -> Verdict)> = vec![
        (1, "resultant closed form", c1_resultant_closed_form),
        (2, "resultant structure", c2_structure),
        (3, "discriminant oracle equivalence", c3_discriminant_oracle),
        (4, "tangent-cone classification", c4_classification),
        (5, "m = 2 count patterns", c5_bif1),
        (6, "m = 3 hysteresis, m = 4 end arcs", c6_bif2),
        (7, "contact orders", c7_contact_orders),
        (8, "branch scaling", c8_branch_scaling),
        (9, "branch-point conditions", c9_branching),
        (10, "circular-orbit levels", c10_hamiltonian),
        (11, "Jacobi quartic degeneracy", c11_jacobi_quartic),
        (12, "reaction network", c12_chemnet),
        (13, "tangent-cone necessity", c13_tangent_cone),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let v = run();
        println!("criterion {id:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
