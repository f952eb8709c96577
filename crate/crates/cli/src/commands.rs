use std::fmt::Write as _;

use couette_core::flows::{pressure, velocity, vorticity};
use couette_core::functional_bounds::{bound_set, phi_asymptotics, v_epsilon_rayleigh, VEpsilonGrid, PHI_CSV_HEADER};
use couette_core::sampling::interior_points;
use couette_core::spectral::{linspace, sl_scan, Grid1D, SLScanResult, SL_CSV_HEADER};
use couette_core::stability::{certify_with, dirichlet_axis_thresholds, BoundSource, StabilityReport, Theorem};
use couette_core::verify::{
    boundary_check_with, counterexample_check, navier_slip_identity_on, ns_residual_fd, ns_residual_sampled, Field,
    FlowField, SAMPLE_Z_HALF,
};
use couette_core::{Annulus, CylPoint, Execution, FlowFamily, FlowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, VerifyMode};
use crate::svg::{heat_map, Panel};
use crate::{execution_for, CliError, Outcome};

pub const EVAL_CSV_HEADER: &str = "rho,theta,z,u_rho,u_theta,u_z,p,w_rho,w_theta,w_z";

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

/// Samples of velocity, pressure and vorticity on the segment `[R1, R2]` at fixed `(theta, z)`.
pub fn eval(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let o = &cfg.eval;
    if o.n_rho < 2 {
        return Err(CliError::Usage("eval needs n_rho >= 2".into()));
    }
    let a = &cfg.annulus;
    let mut s = format!("{EVAL_CSV_HEADER}\n");
    for rho in linspace(a.r_inner(), a.r_outer(), o.n_rho) {
        let p = CylPoint::new(rho, o.theta, o.z)?;
        let u = velocity(&cfg.flow, a, &p)?;
        let w = vorticity(&cfg.flow, a, &p)?;
        let pr = pressure(&cfg.flow, a, &p)?;
        // adding +0.0 folds negative zeros so the CSV carries no "-0"
        let row = [p.rho, p.theta, p.z, u.v_rho, u.v_theta, u.v_z, pr, w.v_rho, w.v_theta, w.v_z]
            .map(|v| (v + 0.0).to_string());
        let _ = writeln!(s, "{}", row.join(","));
    }
    Ok(Outcome::ok(s))
}

/// Smooth pseudo-random perturbation: a small lattice of products of sines.
struct NoiseLattice {
    modes: Vec<[f64; 7]>,
    amplitude: f64,
}

impl NoiseLattice {
    const MODES_PER_COMPONENT: usize = 6;

    fn new(seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (0..4 * Self::MODES_PER_COMPONENT)
            .map(|_| {
                [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(1..4) as f64,
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(1..4) as f64,
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(1..4) as f64,
                    rng.random_range(0.0..std::f64::consts::TAU),
                ]
            })
            .collect();
        Self { modes, amplitude }
    }

    fn component(&self, c: usize, rho: f64, theta: f64, z: f64) -> f64 {
        let m = Self::MODES_PER_COMPONENT;
        self.modes[c * m..(c + 1) * m]
            .iter()
            .map(|k| k[0] * (k[1] * rho + k[2]).sin() * (k[3] * theta + k[4]).cos() * (k[5] * z + k[6]).sin())
            .sum::<f64>()
            * self.amplitude
    }
}

struct PerturbedFlow {
    base: FlowField,
    noise: NoiseLattice,
}

impl Field for PerturbedFlow {
    fn eval(&self, rho: f64, theta: f64, z: f64) -> couette_core::Result<([f64; 3], f64)> {
        let (mut u, mut p) = self.base.eval(rho, theta, z)?;
        for (c, uc) in u.iter_mut().enumerate() {
            *uc += self.noise.component(c, rho, theta, z);
        }
        p += self.noise.component(3, rho, theta, z);
        Ok((u, p))
    }
}

/// Residual and boundary audits; `passed` is false when any reported maximum exceeds its tolerance.
pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let exec = execution_for(cfg.jobs);
    let a = cfg.annulus;
    let o = &cfg.verify;
    match o.mode {
        VerifyMode::Exact => {
            let residual = ns_residual_sampled(&cfg.flow, &a, o.n_samples, cfg.seed, exec);
            let boundary = boundary_check_with(&cfg.flow, &a, o.n_boundary, cfg.seed, exec)?;
            let slip = if cfg.flow.family.is_vorticity() {
                Some(navier_slip_identity_on(&cfg.flow, &a, cfg.flow.family.moving_wall(), o.n_boundary, cfg.seed)?)
            } else {
                None
            };
            let within = |v: f64| v <= cfg.tol;
            let passed =
                within(residual.max_abs) && within(boundary.max_abs) && slip.is_none_or(|s| within(s.max_violation));
            let report = json!({
                "mode": "exact",
                "flow": cfg.flow,
                "tol": cfg.tol,
                "passed": passed,
                "residual": residual,
                "boundary": boundary,
                "navier_slip": slip,
            });
            Ok(Outcome { passed, ..Outcome::ok(to_json(&report)) })
        }
        VerifyMode::Perturbed => {
            let field = PerturbedFlow {
                base: FlowField { spec: cfg.flow, annulus: a },
                noise: NoiseLattice::new(cfg.seed, o.noise),
            };
            let h = o.fd_step * a.width();
            let points = interior_points(&a, o.n_samples, cfg.seed, 2.0 * h, SAMPLE_Z_HALF);
            let rows = exec.try_map(&points, |p| ns_residual_fd(&field, &a, p, h))?;
            let mut per = [0.0f64; 4];
            for r in &rows {
                for (m, v) in per.iter_mut().zip(r.momentum.iter().chain([&r.divergence])) {
                    *m = couette_core::exec::nan_max(*m, v.abs());
                }
            }
            let max_abs = per.iter().copied().fold(0.0, couette_core::exec::nan_max);
            let passed = max_abs <= o.fd_tol;
            let report = json!({
                "mode": "perturbed",
                "flow": cfg.flow,
                "noise": o.noise,
                "fd_step": h,
                "fd_tol": o.fd_tol,
                "passed": passed,
                "fd_residual": {
                    "max_abs": max_abs,
                    "per_equation_max": {"rho": per[0], "theta": per[1], "z": per[2], "divergence": per[3]},
                    "n_samples": rows.len(),
                    "seed": cfg.seed,
                },
            });
            Ok(Outcome { passed, ..Outcome::ok(to_json(&report)) })
        }
        VerifyMode::Counterexample => {
            let h = o.fd_step * a.width();
            let r = counterexample_check(&a, o.n_samples, cfg.seed, h, exec)?;
            let passed = r.max_divergence <= o.fd_tol && r.max_curl <= o.fd_tol && r.max_normal_component <= cfg.tol;
            let report = json!({
                "mode": "counterexample",
                "fd_tol": o.fd_tol,
                "tol": cfg.tol,
                "passed": passed,
                "counterexample": r,
            });
            Ok(Outcome { passed, ..Outcome::ok(to_json(&report)) })
        }
    }
}

fn bound_source(user: Option<f64>) -> BoundSource {
    user.map_or(BoundSource::ComputedLower, BoundSource::UserValue)
}

/// Stability certificate for the configured flow. A failed certificate is not
/// an error: the criterion is only sufficient.
pub fn stability(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let o = &cfg.stability;
    let theorem = o.theorem.unwrap_or_else(|| Theorem::default_for(cfg.flow.family));
    let report = certify_with(&cfg.flow, &cfg.annulus, theorem, bound_source(o.user_bound), execution_for(cfg.jobs))?;
    Ok(Outcome::ok(to_json(&report)))
}

/// One cell of a stability map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapCell {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub m: f64,
    pub bound: Option<f64>,
    pub certified: bool,
}

/// Certificates over a parameter grid, row-major in `(gamma, beta, alpha)` with `alpha` fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityMap {
    pub family: FlowFamily,
    pub theorem: Theorem,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub cells: Vec<MapCell>,
}

impl StabilityMap {
    pub fn csv(&self) -> String {
        let vort = self.family.is_vorticity();
        let mut s =
            String::from(if vort { "alpha,beta,gamma,m,bound,certified\n" } else { "alpha,beta,m,bound,certified\n" });
        for c in &self.cells {
            let bound = c.bound.map_or_else(|| "NaN".to_owned(), |b| b.to_string());
            let _ = match c.gamma {
                Some(g) => writeln!(s, "{},{},{},{},{},{}", c.alpha, c.beta, g, c.m, bound, c.certified),
                None => writeln!(s, "{},{},{},{},{}", c.alpha, c.beta, c.m, bound, c.certified),
            };
        }
        s
    }

    pub fn svg(&self) -> String {
        let (na, nb) = (self.alphas.len(), self.betas.len());
        let ratios: Vec<f64> = self.cells.iter().map(|c| c.bound.map_or(f64::NAN, |b| c.m / b)).collect();
        let flags: Vec<bool> = self.cells.iter().map(|c| c.certified).collect();
        let slices: Vec<Option<f64>> =
            if self.family.is_vorticity() { self.gammas.iter().copied().map(Some).collect() } else { vec![None] };
        let panels: Vec<Panel> = slices
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let range = k * na * nb..(k + 1) * na * nb;
                Panel {
                    title: match g {
                        Some(g) => format!("{} gamma = {g}", self.family),
                        None => self.family.to_string(),
                    },
                    n_alpha: na,
                    n_beta: nb,
                    alpha_range: [self.alphas[0], self.alphas[na - 1]],
                    beta_range: [self.betas[0], self.betas[nb - 1]],
                    ratio: &ratios[range.clone()],
                    certified: &flags[range],
                }
            })
            .collect();
        heat_map(&panels)
    }
}

pub fn stability_map(cfg: &RunConfig) -> Result<StabilityMap, CliError> {
    let o = &cfg.map;
    if o.n_alpha < 2 || o.n_beta < 1 {
        return Err(CliError::Usage("map needs n_alpha >= 2 and n_beta >= 1".into()));
    }
    let family = o.family;
    let theorem = o.theorem.unwrap_or_else(|| Theorem::default_for(family));
    let alphas = linspace(o.alpha[0], o.alpha[1], o.n_alpha);
    let betas = if family.is_couette() { vec![0.0] } else { linspace(o.beta[0], o.beta[1], o.n_beta) };
    let gammas = if family.is_vorticity() { o.gammas.clone() } else { vec![0.0] };
    if gammas.is_empty() {
        return Err(CliError::Usage("map needs at least one gamma slice".into()));
    }
    let mut specs = Vec::with_capacity(alphas.len() * betas.len() * gammas.len());
    for &g in &gammas {
        for &b in &betas {
            for &al in &alphas {
                specs.push(FlowSpec::new(family, al, b, g)?);
            }
        }
    }
    let source = bound_source(o.user_bound);
    let exec = execution_for(cfg.jobs);
    // each cell runs its own maximisation sequentially; the grid is the parallel axis
    let reports: Vec<StabilityReport> =
        exec.try_map(&specs, |s| certify_with(s, &cfg.annulus, theorem, source, Execution::Sequential))?;
    let cells = reports
        .iter()
        .map(|r| MapCell {
            alpha: r.spec.alpha,
            beta: r.spec.beta,
            gamma: family.is_vorticity().then_some(r.spec.gamma),
            m: r.m_value,
            bound: r.lambda_lower,
            certified: r.certified,
        })
        .collect();
    Ok(StabilityMap { family, theorem, alphas, betas, gammas, cells })
}

pub fn map(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = stability_map(cfg)?;
    let mut out = Outcome::ok(m.csv());
    if let Some(path) = &cfg.map.svg {
        out.extra_files.push((path.clone(), m.svg()));
    }
    Ok(out)
}

/// Poincare-type bounds and the test-field quotients for the configured annulus.
pub fn poincare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let o = &cfg.poincare;
    let grid = VEpsilonGrid { n_rho: o.n_rho, n_z_half: o.n_z_half };
    let exec = execution_for(cfg.jobs);
    let quotients = o
        .eps
        .iter()
        .map(|&e| v_epsilon_rayleigh(&cfg.annulus, e, grid, exec))
        .collect::<couette_core::Result<Vec<_>>>()?;
    let report = json!({
        "annulus": cfg.annulus,
        "bounds": bound_set(&cfg.annulus),
        "v_epsilon": quotients,
    });
    Ok(Outcome::ok(to_json(&report)))
}

pub fn sl_scans(cfg: &RunConfig) -> Result<Vec<SLScanResult>, CliError> {
    let o = &cfg.slscan;
    if o.ks.is_empty() || o.n_alpha == 0 {
        return Err(CliError::Usage("slscan needs at least one k and one alpha".into()));
    }
    let grid = Grid1D::new(&cfg.annulus, o.n)?;
    let alphas = linspace(o.alpha[0], o.alpha[1], o.n_alpha);
    let exec = execution_for(cfg.jobs);
    o.ks.iter().map(|&k| sl_scan(k, &alphas, &grid, exec).map_err(CliError::from)).collect()
}

/// `sigma_min` over `(k, alpha)`; fails when any value is at or below the configured threshold.
pub fn slscan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scans = sl_scans(cfg)?;
    let mut s = format!("{SL_CSV_HEADER}\n");
    for r in &scans {
        r.csv_rows(&mut s);
    }
    let min = scans.iter().map(SLScanResult::min_sigma).fold(f64::INFINITY, couette_core::exec::nan_min);
    Ok(Outcome { passed: min > cfg.slscan.threshold, ..Outcome::ok(s) })
}

pub const BOUNDS_CSV_HEADER: &str =
    "sequence,r1,r2,lower_square,lower_radial,lower_best,upper,curl_factor,lower_one_wall,alpha_max,beta_max,alpha_max_times_width";
pub const V_EPSILON_CSV_HEADER: &str =
    "eps,numeric_quotient,closed_form,printed_form,norm_sq,norm_sq_closed,grad_norm_sq,grad_norm_sq_closed";

/// Named annulus sequences used by the appendix tables.
pub fn appendix_sequences(cfg: &RunConfig) -> Result<Vec<(&'static str, Vec<Annulus>)>, CliError> {
    let o = &cfg.appendix;
    let build = |pairs: Vec<(f64, f64)>| -> Result<Vec<Annulus>, CliError> {
        pairs.into_iter().map(|(r1, r2)| Annulus::new(r1, r2).map_err(CliError::from)).collect()
    };
    Ok(vec![
        ("inner_to_zero", build(o.shrinking_inner.iter().map(|&r1| (r1, 1.0)).collect())?),
        ("outer_to_infinity", build(o.growing_outer.iter().map(|&r2| (1.0, r2)).collect())?),
        ("thin", build(o.thin_widths.iter().map(|&w| (1.0, 1.0 + w)).collect())?),
    ])
}

pub struct AppendixTables {
    pub phi: String,
    pub bounds: String,
    pub v_epsilon: String,
}

pub fn appendix_tables(cfg: &RunConfig) -> Result<AppendixTables, CliError> {
    let sequences = appendix_sequences(cfg)?;
    let mut phi = format!("sequence,{PHI_CSV_HEADER}\n");
    let mut bounds = format!("{BOUNDS_CSV_HEADER}\n");
    for (name, annuli) in &sequences {
        for r in phi_asymptotics(annuli) {
            let _ = writeln!(phi, "{name},{},{},{},{},{}", r.r1, r.r2, r.phi1, r.phi2, r.scaled_phi1);
        }
        for a in annuli {
            let b = bound_set(a);
            let (am, bm) = dirichlet_axis_thresholds(a);
            let _ = writeln!(
                bounds,
                "{name},{},{},{},{},{},{},{},{},{am},{bm},{}",
                a.r_inner(),
                a.r_outer(),
                b.lower_square,
                b.lower_radial,
                b.lower_best,
                b.upper,
                b.curl_factor,
                b.lower_one_wall,
                am * a.width()
            );
        }
    }
    let exec = execution_for(cfg.jobs);
    let mut v_epsilon = format!("{V_EPSILON_CSV_HEADER}\n");
    for &e in &cfg.appendix.eps {
        let q = v_epsilon_rayleigh(&cfg.annulus, e, VEpsilonGrid::default(), exec)?;
        let _ = writeln!(
            v_epsilon,
            "{},{},{},{},{},{},{},{}",
            q.eps,
            q.numeric_quotient,
            q.closed_form,
            q.printed_form,
            q.norm_sq,
            q.norm_sq_closed,
            q.grad_norm_sq,
            q.grad_norm_sq_closed
        );
    }
    Ok(AppendixTables { phi, bounds, v_epsilon })
}

/// The three tables. With `--out DIR` they become `DIR/{phi,bounds,v_epsilon}.csv`;
/// on stdout they are separated by blank lines.
pub fn appendix(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t = appendix_tables(cfg)?;
    match &cfg.out {
        Some(dir) => Ok(Outcome {
            text: String::new(),
            passed: true,
            extra_files: vec![
                (dir.join("phi.csv"), t.phi),
                (dir.join("bounds.csv"), t.bounds),
                (dir.join("v_epsilon.csv"), t.v_epsilon),
            ],
        }),
        None => Ok(Outcome::ok(format!("{}\n{}\n{}", t.phi, t.bounds, t.v_epsilon))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn eval_of_rest_state_is_zero() {
        let mut c = cfg();
        c.flow = FlowSpec::rest(FlowFamily::SpiralPcVorticityOnInner);
        let out = eval(&c).unwrap().text;
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some(EVAL_CSV_HEADER));
        for l in lines {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            assert!(v[3..].iter().all(|x| *x == 0.0), "{l}");
        }
    }

    #[test]
    fn eval_couette_column_matches_closed_form() {
        let c = cfg();
        let out = eval(&c).unwrap().text;
        for l in out.lines().skip(1) {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            let rho = v[0];
            // R1 / (R2^2 - R1^2) (R2^2 / rho - rho) on (1, 2)
            let exact = (4.0 / rho - rho) / 3.0;
            assert!((v[4] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn noise_lattice_is_seeded() {
        let a = NoiseLattice::new(3, 1.0);
        let b = NoiseLattice::new(3, 1.0);
        let c = NoiseLattice::new(4, 1.0);
        assert_eq!(a.component(1, 1.3, 0.2, 0.4), b.component(1, 1.3, 0.2, 0.4));
        assert_ne!(a.component(1, 1.3, 0.2, 0.4), c.component(1, 1.3, 0.2, 0.4));
    }

    #[test]
    fn exact_verify_passes_and_perturbed_fails() {
        let mut c = cfg();
        c.flow = FlowSpec::new(FlowFamily::SpiralPcVorticityOnOuter, 0.5, 1.0, -2.0).unwrap();
        c.verify.n_samples = 500;
        c.verify.n_boundary = 100;
        assert!(verify(&c).unwrap().passed);
        c.verify.mode = VerifyMode::Perturbed;
        assert!(!verify(&c).unwrap().passed);
        c.verify.mode = VerifyMode::Counterexample;
        assert!(verify(&c).unwrap().passed);
    }

    #[test]
    fn map_has_origin_certified_and_rays_star_shaped() {
        let mut c = cfg();
        c.map.n_alpha = 21;
        c.map.n_beta = 21;
        let m = stability_map(&c).unwrap();
        let at = |i: usize, j: usize| m.cells[j * 21 + i];
        assert!(at(10, 10).certified);
        assert_eq!(at(10, 10).m, 0.0);
        // walking outwards from the origin along grid rays, certification never resumes once lost
        for (di, dj) in [(1i32, 0i32), (0, 1), (1, 1), (-1, 1), (-1, 0), (0, -1), (-1, -1), (1, -1)] {
            let mut lost = false;
            for s in 1..=10 {
                let cell = at((10 + di * s) as usize, (10 + dj * s) as usize);
                if lost {
                    assert!(!cell.certified);
                }
                lost |= !cell.certified;
            }
        }
        let csv = m.csv();
        assert!(csv.starts_with("alpha,beta,m,bound,certified\n"));
        assert_eq!(csv.lines().count(), 1 + 21 * 21);
    }

    #[test]
    fn vorticity_map_has_gamma_column_and_panels() {
        let mut c = cfg();
        c.map.family = FlowFamily::SpiralPcVorticityOnOuter;
        c.map.n_alpha = 5;
        c.map.n_beta = 4;
        c.map.gammas = vec![-1.0, 0.0, 1.0];
        let m = stability_map(&c).unwrap();
        assert!(m.csv().starts_with("alpha,beta,gamma,m,bound,certified\n"));
        assert_eq!(m.cells.len(), 60);
        assert_eq!(m.svg().matches("<g>").count(), 3);
    }

    #[test]
    fn slscan_rejects_zero_k() {
        let mut c = cfg();
        c.slscan.ks = vec![0];
        c.slscan.n = 16;
        assert_eq!(slscan(&c).unwrap_err().exit_code(), 2);
    }
}
