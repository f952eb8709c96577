//! Residual and boundary audits of steady Navier-Stokes solutions in
//! cylindrical coordinates.
//!
//! The four equations (radial, azimuthal, axial momentum and continuity) are
//! assembled from a [`FieldJet`]: the velocity components, their first and
//! pure second partials, and the pressure gradient at one point. Jets come
//! either from the closed-form radial profiles or from central differences of
//! an arbitrary [`Field`], so both routes share the same assembly.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{nan_max, nan_min, Execution};
use crate::flows::{wall_vorticity_data, FlowSpec, RadialFields, Wall};
use crate::geometry::{cart_to_cyl, cyl_to_cart, frame, Annulus, CylPoint, CylVector};
use crate::sampling::{interior_points, wall_points};

/// Half-height of the axial window used when sampling points.
pub const SAMPLE_Z_HALF: f64 = 10.0;

/// Default finite-difference step as a fraction of the gap width.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Local derivative data at one point, indexed `(rho, theta, z)`.
///
/// `du[c][d]` is the partial of component `c` along coordinate `d`;
/// `d2u[c][d]` the pure second partial. `dp` is the coordinate gradient of the
/// pressure (not divided by `rho` in the angular slot).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet {
    pub u: [f64; 3],
    pub du: [[f64; 3]; 3],
    pub d2u: [[f64; 3]; 3],
    pub dp: [f64; 3],
}

impl FieldJet {
    pub fn from_radial(f: &RadialFields) -> Self {
        let mut jet = FieldJet { u: [0.0, f.u_theta.value, f.u_z.value], ..Default::default() };
        jet.du[1][0] = f.u_theta.d1;
        jet.du[2][0] = f.u_z.d1;
        jet.d2u[1][0] = f.u_theta.d2;
        jet.d2u[2][0] = f.u_z.d2;
        jet.dp = [f.dp_radial, 0.0, f.p_slope];
        jet
    }

    fn laplacian(&self, c: usize, rho: f64) -> f64 {
        self.d2u[c][0] + self.du[c][0] / rho + self.d2u[c][1] / (rho * rho) + self.d2u[c][2]
    }

    fn advection(&self, c: usize, rho: f64) -> f64 {
        self.u[0] * self.du[c][0] + self.u[1] / rho * self.du[c][1] + self.u[2] * self.du[c][2]
    }

    /// Left minus right side of the three momentum equations.
    pub fn momentum_residual(&self, rho: f64) -> [f64; 3] {
        let [ur, ut, _] = self.u;
        let r2 = rho * rho;
        let radial = self.laplacian(0, rho) - self.advection(0, rho) + ut * ut / rho
            - ur / r2
            - 2.0 / r2 * self.du[1][1]
            - self.dp[0];
        let azimuthal = self.laplacian(1, rho) - self.advection(1, rho) - ur * ut / rho - ut / r2
            + 2.0 / r2 * self.du[0][1]
            - self.dp[1] / rho;
        let axial = self.laplacian(2, rho) - self.advection(2, rho) - self.dp[2];
        [radial, azimuthal, axial]
    }

    pub fn divergence(&self, rho: f64) -> f64 {
        self.du[0][0] + self.u[0] / rho + self.du[1][1] / rho + self.du[2][2]
    }

    pub fn curl(&self, rho: f64) -> CylVector {
        CylVector::new(
            self.du[2][1] / rho - self.du[1][2],
            self.du[0][2] - self.du[2][0],
            self.u[1] / rho + self.du[1][0] - self.du[0][1] / rho,
        )
    }

    /// Velocity gradient in the local frame: rows are components, columns directions.
    pub fn local_gradient(&self, rho: f64) -> Matrix3<f64> {
        let [ur, ut, _] = self.u;
        let d = &self.du;
        Matrix3::new(
            d[0][0],
            d[0][1] / rho - ut / rho,
            d[0][2],
            d[1][0],
            d[1][1] / rho + ur / rho,
            d[1][2],
            d[2][0],
            d[2][1] / rho,
            d[2][2],
        )
    }
}

/// A velocity/pressure pair that can be evaluated anywhere near the annulus.
pub trait Field: Sync {
    /// Cylindrical velocity components and pressure at `(rho, theta, z)`.
    fn eval(&self, rho: f64, theta: f64, z: f64) -> Result<([f64; 3], f64)>;
}

impl<F> Field for F
where
    F: Fn(f64, f64, f64) -> ([f64; 3], f64) + Sync,
{
    fn eval(&self, rho: f64, theta: f64, z: f64) -> Result<([f64; 3], f64)> {
        Ok(self(rho, theta, z))
    }
}

/// A flow family evaluated through its public velocity and pressure.
#[derive(Debug, Clone, Copy)]
pub struct FlowField {
    pub spec: FlowSpec,
    pub annulus: Annulus,
}

impl Field for FlowField {
    fn eval(&self, rho: f64, _theta: f64, z: f64) -> Result<([f64; 3], f64)> {
        let f = self.spec.checked_fields(&self.annulus, rho)?;
        Ok((f.velocity().to_array(), f.pressure(z)))
    }
}

/// Central-difference jet with step `h` along `rho` and `z` and arc step `h` along `theta`.
pub fn fd_jet(field: &dyn Field, p: &CylPoint, h: f64) -> Result<FieldJet> {
    if !(h > 0.0) || h >= p.rho {
        return Err(Error::InvalidParameter(format!("finite-difference step {h} at rho = {}", p.rho)));
    }
    let (u0, _) = field.eval(p.rho, p.theta, p.z)?;
    let steps = [h, h / p.rho, h];
    let mut jet = FieldJet { u: u0, ..Default::default() };
    for d in 0..3 {
        let mut plus = [p.rho, p.theta, p.z];
        let mut minus = plus;
        plus[d] += steps[d];
        minus[d] -= steps[d];
        let (up, pp) = field.eval(plus[0], plus[1], plus[2])?;
        let (um, pm) = field.eval(minus[0], minus[1], minus[2])?;
        let s = steps[d];
        for c in 0..3 {
            jet.du[c][d] = (up[c] - um[c]) / (2.0 * s);
            jet.d2u[c][d] = (up[c] - 2.0 * u0[c] + um[c]) / (s * s);
        }
        jet.dp[d] = (pp - pm) / (2.0 * s);
    }
    Ok(jet)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdResidual {
    pub momentum: [f64; 3],
    pub divergence: f64,
}

/// Finite-difference residual of the steady equations at an interior point
/// lying at least `2h` from both walls.
pub fn ns_residual_fd(field: &dyn Field, a: &Annulus, p: &CylPoint, h: f64) -> Result<FdResidual> {
    let margin = 2.0 * h;
    if p.rho - margin < a.r_inner() || p.rho + margin > a.r_outer() {
        return Err(Error::InsufficientMargin { rho: p.rho, margin });
    }
    let jet = fd_jet(field, p, h)?;
    Ok(FdResidual { momentum: jet.momentum_residual(p.rho), divergence: jet.divergence(p.rho) })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EquationMax {
    pub rho: f64,
    pub theta: f64,
    pub z: f64,
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub per_equation_max: EquationMax,
    pub n_samples: usize,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub momentum_residual: Vec<[f64; 3]>,
    #[serde(skip)]
    pub divergence: Vec<f64>,
    #[serde(skip)]
    pub sample_points: Vec<CylPoint>,
}

impl ResidualReport {
    fn assemble(points: Vec<CylPoint>, rows: Vec<([f64; 3], f64)>, seed: Option<u64>) -> Self {
        let mut m = EquationMax::default();
        for (r, d) in &rows {
            m.rho = nan_max(m.rho, r[0].abs());
            m.theta = nan_max(m.theta, r[1].abs());
            m.z = nan_max(m.z, r[2].abs());
            m.divergence = nan_max(m.divergence, d.abs());
        }
        let (momentum_residual, divergence) = rows.into_iter().unzip();
        ResidualReport {
            max_abs: nan_max(nan_max(m.rho, m.theta), nan_max(m.z, m.divergence)),
            per_equation_max: m,
            n_samples: points.len(),
            seed,
            momentum_residual,
            divergence,
            sample_points: points,
        }
    }
}

/// Closed-form residuals at the given interior points.
pub fn ns_residual_closed(spec: &FlowSpec, a: &Annulus, points: &[CylPoint]) -> Result<ResidualReport> {
    ns_residual_closed_with(spec, a, points, Execution::default())
}

pub fn ns_residual_closed_with(
    spec: &FlowSpec,
    a: &Annulus,
    points: &[CylPoint],
    exec: Execution,
) -> Result<ResidualReport> {
    for p in points {
        a.check_interior(p.rho)?;
    }
    Ok(ResidualReport::assemble(points.to_vec(), closed_rows(spec, a, points, exec), None))
}

/// Closed-form residuals at `n` quasi-random interior points drawn from `seed`.
pub fn ns_residual_sampled(spec: &FlowSpec, a: &Annulus, n: usize, seed: u64, exec: Execution) -> ResidualReport {
    let points = interior_points(a, n, seed, 0.0, SAMPLE_Z_HALF);
    let rows = closed_rows(spec, a, &points, exec);
    ResidualReport::assemble(points, rows, Some(seed))
}

fn closed_rows(spec: &FlowSpec, a: &Annulus, points: &[CylPoint], exec: Execution) -> Vec<([f64; 3], f64)> {
    exec.map(points, |p| {
        let jet = FieldJet::from_radial(&spec.fields_at(a, p.rho));
        (jet.momentum_residual(p.rho), jet.divergence(p.rho))
    })
}

/// Maximum boundary-condition violations, keyed `"<wall>.<condition>"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub max_abs: f64,
    pub per_equation_max: BTreeMap<String, f64>,
    pub n_samples: usize,
    pub seed: Option<u64>,
}

pub fn boundary_check(spec: &FlowSpec, a: &Annulus, n_samples: usize) -> Result<BoundaryReport> {
    boundary_check_with(spec, a, n_samples, 0, Execution::default())
}

/// Audits the family's boundary conditions at sampled `(theta, z)` on both walls.
///
/// No-slip walls are checked as `|u - g|`; the vorticity wall is checked for
/// impermeability, for `(curl u) x nu = omega x nu` and, separately, for the
/// equivalent Robin (`u_theta/R + u_theta' = omega_z`) and Neumann
/// (`u_z' = -omega_theta`) conditions.
pub fn boundary_check_with(
    spec: &FlowSpec,
    a: &Annulus,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<BoundaryReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("boundary check needs at least one sample".into()));
    }
    let mut per = BTreeMap::new();
    for wall in [Wall::Inner, Wall::Outer] {
        let r = wall.radius(a);
        let tag = match wall {
            Wall::Inner => "inner",
            Wall::Outer => "outer",
        };
        let points = wall_points(r, n_samples, seed, SAMPLE_Z_HALF);
        let moving = wall == spec.family.moving_wall();
        let rows: Vec<Vec<(&'static str, f64)>> = exec.map(&points, |p| {
            let f = spec.fields_at(a, p.rho);
            let u = f.velocity();
            if moving && spec.family.is_vorticity() {
                let nu = CylVector::new(wall.normal_sign(), 0.0, 0.0);
                let data = wall_vorticity_data(spec, a);
                let w = f.vorticity(r);
                let lhs = cross(&w, &nu);
                let rhs = cross(&data, &nu);
                vec![
                    ("impermeability", (u.v_rho * nu.v_rho).abs()),
                    ("vorticity", (lhs - rhs).max_abs()),
                    ("robin", (f.u_theta.value / r + f.u_theta.d1 - data.v_z).abs()),
                    ("neumann", (f.u_z.d1 + data.v_theta).abs()),
                ]
            } else {
                let target = if moving { CylVector::new(0.0, spec.alpha, 0.0) } else { CylVector::ZERO };
                vec![("no_slip", (u - target).max_abs())]
            }
        });
        for row in rows {
            for (name, v) in row {
                let e = per.entry(format!("{tag}.{name}")).or_insert(0.0f64);
                *e = nan_max(*e, v);
            }
        }
    }
    let max_abs = per.values().fold(0.0f64, |m, v| nan_max(m, *v));
    Ok(BoundaryReport { max_abs, per_equation_max: per, n_samples, seed: Some(seed) })
}

fn cross(a: &CylVector, b: &CylVector) -> CylVector {
    CylVector::new(
        a.v_theta * b.v_z - a.v_z * b.v_theta,
        a.v_z * b.v_rho - a.v_rho * b.v_z,
        a.v_rho * b.v_theta - a.v_theta * b.v_rho,
    )
}

/// The three terms of the wall identity, in Cartesian components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipTerms {
    /// `(curl u) x nu`.
    pub curl_cross_normal: Vector3<f64>,
    /// `2 [D(u) nu]_tau`.
    pub strain: Vector3<f64>,
    /// Geometric friction `2 (nu . e_rho) (u_theta / R) e_theta`.
    pub friction: Vector3<f64>,
}

impl SlipTerms {
    pub fn violation(&self) -> f64 {
        (self.curl_cross_normal - self.strain - self.friction).norm()
    }
}

/// Both sides of `(curl u) x nu = 2 [D(u) nu]_tau + friction` on a wall of
/// radius `rho` with outward normal `normal_sign * e_rho`.
///
/// The strain-rate tensor is assembled in the Cartesian frame and the
/// tangential part taken as `f - (f . nu) nu`. Requires `u . nu = 0`.
pub fn navier_slip_terms(jet: &FieldJet, rho: f64, theta: f64, normal_sign: f64) -> Result<SlipTerms> {
    let scale = jet.u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if jet.u[0].abs() > 1e-14 * scale {
        return Err(Error::InvalidParameter(format!(
            "wall identity needs u . nu = 0, found normal velocity {}",
            jet.u[0]
        )));
    }
    let q = frame(theta);
    let g = q * jet.local_gradient(rho) * q.transpose();
    let strain_rate = 0.5 * (g + g.transpose());
    let nu = q * Vector3::new(normal_sign, 0.0, 0.0);
    let f = 2.0 * strain_rate * nu;
    let strain = f - f.dot(&nu) * nu;
    let w = jet.curl(rho);
    let w_cart = q * Vector3::new(w.v_rho, w.v_theta, w.v_z);
    let friction = q * Vector3::new(0.0, 2.0 * normal_sign * jet.u[1] / rho, 0.0);
    Ok(SlipTerms { curl_cross_normal: w_cart.cross(&nu), strain, friction })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavierSlipReport {
    pub max_violation: f64,
    /// Largest `|2 u_theta / R|` seen on the tested wall.
    pub max_friction: f64,
    pub wall: Wall,
    pub n_samples: usize,
}

/// Checks the wall identity on the impermeable (vorticity) wall of a vorticity family.
pub fn navier_slip_identity(spec: &FlowSpec, a: &Annulus, n_samples: usize) -> Result<NavierSlipReport> {
    if !spec.family.is_vorticity() {
        return Err(Error::Config(format!(
            "{} prescribes no-slip data; the slip identity is tested on vorticity walls",
            spec.family
        )));
    }
    navier_slip_identity_on(spec, a, spec.family.moving_wall(), n_samples, 0)
}

/// Checks the wall identity on an arbitrary wall at sampled `(theta, z)`.
pub fn navier_slip_identity_on(
    spec: &FlowSpec,
    a: &Annulus,
    wall: Wall,
    n_samples: usize,
    seed: u64,
) -> Result<NavierSlipReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("slip identity needs at least one sample".into()));
    }
    let r = wall.radius(a);
    let mut max_violation = 0.0f64;
    let mut max_friction = 0.0f64;
    for p in wall_points(r, n_samples, seed, SAMPLE_Z_HALF) {
        let jet = FieldJet::from_radial(&spec.fields_at(a, r));
        let terms = navier_slip_terms(&jet, p.rho, p.theta, wall.normal_sign())?;
        max_violation = nan_max(max_violation, terms.violation());
        max_friction = nan_max(max_friction, terms.friction.norm());
    }
    Ok(NavierSlipReport { max_violation, max_friction, wall, n_samples })
}

/// `u = (y e_1 - x e_2) / (x^2 + y^2)`, i.e. `-e_theta / rho`: divergence-free,
/// curl-free, tangent to every cylinder, yet nonzero.
pub fn counterexample_field(p: &CylPoint) -> Result<CylVector> {
    if !(p.rho > 0.0) {
        return Err(Error::OnAxis);
    }
    Ok(CylVector::new(0.0, -1.0 / p.rho, 0.0))
}

/// Divergence and curl of a Cartesian vector field by fourth-order central
/// differences (five points per axis, reaching `x +- 2h`).
pub fn cartesian_div_curl<F>(f: F, x: &Vector3<f64>, h: f64) -> Result<(f64, Vector3<f64>)>
where
    F: Fn(&Vector3<f64>) -> Result<Vector3<f64>>,
{
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = h;
        let col = (8.0 * (f(&(x + e))? - f(&(x - e))?) - (f(&(x + 2.0 * e))? - f(&(x - 2.0 * e))?)) / (12.0 * h);
        j.set_column(k, &col);
    }
    let div = j.trace();
    let curl = Vector3::new(j[(2, 1)] - j[(1, 2)], j[(0, 2)] - j[(2, 0)], j[(1, 0)] - j[(0, 1)]);
    Ok((div, curl))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub max_divergence: f64,
    pub max_curl: f64,
    pub max_normal_component: f64,
    /// Smallest `|u|` over the samples; stays away from zero.
    pub min_speed: f64,
    pub n_samples: usize,
    pub step: f64,
}

/// Samples the counterexample field: FD divergence and curl at interior
/// points, and `u . nu` on both walls.
pub fn counterexample_check(
    a: &Annulus,
    n_samples: usize,
    seed: u64,
    h: f64,
    exec: Execution,
) -> Result<CounterexampleReport> {
    let cart = |x: &Vector3<f64>| -> Result<Vector3<f64>> {
        let (p, _) = cart_to_cyl(x, &Vector3::zeros())?;
        Ok(cyl_to_cart(&p, &counterexample_field(&p)?).1)
    };
    let points = interior_points(a, n_samples, seed, 2.0 * h, SAMPLE_Z_HALF);
    let rows = exec.try_map(&points, |p| {
        let (div, curl) = cartesian_div_curl(cart, &p.to_cartesian(), h)?;
        Ok::<_, Error>((div.abs(), curl.norm(), counterexample_field(p)?.norm()))
    })?;
    let mut normal = 0.0f64;
    for wall in [Wall::Inner, Wall::Outer] {
        for p in wall_points(wall.radius(a), n_samples, seed, SAMPLE_Z_HALF) {
            normal = nan_max(normal, (counterexample_field(&p)?.v_rho * wall.normal_sign()).abs());
        }
    }
    let fold =
        |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64, f64)) -> f64| rows.iter().map(pick).fold(init, f);
    Ok(CounterexampleReport {
        max_divergence: fold(nan_max, 0.0, |r| r.0),
        max_curl: fold(nan_max, 0.0, |r| r.1),
        max_normal_component: normal,
        min_speed: fold(nan_min, f64::INFINITY, |r| r.2),
        n_samples,
        step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::FlowFamily;
    use proptest::prelude::*;

    fn unit() -> Annulus {
        Annulus::new(1.0, 2.0).unwrap()
    }

    fn spec(f: FlowFamily, a: f64, b: f64, g: f64) -> FlowSpec {
        FlowSpec::new(f, a, b, g).unwrap()
    }

    #[test]
    fn a_nan_sample_poisons_the_report() {
        let p = CylPoint::new(1.5, 0.0, 0.0).unwrap();
        let rows = vec![([1.0, 0.0, 0.0], 0.0), ([f64::NAN, 0.0, 0.0], 0.0), ([2.0, 0.0, 0.0], 0.0)];
        let r = ResidualReport::assemble(vec![p; 3], rows, None);
        assert!(r.per_equation_max.rho.is_nan());
        assert!(r.max_abs.is_nan());
    }

    #[test]
    fn closed_residual_of_spiral_flow() {
        let a = unit();
        let s = spec(FlowFamily::SpiralPoiseuilleInnerRotating, 3.0, -2.0, 0.0);
        let r = ns_residual_sampled(&s, &a, 1000, 11, Execution::Parallel);
        assert_eq!(r.n_samples, 1000);
        assert!(r.max_abs < 1e-11, "{}", r.max_abs);
    }

    #[test]
    fn closed_residual_of_outer_vorticity_flow() {
        let a = unit();
        let s = spec(FlowFamily::SpiralPcVorticityOnOuter, 1.0, 1.0, -1.0);
        let r = ns_residual_sampled(&s, &a, 1000, 5, Execution::Sequential);
        assert!(r.max_abs < 1e-11, "{}", r.max_abs);
    }

    #[test]
    fn rest_state_has_exactly_zero_residual() {
        let a = unit();
        for f in FlowFamily::ALL {
            let r = ns_residual_sampled(&FlowSpec::rest(f), &a, 200, 1, Execution::Parallel);
            assert_eq!(r.max_abs, 0.0);
        }
    }

    #[test]
    fn closed_residual_rejects_wall_points() {
        let a = unit();
        let s = spec(FlowFamily::CouetteInnerRotating, 1.0, 0.0, 0.0);
        let p = CylPoint::new(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(ns_residual_closed(&s, &a, &[p]), Err(Error::NotInterior { .. })));
        let p = CylPoint::new(2.5, 0.0, 0.0).unwrap();
        assert!(ns_residual_closed(&s, &a, &[p]).is_err());
    }

    #[test]
    fn radial_balance_holds_for_every_family() {
        let a = Annulus::new(0.5, 3.0).unwrap();
        for f in FlowFamily::ALL {
            let s = if f.is_couette() {
                spec(f, 2.5, 0.0, 0.0)
            } else {
                spec(f, 2.5, -1.0, if f.is_vorticity() { 3.0 } else { 0.0 })
            };
            for i in 0..50 {
                let rho = 0.5 + 2.5 * i as f64 / 49.0;
                let fl = s.fields_at(&a, rho);
                let ut = fl.u_theta.value;
                assert!((fl.dp_radial - ut * ut / rho).abs() < 1e-12, "{f} at {rho}");
            }
        }
    }

    #[test]
    fn fd_residual_converges_at_second_order() {
        let a = unit();
        let field = FlowField { spec: spec(FlowFamily::SpiralPcVorticityOnInner, 2.0, 1.5, -0.7), annulus: a };
        let p = CylPoint::new(1.37, 0.4, 2.0).unwrap();
        let err = |h: f64| {
            let r = ns_residual_fd(&field, &a, &p, h).unwrap();
            r.momentum.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!((e1 / e2 - 4.0).abs() < 0.6, "ratio {}", e1 / e2);
        assert!(ns_residual_fd(&field, &a, &p, 1e-3).unwrap().divergence.abs() < 1e-9);
    }

    #[test]
    fn fd_rejects_points_near_the_wall() {
        let a = unit();
        let field = FlowField { spec: FlowSpec::rest(FlowFamily::CouetteInnerRotating), annulus: a };
        let p = CylPoint::new(1.0 + 1e-5, 0.0, 0.0).unwrap();
        assert!(matches!(ns_residual_fd(&field, &a, &p, 1e-4), Err(Error::InsufficientMargin { .. })));
    }

    #[test]
    fn manufactured_rigid_rotation_defect() {
        // u = (0, rho, 0), p = 0: the centrifugal term is unbalanced, the azimuthal equation is not
        let a = unit();
        let field = |rho: f64, _t: f64, _z: f64| ([0.0, rho, 0.0], 0.0);
        let p = CylPoint::new(1.6, 1.0, 0.0).unwrap();
        let r = ns_residual_fd(&field, &a, &p, 1e-3).unwrap();
        assert!((r.momentum[0] - 1.6).abs() < 1e-9);
        assert!(r.momentum[1].abs() < 1e-9);

        let field = |rho: f64, _t: f64, _z: f64| ([0.0, rho * rho, 0.0], 0.0);
        let r = ns_residual_fd(&field, &a, &p, 1e-3).unwrap();
        assert!((r.momentum[1] - 3.0).abs() < 1e-6, "{}", r.momentum[1]);
        assert!((r.momentum[0] - 1.6f64.powi(3)).abs() < 1e-6);
    }

    #[test]
    fn boundary_examples() {
        let a = unit();
        let r = boundary_check(&spec(FlowFamily::CouetteInnerRotating, 2.0, 0.0, 0.0), &a, 64).unwrap();
        assert!(r.max_abs < 1e-13);
        assert_eq!(r.per_equation_max.keys().collect::<Vec<_>>(), vec!["inner.no_slip", "outer.no_slip"]);

        let r = boundary_check(&spec(FlowFamily::SpiralPcVorticityOnInner, 1.3, -0.4, 2.0), &a, 64).unwrap();
        assert!(r.max_abs < 1e-13, "{:?}", r.per_equation_max);
        assert!(r.per_equation_max.contains_key("inner.vorticity"));
        assert!(r.per_equation_max.contains_key("outer.no_slip"));

        for f in FlowFamily::ALL {
            assert_eq!(boundary_check(&FlowSpec::rest(f), &a, 16).unwrap().max_abs, 0.0);
        }
        assert!(boundary_check(&FlowSpec::rest(FlowFamily::CouetteInnerRotating), &a, 0).is_err());
    }

    #[test]
    fn report_json_fields() {
        let a = unit();
        let r = ns_residual_sampled(&FlowSpec::rest(FlowFamily::CouetteOuterRotating), &a, 3, 9, Execution::Sequential);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, vec!["max_abs", "n_samples", "per_equation_max", "seed"]);
        let b = boundary_check(&FlowSpec::rest(FlowFamily::CouetteOuterRotating), &a, 3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&b).unwrap();
        assert!(v.get("per_equation_max").unwrap().get("inner.no_slip").is_some());
    }

    #[test]
    fn navier_slip_examples() {
        let a = unit();
        let r = navier_slip_identity(&spec(FlowFamily::SpiralPcVorticityOnInner, 1.0, 1.0, 0.0), &a, 100).unwrap();
        assert!(r.max_violation < 1e-12);
        assert!((r.max_friction - 2.0).abs() < 1e-14);

        let r = navier_slip_identity(&FlowSpec::rest(FlowFamily::SpiralPcVorticityOnOuter), &a, 10).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert!(navier_slip_identity(&FlowSpec::rest(FlowFamily::CouetteInnerRotating), &a, 10).is_err());
    }

    #[test]
    fn friction_shrinks_with_radius() {
        let mut last = f64::INFINITY;
        for r1 in [1.0, 2.0, 4.0, 8.0] {
            let a = Annulus::new(r1, r1 + 1.0).unwrap();
            let s = spec(FlowFamily::SpiralPcVorticityOnInner, 1.0, 0.5, 0.0);
            let rep = navier_slip_identity(&s, &a, 20).unwrap();
            assert!(rep.max_violation < 1e-12);
            assert!((rep.max_friction - 2.0 / r1).abs() < 1e-14);
            assert!(rep.max_friction < last);
            last = rep.max_friction;
        }
    }

    #[test]
    fn slip_identity_requires_impermeability() {
        let jet = FieldJet { u: [0.3, 1.0, 0.0], ..Default::default() };
        assert!(navier_slip_terms(&jet, 1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn div_curl_stencil_is_fourth_order() {
        let f = |x: &Vector3<f64>| -> Result<Vector3<f64>> {
            Ok(Vector3::new(x.x.sin() * x.z, (x.y * x.x).exp(), x.y.cos() * x.x * x.x))
        };
        let x: Vector3<f64> = Vector3::new(0.3, -0.7, 1.1);
        let div = x.x.cos() * x.z + x.x * (x.y * x.x).exp();
        let curl = Vector3::new(-x.y.sin() * x.x * x.x, x.x.sin() - 2.0 * x.x * x.y.cos(), x.y * (x.y * x.x).exp());
        let err = |h: f64| {
            let (d, c) = cartesian_div_curl(f, &x, h).unwrap();
            (d - div).abs() + (c - curl).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn counterexample_examples() {
        let p = CylPoint::new(2.0, 1.234, -7.0).unwrap();
        assert_eq!(counterexample_field(&p).unwrap(), CylVector::new(0.0, -0.5, 0.0));
        let axis = CylPoint::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(counterexample_field(&axis), Err(Error::OnAxis));

        let a = unit();
        let r = counterexample_check(&a, 200, 3, 1e-5, Execution::Parallel).unwrap();
        assert!(r.max_divergence < 1e-8 && r.max_curl < 1e-8, "{r:?}");
        assert_eq!(r.max_normal_component, 0.0);
        assert!(r.min_speed >= 0.5);
        let mid = CylPoint::new(a.peak_radius(), 0.0, 0.0).unwrap();
        assert!((counterexample_field(&mid).unwrap().norm() - 1.0 / a.peak_radius()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn slip_identity_holds_on_both_walls(fi in 0usize..6, alpha in -10.0f64..10.0, beta in -10.0f64..10.0,
                                             gamma in -10.0f64..10.0, r1 in 0.2f64..5.0, ratio in 1.05f64..10.0) {
            let f = FlowFamily::ALL[fi];
            let (b, g) = match (f.is_couette(), f.is_vorticity()) {
                (true, _) => (0.0, 0.0),
                (false, false) => (beta, 0.0),
                _ => (beta, gamma),
            };
            let s = spec(f, alpha, b, g);
            let a = Annulus::new(r1, r1 * ratio).unwrap();
            for wall in [Wall::Inner, Wall::Outer] {
                let rep = navier_slip_identity_on(&s, &a, wall, 8, 1).unwrap();
                let scale = 1.0 + alpha.abs() + beta.abs() + gamma.abs();
                prop_assert!(rep.max_violation <= 1e-12 * scale * (1.0 + 1.0 / r1), "{}", rep.max_violation);
            }
        }

        #[test]
        fn closed_residual_is_policy_independent(alpha in -10.0f64..10.0, beta in -10.0f64..10.0, seed in 0u64..1000) {
            let a = unit();
            let s = spec(FlowFamily::SpiralPoiseuilleOuterRotating, alpha, beta, 0.0);
            let p = ns_residual_sampled(&s, &a, 64, seed, Execution::Parallel);
            let q = ns_residual_sampled(&s, &a, 64, seed, Execution::Sequential);
            prop_assert_eq!(p, q);
        }
    }
}
