//! Poincare-type bounds for the annulus, Rayleigh quotients of supplied test
//! fields, and the radius asymptotics of the magnitude constants.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Execution};
use crate::geometry::{Annulus, CylPoint};

/// Computable bounds on the Poincare constants of the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    /// `pi^2 / (2 R2^2)`, from the circumscribed square.
    pub lower_square: f64,
    /// `8 / ((R2^2 - R1^2) log(R2/R1))`, from the radial fundamental theorem on both walls.
    pub lower_radial: f64,
    pub lower_best: f64,
    /// `10 / (R2 - R1)^2`, from the test field `V_eps` as `eps -> 0`.
    pub upper: f64,
    /// `1 - log(R2/R1)`, positive exactly for `R2/R1 < e`.
    pub curl_factor: f64,
    /// `2 / ((R2^2 - R1^2) log(R2/R1))`, for fields vanishing on one wall only.
    pub lower_one_wall: f64,
}

pub fn bound_set(a: &Annulus) -> BoundSet {
    let r2 = a.r_outer();
    let gap_log = a.square_gap() * a.log_ratio();
    let lower_square = PI * PI / (2.0 * r2 * r2);
    let lower_radial = 8.0 / gap_log;
    BoundSet {
        lower_square,
        lower_radial,
        lower_best: lower_square.max(lower_radial),
        upper: 10.0 / (a.width() * a.width()),
        curl_factor: 1.0 - a.log_ratio(),
        lower_one_wall: 2.0 / gap_log,
    }
}

/// Midpoint-rule resolution for [`v_epsilon_rayleigh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VEpsilonGrid {
    pub n_rho: usize,
    /// Cells on each of `[0, 1/eps]` and `[-1/eps, 0]`.
    pub n_z_half: usize,
}

impl Default for VEpsilonGrid {
    fn default() -> Self {
        Self { n_rho: 512, n_z_half: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VEpsilonRayleigh {
    pub eps: f64,
    pub numeric_quotient: f64,
    /// `3 eps^2 + 10 / (R2 - R1)^2`.
    pub closed_form: f64,
    /// `3 eps^3 + 10 / (R2 - R1)^2`, the frequently quoted form. It drops the
    /// axial length `2/eps` from the `|d_z v|^2` term and only agrees with
    /// `closed_form` at `eps = 1`.
    pub printed_form: f64,
    pub norm_sq: f64,
    pub grad_norm_sq: f64,
    pub norm_sq_closed: f64,
    pub grad_norm_sq_closed: f64,
}

/// `v_eps = (1 - eps |z|)^+ (R2 - rho)(rho - R1)`.
pub fn v_epsilon(a: &Annulus, eps: f64, rho: f64, z: f64) -> f64 {
    (1.0 - eps * z.abs()).max(0.0) * (a.r_outer() - rho) * (rho - a.r_inner())
}

/// Rayleigh quotient `|grad V|^2 / |V|^2` of `V_eps = v_eps e_x`.
///
/// Integrates the exact pointwise gradient with the composite midpoint rule
/// in `(rho, z)`; the angular integral is exact (`2 pi`) since nothing depends
/// on `theta`. Cell boundaries sit on `z = 0` and `z = +-1/eps`.
pub fn v_epsilon_rayleigh(a: &Annulus, eps: f64, grid: VEpsilonGrid, exec: Execution) -> Result<VEpsilonRayleigh> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if grid.n_rho < 2 || grid.n_z_half < 1 {
        return Err(Error::InvalidParameter("quadrature grid too coarse".into()));
    }
    let (r1, r2) = (a.r_inner(), a.r_outer());
    let hr = a.width() / grid.n_rho as f64;
    let zmax = 1.0 / eps;
    let hz = zmax / grid.n_z_half as f64;
    // by the z -> -z symmetry, integrate z > 0 and double
    let slabs = exec.map_range(grid.n_z_half, |j| {
        let z = (j as f64 + 0.5) * hz;
        let fz = 1.0 - eps * z;
        let mut num = Vec::with_capacity(grid.n_rho);
        let mut den = Vec::with_capacity(grid.n_rho);
        for i in 0..grid.n_rho {
            let rho = r1 + (i as f64 + 0.5) * hr;
            let g = (r2 - rho) * (rho - r1);
            let dg = r2 + r1 - 2.0 * rho;
            let v = fz * g;
            let grad2 = (fz * dg).powi(2) + (eps * g).powi(2);
            den.push(v * v * rho);
            num.push(grad2 * rho);
        }
        (pairwise_sum(&num), pairwise_sum(&den))
    });
    let (nums, dens): (Vec<f64>, Vec<f64>) = slabs.into_iter().unzip();
    let w = 2.0 * 2.0 * PI * hr * hz;
    let grad_norm_sq = w * pairwise_sum(&nums);
    let norm_sq = w * pairwise_sum(&dens);
    let numeric_quotient = grad_norm_sq / norm_sq;
    if !numeric_quotient.is_finite() {
        return Err(Error::NonConvergence(format!("V_eps quadrature for eps = {eps}")));
    }
    let (s, d) = (r2 + r1, a.width());
    Ok(VEpsilonRayleigh {
        eps,
        numeric_quotient,
        closed_form: 3.0 * eps * eps + 10.0 / (d * d),
        printed_form: 3.0 * eps.powi(3) + 10.0 / (d * d),
        norm_sq,
        grad_norm_sq,
        norm_sq_closed: PI / (45.0 * eps) * s * d.powi(5),
        grad_norm_sq_closed: 2.0 * PI / (9.0 * eps) * s * d.powi(3) + PI * eps / 15.0 * s * d.powi(5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientForm {
    Gradient,
    Curl,
}

/// Axial extent of the quadrature box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axial {
    /// Field vanishes for `|z| >= half_width`.
    Compact { half_width: f64 },
    /// Field is periodic in `z`; one period `[-period/2, period/2)` is integrated.
    Periodic { period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub n_rho: usize,
    pub n_theta: usize,
    /// Total cells along `z`; even, so that `z = 0` is a cell boundary.
    pub n_z: usize,
}

impl QuadratureGrid {
    pub fn cube(n: usize) -> Self {
        Self { n_rho: n, n_theta: n, n_z: n + n % 2 }
    }
}

/// Rayleigh quotient of a Cartesian vector field over the annulus.
///
/// Tensor-product midpoint quadrature in `(rho, theta, z)` with weight `rho`;
/// the Jacobian at each node comes from Cartesian central differences with a
/// step far below the cell size, so kinks on cell faces are never straddled.
pub fn discrete_rayleigh<F>(
    field: F,
    a: &Annulus,
    axial: Axial,
    grid: QuadratureGrid,
    form: QuotientForm,
    exec: Execution,
) -> Result<f64>
where
    F: Fn(&Vector3<f64>) -> Vector3<f64> + Sync + Send,
{
    if grid.n_rho < 2 || grid.n_theta < 1 || grid.n_z < 2 || grid.n_z % 2 == 1 {
        return Err(Error::InvalidParameter(format!("bad quadrature grid {grid:?}")));
    }
    let half = match axial {
        Axial::Compact { half_width } => half_width,
        Axial::Periodic { period } => 0.5 * period,
    };
    if !(half > 0.0 && half.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad axial extent {axial:?}")));
    }
    let r1 = a.r_inner();
    let hr = a.width() / grid.n_rho as f64;
    let ht = std::f64::consts::TAU / grid.n_theta as f64;
    let hz = 2.0 * half / grid.n_z as f64;
    let node = |i: usize, t: usize| {
        let rho = r1 + (i as f64 + 0.5) * hr;
        let theta = (t as f64 + 0.5) * ht;
        (rho, theta)
    };

    if let Axial::Compact { half_width } = axial {
        check_support(&field, half_width, grid, &node)?;
    }

    let fd = 1e-4 * hr.min(hz).min(r1 * ht);
    let slabs = exec.map_range(grid.n_z, |k| {
        let z = -half + (k as f64 + 0.5) * hz;
        let mut num = Vec::with_capacity(grid.n_rho * grid.n_theta);
        let mut den = Vec::with_capacity(grid.n_rho * grid.n_theta);
        for i in 0..grid.n_rho {
            for t in 0..grid.n_theta {
                let (rho, theta) = node(i, t);
                let x = CylPoint { rho, theta, z }.to_cartesian();
                let v = field(&x);
                let j = jacobian(&field, &x, fd);
                let top = match form {
                    QuotientForm::Gradient => j.norm_squared(),
                    QuotientForm::Curl => {
                        Vector3::new(j[(2, 1)] - j[(1, 2)], j[(0, 2)] - j[(2, 0)], j[(1, 0)] - j[(0, 1)]).norm_squared()
                    }
                };
                num.push(top * rho);
                den.push(v.norm_squared() * rho);
            }
        }
        (pairwise_sum(&num), pairwise_sum(&den))
    });
    let (nums, dens): (Vec<f64>, Vec<f64>) = slabs.into_iter().unzip();
    let den = pairwise_sum(&dens);
    if !(den > 0.0) {
        return Err(Error::InvalidParameter("field vanishes on the quadrature grid".into()));
    }
    Ok(pairwise_sum(&nums) / den)
}

fn jacobian<F: Fn(&Vector3<f64>) -> Vector3<f64>>(f: &F, x: &Vector3<f64>, h: f64) -> Matrix3<f64> {
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = h;
        j.set_column(k, &((f(&(x + e)) - f(&(x - e))) / (2.0 * h)));
    }
    j
}

fn check_support<F, N>(field: &F, half_width: f64, grid: QuadratureGrid, node: &N) -> Result<()>
where
    F: Fn(&Vector3<f64>) -> Vector3<f64>,
    N: Fn(usize, usize) -> (f64, f64),
{
    let mut cap = 0.0f64;
    let mut inside = 0.0f64;
    for i in 0..grid.n_rho {
        for t in 0..grid.n_theta {
            let (rho, theta) = node(i, t);
            for z in [-half_width, half_width] {
                cap = cap.max(field(&CylPoint { rho, theta, z }.to_cartesian()).norm());
            }
            inside = inside.max(field(&CylPoint { rho, theta, z: 0.0 }.to_cartesian()).norm());
        }
    }
    if cap > 1e-12 * inside.max(f64::MIN_POSITIVE) {
        return Err(Error::SupportExceedsTruncation { z_halfwidth: half_width, magnitude: cap });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiRow {
    pub r1: f64,
    pub r2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub scaled_phi1: f64,
}

/// `Phi1 = R2^4 / ((R2^2-R1^2)^2 R1^2)`.
pub fn phi1(a: &Annulus) -> f64 {
    let r1 = a.r_inner();
    let r2 = a.r_outer();
    let q = r2 * r2 / (a.square_gap() * r1);
    q * q
}

/// `Phi2 = ((R2^2-R1^2) / (R1 log(R2^2/R1^2)) - R1)^2`.
pub fn phi2(a: &Annulus) -> f64 {
    let r1 = a.r_inner();
    (a.square_gap() / (2.0 * a.log_ratio() * r1) - r1).powi(2)
}

pub fn phi_asymptotics(annuli: &[Annulus]) -> Vec<PhiRow> {
    annuli
        .iter()
        .map(|a| {
            let p1 = phi1(a);
            PhiRow { r1: a.r_inner(), r2: a.r_outer(), phi1: p1, phi2: phi2(a), scaled_phi1: a.width().powi(2) * p1 }
        })
        .collect()
}

pub const PHI_CSV_HEADER: &str = "r1,r2,phi1,phi2,scaled_phi1";

pub fn phi_csv(rows: &[PhiRow]) -> String {
    let mut s = String::from(PHI_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.r1, r.r2, r.phi1, r.phi2, r.scaled_phi1);
    }
    s
}
