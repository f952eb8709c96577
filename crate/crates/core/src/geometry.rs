//! Annulus geometry and the cylindrical frame.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The cross-section `r_inner < rho < r_outer` of the unbounded annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnulus")]
pub struct Annulus {
    r_inner: f64,
    r_outer: f64,
}

#[derive(Deserialize)]
struct RawAnnulus {
    r_inner: f64,
    r_outer: f64,
}

impl TryFrom<RawAnnulus> for Annulus {
    type Error = Error;

    fn try_from(raw: RawAnnulus) -> Result<Self> {
        Annulus::new(raw.r_inner, raw.r_outer)
    }
}

impl Annulus {
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        let ok = r_inner.is_finite() && r_outer.is_finite() && 0.0 < r_inner && r_inner < r_outer;
        if !ok {
            return Err(Error::InvalidAnnulus { r_inner, r_outer });
        }
        Ok(Self { r_inner, r_outer })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    pub fn width(&self) -> f64 {
        self.r_outer - self.r_inner
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.r_inner + self.r_outer)
    }

    /// `log(r_outer / r_inner)`, accurate for thin annuli.
    pub fn log_ratio(&self) -> f64 {
        (self.width() / self.r_inner).ln_1p()
    }

    /// `r_outer^2 - r_inner^2`, accurate for thin annuli.
    pub fn square_gap(&self) -> f64 {
        self.width() * (self.r_outer + self.r_inner)
    }

    pub fn contains(&self, rho: f64) -> bool {
        (self.r_inner..=self.r_outer).contains(&rho)
    }

    pub fn check_closed(&self, rho: f64) -> Result<()> {
        if self.contains(rho) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { rho, r_inner: self.r_inner, r_outer: self.r_outer })
        }
    }

    pub fn check_interior(&self, rho: f64) -> Result<()> {
        if self.r_inner < rho && rho < self.r_outer {
            Ok(())
        } else {
            Err(Error::NotInterior { rho, r_inner: self.r_inner, r_outer: self.r_outer })
        }
    }

    /// Radius of the intermediate cylinder where the circular Poiseuille
    /// profile attains its extremum: `sqrt((R2^2 - R1^2) / (2 log(R2/R1)))`.
    pub fn peak_radius(&self) -> f64 {
        (self.square_gap() / (2.0 * self.log_ratio())).sqrt()
    }
}

/// Free-function form of [`Annulus::peak_radius`].
pub fn peak_radius(a: &Annulus) -> f64 {
    a.peak_radius()
}

/// A point `(rho, theta, z)` with `theta` normalised to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylPoint {
    pub rho: f64,
    pub theta: f64,
    pub z: f64,
}

impl CylPoint {
    pub fn new(rho: f64, theta: f64, z: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) || !theta.is_finite() || !z.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cylindrical point needs rho >= 0 and finite coordinates, got ({rho}, {theta}, {z})"
            )));
        }
        Ok(Self { rho, theta: normalize_angle(theta), z })
    }

    pub fn to_cartesian(&self) -> Vector3<f64> {
        let (s, c) = self.theta.sin_cos();
        Vector3::new(self.rho * c, self.rho * s, self.z)
    }
}

/// Representative of `theta` in `[0, 2pi)`; `2pi` itself maps to `0`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Components of a vector in the local `(e_rho, e_theta, e_z)` frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CylVector {
    pub v_rho: f64,
    pub v_theta: f64,
    pub v_z: f64,
}

impl CylVector {
    pub const ZERO: CylVector = CylVector { v_rho: 0.0, v_theta: 0.0, v_z: 0.0 };

    pub fn new(v_rho: f64, v_theta: f64, v_z: f64) -> Self {
        Self { v_rho, v_theta, v_z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v_rho, self.v_theta, self.v_z]
    }

    pub fn norm(&self) -> f64 {
        (self.v_rho * self.v_rho + self.v_theta * self.v_theta + self.v_z * self.v_z).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.v_rho.abs().max(self.v_theta.abs()).max(self.v_z.abs())
    }
}

impl std::ops::Add for CylVector {
    type Output = CylVector;
    fn add(self, o: CylVector) -> CylVector {
        CylVector::new(self.v_rho + o.v_rho, self.v_theta + o.v_theta, self.v_z + o.v_z)
    }
}

impl std::ops::Sub for CylVector {
    type Output = CylVector;
    fn sub(self, o: CylVector) -> CylVector {
        CylVector::new(self.v_rho - o.v_rho, self.v_theta - o.v_theta, self.v_z - o.v_z)
    }
}

impl std::ops::Mul<CylVector> for f64 {
    type Output = CylVector;
    fn mul(self, v: CylVector) -> CylVector {
        CylVector::new(self * v.v_rho, self * v.v_theta, self * v.v_z)
    }
}

/// Rotation whose columns are `e_rho`, `e_theta`, `e_z` at angle `theta`.
pub fn frame(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn cyl_to_cart(p: &CylPoint, v: &CylVector) -> (Vector3<f64>, Vector3<f64>) {
    let q = frame(p.theta);
    (p.to_cartesian(), q * Vector3::new(v.v_rho, v.v_theta, v.v_z))
}

pub fn cart_to_cyl(x: &Vector3<f64>, v: &Vector3<f64>) -> Result<(CylPoint, CylVector)> {
    let rho = x.x.hypot(x.y);
    if rho == 0.0 {
        return Err(Error::OnAxis);
    }
    let p = CylPoint::new(rho, x.y.atan2(x.x), x.z)?;
    let local = frame(p.theta).transpose() * v;
    Ok((p, CylVector::new(local.x, local.y, local.z)))
}
