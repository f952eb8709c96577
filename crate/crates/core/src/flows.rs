//! Closed-form steady flows in the annulus.
//!
//! Every family has the same shape: `u = u_theta(rho) e_theta + u_z(rho) e_z`
//! and `p = p_radial(rho) + slope * z`, so a family is fully described by the
//! radial jets (value and first two derivatives) of its profiles. The
//! residual, boundary and stability code all work from these jets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Annulus, CylPoint, CylVector};

/// One of the two cylinders bounding the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    Inner,
    Outer,
}

impl Wall {
    pub fn radius(self, a: &Annulus) -> f64 {
        match self {
            Wall::Inner => a.r_inner(),
            Wall::Outer => a.r_outer(),
        }
    }

    pub fn other(self) -> Wall {
        match self {
            Wall::Inner => Wall::Outer,
            Wall::Outer => Wall::Inner,
        }
    }

    /// Sign `s` such that the outward unit normal of the fluid domain is `s e_rho`.
    pub fn normal_sign(self) -> f64 {
        match self {
            Wall::Inner => -1.0,
            Wall::Outer => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowFamily {
    /// Circular Couette flow, inner cylinder rotating, outer still.
    #[serde(alias = "CouetteInnerRotating")]
    CouetteInnerRotating,
    /// Circular Couette flow, outer cylinder rotating, inner still.
    #[serde(alias = "CouetteOuterRotating")]
    CouetteOuterRotating,
    /// Couette flow plus an axial Poiseuille profile, no-slip walls, inner rotating.
    #[serde(alias = "SpiralPoiseuilleInnerRotating")]
    SpiralPoiseuilleInnerRotating,
    /// As above with the outer cylinder rotating.
    #[serde(alias = "SpiralPoiseuilleOuterRotating")]
    SpiralPoiseuilleOuterRotating,
    /// Spiral Poiseuille-Couette flow with vorticity data on the (rotating) inner wall.
    #[serde(alias = "SpiralPCVorticityOnInner")]
    SpiralPcVorticityOnInner,
    /// Spiral Poiseuille-Couette flow with vorticity data on the (rotating) outer wall.
    #[serde(alias = "SpiralPCVorticityOnOuter")]
    SpiralPcVorticityOnOuter,
}

impl FlowFamily {
    pub const ALL: [FlowFamily; 6] = [
        FlowFamily::CouetteInnerRotating,
        FlowFamily::CouetteOuterRotating,
        FlowFamily::SpiralPoiseuilleInnerRotating,
        FlowFamily::SpiralPoiseuilleOuterRotating,
        FlowFamily::SpiralPcVorticityOnInner,
        FlowFamily::SpiralPcVorticityOnOuter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowFamily::CouetteInnerRotating => "couette_inner_rotating",
            FlowFamily::CouetteOuterRotating => "couette_outer_rotating",
            FlowFamily::SpiralPoiseuilleInnerRotating => "spiral_poiseuille_inner_rotating",
            FlowFamily::SpiralPoiseuilleOuterRotating => "spiral_poiseuille_outer_rotating",
            FlowFamily::SpiralPcVorticityOnInner => "spiral_pc_vorticity_on_inner",
            FlowFamily::SpiralPcVorticityOnOuter => "spiral_pc_vorticity_on_outer",
        }
    }

    /// The wall that rotates (and, for vorticity families, carries the vorticity data).
    pub fn moving_wall(self) -> Wall {
        match self {
            FlowFamily::CouetteInnerRotating
            | FlowFamily::SpiralPoiseuilleInnerRotating
            | FlowFamily::SpiralPcVorticityOnInner => Wall::Inner,
            _ => Wall::Outer,
        }
    }

    pub fn is_couette(self) -> bool {
        matches!(self, FlowFamily::CouetteInnerRotating | FlowFamily::CouetteOuterRotating)
    }

    /// No-slip data on both walls.
    pub fn is_dirichlet(self) -> bool {
        !self.is_vorticity()
    }

    /// Impermeability plus prescribed `(curl u) x nu` on the moving wall.
    pub fn is_vorticity(self) -> bool {
        matches!(self, FlowFamily::SpiralPcVorticityOnInner | FlowFamily::SpiralPcVorticityOnOuter)
    }

    pub fn couette_counterpart(self) -> FlowFamily {
        match self.moving_wall() {
            Wall::Inner => FlowFamily::CouetteInnerRotating,
            Wall::Outer => FlowFamily::CouetteOuterRotating,
        }
    }

    /// No-slip spiral flow whose vorticity supplies the wall data of a vorticity family.
    pub fn dirichlet_counterpart(self) -> FlowFamily {
        match self.moving_wall() {
            Wall::Inner => FlowFamily::SpiralPoiseuilleInnerRotating,
            Wall::Outer => FlowFamily::SpiralPoiseuilleOuterRotating,
        }
    }
}

impl fmt::Display for FlowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        FlowFamily::ALL
            .into_iter()
            .find(|f| f.name().replace('_', "") == key)
            .ok_or_else(|| Error::Config(format!("unknown flow family '{s}'")))
    }
}

/// A family tag plus its amplitudes.
///
/// `alpha` is the rotation amplitude of the moving wall. For no-slip spiral
/// families `beta` is the axial pressure slope; for vorticity families `beta`
/// is the size of the axial vorticity data and `gamma` the pressure slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFlowSpec")]
pub struct FlowSpec {
    pub family: FlowFamily,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Deserialize)]
struct RawFlowSpec {
    family: FlowFamily,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    beta: f64,
    #[serde(default)]
    gamma: f64,
}

impl TryFrom<RawFlowSpec> for FlowSpec {
    type Error = Error;

    fn try_from(r: RawFlowSpec) -> Result<Self> {
        FlowSpec::new(r.family, r.alpha, r.beta, r.gamma)
    }
}

impl FlowSpec {
    pub fn new(family: FlowFamily, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::Config(format!("non-finite flow parameters ({alpha}, {beta}, {gamma})")));
        }
        if family.is_couette() && (beta != 0.0 || gamma != 0.0) {
            return Err(Error::Config(format!("{family} takes only alpha; got beta = {beta}, gamma = {gamma}")));
        }
        if family.is_dirichlet() && gamma != 0.0 {
            return Err(Error::Config(format!("{family} takes (alpha, beta) only; got gamma = {gamma}")));
        }
        Ok(Self { family, alpha, beta, gamma })
    }

    pub fn couette(family: FlowFamily, alpha: f64) -> Result<Self> {
        Self::new(family, alpha, 0.0, 0.0)
    }

    pub fn rest(family: FlowFamily) -> Self {
        Self { family, alpha: 0.0, beta: 0.0, gamma: 0.0 }
    }

    /// Same amplitudes with every parameter multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self { alpha: t * self.alpha, beta: t * self.beta, gamma: t * self.gamma, ..*self }
    }

    /// Radial profiles at `rho`, without a domain check.
    pub fn fields_at(&self, a: &Annulus, rho: f64) -> RadialFields {
        let wall = self.family.moving_wall();
        let c = couette_jet(a, wall, rho);
        let pc = couette_pressure_jet(a, wall, rho);
        let alpha2 = self.alpha * self.alpha;
        let (u_z, slope) = if self.family.is_vorticity() {
            (vorticity_axial_jet(a, wall, self.beta, self.gamma, rho), self.gamma)
        } else {
            (poiseuille_jet(a, rho).scale(self.beta), self.beta)
        };
        RadialFields {
            u_theta: c.scale(self.alpha),
            u_z,
            p_radial: alpha2 * pc.0,
            dp_radial: alpha2 * pc.1,
            p_slope: slope,
        }
    }

    pub fn checked_fields(&self, a: &Annulus, rho: f64) -> Result<RadialFields> {
        a.check_closed(rho)?;
        Ok(self.fields_at(a, rho))
    }
}

/// Value with first and second radial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn scale(self, s: f64) -> Jet {
        Jet { value: s * self.value, d1: s * self.d1, d2: s * self.d2 }
    }

    fn add(self, o: Jet) -> Jet {
        Jet { value: self.value + o.value, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

/// Radial data of a partially-invariant flow at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialFields {
    pub u_theta: Jet,
    pub u_z: Jet,
    pub p_radial: f64,
    pub dp_radial: f64,
    /// Axial pressure slope `dp/dz`.
    pub p_slope: f64,
}

impl RadialFields {
    pub fn velocity(&self) -> CylVector {
        CylVector::new(0.0, self.u_theta.value, self.u_z.value)
    }

    pub fn pressure(&self, z: f64) -> f64 {
        self.p_radial + self.p_slope * z
    }

    /// `curl u = -u_z' e_theta + (u_theta / rho + u_theta') e_z`.
    pub fn vorticity(&self, rho: f64) -> CylVector {
        CylVector::new(0.0, -self.u_z.d1, self.u_theta.value / rho + self.u_theta.d1)
    }
}

/// Unit-amplitude Couette profile (value 1 on the moving wall, 0 on the still one).
pub fn couette_jet(a: &Annulus, moving: Wall, rho: f64) -> Jet {
    let (r1, r2) = (a.r_inner(), a.r_outer());
    let gap = a.square_gap();
    match moving {
        Wall::Inner => {
            let k = r1 / gap;
            let (r22, rho2) = (r2 * r2, rho * rho);
            Jet { value: k * (r22 / rho - rho), d1: k * (-r22 / rho2 - 1.0), d2: k * 2.0 * r22 / (rho2 * rho) }
        }
        Wall::Outer => {
            let k = r2 / gap;
            let (r12, rho2) = (r1 * r1, rho * rho);
            Jet { value: k * (rho - r12 / rho), d1: k * (1.0 + r12 / rho2), d2: -k * 2.0 * r12 / (rho2 * rho) }
        }
    }
}

/// Radial Couette pressure and its derivative (unit amplitude, additive constant zero).
pub fn couette_pressure_jet(a: &Annulus, moving: Wall, rho: f64) -> (f64, f64) {
    let (r1, r2) = (a.r_inner(), a.r_outer());
    let gap = a.square_gap();
    // moving wall contributes the prefactor, the still wall the log/inverse terms
    let (k, rs) = match moving {
        Wall::Inner => (r1 / gap, r2),
        Wall::Outer => (r2 / gap, r1),
    };
    let (k2, rs2, rho2) = (k * k, rs * rs, rho * rho);
    let value = 0.5 * k2 * (rho2 - rs2 * rs2 / rho2 - 4.0 * rs2 * rho.ln());
    let slope = k2 * (rho - rs2 / rho).powi(2) / rho;
    (value, slope)
}

pub fn couette_profile(a: &Annulus, moving: Wall, rho: f64) -> Result<f64> {
    a.check_closed(rho)?;
    Ok(couette_jet(a, moving, rho).value)
}

/// Circular Poiseuille profile, vanishing on both walls with `u'' + u'/rho = 1`.
pub fn poiseuille_jet(a: &Annulus, rho: f64) -> Jet {
    let r1 = a.r_inner();
    let c = a.square_gap() / a.log_ratio();
    Jet {
        value: 0.25 * (rho * rho - r1 * r1 - c * (rho / r1).ln()),
        d1: 0.25 * (2.0 * rho - c / rho),
        d2: 0.25 * (2.0 + c / (rho * rho)),
    }
}

pub fn poiseuille_profile(a: &Annulus, rho: f64) -> Result<f64> {
    a.check_closed(rho)?;
    Ok(poiseuille_jet(a, rho).value)
}

/// Azimuthal vorticity of the unit Poiseuille flow, `-dU/drho`, at radius `r`.
pub fn unit_poiseuille_vorticity(a: &Annulus, r: f64) -> f64 {
    0.25 * (a.square_gap() / (a.log_ratio() * r) - 2.0 * r)
}

/// Axial profile of the spiral Poiseuille-Couette flows.
///
/// With `rm`/`rs` the moving/still radii:
/// `u_z = gamma/4 (rho^2 - rs^2 - 2 rm^2 log(rho/rs)) - beta rm w(rm) log(rho/rs)`,
/// where `w` is [`unit_poiseuille_vorticity`].
pub fn vorticity_axial_jet(a: &Annulus, moving: Wall, beta: f64, gamma: f64, rho: f64) -> Jet {
    let rm = moving.radius(a);
    let rs = moving.other().radius(a);
    let rm2 = rm * rm;
    let rho2 = rho * rho;
    let log = (rho / rs).ln();
    let pressure_part =
        Jet { value: rho2 - rs * rs - 2.0 * rm2 * log, d1: 2.0 * rho - 2.0 * rm2 / rho, d2: 2.0 + 2.0 * rm2 / rho2 }
            .scale(0.25 * gamma);
    let sliding = beta * rm * unit_poiseuille_vorticity(a, rm);
    let sliding_part = Jet { value: log, d1: 1.0 / rho, d2: -1.0 / rho2 }.scale(-sliding);
    pressure_part.add(sliding_part)
}

pub fn velocity(spec: &FlowSpec, a: &Annulus, p: &CylPoint) -> Result<CylVector> {
    Ok(spec.checked_fields(a, p.rho)?.velocity())
}

pub fn pressure(spec: &FlowSpec, a: &Annulus, p: &CylPoint) -> Result<f64> {
    Ok(spec.checked_fields(a, p.rho)?.pressure(p.z))
}

pub fn vorticity(spec: &FlowSpec, a: &Annulus, p: &CylPoint) -> Result<CylVector> {
    Ok(spec.checked_fields(a, p.rho)?.vorticity(p.rho))
}

/// Wall vorticity data `omega_{alpha,beta}` prescribed on the moving wall of a
/// vorticity family: the curl of the no-slip spiral flow with the same
/// `(alpha, beta)`, evaluated on that wall.
pub fn wall_vorticity_data(spec: &FlowSpec, a: &Annulus) -> CylVector {
    let counterpart =
        FlowSpec { family: spec.family.dirichlet_counterpart(), alpha: spec.alpha, beta: spec.beta, gamma: 0.0 };
    let r = spec.family.moving_wall().radius(a);
    counterpart.fields_at(a, r).vorticity(r)
}
