//! Energy-method stability certificates.
//!
//! A steady finite-energy perturbation `v` of a family flow satisfies
//! `|grad v|^2 (or |curl v|^2) = -int rho v^T A(rho) v`, where `A(rho)` is a
//! symmetric matrix with zero diagonal built from the radial profiles. Its top
//! eigenvalue `Upsilon(rho)` bounds the quadratic form, and the magnitude
//! constant `M = max Upsilon` certifies stability whenever it is below a
//! Poincare-type constant of the perturbation space.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::flows::{FlowFamily, FlowSpec, Wall};
use crate::functional_bounds::bound_set;
use crate::geometry::Annulus;
use crate::optimize::{maximize, DEFAULT_GRID, DEFAULT_XTOL};

/// Off-diagonal entries of `A(rho)`; the matrix is
/// `[[0, a12, a13], [a12, 0, 0], [a13, 0, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationMatrix {
    pub rho: f64,
    /// `(u_theta / rho - u_theta') / 2`.
    pub a12: f64,
    /// `-u_z' / 2`.
    pub a13: f64,
}

impl PerturbationMatrix {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(0.0, self.a12, self.a13, self.a12, 0.0, 0.0, self.a13, 0.0, 0.0)
    }

    /// Largest eigenvalue, `sqrt(a12^2 + a13^2)`.
    pub fn upsilon(&self) -> f64 {
        self.a12.hypot(self.a13)
    }

    /// Largest eigenvalue from a numerical symmetric eigensolve.
    pub fn upsilon_numeric(&self) -> f64 {
        SymmetricEigen::new(self.matrix()).eigenvalues.max()
    }
}

fn matrix_at(spec: &FlowSpec, a: &Annulus, rho: f64) -> PerturbationMatrix {
    let f = spec.fields_at(a, rho);
    PerturbationMatrix { rho, a12: 0.5 * (f.u_theta.value / rho - f.u_theta.d1), a13: -0.5 * f.u_z.d1 }
}

pub fn perturbation_matrix(spec: &FlowSpec, a: &Annulus, rho: f64) -> Result<PerturbationMatrix> {
    a.check_closed(rho)?;
    Ok(matrix_at(spec, a, rho))
}

const EIGEN_AGREEMENT: f64 = 1e-10;

/// `Upsilon(rho)`, computed in closed form and by eigensolve; the two must agree.
pub fn upsilon(spec: &FlowSpec, a: &Annulus, rho: f64) -> Result<f64> {
    let m = perturbation_matrix(spec, a, rho)?;
    let closed = m.upsilon();
    let numeric = m.upsilon_numeric();
    if (closed - numeric).abs() > EIGEN_AGREEMENT * closed.max(1.0) {
        return Err(Error::Consistency(format!(
            "top eigenvalue {numeric} disagrees with closed form {closed} at rho = {rho}"
        )));
    }
    Ok(closed)
}

/// `h(rho) = rho - (R2^2 - R1^2) / (rho log(R2^2/R1^2))`, which equals `2 U_P'(rho)`.
pub fn h_function(a: &Annulus, rho: f64) -> f64 {
    rho - a.square_gap() / (2.0 * a.log_ratio() * rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeConstant {
    pub m_value: f64,
    pub argmax_rho: f64,
}

/// Closed form of `max Upsilon` for the no-slip families, attained on the inner wall.
pub fn dirichlet_magnitude(spec: &FlowSpec, a: &Annulus) -> f64 {
    let (r1, r2) = (a.r_inner(), a.r_outer());
    let gap = a.square_gap();
    let swirl = match spec.family.moving_wall() {
        Wall::Inner => r2 * r2 / (gap * r1),
        Wall::Outer => r2 / gap,
    };
    let shear = 0.25 * h_function(a, r1);
    (spec.alpha * swirl).hypot(spec.beta * shear)
}

/// Magnitude constant `M = max_{[R1,R2]} Upsilon` and a maximiser.
///
/// For no-slip families the closed form at `R1` is returned after checking
/// that a grid-plus-golden-section search finds nothing larger; vorticity
/// families are maximised numerically.
pub fn m_constant(spec: &FlowSpec, a: &Annulus) -> Result<MagnitudeConstant> {
    m_constant_with(spec, a, Execution::default())
}

pub fn m_constant_with(spec: &FlowSpec, a: &Annulus, exec: Execution) -> Result<MagnitudeConstant> {
    let (r1, r2) = (a.r_inner(), a.r_outer());
    let found = maximize(|rho| matrix_at(spec, a, rho).upsilon(), r1, r2, DEFAULT_GRID, DEFAULT_XTOL, exec)?;
    // cross-check the closed-form eigenvalue at the maximiser
    let checked = upsilon(spec, a, found.x)?;
    if spec.family.is_dirichlet() {
        let closed = dirichlet_magnitude(spec, a);
        if checked > closed * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Consistency(format!(
                "Upsilon({}) = {checked} exceeds its inner-wall value {closed}",
                found.x
            )));
        }
        return Ok(MagnitudeConstant { m_value: closed, argmax_rho: r1 });
    }
    Ok(MagnitudeConstant { m_value: checked, argmax_rho: found.x })
}

/// Largest `(|alpha|, |beta|)` certified on the axes for the inner-rotating
/// no-slip family: `Lambda / sqrt(Phi1)` and `4 Lambda / sqrt(Phi2)` with the best computable lower bound.
pub fn dirichlet_axis_thresholds(a: &Annulus) -> (f64, f64) {
    let lam = bound_set(a).lower_best;
    let (r1, r2) = (a.r_inner(), a.r_outer());
    let alpha = lam * a.square_gap() * r1 / (r2 * r2);
    let beta = 4.0 * lam / h_function(a, r1).abs();
    (alpha, beta)
}

/// Stability statement being certified, named by the still wall and boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// No-slip walls, inner cylinder rotating.
    NoSlipStillOuter,
    /// No-slip walls, outer cylinder rotating.
    NoSlipStillInner,
    /// Vorticity data on the rotating outer wall.
    VorticityStillInner,
    /// Vorticity data on the rotating inner wall, thin annulus `R2/R1 < e`.
    VorticityThinAnnulus,
    /// Vorticity data on the rotating inner wall, perturbations periodic in `z`.
    VorticityPeriodic,
}

impl Theorem {
    pub fn default_for(family: FlowFamily) -> Theorem {
        match family {
            FlowFamily::CouetteInnerRotating | FlowFamily::SpiralPoiseuilleInnerRotating => Theorem::NoSlipStillOuter,
            FlowFamily::CouetteOuterRotating | FlowFamily::SpiralPoiseuilleOuterRotating => Theorem::NoSlipStillInner,
            FlowFamily::SpiralPcVorticityOnOuter => Theorem::VorticityStillInner,
            FlowFamily::SpiralPcVorticityOnInner => Theorem::VorticityThinAnnulus,
        }
    }

    pub fn covers(self, family: FlowFamily) -> bool {
        match self {
            Theorem::VorticityPeriodic => family == FlowFamily::SpiralPcVorticityOnInner,
            t => t == Theorem::default_for(family),
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "no_slip_still_outer" => Theorem::NoSlipStillOuter,
            "no_slip_still_inner" => Theorem::NoSlipStillInner,
            "vorticity_still_inner" => Theorem::VorticityStillInner,
            "vorticity_thin_annulus" => Theorem::VorticityThinAnnulus,
            "vorticity_periodic" => Theorem::VorticityPeriodic,
            _ => return Err(Error::Config(format!("unknown theorem tag '{s}'"))),
        })
    }
}

/// Where the Poincare-type constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// The computable lower bound matching the theorem.
    ComputedLower,
    /// A caller-supplied value of the constant itself.
    UserValue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub spec: FlowSpec,
    pub theorem_tag: Theorem,
    pub m_value: f64,
    pub argmax_rho: f64,
    /// `None` when the theorem's hypotheses fail for this annulus.
    pub lambda_lower: Option<f64>,
    pub bound_source: BoundSource,
    pub applicable: bool,
    /// `m_value < lambda_lower`; never a claim of instability.
    pub certified: bool,
}

pub fn certify(spec: &FlowSpec, a: &Annulus, source: BoundSource) -> Result<StabilityReport> {
    certify_with(spec, a, Theorem::default_for(spec.family), source, Execution::default())
}

pub fn certify_with(
    spec: &FlowSpec,
    a: &Annulus,
    theorem: Theorem,
    source: BoundSource,
    exec: Execution,
) -> Result<StabilityReport> {
    if !theorem.covers(spec.family) {
        return Err(Error::Config(format!("theorem {theorem:?} does not cover {}", spec.family)));
    }
    if let BoundSource::UserValue(v) = source {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("user-supplied constant must be positive, got {v}")));
        }
    }
    let applicable = theorem != Theorem::VorticityThinAnnulus || a.log_ratio() < 1.0;
    let lambda = match (source, theorem) {
        (BoundSource::UserValue(v), _) => v,
        (BoundSource::ComputedLower, Theorem::VorticityPeriodic) => {
            return Err(Error::Config("periodic certificate needs a user-supplied constant".into()))
        }
        (BoundSource::ComputedLower, t) => computed_lower_bound(a, t),
    };
    let m = m_constant_with(spec, a, exec)?;
    let lambda_lower = applicable.then_some(lambda);
    Ok(StabilityReport {
        spec: *spec,
        theorem_tag: theorem,
        m_value: m.m_value,
        argmax_rho: m.argmax_rho,
        lambda_lower,
        bound_source: source,
        applicable,
        certified: applicable && m.m_value < lambda,
    })
}

/// Computable lower bound for the constant in each theorem.
///
/// No-slip perturbations vanish on both walls; the vorticity spaces vanish on
/// one wall only, so the one-wall radial bound applies there, multiplied by
/// `1 - log(R2/R1)` for the thin-annulus chain.
pub fn computed_lower_bound(a: &Annulus, theorem: Theorem) -> f64 {
    let b = bound_set(a);
    match theorem {
        Theorem::NoSlipStillOuter | Theorem::NoSlipStillInner => b.lower_best,
        Theorem::VorticityStillInner => b.lower_one_wall,
        Theorem::VorticityThinAnnulus => b.curl_factor * b.lower_one_wall,
        Theorem::VorticityPeriodic => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn unit() -> Annulus {
        Annulus::new(1.0, 2.0).unwrap()
    }

    fn spec(f: FlowFamily, a: f64, b: f64, g: f64) -> FlowSpec {
        FlowSpec::new(f, a, b, g).unwrap()
    }

    /// The magnitude bracket as printed for the vorticity families, written out independently.
    fn printed_vorticity_upsilon(s: &FlowSpec, a: &Annulus, rho: f64) -> f64 {
        let (r1, r2) = (a.r_inner(), a.r_outer());
        let gap = r2 * r2 - r1 * r1;
        let (rm, swirl) = match s.family {
            FlowFamily::SpiralPcVorticityOnInner => {
                (r1, s.alpha.powi(2) * r1.powi(2) * r2.powi(4) / (gap.powi(2) * rho.powi(4)))
            }
            _ => (r2, s.alpha.powi(2) * r1.powi(4) * r2.powi(2) / (gap.powi(2) * rho.powi(4))),
        };
        let shear =
            ((s.beta - s.gamma) / 4.0 * rm * rm - s.beta / 8.0 * gap / (r2 / r1).ln()) / rho + rho * s.gamma / 4.0;
        (swirl + shear * shear).sqrt()
    }

    #[test]
    fn matrix_examples() {
        let a = unit();
        let m = perturbation_matrix(&FlowSpec::rest(FlowFamily::SpiralPcVorticityOnInner), &a, 1.5).unwrap();
        assert_eq!(m.matrix(), Matrix3::zeros());
        let s = spec(FlowFamily::SpiralPoiseuilleInnerRotating, 1.0, 0.0, 0.0);
        let m = perturbation_matrix(&s, &a, 1.0).unwrap();
        assert!((m.a12 - 4.0 / 3.0).abs() < 1e-15);
        assert!(perturbation_matrix(&s, &a, 2.1).is_err());
    }

    #[test]
    fn upsilon_examples() {
        let a = unit();
        let s = spec(FlowFamily::SpiralPoiseuilleInnerRotating, 1.0, 0.0, 0.0);
        assert!((upsilon(&s, &a, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        for f in FlowFamily::ALL {
            assert_eq!(upsilon(&FlowSpec::rest(f), &a, 1.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn h_function_examples() {
        let a = unit();
        let (h1, h2) = (h_function(&a, 1.0), h_function(&a, 2.0));
        assert!((h1 + 1.16404).abs() < 1e-5);
        assert!((h2 - 0.91798).abs() < 1e-5);
        assert!(h1 < 0.0 && 0.0 < h2 && h2 < h1.abs());
        let n = 200;
        let step = 1.0 / (n - 1) as f64;
        let h: Vec<f64> = (0..n).map(|i| h_function(&a, 1.0 + i as f64 * step)).collect();
        // h'' = -2 (R2^2 - R1^2) / (log(R2^2/R1^2) rho^3) < 0; |h| still peaks at R1 since h' > 0
        for i in 1..n - 1 {
            assert!(h[i + 1] - 2.0 * h[i] + h[i - 1] < 0.0);
            assert!(h[i] > h[i - 1]);
            assert!(h[i].abs() < h1.abs());
        }
    }

    #[test]
    fn magnitude_examples() {
        let a = unit();
        let m = m_constant(&spec(FlowFamily::SpiralPoiseuilleInnerRotating, 1.0, 0.0, 0.0), &a).unwrap();
        assert!((m.m_value - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.argmax_rho, 1.0);

        let m = m_constant(&spec(FlowFamily::SpiralPcVorticityOnOuter, 1.0, 0.0, 0.0), &a).unwrap();
        assert!((m.m_value - 2.0 / 3.0).abs() < 1e-12);
        let m = m_constant(&spec(FlowFamily::SpiralPcVorticityOnInner, -3.0, 0.0, 0.0), &a).unwrap();
        assert!((m.m_value - 3.0 * 4.0 / 3.0).abs() < 1e-12);

        for f in FlowFamily::ALL {
            assert_eq!(m_constant(&FlowSpec::rest(f), &a).unwrap().m_value, 0.0);
        }
    }

    #[test]
    fn vorticity_magnitude_matches_printed_bracket() {
        let a = Annulus::new(1.0, 2.5).unwrap();
        for (f, al, be, ga) in [
            (FlowFamily::SpiralPcVorticityOnInner, 0.7, 2.0, -3.0),
            (FlowFamily::SpiralPcVorticityOnOuter, -1.2, 0.4, 5.0),
            (FlowFamily::SpiralPcVorticityOnOuter, 0.0, 0.0, 1.0),
        ] {
            let s = spec(f, al, be, ga);
            let m = m_constant(&s, &a).unwrap();
            let brute = (0..=20_000)
                .map(|i| printed_vorticity_upsilon(&s, &a, 1.0 + 1.5 * i as f64 / 20_000.0))
                .fold(0.0f64, f64::max);
            assert!(m.m_value >= brute * (1.0 - 1e-12));
            assert!(m.m_value <= brute * (1.0 + 1e-6), "{} vs {brute}", m.m_value);
            let at = printed_vorticity_upsilon(&s, &a, m.argmax_rho);
            assert!((at - m.m_value).abs() < 1e-12 * m.m_value);
        }
    }

    #[test]
    fn certify_examples() {
        let a = unit();
        let r =
            certify(&spec(FlowFamily::SpiralPoiseuilleInnerRotating, 0.1, 0.0, 0.0), &a, BoundSource::ComputedLower)
                .unwrap();
        assert!((r.m_value - 2.0 / 15.0).abs() < 1e-14);
        assert!((r.lambda_lower.unwrap() - 3.847187).abs() < 1e-6);
        assert!(r.certified && r.applicable);
        assert_eq!(r.theorem_tag, Theorem::NoSlipStillOuter);

        let r =
            certify(&spec(FlowFamily::SpiralPoiseuilleInnerRotating, 5.0, 0.0, 0.0), &a, BoundSource::ComputedLower)
                .unwrap();
        assert!(!r.certified);

        let wide = Annulus::new(1.0, 3.0).unwrap();
        let r = certify(&spec(FlowFamily::SpiralPcVorticityOnInner, 0.01, 0.0, 0.0), &wide, BoundSource::ComputedLower)
            .unwrap();
        assert!(!r.applicable && !r.certified && r.lambda_lower.is_none());

        let s = spec(FlowFamily::SpiralPcVorticityOnInner, 0.01, 0.0, 0.0);
        assert!(certify_with(&s, &a, Theorem::VorticityPeriodic, BoundSource::ComputedLower, Execution::Sequential)
            .is_err());
        let r = certify_with(&s, &wide, Theorem::VorticityPeriodic, BoundSource::UserValue(1.0), Execution::Sequential)
            .unwrap();
        assert!(r.applicable && r.certified);
        assert!(
            certify_with(&s, &a, Theorem::NoSlipStillOuter, BoundSource::ComputedLower, Execution::Sequential).is_err()
        );
        assert!(certify(&s, &a, BoundSource::UserValue(-1.0)).is_err());
        assert!("no_such_theorem".parse::<Theorem>().is_err());
        assert_eq!("vorticity_periodic".parse::<Theorem>().unwrap(), Theorem::VorticityPeriodic);
    }

    #[test]
    fn angular_velocity_conditions_coincide() {
        // with w_i = alpha / R_i both no-slip conditions read |w| < (1 - R1^2/R2^2) Lambda
        let a = Annulus::new(0.8, 1.7).unwrap();
        let (r1, r2) = (a.r_inner(), a.r_outer());
        let lam = 2.345;
        let factor = (1.0 - r1 * r1 / (r2 * r2)) * lam;
        for w in [0.3, 0.9 * factor, 1.1 * factor] {
            let inner = m_constant(&spec(FlowFamily::CouetteInnerRotating, w * r1, 0.0, 0.0), &a).unwrap().m_value;
            let outer = m_constant(&spec(FlowFamily::CouetteOuterRotating, w * r2, 0.0, 0.0), &a).unwrap().m_value;
            assert!((inner - outer).abs() < 1e-12 * inner);
            assert_eq!(inner < lam, w < factor);
        }
    }

    #[test]
    fn axis_thresholds_invert_the_condition() {
        let a = unit();
        let (alpha, beta) = dirichlet_axis_thresholds(&a);
        assert!((alpha - 2.88539).abs() < 1e-5);
        let m = m_constant(&spec(FlowFamily::SpiralPoiseuilleInnerRotating, 0.0, beta, 0.0), &a).unwrap();
        assert!((m.m_value - bound_set(&a).lower_best).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn quadratic_form_is_bounded_by_upsilon(fi in 0usize..6, alpha in -10.0f64..10.0, beta in -10.0f64..10.0,
                                                gamma in -10.0f64..10.0, s in 0.0f64..1.0,
                                                v in proptest::array::uniform3(-1.0f64..1.0)) {
            let f = FlowFamily::ALL[fi];
            let (b, g) = match (f.is_couette(), f.is_vorticity()) {
                (true, _) => (0.0, 0.0),
                (false, false) => (beta, 0.0),
                _ => (beta, gamma),
            };
            let sp = spec(f, alpha, b, g);
            let a = Annulus::new(1.0, 3.0).unwrap();
            let m = perturbation_matrix(&sp, &a, 1.0 + 2.0 * s).unwrap();
            let mat = m.matrix();
            prop_assert_eq!(mat, mat.transpose());
            let ups = upsilon(&sp, &a, m.rho).unwrap();
            let v = Vector3::from(v);
            prop_assert!(v.dot(&(mat * v)) <= ups * v.norm_squared() * (1.0 + 1e-12) + 1e-300);
            let eig = SymmetricEigen::new(mat);
            let (imax, _) = eig.eigenvalues.argmax();
            let top = eig.eigenvectors.column(imax).into_owned();
            prop_assert!((top.dot(&(mat * top)) - ups).abs() <= 1e-10 * ups.max(1.0));
            prop_assert!((mat.norm() / std::f64::consts::SQRT_2 - ups).abs() <= 1e-12 * ups.max(1.0));
        }

        #[test]
        fn dirichlet_maximiser_is_the_inner_wall(fi in 0usize..4, alpha in -10.0f64..10.0, beta in -10.0f64..10.0,
                                                 r1 in 0.1f64..5.0, ratio in 1.01f64..20.0) {
            let f = FlowFamily::ALL[fi];
            let b = if f.is_couette() { 0.0 } else { beta };
            let sp = spec(f, alpha, b, 0.0);
            let a = Annulus::new(r1, r1 * ratio).unwrap();
            let found = maximize(|rho| matrix_at(&sp, &a, rho).upsilon(), a.r_inner(), a.r_outer(), DEFAULT_GRID, DEFAULT_XTOL, Execution::Sequential).unwrap();
            let closed = dirichlet_magnitude(&sp, &a);
            prop_assert!(found.value <= closed * (1.0 + 1e-12));
            prop_assert!((found.x - a.r_inner()).abs() <= 1e-8 * a.width(), "argmax {}", found.x);
        }

        #[test]
        fn dirichlet_magnitude_is_homogeneous(fi in 2usize..4, alpha in -10.0f64..10.0, beta in -10.0f64..10.0, t in -5.0f64..5.0) {
            let f = FlowFamily::ALL[fi];
            let a = unit();
            let m = m_constant(&spec(f, alpha, beta, 0.0), &a).unwrap().m_value;
            let mt = m_constant(&spec(f, t * alpha, t * beta, 0.0), &a).unwrap().m_value;
            prop_assert!((mt - t.abs() * m).abs() <= 1e-12 * mt.max(1e-300));
        }
    }
}
