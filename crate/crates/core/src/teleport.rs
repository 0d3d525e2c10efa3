//! Single-macronode algebra: generalized teleportation matrices, the four-angle
//! macronode map, and angle solvers for the roles used by the compiler.
//!
//! Two-mode maps use the ordering `(x_B, x_D, p_B, p_D)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, SQRT_2};

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Arm, Error, Result};
use crate::gaussian::rot2;

/// Pairs with `|sin(theta_b - theta_a)|` below this value demolish the input.
pub const SINGULARITY_THRESHOLD: f64 = 1e-9;

/// Homodyne angles `(theta_b, theta_a)` of one teleportation arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPair {
    pub theta_b: f64,
    pub theta_a: f64,
}

impl MeasurementPair {
    pub fn new(theta_b: f64, theta_a: f64) -> Self {
        Self { theta_b, theta_a }
    }

    /// The pair `(pi/2, 0)`, which teleports without transformation.
    pub fn identity() -> Self {
        Self::new(FRAC_PI_2, 0.0)
    }

    /// The same arm with the two angles exchanged.
    pub fn flipped(self) -> Self {
        Self::new(self.theta_a, self.theta_b)
    }

    fn checked_sin(&self, arm: Arm) -> Result<f64> {
        if !self.theta_a.is_finite() || !self.theta_b.is_finite() {
            return Err(Error::NonFinite("measurement angles"));
        }
        let sin = (self.theta_b - self.theta_a).sin();
        if sin.abs() < SINGULARITY_THRESHOLD {
            return Err(Error::SingularBasis { arm, sin });
        }
        Ok(sin)
    }
}

/// Homodyne angles of the micronodes `a, b, c, d` of one macronode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacronodeAngles {
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_c: f64,
    pub theta_d: f64,
}

impl MacronodeAngles {
    pub fn from_pairs(b_arm: MeasurementPair, d_arm: MeasurementPair) -> Self {
        Self {
            theta_a: b_arm.theta_a,
            theta_b: b_arm.theta_b,
            theta_c: d_arm.theta_a,
            theta_d: d_arm.theta_b,
        }
    }

    /// Angles listed as `[theta_a, theta_b, theta_c, theta_d]`.
    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            theta_a: a[0],
            theta_b: a[1],
            theta_c: a[2],
            theta_d: a[3],
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.theta_a, self.theta_b, self.theta_c, self.theta_d]
    }

    pub fn identity() -> Self {
        Self::from_pairs(MeasurementPair::identity(), MeasurementPair::identity())
    }

    pub fn b_arm(&self) -> MeasurementPair {
        MeasurementPair::new(self.theta_b, self.theta_a)
    }

    pub fn d_arm(&self) -> MeasurementPair {
        MeasurementPair::new(self.theta_d, self.theta_c)
    }

    pub fn validate(&self) -> Result<()> {
        self.b_arm().checked_sin(Arm::B)?;
        self.d_arm().checked_sin(Arm::D)?;
        Ok(())
    }
}

/// A 4x4 real map over `(x_B, x_D, p_B, p_D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeMap {
    m: Matrix4<f64>,
}

impl TwoModeMap {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn symplectic_deviation(&self) -> f64 {
        let w = Matrix4::new(
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, -1.0, 0.0, 0.0,
        );
        (self.m.transpose() * w * self.m - w).abs().max()
    }
}

fn v_matrix_arm(pair: MeasurementPair, arm: Arm) -> Result<Matrix2<f64>> {
    let sin = pair.checked_sin(arm)?;
    let (sb, cb) = pair.theta_b.sin_cos();
    let (sa, ca) = pair.theta_a.sin_cos();
    let left = Matrix2::new(cb, ca, sb, sa);
    let right = Matrix2::new(sa, ca, sb, cb);
    Ok(left * right / sin)
}

/// Teleportation matrix `V(theta_b, theta_a)` acting on `(x, p)`.
pub fn v_matrix(pair: MeasurementPair) -> Result<Matrix2<f64>> {
    v_matrix_arm(pair, Arm::B)
}

/// Returns `(theta_plus, tan(theta_minus))` with
/// `V = R(theta_plus - pi/2) S(tan theta_minus) R(theta_plus)` and `S(xi) = diag(xi, 1/xi)`.
pub fn v_decompose(pair: MeasurementPair) -> Result<(f64, f64)> {
    pair.checked_sin(Arm::B)?;
    let plus = 0.5 * (pair.theta_b + pair.theta_a);
    let minus = 0.5 * (pair.theta_b - pair.theta_a);
    Ok((plus, minus.tan()))
}

/// Rebuilds `V` from the output of [`v_decompose`].
pub fn v_recompose(theta_plus: f64, squeeze_arg: f64) -> Matrix2<f64> {
    let s = Matrix2::new(squeeze_arg, 0.0, 0.0, 1.0 / squeeze_arg);
    rot2(theta_plus - FRAC_PI_2) * s * rot2(theta_plus)
}

/// Half beamsplitter of the macronode, `(1/sqrt 2)[[1, -1], [1, 1]]` on both blocks.
fn half_bs() -> Matrix4<f64> {
    let h = FRAC_1_SQRT_2;
    Matrix4::new(
        h, -h, 0.0, 0.0, //
        h, h, 0.0, 0.0, //
        0.0, 0.0, h, -h, //
        0.0, 0.0, h, h,
    )
}

fn arm_sum(vb: &Matrix2<f64>, vd: &Matrix2<f64>) -> Matrix4<f64> {
    Matrix4::new(
        vb[(0, 0)], 0.0, vb[(0, 1)], 0.0, //
        0.0, vd[(0, 0)], 0.0, vd[(0, 1)], //
        vb[(1, 0)], 0.0, vb[(1, 1)], 0.0, //
        0.0, vd[(1, 0)], 0.0, vd[(1, 1)],
    )
}

/// The macronode map `B^dag (V_B + V_D) B` for the given homodyne angles.
pub fn macronode_map(angles: &MacronodeAngles) -> Result<TwoModeMap> {
    let vb = v_matrix_arm(angles.b_arm(), Arm::B)?;
    let vd = v_matrix_arm(angles.d_arm(), Arm::D)?;
    let bs = half_bs();
    Ok(TwoModeMap {
        m: bs.transpose() * arm_sum(&vb, &vd) * bs,
    })
}

/// Measurement-outcome term of one arm: maps outcomes `(m_a, m_b)` onto the arm's `(x, p)`.
/// Feedforward adds the negative of this term.
pub fn outcome_term(pair: MeasurementPair) -> Result<Matrix2<f64>> {
    let sin = pair.checked_sin(Arm::B)?;
    let (sb, cb) = pair.theta_b.sin_cos();
    let (sa, ca) = pair.theta_a.sin_cos();
    Ok(Matrix2::new(cb, ca, sb, sa) * (-SQRT_2 / sin))
}

/// Feedforward for a whole macronode: maps outcomes `(m_a, m_b, m_c, m_d)` to the
/// displacement of the outputs `(x_B, x_D, p_B, p_D)`.
pub fn feedforward_matrix(angles: &MacronodeAngles) -> Result<nalgebra::Matrix4<f64>> {
    let fb = -outcome_term(angles.b_arm()).map_err(|_| singular(angles.b_arm(), Arm::B))?;
    let fd = -outcome_term(angles.d_arm()).map_err(|_| singular(angles.d_arm(), Arm::D))?;
    // Columns follow the outcome order (a, b, c, d); rows the arm quadratures (x_B, x_D, p_B, p_D).
    let arms = Matrix4::new(
        fb[(0, 0)], fb[(0, 1)], 0.0, 0.0, //
        0.0, 0.0, fd[(0, 0)], fd[(0, 1)], //
        fb[(1, 0)], fb[(1, 1)], 0.0, 0.0, //
        0.0, 0.0, fd[(1, 0)], fd[(1, 1)],
    );
    Ok(half_bs().transpose() * arms)
}

fn singular(pair: MeasurementPair, arm: Arm) -> Error {
    Error::SingularBasis {
        arm,
        sin: (pair.theta_b - pair.theta_a).sin(),
    }
}

/// Angles realizing `e^{i phi} [[cos tau, i sin tau], [i sin tau, cos tau]]` on `(B, D)`.
pub fn angles_for_beamsplitter(tau: f64, phi: f64) -> MacronodeAngles {
    let t1 = 0.5 * (phi - tau);
    let t2 = 0.5 * (phi + tau);
    MacronodeAngles::from_pairs(
        MeasurementPair::new(t1 + FRAC_PI_2, t1),
        MeasurementPair::new(t2 + FRAC_PI_2, t2),
    )
}

/// Angles for a common phase rotation `R(phi)` on both modes.
pub fn angles_for_phase(phi: f64) -> MacronodeAngles {
    angles_for_beamsplitter(0.0, phi)
}

/// Angles exchanging the destinations of the two arms; the B arm pair is flipped,
/// which multiplies the macronode map by the output exchange.
pub fn angles_for_swap(inner_b: MeasurementPair, inner_d: MeasurementPair) -> Result<MacronodeAngles> {
    inner_b.checked_sin(Arm::B)?;
    inner_d.checked_sin(Arm::D)?;
    Ok(MacronodeAngles::from_pairs(inner_b.flipped(), inner_d))
}

/// Exchanges the B arm angles of an existing macronode.
pub fn swapped(angles: &MacronodeAngles) -> MacronodeAngles {
    MacronodeAngles::from_pairs(angles.b_arm().flipped(), angles.d_arm())
}

/// Angles for the two-mode shear with x-block identity and p-x block `[[kappa, lambda], [lambda, kappa]]`.
pub fn angles_for_shear_pair(kappa: f64, lambda: f64) -> MacronodeAngles {
    MacronodeAngles::from_pairs(
        MeasurementPair::new(FRAC_PI_2, (0.5 * (kappa - lambda)).atan()),
        MeasurementPair::new(FRAC_PI_2, (0.5 * (kappa + lambda)).atan()),
    )
}

/// Arm angles for a single-mode shear: `[[1, 0], [kappa, 1]]` when x is invariant,
/// `[[1, -kappa], [0, 1]]` otherwise.
pub fn angles_for_single_shear(kappa: f64, x_invariant: bool) -> MeasurementPair {
    let theta = (0.5 * kappa).atan();
    if x_invariant {
        MeasurementPair::new(FRAC_PI_2, theta)
    } else {
        MeasurementPair::new(theta + FRAC_PI_2, 0.0)
    }
}

/// Arm angles `(theta + pi/2, -theta)` realizing `R(-pi/4) S(r) R(pi/4)`.
pub fn angles_for_squeeze(r: f64) -> Result<MeasurementPair> {
    if !r.is_finite() {
        return Err(Error::NonFinite("squeeze parameter"));
    }
    let theta = r.exp().atan() - FRAC_PI_4;
    let pair = MeasurementPair::new(theta + FRAC_PI_2, -theta);
    pair.checked_sin(Arm::B)?;
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{squeeze2, unitary_to_symplectic, CMatrix, ComplexUnitary};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn close2(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn identity_pair_is_identity() {
        let v = v_matrix(MeasurementPair::identity()).unwrap();
        assert!(close2(&v, &Matrix2::identity()) <= f64::EPSILON);
    }

    #[test]
    fn shear_pairs() {
        let t: f64 = 0.37;
        let v = v_matrix(MeasurementPair::new(FRAC_PI_2, t)).unwrap();
        assert!(close2(&v, &Matrix2::new(1.0, 0.0, 2.0 * t.tan(), 1.0)) < 1e-14);
        let v = v_matrix(MeasurementPair::new(t + FRAC_PI_2, 0.0)).unwrap();
        assert!(close2(&v, &Matrix2::new(1.0, -2.0 * t.tan(), 0.0, 1.0)) < 1e-14);
    }

    #[test]
    fn singular_pair_rejected() {
        assert!(matches!(
            v_matrix(MeasurementPair::new(0.3, 0.3)),
            Err(Error::SingularBasis { .. })
        ));
        assert!(matches!(
            v_matrix(MeasurementPair::new(0.3 + PI, 0.3)),
            Err(Error::SingularBasis { .. })
        ));
        let bad = MacronodeAngles::from_pairs(MeasurementPair::identity(), MeasurementPair::new(1.0, 1.0));
        assert!(matches!(
            macronode_map(&bad),
            Err(Error::SingularBasis { arm: Arm::D, .. })
        ));
    }

    #[test]
    fn decompose_identity_pair() {
        let (plus, xi) = v_decompose(MeasurementPair::identity()).unwrap();
        assert!((plus - FRAC_PI_4).abs() < 1e-15);
        assert!((xi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squeeze_family_matrix() {
        let theta = 0.21;
        let pair = MeasurementPair::new(theta + FRAC_PI_2, -theta);
        let minus = 0.5 * (pair.theta_b - pair.theta_a);
        let csc = 1.0 / (2.0 * minus).sin();
        let cot = 1.0 / (2.0 * minus).tan();
        let v = v_matrix(pair).unwrap();
        assert!(close2(&v, &Matrix2::new(csc, cot, cot, csc)) < 1e-14);
    }

    #[test]
    fn squeeze_angles_realize_rotated_squeezer() {
        for r in [-1.3, -0.2, 0.0, 0.4, 2.0] {
            let v = v_matrix(angles_for_squeeze(r).unwrap()).unwrap();
            let expected = rot2(-FRAC_PI_4) * squeeze2(r) * rot2(FRAC_PI_4);
            assert!(close2(&v, &expected) < 1e-12, "r = {r}");
        }
        let zero = angles_for_squeeze(0.0).unwrap();
        assert!((zero.theta_b - FRAC_PI_2).abs() < 1e-15 && zero.theta_a.abs() < 1e-15);
    }

    #[test]
    fn identity_macronode() {
        let g = macronode_map(&MacronodeAngles::identity()).unwrap();
        assert!((g.matrix() - Matrix4::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn common_arms_give_phase_rotation() {
        let t = 0.4;
        let g = macronode_map(&MacronodeAngles::from_pairs(
            MeasurementPair::new(t + FRAC_PI_2, t),
            MeasurementPair::new(t + FRAC_PI_2, t),
        ))
        .unwrap();
        let r = rot2(2.0 * t);
        let expected = arm_sum(&r, &r);
        assert!((g.matrix() - expected).abs().max() < 1e-14);
    }

    fn two_mode_quadrature(u: [[Complex64; 2]; 2]) -> Matrix4<f64> {
        let m = CMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]);
        let s = unitary_to_symplectic(&ComplexUnitary::new(m, 1e-9).unwrap());
        Matrix4::from_fn(|r, c| s.matrix()[(r, c)])
    }

    #[test]
    fn beamsplitter_angles_match_displayed_product() {
        let (t1, t2) = (0.3, -0.8);
        let g = macronode_map(&MacronodeAngles::from_pairs(
            MeasurementPair::new(t1 + FRAC_PI_2, t1),
            MeasurementPair::new(t2 + FRAC_PI_2, t2),
        ))
        .unwrap();
        let ph = Complex64::from_polar(1.0, t1 + t2);
        let (s, c) = (t2 - t1).sin_cos();
        let i = Complex64::i();
        let u = [[ph * c, ph * i * s], [ph * i * s, ph * c]];
        assert!((g.matrix() - two_mode_quadrature(u)).abs().max() < 1e-14);
    }

    #[test]
    fn half_reflectivity_primed_beamsplitter() {
        let g = macronode_map(&angles_for_beamsplitter(FRAC_PI_4, 0.0)).unwrap();
        // B' = R_k(pi/2) B R_k(-pi/2), composed from the real-matrix factors.
        let rk = |t: f64| crate::gaussian::embed_single(&rot2(t), 1, 2);
        let b = crate::gaussian::bs_symplectic(FRAC_PI_4, 0, 1, 2).unwrap();
        let expected = rk(FRAC_PI_2) * b.matrix() * rk(-FRAC_PI_2);
        let diff = Matrix4::from_fn(|r, c| g.matrix()[(r, c)] - expected[(r, c)]);
        assert!(diff.abs().max() < 1e-14);
        assert!((macronode_map(&angles_for_beamsplitter(0.0, 0.0)).unwrap().matrix() - Matrix4::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn swap_on_identity_arms_is_exchange() {
        let a = angles_for_swap(MeasurementPair::identity(), MeasurementPair::identity()).unwrap();
        let g = macronode_map(&a).unwrap();
        let p = Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        );
        assert!((g.matrix() - p).abs().max() < 1e-15);
        assert_eq!(swapped(&a), MacronodeAngles::identity());
    }

    #[test]
    fn swap_composes_with_exchange() {
        let ang = angles_for_beamsplitter(0.7, -0.4);
        let g = macronode_map(&ang).unwrap();
        let gs = macronode_map(&swapped(&ang)).unwrap();
        let p = Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        );
        assert!((gs.matrix() - p * g.matrix()).abs().max() < 1e-14);
    }

    #[test]
    fn shear_pair_matches_tangent_form() {
        let (ta, tc) = (0.3f64, -0.55f64);
        let g = macronode_map(&MacronodeAngles::from_pairs(
            MeasurementPair::new(FRAC_PI_2, ta),
            MeasurementPair::new(FRAC_PI_2, tc),
        ))
        .unwrap();
        let (kappa, lambda) = (tc.tan() + ta.tan(), tc.tan() - ta.tan());
        let expected = Matrix4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            kappa, lambda, 1.0, 0.0, //
            lambda, kappa, 0.0, 1.0,
        );
        assert!((g.matrix() - expected).abs().max() < 1e-14);
        let g2 = macronode_map(&angles_for_shear_pair(kappa, lambda)).unwrap();
        assert!((g2.matrix() - expected).abs().max() < 1e-14);
        let id = macronode_map(&angles_for_shear_pair(0.0, 0.0)).unwrap();
        assert!((id.matrix() - Matrix4::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn shear_pair_without_cross_term_is_two_single_shears() {
        let g = macronode_map(&angles_for_shear_pair(2.0, 0.0)).unwrap();
        let single = v_matrix(angles_for_single_shear(2.0, true)).unwrap();
        assert!((g.matrix() - arm_sum(&single, &single)).abs().max() < 1e-14);
    }

    #[test]
    fn single_shear_examples() {
        let p = angles_for_single_shear(0.0, true);
        assert_eq!(p, MeasurementPair::identity());
        let p = angles_for_single_shear(2.0, true);
        assert!((p.theta_a - FRAC_PI_4).abs() < 1e-15);
        assert!(close2(&v_matrix(p).unwrap(), &Matrix2::new(1.0, 0.0, 2.0, 1.0)) < 1e-14);
        let p = angles_for_single_shear(-2.0, false);
        assert!(close2(&v_matrix(p).unwrap(), &Matrix2::new(1.0, 2.0, 0.0, 1.0)) < 1e-14);
    }

    #[test]
    fn outcome_term_at_identity_pair() {
        let f = outcome_term(MeasurementPair::identity()).unwrap();
        assert!(close2(&f, &(Matrix2::new(0.0, 1.0, 1.0, 0.0) * -SQRT_2)) < 1e-15);
    }
}
