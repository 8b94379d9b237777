//! The Ricci-flat metric `g = V^{-1} eta^2 + V rho^2 dx3^2 + e^{2nu}(drho^2 + dz^2)`,
//! `eta = dt - F dx3`, built from a profile through the sums in [`RodSums`].
//!
//! All formulas are written with the constant `k = 2A`.

use serde::{Deserialize, Serialize};

use crate::curvature::{self, CurvatureFd, Mat4};
use crate::error::{Error, Result};
use crate::potential::{axis_h, RodSums};
use crate::profile::Profile;
use crate::serde_util::nonfinite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub rho: f64,
    pub z: f64,
    /// `+inf` on the axis over a zero-slope interval.
    #[serde(rename = "V", with = "nonfinite")]
    pub v: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub e2nu: f64,
    /// Set when the value is a numerical `rho -> 0` limit rather than a
    /// closed form.
    pub extrapolated: bool,
}

fn fields_from_sums(a: f64, rho: f64, z: f64, s: &RodSums) -> FieldSample {
    let q = s.su * s.su + rho * rho * s.s1 * s.s1;
    let p = s.p;
    FieldSample {
        rho,
        z,
        v: p / a * (s.s1 * p / q - 1.0),
        f: (p * p * s.su / q - 2.0 * a * z - s.sud) / a,
        e2nu: p / a * (s.s1 * p - q),
        extrapolated: false,
    }
}

/// `V`, `F`, `e^{2nu}` at an off-axis point.
pub fn eval_fields(profile: &Profile, rho: f64, z: f64) -> Result<FieldSample> {
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::AxisEvaluation(rho));
    }
    let s = RodSums::new(profile, rho, z);
    Ok(fields_from_sums(profile.a_const(), rho, z, &s))
}

/// The two bounded intermediate quantities
/// `(sum a u/d)^2 + (sum a rho/d)^2` (at most 1) and
/// `(sum a/d)(sum a d)` (at least 1), plus the lower bound `1 + A sum a/d`
/// for `V`.
pub fn bound_quantities(profile: &Profile, rho: f64, z: f64) -> Result<(f64, f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::AxisEvaluation(rho));
    }
    let s = RodSums::new(profile, rho, z);
    let a = profile.a_const();
    let sd = s.p - a;
    Ok((
        s.su * s.su + rho * rho * s.s1 * s.s1,
        s.s1 * sd,
        1.0 + a * s.s1,
    ))
}

/// Fields on the axis `rho = 0`.
///
/// Where `f'(z) != 0` the closed axis formulas are used. On a zero-slope
/// interval `V` blows up like `rho^{-2}`; the sample then carries
/// `V = +inf` and Richardson-extrapolated limits of `F` and `e^{2nu}`,
/// with `extrapolated` set.
pub fn eval_axis_fields(profile: &Profile, z: f64) -> Result<FieldSample> {
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    let i = profile.interval_of(z).ok_or(Error::TurningPointOnAxis(z))?;
    let fp = profile.slopes()[i];
    if fp == 0.0 {
        return zero_slope_limit(profile, z);
    }
    let a = profile.a_const();
    let f = profile.eval(z);
    let s_abs: f64 = profile.turns().iter().map(|t| t.a / (z - t.z).abs()).sum();
    let v = f / (a * fp * fp) * (f * s_abs - fp * fp);
    Ok(FieldSample {
        rho: 0.0,
        z,
        v,
        f: (f * f / fp - axis_h(profile, z)) / a,
        e2nu: fp * fp * v,
        extrapolated: false,
    })
}

fn zero_slope_limit(profile: &Profile, z: f64) -> Result<FieldSample> {
    let gap = profile
        .turns()
        .iter()
        .map(|t| (z - t.z).abs())
        .fold(f64::INFINITY, f64::min);
    let rho0 = 0.25 * gap;
    let f = richardson_limit(|rho| Ok(eval_fields(profile, rho, z)?.f), rho0)?;
    let e2nu = richardson_limit(|rho| Ok(eval_fields(profile, rho, z)?.e2nu), rho0)?;
    Ok(FieldSample {
        rho: 0.0,
        z,
        v: f64::INFINITY,
        f,
        e2nu,
        extrapolated: true,
    })
}

/// `lim_{rho -> 0} g(rho)` for `g` smooth in `rho^2`, sampling
/// `rho0 2^{-k}` for `k <= 20` and stopping once successive diagonal
/// entries of the Neville table stop improving.
pub(crate) fn richardson_limit(g: impl Fn(f64) -> Result<f64>, rho0: f64) -> Result<f64> {
    const MAX_LEVELS: usize = 20;
    let mut prev_row: Vec<f64> = vec![g(rho0)?];
    let mut best = prev_row[0];
    let mut best_diff = f64::INFINITY;
    let mut worse = 0;
    for k in 1..=MAX_LEVELS {
        let mut row = vec![g(rho0 * 0.5f64.powi(k as i32))?];
        let mut factor = 1.0;
        for j in 1..=k {
            factor *= 4.0;
            let next = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(next);
        }
        let diff = (row[k] - prev_row[k - 1]).abs();
        if diff < best_diff {
            best_diff = diff;
            best = row[k];
            worse = 0;
        } else {
            worse += 1;
        }
        if diff <= 1e-15 * row[k].abs().max(1.0) || worse >= 2 {
            break;
        }
        prev_row = row;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisData {
    /// `F` on each axis interval; `None` on zero-slope intervals, where
    /// `F(0, z)` is in general not constant.
    #[serde(rename = "F_consts")]
    pub f_consts: Vec<Option<f64>>,
    #[serde(rename = "A_from_Fr_F0")]
    pub a_from_fr_f0: f64,
    /// `F_r - F_0` from the axis values.
    pub af_defect: f64,
    /// `(2/A)(A^2 + (sum a z)^2 - sum a z^2)`.
    pub af_defect_closed_form: f64,
}

impl AxisData {
    pub fn is_af(&self, tol: f64) -> bool {
        self.af_defect.abs() <= tol
    }

    /// Largest violation of the jump laws between consecutive axis values:
    /// `A(F_i - F_{i-1}) = f_i^2 (1/f'_i - 1/f'_{i-1})`, and across a
    /// zero-slope interval `i`,
    /// `A(F_{i+1} - F_{i-1}) = f_i^2 (1/f'_{i+1} - 1/f'_{i-1}) - 2 (z_{i+1} - z_i) f_i`.
    pub fn jump_residual(&self, profile: &Profile) -> f64 {
        let a = profile.a_const();
        let s = profile.slopes();
        let fv = profile.turn_values();
        let zs: Vec<f64> = profile.turns().iter().map(|t| t.z).collect();
        let mut worst = 0.0f64;
        for i in 1..s.len() {
            let fi = fv[i - 1];
            if s[i] != 0.0 && s[i - 1] != 0.0 {
                let (Some(hi), Some(lo)) = (self.f_consts[i], self.f_consts[i - 1]) else {
                    continue;
                };
                let want = fi * fi * (1.0 / s[i] - 1.0 / s[i - 1]) / a;
                worst = worst.max((hi - lo - want).abs());
            } else if s[i] == 0.0 && i + 1 < s.len() {
                let (Some(hi), Some(lo)) = (self.f_consts[i + 1], self.f_consts[i - 1]) else {
                    continue;
                };
                let want = (fi * fi * (1.0 / s[i + 1] - 1.0 / s[i - 1])
                    - 2.0 * (zs[i] - zs[i - 1]) * fi)
                    / a;
                worst = worst.max((hi - lo - want).abs());
            }
        }
        worst
    }
}

pub fn axis_data(profile: &Profile) -> AxisData {
    let a = profile.a_const();
    let f_consts: Vec<Option<f64>> = (0..=profile.r())
        .map(|i| {
            if profile.slopes()[i] == 0.0 {
                return None;
            }
            eval_axis_fields(profile, profile.interval_midpoint(i))
                .ok()
                .map(|s| s.f)
        })
        .collect();
    let first = f_consts[0].expect("outer slope is -1");
    let last = f_consts[profile.r()].expect("outer slope is 1");
    let m1 = profile.first_moment();
    let m2 = profile.second_moment();
    let af_defect = last - first;
    let af_defect_closed_form = 2.0 / a * (a * a + m1 * m1 - m2);
    let spread = m2 - m1 * m1;
    let a_from_fr_f0 = 0.25 * (af_defect + (af_defect * af_defect + 16.0 * spread).sqrt());
    AxisData {
        f_consts,
        a_from_fr_f0,
        af_defect,
        af_defect_closed_form,
    }
}

/// The metric in coordinates `(t, x3, rho, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAtPoint {
    pub g: [[f64; 4]; 4],
}

impl MetricAtPoint {
    pub fn from_fields(s: &FieldSample) -> Self {
        let (v, f, rho) = (s.v, s.f, s.rho);
        let mut g = [[0.0; 4]; 4];
        g[0][0] = 1.0 / v;
        g[0][1] = -f / v;
        g[1][0] = -f / v;
        g[1][1] = f * f / v + v * rho * rho;
        g[2][2] = s.e2nu;
        g[3][3] = s.e2nu;
        MetricAtPoint { g }
    }

    pub fn matrix(&self) -> Mat4 {
        Mat4::from_fn(|i, j| self.g[i][j])
    }
}

pub fn metric_tensor(profile: &Profile, rho: f64, z: f64) -> Result<MetricAtPoint> {
    Ok(MetricAtPoint::from_fields(&eval_fields(profile, rho, z)?))
}

pub(crate) fn metric_matrix(profile: &Profile, rho: f64, z: f64) -> Result<Mat4> {
    Ok(metric_tensor(profile, rho, z)?.matrix())
}

/// Finite-difference curvature of the metric at `(rho, z)`.
pub fn ricci_fd(profile: &Profile, rho: f64, z: f64, h: f64) -> Result<CurvatureFd> {
    curvature::curvature_fd(|r, zz| metric_matrix(profile, r, zz), rho, z, h)
}

/// `max |Ric| / (1 + max |d^2 g|)`, with derivatives by central
/// differences plus one Richardson level.
pub fn ricci_residual(profile: &Profile, rho: f64, z: f64, h: f64) -> Result<f64> {
    let c = ricci_fd(profile, rho, z, h)?;
    Ok(c.ricci.amax() / (1.0 + c.max_second_derivative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Preset, Turn};
    use proptest::prelude::*;

    fn preset(p: Preset) -> Profile {
        p.build().unwrap().into_alf().unwrap()
    }

    fn schwarzschild() -> Profile {
        preset(Preset::Schwarzschild { m: 1.0 })
    }

    #[test]
    fn v_tends_to_one_at_infinity() {
        let p = preset(Preset::ChenTeoInstanton { p: 0.4 });
        let mut prev = f64::INFINITY;
        for k in 2..8 {
            let v = eval_fields(&p, 10f64.powi(k), 0.0).unwrap().v;
            assert!((v - 1.0).abs() < prev);
            prev = (v - 1.0).abs();
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn schwarzschild_axis_values() {
        let p = schwarzschild();
        let s = eval_axis_fields(&p, 3.0).unwrap();
        assert!((s.v - 2.0).abs() < 1e-15 && (s.e2nu - 2.0).abs() < 1e-15);
        assert!(!s.extrapolated);
        let near = eval_fields(&p, 1e-6, 3.0).unwrap();
        assert!((near.v - 2.0).abs() < 1e-10, "{}", near.v);
        // V(0, z) = (1 + z)/(z - 1)
        for z in [1.5, 2.0, 7.0] {
            let v = eval_axis_fields(&p, z).unwrap().v;
            assert!((v - (1.0 + z) / (z - 1.0)).abs() < 1e-14);
        }
    }

    /// On the zero-slope interval of unit Schwarzschild (f = 2 there),
    /// `F(0, z) = 0` and `e^{2nu}(0, z) = f^2 sum a/|u| / A`.
    #[test]
    fn schwarzschild_zero_slope_limits() {
        let p = schwarzschild();
        for z in [-0.5, 0.0, 0.3] {
            let s = eval_axis_fields(&p, z).unwrap();
            assert!(s.extrapolated && s.v == f64::INFINITY);
            let s_abs = 0.5 / (z + 1.0) + 0.5 / (1.0 - z);
            assert!(
                (s.e2nu - 4.0 * s_abs).abs() < 1e-9,
                "{} {}",
                s.e2nu,
                4.0 * s_abs
            );
            assert!(s.f.abs() < 1e-9, "{}", s.f);
        }
        let json = serde_json::to_string(&eval_axis_fields(&p, 0.0).unwrap()).unwrap();
        assert!(json.contains(r#""V":"inf""#));
    }

    /// Without the reflection symmetry, `F(0, z)` varies across a zero-slope
    /// interval and interpolates the neighbouring constants.
    #[test]
    fn zero_slope_f_not_constant() {
        let p = Profile::from_pairs(0.8, &[(-1.0, 0.5), (0.5, 0.3), (2.0, 0.2)]).unwrap();
        let d = axis_data(&p);
        let left = eval_axis_fields(&p, -1.0 + 1e-4).unwrap().f;
        let right = eval_axis_fields(&p, 0.5 - 1e-4).unwrap().f;
        assert!((left - d.f_consts[0].unwrap()).abs() < 1e-2);
        assert!((right - d.f_consts[2].unwrap()).abs() < 1e-2);
        assert!((right - left).abs() > 1.0);
    }

    #[test]
    fn axis_f_constant_on_intervals() {
        let p = preset(Preset::ChenTeoInstanton { p: 0.4 });
        for i in 0..=p.r() {
            let c = p.interval_midpoint(i);
            let (lo, hi) = match i {
                0 => (c - 3.0, c - 0.01),
                i if i == p.r() => (c + 0.01, c + 5.0),
                _ => {
                    let (a, b) = (p.turns()[i - 1].z, p.turns()[i].z);
                    (a + 0.1 * (b - a), b - 0.1 * (b - a))
                }
            };
            let f1 = eval_axis_fields(&p, lo).unwrap().f;
            let f2 = eval_axis_fields(&p, hi).unwrap().f;
            assert!((f1 - f2).abs() < 1e-10, "interval {i}: {f1} {f2}");
        }
    }

    #[test]
    fn bulk_converges_to_axis() {
        let p = Profile::from_pairs(0.7, &[(-1.0, 0.3), (0.2, 0.3), (1.5, 0.4)]).unwrap();
        for z in [-2.0, -0.3, 0.9, 3.0] {
            let axis = eval_axis_fields(&p, z).unwrap();
            let near = eval_fields(&p, 1e-5, z).unwrap();
            for (x, y) in [(axis.v, near.v), (axis.f, near.f), (axis.e2nu, near.e2nu)] {
                assert!((x - y).abs() < 1e-7 * x.abs().max(1.0), "z={z}: {x} {y}");
            }
            let lim = richardson_limit(|r| Ok(eval_fields(&p, r, z)?.v), 0.1).unwrap();
            assert!((lim - axis.v).abs() < 1e-9 * axis.v.abs().max(1.0));
        }
    }

    #[test]
    fn af_defects() {
        let d = axis_data(&schwarzschild());
        assert!(d.af_defect.abs() < 1e-12 && d.af_defect_closed_form == 0.0);
        assert_eq!(d.f_consts[1], None);
        assert!((d.a_from_fr_f0 - 1.0).abs() < 1e-12);

        let bolt = preset(Preset::TaubBolt { n: 1.0 });
        let d = axis_data(&bolt);
        assert!((d.af_defect_closed_form - 4.0).abs() < 1e-14);
        assert!((d.af_defect - 4.0).abs() < 1e-11 * 4.0);
        assert!((d.a_from_fr_f0 - 2.25).abs() < 1e-12);

        for x in [0.2, 0.5, 0.8] {
            let d = axis_data(&preset(Preset::ChenTeoInstanton { p: x }));
            assert!(d.af_defect.abs() < 1e-12, "{}", d.af_defect);
            assert!(d.af_defect_closed_form.abs() < 1e-12);
        }
    }

    #[test]
    fn jump_laws_hold() {
        let profiles = [
            schwarzschild(),
            preset(Preset::TaubBolt { n: 1.0 }),
            preset(Preset::Kerr { m: 1.0, a: 0.5 }),
            preset(Preset::ChenTeoInstanton { p: 0.3 }),
            Profile::from_pairs(0.7, &[(-1.0, 0.3), (0.2, 0.3), (1.5, 0.4)]).unwrap(),
        ];
        for p in &profiles {
            let d = axis_data(p);
            assert!(d.jump_residual(p) < 1e-11, "{}", d.jump_residual(p));
        }
    }

    #[test]
    fn metric_entries_and_determinant() {
        let p = schwarzschild();
        let s = eval_fields(&p, 1.0, 0.5).unwrap();
        let g = metric_tensor(&p, 1.0, 0.5).unwrap().matrix();
        assert_eq!(g[(0, 0)], 1.0 / s.v);
        assert_eq!(g[(0, 1)], -s.f / s.v);
        assert_eq!(g[(2, 3)], 0.0);
        let want = s.e2nu * s.e2nu;
        assert!((g.determinant() - want).abs() < 1e-12 * want);
        assert!(matches!(
            metric_tensor(&p, 0.0, 0.5),
            Err(Error::AxisEvaluation(_))
        ));
    }

    #[test]
    fn gauge_shift_is_a_coordinate_change() {
        let p = preset(Preset::ChenTeoInstanton { p: 0.4 });
        let c = 1.0;
        for (rho, z) in [(0.3, 0.1), (2.0, -1.0), (0.05, 0.7)] {
            let s = eval_fields(&p, rho, z).unwrap();
            let g = MetricAtPoint::from_fields(&s).matrix();
            let mut shifted = s.clone();
            shifted.f += c;
            let gs = MetricAtPoint::from_fields(&shifted).matrix();
            // t' = t + c x3
            let mut jac = Mat4::identity();
            jac[(0, 1)] = c;
            let pulled = jac.transpose() * gs * jac;
            assert!((pulled - g).amax() < 1e-13 * g.amax());
        }
    }

    #[test]
    fn schwarzschild_is_ricci_flat() {
        let r = ricci_residual(&schwarzschild(), 1.0, 0.3, 1e-4).unwrap();
        assert!(r < 1e-6, "{r}");
        let ct = preset(Preset::ChenTeoInstanton { p: 0.4 });
        let r = ricci_residual(&ct, 0.8, -0.1, curvature::default_step(0.8)).unwrap();
        assert!(r < 1e-5, "{r}");
    }

    #[test]
    fn ricci_step_errors() {
        assert!(matches!(
            ricci_residual(&schwarzschild(), 1e-4, 0.3, 1e-4),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn rescale_covariance() {
        let p = Profile::from_pairs(0.7, &[(-1.0, 0.3), (0.2, 0.3), (1.5, 0.4)]).unwrap();
        let (alpha, beta) = (1.7, -0.4);
        // p = rescaled(q) where q(z) = alpha p((z - beta)/alpha)
        let hat = p.rescale(alpha, beta).unwrap();
        for (rho, z) in [(0.3, 0.2), (1.1, -0.9)] {
            let v_hat = eval_fields(&hat, rho, z).unwrap().v;
            let v = eval_fields(&p, alpha * rho, alpha * z + beta).unwrap().v;
            assert!((v_hat - v).abs() < 1e-12 * v, "{v_hat} {v}");
        }
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (
            0.05f64..3.0,
            -2.0f64..2.0,
            0.1f64..2.0,
            0.05f64..0.95,
            0.05f64..0.95,
        )
            .prop_map(|(a_const, z0, gap, w1, w2)| {
                let total = w1 + w2 + 0.3;
                Profile::new(
                    a_const,
                    vec![
                        Turn::new(z0, w1 / total),
                        Turn::new(z0 + gap, w2 / total),
                        Turn::new(z0 + 2.0 * gap, 1.0 - (w1 + w2) / total),
                    ],
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn bound_chain(p in arb_profile(), lr in -3.0f64..3.0, z in -6.0f64..6.0) {
            let rho = 10f64.powf(lr);
            let s = eval_fields(&p, rho, z).unwrap();
            let (q, prod, lower) = bound_quantities(&p, rho, z).unwrap();
            prop_assert!(q <= 1.0 + 1e-12);
            prop_assert!(prod >= 1.0 - 1e-12);
            prop_assert!(s.v >= lower * (1.0 - 1e-12) && lower > 1.0);
            prop_assert!(s.e2nu > 0.0);
        }

        #[test]
        fn positive_definite(p in arb_profile(), lr in -2.0f64..2.0, z in -4.0f64..4.0) {
            let g = metric_tensor(&p, 10f64.powf(lr), z).unwrap().matrix();
            prop_assert!(g.cholesky().is_some());
        }
    }
}
