//! The axisymmetric harmonic generating function `U(rho, z)` of a profile,
//! its derivatives, and its harmonic conjugate `H`.
//!
//! Every term of `U` is a translate of the building block
//! `U0(rho, z) = 2 d - z log((d + z) / (d - z))`, `d = hypot(rho, z)`.
//! The log ratio equals `2 artanh(z / d) = 2 asinh(z / rho)`; the `asinh`
//! form is used throughout because it has no cancellation as `z -> +-d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;

/// `log((d + u) / (d - u))` for `d = hypot(rho, u)`, `rho > 0`.
#[inline]
pub(crate) fn log_ratio(rho: f64, u: f64) -> f64 {
    2.0 * (u / rho).asinh()
}

/// `U0(rho, z)`.
pub fn eval_u0(rho: f64, z: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::AxisEvaluation(rho));
    }
    Ok(u0_unchecked(rho, z))
}

#[inline]
fn u0_unchecked(rho: f64, z: f64) -> f64 {
    2.0 * rho.hypot(z) - z * log_ratio(rho, z)
}

/// Sums over turning points that every closed-form quantity is built from.
#[derive(Debug, Clone)]
pub(crate) struct RodSums {
    /// `A + sum a_i d_i` (equals `rho U_rho / 2`).
    pub p: f64,
    /// `sum a_i / d_i`.
    pub s1: f64,
    /// `sum a_i (z - z_i) / d_i`.
    pub su: f64,
    /// `sum a_i (z - z_i) d_i`.
    pub sud: f64,
    /// `sum a_i log((d_i + z - z_i) / (d_i - z + z_i))`.
    pub sl: f64,
    pub d: Vec<f64>,
}

impl RodSums {
    /// Off-axis sums; callers guarantee `rho > 0`.
    pub(crate) fn new(profile: &Profile, rho: f64, z: f64) -> Self {
        let mut s = RodSums {
            p: profile.a_const(),
            s1: 0.0,
            su: 0.0,
            sud: 0.0,
            sl: 0.0,
            d: Vec::with_capacity(profile.r()),
        };
        // u/d = sgn(u) - sgn(u) rho^2 / (d (d + |u|)); the sgn part sums to
        // the slope, so su keeps full relative accuracy as rho -> 0
        let mut sgn_sum = 0.0;
        let mut correction = 0.0;
        for t in profile.turns() {
            let u = z - t.z;
            let d = rho.hypot(u);
            let sg = if u > 0.0 {
                1.0
            } else if u < 0.0 {
                -1.0
            } else {
                0.0
            };
            s.p += t.a * d;
            s.s1 += t.a / d;
            sgn_sum += t.a * sg;
            correction += t.a * sg / (d * (d + u.abs()));
            s.sud += t.a * u * d;
            s.sl += t.a * log_ratio(rho, u);
            s.d.push(d);
        }
        let slope = match profile.interval_of(z) {
            Some(i) => profile.slopes()[i],
            None => sgn_sum,
        };
        s.su = slope - rho * rho * correction;
        s
    }

    /// `H = 2 A z + sum a_i u_i d_i + rho^2/2 sum a_i L_i`, zero added constant.
    pub(crate) fn h(&self, a_const: f64, rho: f64, z: f64) -> f64 {
        2.0 * a_const * z + self.sud + 0.5 * rho * rho * self.sl
    }
}

/// `U(rho, z) = A log rho^2 + sum a_i U0(rho, z - z_i)`.
pub fn eval_u(profile: &Profile, rho: f64, z: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::AxisEvaluation(rho));
    }
    let sum: f64 = profile
        .turns()
        .iter()
        .map(|t| t.a * u0_unchecked(rho, z - t.z))
        .sum();
    Ok(profile.a_const() * (rho * rho).ln() + sum)
}

/// The conjugate `H` with its additive constant fixed to zero. Finite on
/// the axis.
pub fn eval_h(profile: &Profile, rho: f64, z: f64) -> Result<f64> {
    if rho < 0.0 || !rho.is_finite() || !z.is_finite() {
        return Err(Error::AxisEvaluation(rho));
    }
    if rho == 0.0 {
        return Ok(axis_h(profile, z));
    }
    Ok(RodSums::new(profile, rho, z).h(profile.a_const(), rho, z))
}

/// `H(0, z) = 2 A z + sum a_i (z - z_i)|z - z_i|`.
pub(crate) fn axis_h(profile: &Profile, z: f64) -> f64 {
    2.0 * profile.a_const() * z
        + profile
            .turns()
            .iter()
            .map(|t| {
                let u = z - t.z;
                t.a * u * u.abs()
            })
            .sum::<f64>()
}

/// `U` and its derivatives at one point.
///
/// On the axis `U`, `U_rho`, `U_z`, `U_rhorho` and `U_rhoz` diverge and are
/// `None`; `rho U_rho`, `U_zz` and `H` keep finite limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub rho: f64,
    pub z: f64,
    #[serde(rename = "U")]
    pub u: Option<f64>,
    #[serde(rename = "U_rho")]
    pub u_rho: Option<f64>,
    #[serde(rename = "U_z")]
    pub u_z: Option<f64>,
    #[serde(rename = "U_rhorho")]
    pub u_rhorho: Option<f64>,
    #[serde(rename = "U_rhoz")]
    pub u_rhoz: Option<f64>,
    #[serde(rename = "U_zz")]
    pub u_zz: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "rho_U_rho")]
    pub rho_u_rho: f64,
    pub d: Vec<f64>,
}

impl PotentialSample {
    fn field(v: Option<f64>, name: &'static str) -> Result<f64> {
        v.ok_or(Error::AxisLogDivergence(name))
    }

    pub fn u(&self) -> Result<f64> {
        Self::field(self.u, "U")
    }

    pub fn u_rho(&self) -> Result<f64> {
        Self::field(self.u_rho, "U_rho")
    }

    pub fn u_z(&self) -> Result<f64> {
        Self::field(self.u_z, "U_z")
    }

    pub fn u_rhorho(&self) -> Result<f64> {
        Self::field(self.u_rhorho, "U_rhorho")
    }

    pub fn u_rhoz(&self) -> Result<f64> {
        Self::field(self.u_rhoz, "U_rhoz")
    }

    pub fn on_axis(&self) -> bool {
        self.u.is_none()
    }

    /// `U_zz + U_rhorho + U_rho / rho`, or `None` on the axis.
    pub fn laplacian(&self) -> Option<f64> {
        Some(self.u_zz + self.u_rhorho? + self.u_rho? / self.rho)
    }
}

pub fn eval_potential(profile: &Profile, rho: f64, z: f64) -> Result<PotentialSample> {
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    if rho < 0.0 || !rho.is_finite() {
        return Err(Error::AxisEvaluation(rho));
    }
    if rho == 0.0 {
        return axis_potential(profile, z);
    }
    let a_const = profile.a_const();
    let s = RodSums::new(profile, rho, z);
    let u = eval_u(profile, rho, z)?;
    Ok(PotentialSample {
        rho,
        z,
        u: Some(u),
        u_rho: Some(2.0 * s.p / rho),
        u_z: Some(-s.sl),
        u_rhorho: Some(-2.0 * s.p / (rho * rho) + 2.0 * s.s1),
        u_rhoz: Some(2.0 * s.su / rho),
        u_zz: -2.0 * s.s1,
        h: s.h(a_const, rho, z),
        rho_u_rho: 2.0 * s.p,
        d: s.d,
    })
}

fn axis_potential(profile: &Profile, z: f64) -> Result<PotentialSample> {
    if profile.interval_of(z).is_none() {
        return Err(Error::TurningPointOnAxis(z));
    }
    let d: Vec<f64> = profile.turns().iter().map(|t| (z - t.z).abs()).collect();
    let s1: f64 = profile.turns().iter().zip(&d).map(|(t, d)| t.a / d).sum();
    Ok(PotentialSample {
        rho: 0.0,
        z,
        u: None,
        u_rho: None,
        u_z: None,
        u_rhorho: None,
        u_rhoz: None,
        u_zz: -2.0 * s1,
        h: axis_h(profile, z),
        rho_u_rho: 2.0 * profile.eval(z),
        d,
    })
}

/// Central-difference residuals `(H_z - rho U_rho, H_rho + rho U_z)`.
pub fn conjugacy_residual(profile: &Profile, rho: f64, z: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) || !(rho > h) {
        return Err(Error::StepTooLarge { step: h, rho });
    }
    let s = eval_potential(profile, rho, z)?;
    let hz = (eval_h(profile, rho, z + h)? - eval_h(profile, rho, z - h)?) / (2.0 * h);
    let hr = (eval_h(profile, rho + h, z)? - eval_h(profile, rho - h, z)?) / (2.0 * h);
    Ok((hz - rho * s.u_rho()?, hr + rho * s.u_z()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Preset, Turn};
    use proptest::prelude::*;

    fn preset(p: Preset) -> Profile {
        p.build().unwrap().into_alf().unwrap()
    }

    /// Naive log-quotient form, valid away from the axis.
    fn naive_u0(rho: f64, z: f64) -> f64 {
        let d = (rho * rho + z * z).sqrt();
        2.0 * d - z * ((d + z) / (d - z)).ln()
    }

    #[test]
    fn u0_values() {
        assert_eq!(eval_u0(1.0, 0.0).unwrap(), 2.0);
        let want = 10.0 - 8.0 * 3.0f64.ln();
        assert!((eval_u0(3.0, 4.0).unwrap() - want).abs() < 1e-14);
        assert!((naive_u0(3.0, 4.0) - want).abs() < 1e-13);
        for (r, z) in [(0.3, 1.7), (2.0, -0.4), (1e-3, 5.0)] {
            assert_eq!(eval_u0(r, z).unwrap(), eval_u0(r, -z).unwrap());
        }
        assert!(matches!(eval_u0(0.0, 1.0), Err(Error::AxisEvaluation(_))));
    }

    #[test]
    fn log_ratio_matches_artanh_form() {
        for (rho, u) in [(1.0, 0.3), (0.2, -3.0), (5.0, 1.0), (1e-4, 1e-2)] {
            let d: f64 = f64::hypot(rho, u);
            let art = 2.0 * (u / d).atanh();
            assert!((log_ratio(rho, u) - art).abs() < 1e-9 * art.abs().max(1.0));
        }
        // near the axis the quotient form loses everything; asinh stays exact:
        // log((d+u)/(d-u)) = 2 log((d+u)/rho) for u > 0
        let (rho, u) = (1e-12, 2.0);
        let exact = 2.0 * ((u + f64::hypot(rho, u)) / rho).ln();
        assert!((log_ratio(rho, u) - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn taub_nut_generating_function() {
        let p = preset(Preset::TaubNut { n: 1.0 });
        for (rho, z) in [(0.5f64, 0.2), (2.0, -1.0), (3.0, 4.0)] {
            let want = 2.0 * (rho * rho).ln() + eval_u0(rho, z).unwrap();
            assert!((eval_u(&p, rho, z).unwrap() - want).abs() < 1e-14 * want.abs().max(1.0));
        }
    }

    #[test]
    fn axis_limit_of_rho_u_rho() {
        let p = preset(Preset::Schwarzschild { m: 1.0 });
        let axis = eval_potential(&p, 0.0, 3.0).unwrap();
        assert_eq!(axis.rho_u_rho / 2.0, 4.0);
        assert!(axis.u().is_err());
        assert!(matches!(axis.u_z(), Err(Error::AxisLogDivergence("U_z"))));
        let mut prev = f64::INFINITY;
        for k in 1..30 {
            let rho = 2f64.powi(-k);
            let s = eval_potential(&p, rho, 3.0).unwrap();
            let err = (s.rho_u_rho / 2.0 - 4.0).abs();
            assert!(err <= prev);
            prev = err;
        }
        assert!(prev < 1e-15);
        assert!(matches!(
            eval_potential(&p, 0.0, 1.0),
            Err(Error::TurningPointOnAxis(_))
        ));
    }

    #[test]
    fn u_paths_agree_bitwise() {
        let p = preset(Preset::ChenTeoInstanton { p: 0.4 });
        for (rho, z) in [(0.7, -0.2), (1e-3, 0.1), (10.0, 3.0)] {
            let s = eval_potential(&p, rho, z).unwrap();
            assert_eq!(
                s.u().unwrap().to_bits(),
                eval_u(&p, rho, z).unwrap().to_bits()
            );
            // against the expanded form: A log rho^2 + 2 sum a d - sum a u L
            let expanded = p.a_const() * (rho * rho).ln()
                + p.turns()
                    .iter()
                    .map(|t| {
                        let u = z - t.z;
                        let d = f64::hypot(rho, u);
                        2.0 * t.a * d - t.a * u * 2.0 * (u / d).atanh()
                    })
                    .sum::<f64>();
            assert!((s.u().unwrap() - expanded).abs() < 1e-12 * expanded.abs().max(1.0));
        }
    }

    #[test]
    fn conjugacy_small() {
        let cases = [
            (preset(Preset::Schwarzschild { m: 1.0 }), 1.0, 0.3),
            (preset(Preset::TaubNut { n: 1.0 }), 2.0, 1.0),
            (preset(Preset::ChenTeoInstanton { p: 0.4 }), 0.7, -0.2),
        ];
        for (p, rho, z) in cases {
            let (a, b) = conjugacy_residual(&p, rho, z, 1e-5).unwrap();
            assert!(a.abs() < 1e-8 && b.abs() < 1e-8, "{a} {b}");
        }
        let p = preset(Preset::Schwarzschild { m: 1.0 });
        assert!(matches!(
            conjugacy_residual(&p, 0.1, 0.0, 0.2),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn derivatives_match_richardson_differences() {
        let p = Profile::from_pairs(0.8, &[(-1.0, 0.2), (0.3, 0.5), (1.1, 0.3)]).unwrap();
        let u = |r: f64, z: f64| eval_u(&p, r, z).unwrap();
        let rich = |f: &dyn Fn(f64) -> f64, h: f64| {
            let c = |h: f64| (f(h) - f(-h)) / (2.0 * h);
            (4.0 * c(h / 2.0) - c(h)) / 3.0
        };
        for (rho, z) in [(0.6, 0.0), (1.3, -1.4), (0.25, 0.9)] {
            let s = eval_potential(&p, rho, z).unwrap();
            let h = 1e-3;
            let checks = [
                (rich(&|e| u(rho + e, z), h), s.u_rho().unwrap()),
                (rich(&|e| u(rho, z + e), h), s.u_z().unwrap()),
                (
                    rich(
                        &|e| eval_potential(&p, rho + e, z).unwrap().u_rho.unwrap(),
                        h,
                    ),
                    s.u_rhorho().unwrap(),
                ),
                (
                    rich(
                        &|e| eval_potential(&p, rho, z + e).unwrap().u_rho.unwrap(),
                        h,
                    ),
                    s.u_rhoz().unwrap(),
                ),
                (
                    rich(&|e| eval_potential(&p, rho, z + e).unwrap().u_z.unwrap(), h),
                    s.u_zz,
                ),
            ];
            for (fd, exact) in checks {
                assert!(
                    (fd - exact).abs() < 1e-7 * exact.abs().max(1.0),
                    "{fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn json_round_trip_is_fixed_point() {
        let p = preset(Preset::Kerr { m: 1.0, a: 0.5 });
        for rho in [0.0, 0.4] {
            let s = eval_potential(&p, rho, 2.0).unwrap();
            let a = serde_json::to_string(&s).unwrap();
            let back: PotentialSample = serde_json::from_str(&a).unwrap();
            assert_eq!(serde_json::to_string(&back).unwrap(), a);
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
        fn harmonic(p in arb_profile(), lr in -2.0f64..2.0, z in -5.0f64..5.0) {
            let rho = 10f64.powf(lr);
            let s = eval_potential(&p, rho, z).unwrap();
            let scale = s.u_zz.abs() + s.u_rhorho.unwrap().abs() + (s.u_rho.unwrap() / rho).abs() + 1.0;
            prop_assert!(s.laplacian().unwrap().abs() <= 1e-9 * scale);
            for (t, d) in p.turns().iter().zip(&s.d) {
                prop_assert!(*d >= (z - t.z).abs() && *d >= rho);
            }
        }
    }
}
