//! Convex piecewise-affine rod profiles.
//!
//! A profile is `f(z) = A + sum_i a_i |z - z_i|` with `a_i > 0`, `sum a_i = 1`
//! and strictly increasing turning points. Slopes run from `-1` on the far
//! left to `+1` on the far right, and every metric in this crate is built
//! from one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum a_i - 1|` accepted at construction.
pub const COEFFICIENT_SUM_TOL: f64 = 1e-12;

/// Constants below this magnitude are treated as an exact zero when
/// assembling limit profiles.
const ZERO_A_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub z: f64,
    pub a: f64,
}

impl Turn {
    pub fn new(z: f64, a: f64) -> Self {
        Turn { z, a }
    }
}

impl From<(f64, f64)> for Turn {
    fn from((z, a): (f64, f64)) -> Self {
        Turn { z, a }
    }
}

/// Turning points and the slopes they induce; shared by [`Profile`] and
/// [`PseudoProfile`].
#[derive(Debug, Clone, PartialEq)]
struct Rods {
    turns: Vec<Turn>,
    slopes: Vec<f64>,
}

impl Rods {
    fn validated(turns: Vec<Turn>) -> Result<Self> {
        if turns.is_empty() {
            return Err(Error::NoTurningPoints);
        }
        let mut sum = 0.0;
        for (index, t) in turns.iter().enumerate() {
            if !t.z.is_finite() || !t.a.is_finite() {
                return Err(Error::NonFinite("turning point"));
            }
            if t.a <= 0.0 {
                return Err(Error::NonPositiveCoefficient { index, value: t.a });
            }
            sum += t.a;
        }
        if turns.windows(2).any(|w| w[1].z <= w[0].z) {
            return Err(Error::NonMonotoneTurningPoints);
        }
        if (sum - 1.0).abs() > COEFFICIENT_SUM_TOL {
            return Err(Error::CoefficientsDontSumToOne(sum));
        }
        Ok(Self::unchecked(turns))
    }

    fn unchecked(turns: Vec<Turn>) -> Self {
        let mut slopes = Vec::with_capacity(turns.len() + 1);
        let mut s = -1.0;
        slopes.push(s);
        let r = turns.len();
        for (i, t) in turns.iter().enumerate() {
            s += 2.0 * t.a;
            // pin the last slope so rounding in the running sum never leaks
            slopes.push(if i + 1 == r { 1.0 } else { s });
        }
        Rods { turns, slopes }
    }

    fn sum_abs(&self, z: f64) -> f64 {
        self.turns.iter().map(|t| t.a * (z - t.z).abs()).sum()
    }

    fn interval_of(&self, z: f64) -> Option<usize> {
        let mut i = 0;
        for t in &self.turns {
            if z == t.z {
                return None;
            }
            if z > t.z {
                i += 1;
            }
        }
        Some(i)
    }

    fn slope_at(&self, z: f64) -> Result<f64> {
        self.interval_of(z)
            .map(|i| self.slopes[i])
            .ok_or(Error::TurningPointSlopeUndefined(z))
    }

    fn slope_of_interval(&self, i: usize) -> Result<f64> {
        self.slopes
            .get(i)
            .copied()
            .ok_or(Error::IntervalOutOfRange {
                index: i,
                r: self.turns.len(),
            })
    }

    fn rescaled(&self, alpha: f64, beta: f64) -> Self {
        let turns = self
            .turns
            .iter()
            .map(|t| Turn::new((t.z - beta) / alpha, t.a))
            .collect();
        Rods {
            turns,
            slopes: self.slopes.clone(),
        }
    }
}

/// Raw JSON shape shared by both profile kinds.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileJson {
    #[serde(rename = "A")]
    a_const: f64,
    turns: Vec<Turn>,
}

/// A validated rod profile with `A > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct Profile {
    a_const: f64,
    rods: Rods,
}

impl TryFrom<ProfileJson> for Profile {
    type Error = Error;
    fn try_from(raw: ProfileJson) -> Result<Self> {
        Profile::new(raw.a_const, raw.turns)
    }
}

impl From<Profile> for ProfileJson {
    fn from(p: Profile) -> Self {
        ProfileJson {
            a_const: p.a_const,
            turns: p.rods.turns,
        }
    }
}

impl Profile {
    pub fn new(a_const: f64, turns: Vec<Turn>) -> Result<Self> {
        if !a_const.is_finite() {
            return Err(Error::NonFinite("A"));
        }
        if a_const <= 0.0 {
            return Err(Error::NonPositiveA(a_const));
        }
        Ok(Profile {
            a_const,
            rods: Rods::validated(turns)?,
        })
    }

    pub fn from_pairs(a_const: f64, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(a_const, pairs.iter().copied().map(Turn::from).collect())
    }

    /// Builds a profile without checking `sum a_i = 1` or positivity.
    ///
    /// Only meant for negative controls: such a profile does not describe an
    /// ALF metric.
    #[doc(hidden)]
    pub fn new_unchecked(a_const: f64, turns: Vec<Turn>) -> Self {
        Profile {
            a_const,
            rods: Rods::unchecked(turns),
        }
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// The constant term `A`.
    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    pub fn turns(&self) -> &[Turn] {
        &self.rods.turns
    }

    /// Number of turning points `r`.
    pub fn r(&self) -> usize {
        self.rods.turns.len()
    }

    /// Slopes `f'_0, ..., f'_r`.
    pub fn slopes(&self) -> &[f64] {
        &self.rods.slopes
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.a_const + self.rods.sum_abs(z)
    }

    /// Values `f_i = f(z_i)` at the turning points.
    pub fn turn_values(&self) -> Vec<f64> {
        self.rods.turns.iter().map(|t| self.eval(t.z)).collect()
    }

    /// Index of the open interval `(z_i, z_{i+1})` containing `z`, or `None`
    /// when `z` is a turning point.
    pub fn interval_of(&self, z: f64) -> Option<usize> {
        self.rods.interval_of(z)
    }

    pub fn slope_at(&self, z: f64) -> Result<f64> {
        self.rods.slope_at(z)
    }

    pub fn slope_of_interval(&self, i: usize) -> Result<f64> {
        self.rods.slope_of_interval(i)
    }

    /// A point strictly inside interval `i`; unbounded intervals use a unit
    /// offset from the extreme turning point.
    pub fn interval_midpoint(&self, i: usize) -> f64 {
        let t = &self.rods.turns;
        let r = t.len();
        if i == 0 {
            t[0].z - 1.0
        } else if i >= r {
            t[r - 1].z + 1.0
        } else {
            0.5 * (t[i - 1].z + t[i].z)
        }
    }

    /// `f~(z) = f(alpha z + beta) / alpha`.
    pub fn rescale(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveScale(alpha));
        }
        if !beta.is_finite() {
            return Err(Error::NonFinite("beta"));
        }
        Ok(Profile {
            a_const: self.a_const / alpha,
            rods: self.rods.rescaled(alpha, beta),
        })
    }

    /// `sum a_i z_i`.
    pub fn first_moment(&self) -> f64 {
        self.rods.turns.iter().map(|t| t.a * t.z).sum()
    }

    /// `sum a_i z_i^2`.
    pub fn second_moment(&self) -> f64 {
        self.rods.turns.iter().map(|t| t.a * t.z * t.z).sum()
    }

    /// Minimum of `f`, attained at a turning point.
    pub fn minimum(&self) -> f64 {
        self.turn_values().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// A rod profile allowing `A = 0`, such as the self-dual Eguchi–Hanson
/// function. It lies outside the ALF family and is deliberately not
/// accepted by anything that needs `A > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct PseudoProfile {
    a_const: f64,
    rods: Rods,
}

impl TryFrom<ProfileJson> for PseudoProfile {
    type Error = Error;
    fn try_from(raw: ProfileJson) -> Result<Self> {
        PseudoProfile::new(raw.a_const, raw.turns)
    }
}

impl From<PseudoProfile> for ProfileJson {
    fn from(p: PseudoProfile) -> Self {
        ProfileJson {
            a_const: p.a_const,
            turns: p.rods.turns,
        }
    }
}

impl PseudoProfile {
    pub fn new(a_const: f64, turns: Vec<Turn>) -> Result<Self> {
        if !a_const.is_finite() {
            return Err(Error::NonFinite("A"));
        }
        if a_const < 0.0 {
            return Err(Error::NegativeA(a_const));
        }
        Ok(PseudoProfile {
            a_const,
            rods: Rods::validated(turns)?,
        })
    }

    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    pub fn turns(&self) -> &[Turn] {
        &self.rods.turns
    }

    pub fn slopes(&self) -> &[f64] {
        &self.rods.slopes
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.a_const + self.rods.sum_abs(z)
    }

    pub fn slope_at(&self, z: f64) -> Result<f64> {
        self.rods.slope_at(z)
    }

    /// Promotes to a [`Profile`] when `A > 0`.
    pub fn into_profile(self) -> Result<Profile> {
        Profile::new(self.a_const, self.rods.turns)
    }
}

/// Either kind of profile; returned where a family reaches `A = 0` at an
/// endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnyProfile {
    Alf(Profile),
    Pseudo(PseudoProfile),
}

impl AnyProfile {
    pub fn a_const(&self) -> f64 {
        match self {
            AnyProfile::Alf(p) => p.a_const(),
            AnyProfile::Pseudo(p) => p.a_const(),
        }
    }

    pub fn turns(&self) -> &[Turn] {
        match self {
            AnyProfile::Alf(p) => p.turns(),
            AnyProfile::Pseudo(p) => p.turns(),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            AnyProfile::Alf(p) => p.eval(z),
            AnyProfile::Pseudo(p) => p.eval(z),
        }
    }

    pub fn as_alf(&self) -> Option<&Profile> {
        match self {
            AnyProfile::Alf(p) => Some(p),
            AnyProfile::Pseudo(_) => None,
        }
    }

    pub fn into_alf(self) -> Result<Profile> {
        match self {
            AnyProfile::Alf(p) => Ok(p),
            AnyProfile::Pseudo(p) => Err(Error::NonPositiveA(p.a_const())),
        }
    }

    pub fn is_pseudo(&self) -> bool {
        matches!(self, AnyProfile::Pseudo(_))
    }
}

/// Assembles an endpoint profile: drops zero coefficients, merges coincident
/// turning points by summing coefficients, and returns a [`PseudoProfile`]
/// when `A` vanishes.
pub fn assemble_limit(a_const: f64, raw: impl IntoIterator<Item = Turn>) -> Result<AnyProfile> {
    let mut turns: Vec<Turn> = raw.into_iter().filter(|t| t.a != 0.0).collect();
    turns.sort_by(|x, y| x.z.total_cmp(&y.z));
    let mut merged: Vec<Turn> = Vec::with_capacity(turns.len());
    for t in turns {
        match merged.last_mut() {
            Some(last) if last.z == t.z => last.a += t.a,
            _ => merged.push(t),
        }
    }
    if a_const.abs() <= ZERO_A_TOL {
        Ok(AnyProfile::Pseudo(PseudoProfile::new(0.0, merged)?))
    } else {
        Ok(AnyProfile::Alf(Profile::new(a_const, merged)?))
    }
}

/// Named classical profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `2n + |z|`.
    TaubNut {
        n: f64,
    },
    /// `3b + |z+b|/2 + |z-b|/2` with `b = 3|n|/4`.
    TaubBolt {
        n: f64,
    },
    Kerr {
        m: f64,
        a: f64,
    },
    Schwarzschild {
        m: f64,
    },
    /// The smooth AF three-rod instanton, `0 < p < 1`, `q = 1 - p`.
    ChenTeoInstanton {
        p: f64,
    },
    /// `|z+b|/2 + |z-b|/2`; `A = 0`, so not ALF.
    EguchiHanson {
        b: f64,
    },
    /// `A + |z+b|/2 + |z-b|/2` with `A + b = 1`, `0 <= A <= 1`.
    EhFamily {
        big_a: f64,
    },
}

pub const PRESET_NAMES: &[&str] = &[
    "taub_nut",
    "taub_bolt",
    "kerr",
    "schwarzschild",
    "chen_teo_instanton",
    "eguchi_hanson",
    "eh_family",
];

fn out_of_range(msg: impl Into<String>) -> Error {
    Error::ParameterOutOfRange(msg.into())
}

impl Preset {
    /// Looks a preset up by name; `param` supplies named parameters
    /// (`n`, `m`, `a`, `b`, `p`, `A`).
    pub fn from_name(name: &str, param: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let need = |key: &'static str| {
            param(key).ok_or_else(|| out_of_range(format!("preset {name} needs parameter `{key}`")))
        };
        let canonical = name.replace('-', "_");
        Ok(match canonical.as_str() {
            "taub_nut" => Preset::TaubNut { n: need("n")? },
            "taub_bolt" => Preset::TaubBolt { n: need("n")? },
            "kerr" => Preset::Kerr {
                m: need("m")?,
                a: need("a")?,
            },
            "schwarzschild" => Preset::Schwarzschild { m: need("m")? },
            "chen_teo_instanton" => Preset::ChenTeoInstanton { p: need("p")? },
            "eguchi_hanson" => Preset::EguchiHanson { b: need("b")? },
            "eh_family" => Preset::EhFamily { big_a: need("A")? },
            _ => return Err(Error::UnknownPreset(name.to_string())),
        })
    }

    pub fn build(&self) -> Result<AnyProfile> {
        match *self {
            Preset::TaubNut { n } => {
                if !(n > 0.0) || !n.is_finite() {
                    return Err(out_of_range("taub_nut requires n > 0"));
                }
                Ok(AnyProfile::Alf(Profile::from_pairs(
                    2.0 * n,
                    &[(0.0, 1.0)],
                )?))
            }
            Preset::TaubBolt { n } => {
                if n == 0.0 || !n.is_finite() {
                    return Err(out_of_range("taub_bolt requires n != 0"));
                }
                let b = 0.75 * n.abs();
                Ok(AnyProfile::Alf(Profile::from_pairs(
                    3.0 * b,
                    &[(-b, 0.5), (b, 0.5)],
                )?))
            }
            Preset::Kerr { m, a } => {
                if !(m > 0.0) || a == 0.0 || !a.is_finite() || !m.is_finite() {
                    return Err(out_of_range("kerr requires m > 0 and a != 0"));
                }
                let b = m.hypot(a);
                Ok(AnyProfile::Alf(Profile::from_pairs(
                    m,
                    &[(-b, 0.5 * (1.0 - a / b)), (b, 0.5 * (1.0 + a / b))],
                )?))
            }
            Preset::Schwarzschild { m } => {
                if !(m > 0.0) || !m.is_finite() {
                    return Err(out_of_range("schwarzschild requires m > 0"));
                }
                Ok(AnyProfile::Alf(Profile::from_pairs(
                    m,
                    &[(-m, 0.5), (m, 0.5)],
                )?))
            }
            Preset::ChenTeoInstanton { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(out_of_range("chen_teo_instanton requires 0 < p < 1"));
                }
                let q = 1.0 - p;
                let a_const = 0.5 * (1.0 - p.powf(1.5) - q.powf(1.5));
                Ok(AnyProfile::Alf(Profile::from_pairs(
                    a_const,
                    &[(q - q.sqrt(), 0.5 * q), (0.0, 0.5), (p.sqrt() - p, 0.5 * p)],
                )?))
            }
            Preset::EguchiHanson { b } => {
                if !(b > 0.0) || !b.is_finite() {
                    return Err(out_of_range("eguchi_hanson requires b > 0"));
                }
                Ok(AnyProfile::Pseudo(PseudoProfile::new(
                    0.0,
                    vec![Turn::new(-b, 0.5), Turn::new(b, 0.5)],
                )?))
            }
            Preset::EhFamily { big_a } => {
                if !(0.0..=1.0).contains(&big_a) {
                    return Err(out_of_range("eh_family requires 0 <= A <= 1"));
                }
                let b = 1.0 - big_a;
                assemble_limit(big_a, [Turn::new(-b, 0.5), Turn::new(b, 0.5)])
            }
        }
    }
}

/// Samples `f` on a uniform grid of `n` points over `[z_min, z_max]`.
pub fn sample_grid(profile: &AnyProfile, z_min: f64, z_max: f64, n: usize) -> Vec<(f64, f64)> {
    if n == 1 {
        return vec![(z_min, profile.eval(z_min))];
    }
    (0..n)
        .map(|k| {
            let z = z_min + (z_max - z_min) * k as f64 / (n - 1) as f64;
            (z, profile.eval(z))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schwarzschild(m: f64) -> Profile {
        Preset::Schwarzschild { m }
            .build()
            .unwrap()
            .into_alf()
            .unwrap()
    }

    #[test]
    fn schwarzschild_slopes() {
        let p = Profile::from_pairs(1.0, &[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(p.slopes(), &[-1.0, 0.0, 1.0]);
        assert_eq!(p.eval(0.0), 2.0);
        assert_eq!(p.minimum(), 2.0);
        assert_eq!(p.slope_of_interval(1).unwrap(), 0.0);
        assert_eq!(p.slope_at(0.3).unwrap(), 0.0);
    }

    #[test]
    fn taub_nut_profile() {
        let p = Preset::TaubNut { n: 1.0 }
            .build()
            .unwrap()
            .into_alf()
            .unwrap();
        assert_eq!(p.a_const(), 2.0);
        assert_eq!(p.slopes(), &[-1.0, 1.0]);
        assert_eq!(p.eval(3.0), 5.0);
    }

    #[test]
    fn rejects_bad_coefficient_sum() {
        let err = Profile::from_pairs(1.0, &[(0.0, 0.6), (1.0, 0.6)]).unwrap_err();
        assert!(matches!(err, Error::CoefficientsDontSumToOne(s) if (s - 1.2).abs() < 1e-15));
    }

    #[test]
    fn rejects_other_invalid_inputs() {
        assert!(matches!(
            Profile::from_pairs(0.0, &[(0.0, 1.0)]),
            Err(Error::NonPositiveA(_))
        ));
        assert!(matches!(
            Profile::from_pairs(1.0, &[(1.0, 0.5), (0.0, 0.5)]),
            Err(Error::NonMonotoneTurningPoints)
        ));
        assert!(matches!(
            Profile::from_pairs(1.0, &[(0.0, 1.5), (1.0, -0.5)]),
            Err(Error::NonPositiveCoefficient { index: 1, .. })
        ));
        assert!(matches!(
            Profile::from_pairs(1.0, &[]),
            Err(Error::NoTurningPoints)
        ));
        assert!(matches!(
            PseudoProfile::new(-1.0, vec![Turn::new(0.0, 1.0)]),
            Err(Error::NegativeA(_))
        ));
    }

    #[test]
    fn slope_undefined_at_turning_point() {
        let p = schwarzschild(1.0);
        assert!(matches!(
            p.slope_at(1.0),
            Err(Error::TurningPointSlopeUndefined(_))
        ));
    }

    #[test]
    fn chen_teo_profile_values() {
        let p = Preset::ChenTeoInstanton { p: 0.5 }
            .build()
            .unwrap()
            .into_alf()
            .unwrap();
        assert!((p.eval(0.0) - 0.25).abs() < 1e-15);
        let q: f64 = 0.5;
        assert!((p.slope_of_interval(2).unwrap() - q).abs() < 1e-15);
        assert!((p.slope_of_interval(1).unwrap() + 0.5).abs() < 1e-15);
        let f = p.turn_values();
        assert!((f[0] - 0.5 * q.sqrt()).abs() < 1e-15);
        assert!((f[2] - 0.5f64.sqrt() * q).abs() < 1e-15);
        let expected_a = 0.5 * (1.0 - 2.0 * 0.5f64.powf(1.5));
        assert!((p.a_const() - expected_a).abs() < 1e-15);
    }

    #[test]
    fn taub_bolt_preset() {
        let p = Preset::TaubBolt { n: 1.0 }
            .build()
            .unwrap()
            .into_alf()
            .unwrap();
        assert_eq!(p.a_const(), 2.25);
        assert_eq!(p.turns(), &[Turn::new(-0.75, 0.5), Turn::new(0.75, 0.5)]);
    }

    #[test]
    fn eh_family_presets() {
        let half = Preset::EhFamily { big_a: 0.5 }.build().unwrap();
        assert_eq!(half, AnyProfile::Alf(schwarzschild(0.5)));
        let zero = Preset::EhFamily { big_a: 0.0 }.build().unwrap();
        assert!(zero.is_pseudo());
        let one = Preset::EhFamily { big_a: 1.0 }.build().unwrap();
        assert_eq!(one.turns(), &[Turn::new(0.0, 1.0)]);
        assert_eq!(one.a_const(), 1.0);
        assert!(Preset::EhFamily { big_a: 1.5 }.build().is_err());
    }

    #[test]
    fn kerr_preset_coefficients() {
        let p = Preset::Kerr { m: 1.0, a: 0.5 }
            .build()
            .unwrap()
            .into_alf()
            .unwrap();
        let b = 1.25f64.sqrt();
        assert!((p.turns()[0].z + b).abs() < 1e-15);
        assert!((p.turns()[0].a - 0.5 * (1.0 - 0.5 / b)).abs() < 1e-15);
        assert!(Preset::Kerr { m: 1.0, a: 0.0 }.build().is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            Preset::from_name("kerr_newman", |_| Some(1.0)),
            Err(Error::UnknownPreset(_))
        ));
        assert!(matches!(
            Preset::from_name("schwarzschild", |_| None),
            Err(Error::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn rescale_schwarzschild_mass() {
        let p2 = schwarzschild(2.0);
        let p1 = p2.rescale(2.0, 0.0).unwrap();
        assert_eq!(p1, schwarzschild(1.0));
        assert_eq!(p2.rescale(1.0, 0.0).unwrap(), p2);
        assert!(matches!(
            p2.rescale(0.0, 0.0),
            Err(Error::NonPositiveScale(_))
        ));
    }

    #[test]
    fn rescale_translation_moves_turn_to_origin() {
        let p = Profile::from_pairs(1.0, &[(-1.0, 0.3), (0.5, 0.2), (2.0, 0.5)]).unwrap();
        let t = p.rescale(1.0, 0.5).unwrap();
        assert_eq!(t.turns()[1].z, 0.0);
        assert_eq!(t.a_const(), 1.0);
    }

    #[test]
    fn json_shape() {
        let p = schwarzschild(1.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"A":1.0,"turns":[{"z":-1.0,"a":0.5},{"z":1.0,"a":0.5}]}"#
        );
        assert_eq!(Profile::from_json(&s).unwrap(), p);
        assert!(
            Profile::from_json(r#"{"A":1,"turns":[{"z":0,"a":0.6},{"z":1,"a":0.6}]}"#).is_err()
        );
    }

    #[test]
    fn assemble_limit_merges_and_drops() {
        let got = assemble_limit(
            1.0,
            [
                Turn::new(-5.0, 0.0),
                Turn::new(0.0, 0.25),
                Turn::new(0.0, 0.25),
                Turn::new(1.0, 0.5),
            ],
        )
        .unwrap();
        assert_eq!(got.turns(), &[Turn::new(0.0, 0.5), Turn::new(1.0, 0.5)]);
        let pseudo = assemble_limit(0.0, [Turn::new(-1.0, 0.5), Turn::new(1.0, 0.5)]).unwrap();
        assert!(pseudo.is_pseudo());
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (1usize..6)
            .prop_flat_map(|r| {
                (
                    0.05f64..3.0,
                    prop::collection::vec(0.05f64..1.0, r),
                    prop::collection::vec(0.05f64..2.0, r),
                    -3.0f64..3.0,
                )
            })
            .prop_map(|(a_const, weights, gaps, start)| {
                let total: f64 = weights.iter().sum();
                let mut z = start;
                let turns = weights
                    .iter()
                    .zip(&gaps)
                    .map(|(w, g)| {
                        let t = Turn::new(z, w / total);
                        z += g;
                        t
                    })
                    .collect::<Vec<_>>();
                // renormalize the last coefficient so the sum is 1 to rounding
                let mut turns = turns;
                let head: f64 = turns[..turns.len() - 1].iter().map(|t| t.a).sum();
                let last = turns.len() - 1;
                turns[last].a = 1.0 - head;
                Profile::new(a_const, turns).unwrap()
            })
    }

    proptest! {
        #[test]
        fn convex_on_grids(p in arb_profile(), z0 in -6.0f64..6.0, h in 1e-3f64..0.5) {
            for k in 0..20 {
                let z = z0 + k as f64 * h;
                let second = p.eval(z + h) - 2.0 * p.eval(z) + p.eval(z - h);
                prop_assert!(second >= -1e-12 * (1.0 + p.eval(z).abs()));
            }
            prop_assert!(p.minimum() >= p.a_const());
        }

        #[test]
        fn slopes_match_coefficients(p in arb_profile()) {
            let s = p.slopes();
            prop_assert_eq!(s[0], -1.0);
            prop_assert_eq!(s[s.len() - 1], 1.0);
            for (i, t) in p.turns().iter().enumerate() {
                prop_assert!((t.a - 0.5 * (s[i + 1] - s[i])).abs() < 1e-12);
                prop_assert!(s[i + 1] > s[i]);
            }
            for i in 0..=p.r() {
                let z = p.interval_midpoint(i);
                let h = 1e-3;
                if p.interval_of(z + h) == Some(i) {
                    let fd = (p.eval(z + h) - p.eval(z)) / h;
                    prop_assert!((fd - s[i]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn rescale_inverse(p in arb_profile(), alpha in 0.1f64..10.0, beta in -5.0f64..5.0) {
            let q = p.rescale(alpha, beta).unwrap();
            let back = q.rescale(1.0 / alpha, -beta / alpha).unwrap();
            prop_assert!((back.a_const() - p.a_const()).abs() <= 1e-14 * p.a_const().max(1.0));
            for (x, y) in back.turns().iter().zip(p.turns()) {
                prop_assert!((x.z - y.z).abs() <= 1e-14 * y.z.abs().max(1.0));
                prop_assert_eq!(x.a, y.a);
            }
            for (fq, fp) in q.turn_values().iter().zip(p.turn_values()) {
                prop_assert!((fq - fp / alpha).abs() <= 1e-13 * fp.max(1.0));
            }
        }
    }

    #[test]
    fn preset_coefficients_match_slopes() {
        for preset in [
            Preset::TaubNut { n: 0.7 },
            Preset::TaubBolt { n: -2.0 },
            Preset::Kerr { m: 1.3, a: -0.4 },
            Preset::Schwarzschild { m: 2.0 },
            Preset::ChenTeoInstanton { p: 0.3 },
            Preset::EhFamily { big_a: 0.3 },
        ] {
            let p = preset.build().unwrap().into_alf().unwrap();
            let s = p.slopes();
            for (i, t) in p.turns().iter().enumerate() {
                assert!((t.a - 0.5 * (s[i + 1] - s[i])).abs() < 1e-15, "{preset:?}");
            }
        }
    }
}
