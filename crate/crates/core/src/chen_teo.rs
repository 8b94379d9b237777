//! The four-parameter family of three-turning-point profiles, labelled by
//! the slopes `-p`, `q` of the two inner intervals and the ratios
//! `a = f_1^2 / f_2^2`, `b = f_3^2 / f_2^2`, together with its named
//! one-parameter subfamilies and their endpoint profiles.
//!
//! Profiles are normalized to `z_2 = 0`, `f(0) = 1`. Internally the
//! parameters are stored as `(p, q, d1, d3)` with `d1 = z_2 - z_1`,
//! `d3 = z_3 - z_2`, so that `sqrt(a) = 1 + p d1` and `sqrt(b) = 1 + q d3`
//! stay meaningful at `p = 0` or `q = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{assemble_limit, AnyProfile, Preset, Profile, Turn};
use crate::regularity::{self, ChainCheck, RegularityReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsJson", into = "ParamsJson")]
pub struct ChenTeoParams {
    p: f64,
    q: f64,
    d1: f64,
    d3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParamsJson {
    p: f64,
    q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d3: Option<f64>,
}

impl TryFrom<ParamsJson> for ChenTeoParams {
    type Error = Error;

    fn try_from(j: ParamsJson) -> Result<Self> {
        let d1 = match (j.d1, j.a) {
            (Some(d), _) => d,
            (None, Some(a)) => gap_from_ratio(j.p, a, "a")?,
            (None, None) => return Err(out_of_range("need `a` or `d1`")),
        };
        let d3 = match (j.d3, j.b) {
            (Some(d), _) => d,
            (None, Some(b)) => gap_from_ratio(j.q, b, "b")?,
            (None, None) => return Err(out_of_range("need `b` or `d3`")),
        };
        ChenTeoParams::new(j.p, j.q, d1, d3)
    }
}

impl From<ChenTeoParams> for ParamsJson {
    fn from(c: ChenTeoParams) -> Self {
        ParamsJson {
            p: c.p,
            q: c.q,
            a: Some(c.a()),
            b: Some(c.b()),
            d1: Some(c.d1),
            d3: Some(c.d3),
        }
    }
}

fn out_of_range(msg: impl Into<String>) -> Error {
    Error::ParameterOutOfRange(msg.into())
}

/// `(sqrt(ratio) - 1) / slope`; undetermined at zero slope.
fn gap_from_ratio(slope: f64, ratio: f64, name: &str) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(out_of_range(format!("`{name}` must be positive")));
    }
    if slope == 0.0 {
        return Err(out_of_range(format!(
            "zero slope leaves the gap undetermined by `{name}`; give it directly"
        )));
    }
    Ok((ratio.sqrt() - 1.0) / slope)
}

impl ChenTeoParams {
    /// Validates `p, q` in `(-1, 1)`, `p + q > 0`, positive gaps and
    /// positive `f_1 = 1 + p d1`, `f_3 = 1 + q d3`. Positivity of `A` is
    /// checked by [`ChenTeoParams::to_profile`] only, since the regularity
    /// algebra does not need it.
    pub fn new(p: f64, q: f64, d1: f64, d3: f64) -> Result<Self> {
        if ![p, q, d1, d3].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("chen-teo parameters"));
        }
        if !(p > -1.0 && p < 1.0 && q > -1.0 && q < 1.0) {
            return Err(out_of_range("p and q must lie in (-1, 1)"));
        }
        if !(p + q > 0.0) {
            return Err(out_of_range("p + q must be positive"));
        }
        if !(d1 > 0.0 && d3 > 0.0) {
            return Err(out_of_range("turning point gaps must be positive"));
        }
        if !(1.0 + p * d1 > 0.0 && 1.0 + q * d3 > 0.0) {
            return Err(out_of_range("f_1 and f_3 must be positive"));
        }
        Ok(ChenTeoParams { p, q, d1, d3 })
    }

    /// From `(p, q, a, b)`; needs `p q != 0`.
    pub fn from_pqab(p: f64, q: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(p, q, gap_from_ratio(p, a, "a")?, gap_from_ratio(q, b, "b")?)
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d3(&self) -> f64 {
        self.d3
    }

    pub fn sqrt_a(&self) -> f64 {
        1.0 + self.p * self.d1
    }

    pub fn sqrt_b(&self) -> f64 {
        1.0 + self.q * self.d3
    }

    pub fn a(&self) -> f64 {
        self.sqrt_a().powi(2)
    }

    pub fn b(&self) -> f64 {
        self.sqrt_b().powi(2)
    }

    /// `(a - 1)/p = d1 (2 + p d1)`, finite at `p = 0`.
    pub fn a_minus_one_over_p(&self) -> f64 {
        self.d1 * (2.0 + self.p * self.d1)
    }

    pub fn b_minus_one_over_q(&self) -> f64 {
        self.d3 * (2.0 + self.q * self.d3)
    }

    /// `a + b - (a-1)/p - (b-1)/q`, which has the sign of the NUT charge.
    pub fn nut_sign_quantity(&self) -> f64 {
        self.a() + self.b() - self.a_minus_one_over_p() - self.b_minus_one_over_q()
    }

    /// The constant term of the normalized profile,
    /// `(sqrt a + sqrt b)/2 - (d1 + d3)/2`.
    pub fn big_a(&self) -> f64 {
        1.0 - 0.5 * ((1.0 - self.p) * self.d1 + (1.0 - self.q) * self.d3)
    }

    pub fn to_profile(&self) -> Result<Profile> {
        let a_const = self.big_a();
        if !(a_const > 0.0) {
            return Err(Error::NonPositiveA(a_const));
        }
        Profile::new(
            a_const,
            vec![
                Turn::new(-self.d1, 0.5 * (1.0 - self.p)),
                Turn::new(0.0, 0.5 * (self.p + self.q)),
                Turn::new(self.d3, 0.5 * (1.0 - self.q)),
            ],
        )
    }

    /// Reads `p = -f'_1`, `q = f'_2` and the normalized gaps off any
    /// three-turning-point profile; invariant under rescaling.
    pub fn from_profile(profile: &Profile) -> Result<Self> {
        if profile.r() != 3 {
            return Err(Error::WrongTurningPointCount(profile.r()));
        }
        let s = profile.slopes();
        let t = profile.turns();
        let f2 = profile.eval(t[1].z);
        Self::new(-s[1], s[2], (t[1].z - t[0].z) / f2, (t[2].z - t[1].z) / f2)
    }
}

/// A family member together with its regularity analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub params: ChenTeoParams,
    pub profile: Profile,
    pub report: RegularityReport,
}

fn member(params: ChenTeoParams) -> Result<FamilyMember> {
    Ok(FamilyMember {
        profile: params.to_profile()?,
        report: regularity::solve_regularity(&params)?,
        params,
    })
}

/// `q = 0`, `1/2 < p < 1`, one conical angle `2 pi / p` and NUT charge
/// `l2 - 1`.
pub fn family_pc33(p: f64, l2: i64) -> Result<FamilyMember> {
    if !(p > 0.5 && p < 1.0) {
        return Err(out_of_range("pc33 family requires 1/2 < p < 1"));
    }
    let alpha = 1.0 / p;
    let a = p / (1.0 - p);
    let d1 = (a.sqrt() - 1.0) / p;
    // (b - 1)/q -> 1 + alpha - l2 and sqrt(b) - 1 ~ (b - 1)/2 at q = 0
    let d3 = 0.5 * (1.0 + alpha - l2 as f64);
    member(ChenTeoParams::new(p, 0.0, d1, d3)?)
}

/// Endpoint profile of the pc33 family as `p -> 1` (`alpha = 1`), with
/// the escaping zero-weight turning point removed.
pub fn pc33_limit_alpha1(l2: i64) -> Result<AnyProfile> {
    let d3 = 0.5 * (2.0 - l2 as f64);
    if d3 < 0.0 {
        return Err(out_of_range("pc33 family requires l2 <= 2"));
    }
    assemble_limit(1.0 - 0.5 * d3, [Turn::new(0.0, 0.5), Turn::new(d3, 0.5)])
}

/// Endpoint profile of the pc33 family as `p -> 1/2` (`alpha = 2`), where
/// the first two turning points merge.
pub fn pc33_limit_alpha2(l2: i64) -> Result<AnyProfile> {
    let d3 = 0.5 * (3.0 - l2 as f64);
    if d3 < 0.0 {
        return Err(out_of_range("pc33 family requires l2 <= 3"));
    }
    assemble_limit(
        1.0 - 0.5 * d3,
        [
            Turn::new(0.0, 0.25),
            Turn::new(0.0, 0.25),
            Turn::new(d3, 0.5),
        ],
    )
}

/// AF members with equal inner angles: `a = 1/(1-p)`, `b = 1/(1-q)`,
/// `alpha_1 = alpha_2 = 1/(p+q)`.
pub fn family_af_equal_angles(p: f64, q: f64) -> Result<FamilyMember> {
    if !(p > -1.0 && p < 1.0 && q > -1.0 && q < 1.0 && p + q > 0.0) {
        return Err(out_of_range(
            "equal-angle family requires p, q in (-1, 1) and p + q > 0",
        ));
    }
    // (1/sqrt(1-p) - 1)/p without cancellation
    let gap = |s: f64| {
        let r = (1.0 - s).sqrt();
        1.0 / (r * (1.0 + r))
    };
    member(ChenTeoParams::new(p, q, gap(p), gap(q))?)
}

/// The `p = q -> 1` endpoint, `1 + |z|`.
pub fn af_equal_angles_limit_one() -> AnyProfile {
    AnyProfile::Alf(Profile::from_pairs(1.0, &[(0.0, 1.0)]).expect("valid"))
}

/// The `p = q -> 0` endpoint in the `f(0) = 1` normalization:
/// both gaps tend to `1/2` and the middle weight vanishes, leaving
/// `1/2 + |z + 1/2|/2 + |z - 1/2|/2`.
pub fn af_equal_angles_limit_zero() -> AnyProfile {
    assemble_limit(
        0.5,
        [
            Turn::new(-0.5, 0.5),
            Turn::new(0.0, 0.0),
            Turn::new(0.5, 0.5),
        ],
    )
    .expect("valid")
}

/// AF profiles with `q` fixed and one conical angle `2 pi (1 + tau)`,
/// `-q <= tau <= 1`; `p = (1 - q)/(1 + tau)`. The endpoints drop the
/// escaping turning point (`tau = -q`) or merge the first two
/// (`tau = 1`).
pub fn family_af_q_tau(q: f64, tau: f64) -> Result<AnyProfile> {
    if !(0.0..1.0).contains(&q) {
        return Err(out_of_range("q must lie in [0, 1)"));
    }
    if !(tau >= -q && tau <= 1.0) {
        return Err(out_of_range("tau must lie in [-q, 1]"));
    }
    let s = (1.0 + q * tau).sqrt();
    let sq = (1.0 - q).sqrt();
    let d3 = (1.0 + tau) / (sq * (s + sq));
    let mid = (1.0 + q * tau) / (2.0 * (1.0 + tau));
    let right = 0.5 * (1.0 - q);
    if tau == -q {
        return assemble_limit(
            1.0 - right * d3,
            [Turn::new(0.0, mid), Turn::new(d3, right)],
        );
    }
    let w = q + tau;
    let d1 = (1.0 - tau * tau) / (w.sqrt() * (s + w.sqrt()));
    // 1 - p = (q + tau)/(1 + tau)
    let one_minus_p = w / (1.0 + tau);
    let a_const = 1.0 - 0.5 * (one_minus_p * d1 + (1.0 - q) * d3);
    assemble_limit(
        a_const,
        [
            Turn::new(-d1, 0.5 * one_minus_p),
            Turn::new(0.0, mid),
            Turn::new(d3, right),
        ],
    )
}

/// `p`, and the conical parameter `alpha = 1 + tau`, of a `(q, tau)`
/// family member.
pub fn af_q_tau_params(q: f64, tau: f64) -> (f64, f64) {
    ((1.0 - q) / (1.0 + tau), 1.0 + tau)
}

/// Regularity data of `A + |z+b|/2 + |z-b|/2`, `A + b = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EhFamilyMember {
    pub profile: AnyProfile,
    /// `-1, 0, 1` for `A` below, at, above `1/2`; absent at the endpoints.
    pub ell: Option<i64>,
    /// Conical parameter of the middle rod (`1` at `A = 1/2`).
    pub alpha: Option<f64>,
    /// `2 pi alpha`, equal to `4 pi |2A - 1|` off `A = 1/2`.
    pub cone_angle: Option<f64>,
    pub smooth: bool,
    pub chain: Option<ChainCheck>,
}

pub fn family_eh(big_a: f64) -> Result<EhFamilyMember> {
    let profile = Preset::EhFamily { big_a }.build()?;
    let alf = match &profile {
        AnyProfile::Alf(p) if p.r() == 2 => p.clone(),
        _ => {
            return Ok(EhFamilyMember {
                profile,
                ell: None,
                alpha: None,
                cone_angle: None,
                smooth: false,
                chain: None,
            })
        }
    };
    // ell alpha = A (F_2 - F_0) = 2 (2A - 1), ell in {-1, 0, 1}
    let defect = 2.0 * (2.0 * big_a - 1.0);
    let (ell, alpha) = if defect == 0.0 {
        (0, 1.0)
    } else {
        (defect.signum() as i64, defect.abs())
    };
    let axis = crate::metric::axis_data(&alf);
    let vs = regularity::killing_vectors(&alf, &axis, &[1.0, alpha, 1.0])?;
    let chain = regularity::chain_check(&vs)?;
    let smooth = chain.ok && (alpha - 1.0).abs() <= 1e-12;
    Ok(EhFamilyMember {
        profile,
        ell: Some(ell),
        alpha: Some(alpha),
        cone_angle: Some(2.0 * std::f64::consts::PI * alpha),
        smooth,
        chain: Some(chain),
    })
}
