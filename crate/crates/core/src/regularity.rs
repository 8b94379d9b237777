//! Rod Killing vectors, the lattice chain condition between consecutive
//! rods, the normalized NUT charge and the cone-angle solution for
//! three-turning-point profiles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chen_teo::ChenTeoParams;
use crate::error::{Error, Result};
use crate::metric::AxisData;
use crate::profile::Profile;

/// Default relative tolerance for integer detection.
pub const INTEGER_TOL: f64 = 1e-9;

/// `c_t d/dt + c_x3 d/dx3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KillingVector {
    pub c_t: f64,
    pub c_x3: f64,
}

impl KillingVector {
    pub fn new(c_t: f64, c_x3: f64) -> Self {
        KillingVector { c_t, c_x3 }
    }

    /// `det(self, other)` in the `(d/dt, d/dx3)` basis.
    pub fn wedge(&self, other: &KillingVector) -> f64 {
        self.c_t * other.c_x3 - self.c_x3 * other.c_t
    }

    pub fn scaled(&self, s: f64) -> Self {
        KillingVector::new(s * self.c_t, s * self.c_x3)
    }
}

/// The vector vanishing on each axis interval, scaled by the cone
/// parameter `alpha_i`: `alpha f'_i (d/dx3 + F_i d/dt)`, or
/// `alpha f_i^2 / A d/dt` on a zero-slope interval.
pub fn killing_vectors(
    profile: &Profile,
    axis: &AxisData,
    alphas: &[f64],
) -> Result<Vec<KillingVector>> {
    let n = profile.r() + 1;
    if alphas.len() != n {
        return Err(Error::AngleCountMismatch {
            expected: n,
            got: alphas.len(),
        });
    }
    if let Some((index, &value)) = alphas.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
        return Err(Error::AngleNonPositive { index, value });
    }
    let a = profile.a_const();
    let fv = profile.turn_values();
    Ok((0..n)
        .map(|i| {
            let s = profile.slopes()[i];
            match axis.f_consts[i] {
                Some(f) if s != 0.0 => KillingVector::new(alphas[i] * s * f, alphas[i] * s),
                _ => KillingVector::new(alphas[i] * fv[i - 1] * fv[i - 1] / a, 0.0),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    /// Raw solution of `v_{i-1} = ell v_i - eps v_{i+1}`.
    pub ell: f64,
    pub eps: f64,
    pub ell_int: Option<i64>,
    pub eps_sign: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub ok: bool,
    pub links: Vec<ChainLink>,
}

impl ChainCheck {
    pub fn ells(&self) -> Vec<Option<i64>> {
        self.links.iter().map(|l| l.ell_int).collect()
    }
}

const CHAIN_TOL: f64 = 1e-9;

/// Nearest integer within `tol * max(1, |x|)`; `None` once that window
/// is wide enough to admit every value.
fn snap(x: f64, tol: f64) -> Option<i64> {
    let r = x.round();
    let window = tol * x.abs().max(1.0);
    ((x - r).abs() <= window && window < 0.5).then_some(r as i64)
}

/// For every interior `i`, solves `v_{i-1} = ell_i v_i - eps_i v_{i+1}`;
/// passes when each `ell_i` is an integer and each `eps_i` is `+-1`.
pub fn chain_check(vs: &[KillingVector]) -> Result<ChainCheck> {
    let mut links = Vec::new();
    for i in 1..vs.len().saturating_sub(1) {
        let (prev, cur, next) = (vs[i - 1], vs[i], vs[i + 1]);
        let det = cur.wedge(&next);
        let scale = (cur.c_t.abs() + cur.c_x3.abs()) * (next.c_t.abs() + next.c_x3.abs());
        if det.abs() <= 1e-14 * scale {
            return Err(Error::DegeneratePair(i, i + 1));
        }
        // prev = ell cur - eps next  (Cramer)
        let ell = prev.wedge(&next) / det;
        let eps = prev.wedge(&cur) / det;
        let ell_int = snap(ell, CHAIN_TOL);
        let eps_sign = if (eps - 1.0).abs() <= CHAIN_TOL {
            Some(1)
        } else if (eps + 1.0).abs() <= CHAIN_TOL {
            Some(-1)
        } else {
            None
        };
        links.push(ChainLink {
            ell,
            eps,
            ell_int,
            eps_sign,
        });
    }
    Ok(ChainCheck {
        ok: links
            .iter()
            .all(|l| l.ell_int.is_some() && l.eps_sign.is_some()),
        links,
    })
}

/// `n = (F_3 - F_0)(F_1 - F_2) / ((F_1 - F_0)(F_2 - F_3))` from the axis
/// constants of a three-turning-point profile.
pub fn nut_charge_from_axis(f_consts: &[Option<f64>]) -> Result<f64> {
    if f_consts.len() != 4 {
        return Err(Error::WrongTurningPointCount(
            f_consts.len().saturating_sub(1),
        ));
    }
    let mut f = [0.0; 4];
    for (i, v) in f_consts.iter().enumerate() {
        f[i] = v.ok_or(Error::DegenerateDenominator)?;
    }
    let den = (f[1] - f[0]) * (f[2] - f[3]);
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    Ok((f[3] - f[0]) * (f[1] - f[2]) / den)
}

/// `n = (p + q) K / (a b (1-p)(1-q))` with `K = a + b - (a-1)/p - (b-1)/q`,
/// which is finite at `p = 0` and `q = 0`.
pub fn nut_charge(c: &ChenTeoParams) -> Result<f64> {
    let den = c.a() * c.b() * (1.0 - c.p()) * (1.0 - c.q());
    if den == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((c.p() + c.q()) * c.nut_sign_quantity() / den)
}

/// Integer nearest to `n` if within `tol * max(1, |n|)` and that window is
/// narrower than one half.
pub fn nut_integer(n: f64, tol: f64) -> Option<i64> {
    snap(n, tol)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Topology {
    /// Raw pair `(n, l)`, not normalized up to homeomorphism.
    LensSpace {
        n: i64,
        l: i64,
    },
    Sphere3,
    S1xS2,
}

impl Topology {
    /// `l / n` for lens spaces.
    pub fn ratio(&self) -> Option<f64> {
        match self {
            Topology::LensSpace { n, l } => Some(*l as f64 / *n as f64),
            _ => None,
        }
    }
}

pub fn classify_boundary(n: i64, l2: i64) -> Topology {
    match n {
        -1 => Topology::Sphere3,
        0 => Topology::S1xS2,
        _ => Topology::LensSpace { n, l: l2 },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    /// `det(v_0, v_3) - n det(v_0, v_1)`, relative.
    pub wedge: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [self.r1, self.r2, self.r3, self.r4, self.wedge]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub nut_charge: f64,
    /// The charge as an exact fraction when computed from rational input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nut_charge_exact: Option<String>,
    pub nut_is_integer: bool,
    pub regular: bool,
    pub l1: Option<i64>,
    pub l2: Option<i64>,
    pub epsilon1: Option<i8>,
    pub epsilon2: Option<i8>,
    /// `alpha_0 .. alpha_3`, with `alpha_0 = 1`.
    pub alphas: Option<[f64; 4]>,
    pub topology: Option<Topology>,
    /// Rod vectors `v_0 .. v_3` in the gauge `F_0 = 0` (unit angles when
    /// not regular); empty when the profile has `A <= 0`.
    pub witnesses: Vec<KillingVector>,
    pub residuals: Option<Residuals>,
    /// Set when the angle solution is not unique: several factorizations
    /// of `n + 1` are admissible, or `n = -1` leaves an integer free.
    pub non_unique: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    fn of(x: f64, tol: f64) -> Sign {
        if x.abs() <= tol {
            Sign::Zero
        } else if x > 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    fn unit(self) -> i64 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }
}

/// The two factors `1 + X n` and `1 + Y n` of `n + 1`, with
/// `X = a q (1-p)/(p+q)`, `Y = b p (1-q)/(p+q)`; `l1 = F1 / alpha_3`,
/// `l2 = F2 alpha_3`.
struct Factors {
    f1: f64,
    f2: f64,
    s1: Sign,
    s2: Sign,
}

struct AngleChoice {
    l1: i64,
    l2: i64,
    alpha3: f64,
    non_unique: bool,
}

fn choose_angles(n: i64, fac: &Factors) -> Result<AngleChoice> {
    if n == -1 {
        return match (fac.s1, fac.s2) {
            (Sign::Zero, Sign::Zero) => Ok(AngleChoice {
                l1: 0,
                l2: 0,
                alpha3: 1.0,
                non_unique: true,
            }),
            // l2 may be any integer with the sign of the other factor;
            // take the one of least magnitude
            (Sign::Zero, s) => Ok(AngleChoice {
                l1: 0,
                l2: s.unit(),
                alpha3: 1.0 / fac.f2.abs(),
                non_unique: true,
            }),
            (s, Sign::Zero) => Ok(AngleChoice {
                l1: s.unit(),
                l2: 0,
                alpha3: fac.f1.abs(),
                non_unique: true,
            }),
            _ => Err(Error::NoPositiveAngleSolution(n)),
        };
    }
    let m = n
        .checked_add(1)
        .filter(|m| m.unsigned_abs() <= 1u64 << 53)
        .ok_or(Error::NoPositiveAngleSolution(n))?;
    let sign = fac.s1.unit();
    if sign == 0 || fac.s2.unit() == 0 || sign * fac.s2.unit() != m.signum() {
        return Err(Error::NoPositiveAngleSolution(n));
    }
    // divisors l1 of n + 1 with the sign of the first factor; pick the one
    // putting alpha_3 = F1 / l1 closest to alpha_0 = 1
    let mabs = m.unsigned_abs();
    let mut best: Option<(f64, i64)> = None;
    let mut count = 0usize;
    let mut d = 1u64;
    while d * d <= mabs {
        if mabs % d == 0 {
            for e in [d, mabs / d] {
                let l1 = sign * e as i64;
                let cost = (fac.f1 / l1 as f64).ln().abs();
                count += 1;
                let better = match best {
                    None => true,
                    Some((c, l)) => cost < c || (cost == c && l1.abs() < l.abs()),
                };
                if better {
                    best = Some((cost, l1));
                }
            }
            if d * d == mabs {
                count -= 1;
            }
        }
        d += 1;
    }
    let (_, l1) = best.ok_or(Error::NoPositiveAngleSolution(n))?;
    Ok(AngleChoice {
        l1,
        l2: m / l1,
        alpha3: fac.f1 / l1 as f64,
        non_unique: count > 1,
    })
}

/// Rod vectors with `d/dt` components multiplied by `A` (normalized
/// `f_2 = 1`, gauge `F_0 = 0`); the chain relations do not depend on
/// that overall factor.
fn scaled_rod_vectors(c: &ChenTeoParams, al: &[f64; 4]) -> [KillingVector; 4] {
    let (p, q, a, b) = (c.p(), c.q(), c.a(), c.b());
    let k = c.nut_sign_quantity();
    // A F_1 = -a(1-p)/p, A F_2 = (p + q - a q (1-p))/(p q), A F_3 = K
    [
        KillingVector::new(0.0, -al[0]),
        KillingVector::new(al[1] * a * (1.0 - p), -p * al[1]),
        KillingVector::new(al[2] * (q * k + b * (1.0 - q)), q * al[2]),
        KillingVector::new(al[3] * k, al[3]),
    ]
}

fn witnesses(c: &ChenTeoParams, al: &[f64; 4]) -> Vec<KillingVector> {
    let big_a = c.big_a();
    if !(big_a > 0.0) {
        return Vec::new();
    }
    scaled_rod_vectors(c, al)
        .iter()
        .map(|v| KillingVector::new(v.c_t / big_a, v.c_x3))
        .collect()
}

fn residuals(c: &ChenTeoParams, n: f64, l1: i64, l2: i64, al: &[f64; 4]) -> Residuals {
    let (p, q, a, b) = (c.p(), c.q(), c.a(), c.b());
    let (l1, l2) = (l1 as f64, l2 as f64);
    let rel = |terms: &[f64]| {
        let s: f64 = terms.iter().sum();
        let m: f64 = terms.iter().map(|t| t.abs()).sum();
        s.abs() / m.max(1.0)
    };
    let v = scaled_rod_vectors(c, al);
    let lhs = v[0].wedge(&v[3]);
    let rhs = n * v[0].wedge(&v[1]);
    Residuals {
        r1: rel(&[l1 * p * al[1], q * al[2], -al[0]]),
        r2: rel(&[p * al[1], l2 * q * al[2], -al[3]]),
        r3: rel(&[
            -l1 * a * p * (1.0 - p) * al[1],
            (p + q - a * q * (1.0 - p)) * al[2],
        ]),
        r4: rel(&[
            (p + q - b * p * (1.0 - q)) * al[1],
            -l2 * b * q * (1.0 - q) * al[2],
        ]),
        wedge: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0),
    }
}

fn assemble(
    c: &ChenTeoParams,
    n: f64,
    n_exact: Option<String>,
    n_int: Option<i64>,
    fac: Option<Factors>,
) -> Result<RegularityReport> {
    let unit = [1.0; 4];
    let Some(ni) = n_int else {
        return Ok(RegularityReport {
            nut_charge: n,
            nut_charge_exact: n_exact,
            nut_is_integer: false,
            regular: false,
            l1: None,
            l2: None,
            epsilon1: None,
            epsilon2: None,
            alphas: None,
            topology: None,
            witnesses: witnesses(c, &unit),
            residuals: None,
            non_unique: false,
        });
    };
    let fac = fac.expect("factors accompany an integer charge");
    let choice = choose_angles(ni, &fac)?;
    let (p, q) = (c.p(), c.q());
    let a3 = choice.alpha3;
    let al = [
        1.0,
        c.b() * (1.0 - q) / (p + q) * a3,
        c.a() * (1.0 - p) / (p + q),
        a3,
    ];
    if let Some((index, &value)) = al.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
        return Err(Error::AngleNonPositive { index, value });
    }
    let res = residuals(c, ni as f64, choice.l1, choice.l2, &al);
    let chain = chain_check(&scaled_rod_vectors(c, &al))?;
    let eps: Vec<Option<i8>> = chain.links.iter().map(|l| l.eps_sign).collect();
    Ok(RegularityReport {
        nut_charge: n,
        nut_charge_exact: n_exact,
        nut_is_integer: true,
        regular: true,
        l1: Some(choice.l1),
        l2: Some(choice.l2),
        epsilon1: eps[0],
        epsilon2: eps[1],
        alphas: Some(al),
        topology: Some(classify_boundary(ni, choice.l2)),
        witnesses: witnesses(c, &al),
        residuals: Some(res),
        non_unique: choice.non_unique,
    })
}

fn float_factors(c: &ChenTeoParams, n: f64) -> Factors {
    let (p, q) = (c.p(), c.q());
    let x = c.a() * q * (1.0 - p) / (p + q);
    let y = c.b() * p * (1.0 - q) / (p + q);
    let (f1, f2) = (1.0 + x * n, 1.0 + y * n);
    Factors {
        f1,
        f2,
        s1: Sign::of(f1, 1e-9),
        s2: Sign::of(f2, 1e-9),
    }
}

/// Full analysis with integer tolerance `tol`; a non-integer charge gives
/// a non-regular report rather than an error.
pub fn classify(c: &ChenTeoParams, tol: f64) -> Result<RegularityReport> {
    let n = nut_charge(c)?;
    let n_int = nut_integer(n, tol);
    let fac = n_int.map(|ni| float_factors(c, ni as f64));
    assemble(c, n, None, n_int, fac)
}

/// Angle solution for an integer charge; errors with [`Error::NonIntegerNut`]
/// otherwise.
pub fn solve_regularity(c: &ChenTeoParams) -> Result<RegularityReport> {
    let r = classify(c, INTEGER_TOL)?;
    if !r.nut_is_integer {
        return Err(Error::NonIntegerNut(r.nut_charge));
    }
    Ok(r)
}

/// Rational parameters for exact classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactParams {
    pub p: BigRational,
    pub q: BigRational,
    pub a: BigRational,
    pub b: BigRational,
    /// `(a - 1)/p` and `(b - 1)/q`.
    am1_p: BigRational,
    bm1_q: BigRational,
}

/// Parses a decimal (`0.25`, `-1e-3`) or fraction (`2/3`) string.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::ParameterOutOfRange(format!("not a rational number: `{s}`"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int}{frac}0").parse().map_err(|_| bad())?;
    let shift = exp - frac.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if shift >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if neg { -r } else { r })
}

impl ExactParams {
    /// From `(p, q, a, b)`; requires `p q != 0`.
    pub fn from_pqab(
        p: BigRational,
        q: BigRational,
        a: BigRational,
        b: BigRational,
    ) -> Result<Self> {
        if p.is_zero() || q.is_zero() {
            return Err(Error::ParameterOutOfRange(
                "exact (p, q, a, b) input needs p q != 0; give d1/d3 instead".into(),
            ));
        }
        let one = BigRational::one();
        Ok(ExactParams {
            am1_p: (&a - &one) / &p,
            bm1_q: (&b - &one) / &q,
            p,
            q,
            a,
            b,
        })
    }

    pub fn from_gaps(p: BigRational, q: BigRational, d1: BigRational, d3: BigRational) -> Self {
        let one = BigRational::one();
        let two = &one + &one;
        let sa = &one + &p * &d1;
        let sb = &one + &q * &d3;
        ExactParams {
            am1_p: &d1 * (&two + &p * &d1),
            bm1_q: &d3 * (&two + &q * &d3),
            a: &sa * &sa,
            b: &sb * &sb,
            p,
            q,
        }
    }

    /// Reads a params JSON object, taking each number's literal text.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let get = |k: &str| -> Result<Option<BigRational>> {
            match value.get(k) {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::Number(n)) => parse_rational(&n.to_string()).map(Some),
                Some(serde_json::Value::String(s)) => parse_rational(s).map(Some),
                Some(_) => Err(Error::ParameterOutOfRange(format!(
                    "`{k}` must be a number"
                ))),
            }
        };
        let need =
            |k: &str| get(k)?.ok_or_else(|| Error::ParameterOutOfRange(format!("missing `{k}`")));
        let (p, q) = (need("p")?, need("q")?);
        match (get("d1")?, get("d3")?) {
            (Some(d1), Some(d3)) => Ok(Self::from_gaps(p, q, d1, d3)),
            _ => Self::from_pqab(p, q, need("a")?, need("b")?),
        }
    }

    pub fn nut_charge(&self) -> Result<BigRational> {
        let one = BigRational::one();
        let k = &self.a + &self.b - &self.am1_p - &self.bm1_q;
        let den = &self.a * &self.b * (&one - &self.p) * (&one - &self.q);
        if den.is_zero() {
            return Err(Error::DegenerateDenominator);
        }
        Ok((&self.p + &self.q) * k / den)
    }

    fn to_f64_params(&self) -> Result<ChenTeoParams> {
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        // d1 = (sqrt(a) - 1)/p is irrational in general; recover it from
        // (a - 1)/p = d1 (2 + p d1) in floating point
        let gap = |m: &BigRational, s: &BigRational| {
            let (m, s) = (f(m), f(s));
            if s == 0.0 {
                0.5 * m
            } else {
                2.0 * m / (2.0 + (4.0 + 4.0 * s * m).sqrt())
            }
        };
        ChenTeoParams::new(
            f(&self.p),
            f(&self.q),
            gap(&self.am1_p, &self.p),
            gap(&self.bm1_q, &self.q),
        )
    }
}

/// Classification with the charge, its integrality and the factor signs
/// decided in exact arithmetic.
pub fn classify_exact(e: &ExactParams) -> Result<RegularityReport> {
    let c = e.to_f64_params()?;
    let n = e.nut_charge()?;
    let n_f = n.to_f64().unwrap_or(f64::NAN);
    let n_str = n.to_string();
    if !n.is_integer() {
        return assemble(&c, n_f, Some(n_str), None, None);
    }
    let ni = n
        .to_integer()
        .to_i64()
        .ok_or(Error::NoPositiveAngleSolution(i64::MAX))?;
    let one = BigRational::one();
    let pq = &e.p + &e.q;
    let x = &e.a * &e.q * (&one - &e.p) / &pq;
    let y = &e.b * &e.p * (&one - &e.q) / &pq;
    let f1 = &one + &x * &n;
    let f2 = &one + &y * &n;
    let sign = |r: &BigRational| {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Pos
        } else {
            Sign::Neg
        }
    };
    let fac = Factors {
        f1: f1.to_f64().unwrap_or(f64::NAN),
        f2: f2.to_f64().unwrap_or(f64::NAN),
        s1: sign(&f1),
        s2: sign(&f2),
    };
    assemble(&c, n_f, Some(n_str), Some(ni), Some(fac))
}

/// Largest violation of the unit-angle system
/// `l1 p + q = 1`, `p + l2 q = 1`, `p + q = a(1-p) = b(1-q)` over the
/// best integers `l1`, `l2`.
pub fn smooth_residual(p: f64, q: f64, a: f64, b: f64) -> f64 {
    let best = |x: f64, other: f64| {
        if x == 0.0 {
            (other - 1.0).abs()
        } else {
            let l = ((1.0 - other) / x).round();
            (l * x + other - 1.0).abs()
        }
    };
    [
        best(p, q),
        best(q, p),
        (p + q - a * (1.0 - p)).abs(),
        (p + q - b * (1.0 - q)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Whether all four cone angles can be `2 pi`.
pub fn check_smooth(c: &ChenTeoParams) -> bool {
    smooth_residual(c.p(), c.q(), c.a(), c.b()) <= 1e-10
}

/// Inclusive ranges for a `(p, q, a, b)` grid scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub p: (f64, f64),
    pub q: (f64, f64),
    pub a: (f64, f64),
    pub b: (f64, f64),
    /// Points per axis in `(p, q, a, b)` order; a degenerate range
    /// contributes one point.
    pub steps: [usize; 4],
}

impl ScanGrid {
    fn axis(range: (f64, f64), steps: usize) -> Vec<f64> {
        if steps <= 1 || range.0 == range.1 {
            return vec![range.0];
        }
        (0..steps)
            .map(|k| {
                let t = (steps - 1 - k) as f64;
                (range.0 * t + range.1 * k as f64) / (steps - 1) as f64
            })
            .collect()
    }

    fn axes(&self) -> [Vec<f64>; 4] {
        [
            Self::axis(self.p, self.steps[0]),
            Self::axis(self.q, self.steps[1]),
            Self::axis(self.a, self.steps[2]),
            Self::axis(self.b, self.steps[3]),
        ]
    }

    pub fn len(&self) -> usize {
        self.axes().iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th point in lexicographic `(p, q, a, b)` order.
    fn point(axes: &[Vec<f64>; 4], mut k: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in (0..4).rev() {
            let n = axes[i].len();
            out[i] = axes[i][k % n];
            k /= n;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub nut_charge: f64,
    pub regular: bool,
    pub smooth: bool,
    pub l1: Option<i64>,
    pub l2: Option<i64>,
    pub alphas: Option<[f64; 4]>,
}

/// Classifies every admissible grid point in parallel; points that are
/// not valid parameters are skipped. Rows keep grid order.
pub fn scan_grid(grid: &ScanGrid, tol: f64) -> Vec<ScanRow> {
    scan_grid_filtered(grid, tol, |_| true)
}

/// [`scan_grid`] keeping only rows accepted by `keep`.
pub fn scan_grid_filtered(
    grid: &ScanGrid,
    tol: f64,
    keep: impl Fn(&ScanRow) -> bool + Sync,
) -> Vec<ScanRow> {
    use rayon::prelude::*;
    let axes = grid.axes();
    (0..grid.len())
        .into_par_iter()
        .filter_map(|k| {
            let [p, q, a, b] = ScanGrid::point(&axes, k);
            let c = ChenTeoParams::from_pqab(p, q, a, b).ok()?;
            let rep = classify(&c, tol).ok()?;
            let row = ScanRow {
                p,
                q,
                a,
                b,
                nut_charge: rep.nut_charge,
                regular: rep.regular,
                smooth: smooth_residual(p, q, a, b) <= 1e-10,
                l1: rep.l1,
                l2: rep.l2,
                alphas: rep.alphas,
            };
            keep(&row).then_some(row)
        })
        .collect()
}
