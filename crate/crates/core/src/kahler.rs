//! The conformally related Kähler metric `g_K = x1^2 g`: moment maps of
//! `d/dt` and `d/dx3`, volume density, the moment polytope and the
//! scalar-curvature law `Scal = 6 k x1`, `k = 2A`.

use serde::{Deserialize, Serialize};

use crate::curvature::{self, Mat4};
use crate::error::{Error, Result};
use crate::metric::{axis_data, eval_fields, metric_matrix};
use crate::potential::RodSums;
use crate::profile::{Preset, Profile};
use crate::regularity::{killing_vectors, KillingVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub x1: f64,
    pub mu: f64,
}

/// `x1 = 2/H_z` and `mu = -(z H_z + rho H_rho - 2H)/(A H_z)` off the axis,
/// with `H` in the zero-constant gauge.
pub fn moments(profile: &Profile, rho: f64, z: f64) -> Result<MomentPair> {
    moments_with_h_shift(profile, rho, z, 0.0)
}

/// As [`moments`] with `H` replaced by `H + c`.
pub fn moments_with_h_shift(profile: &Profile, rho: f64, z: f64, c: f64) -> Result<MomentPair> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::AxisEvaluation(rho));
    }
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    let a = profile.a_const();
    let s = RodSums::new(profile, rho, z);
    // H_z = 2P; z P - 2 A z - sum a u d = sum a z_i d_i - A z
    if !(s.p > 0.0) || !s.p.is_finite() {
        return Err(Error::DegenerateHz(rho, z));
    }
    let weighted: f64 = profile
        .turns()
        .iter()
        .zip(&s.d)
        .map(|(t, d)| t.a * t.z * d)
        .sum();
    let x1 = 1.0 / s.p;
    Ok(MomentPair {
        x1,
        mu: (a * z - weighted) / (a * s.p) + c / a * x1,
    })
}

/// Axis values `x1 = 1/f(z)`, `mu = (H(0, z)/f(z) - z)/A`.
pub fn axis_moments(profile: &Profile, z: f64) -> MomentPair {
    let a = profile.a_const();
    let f = profile.eval(z);
    let h = crate::potential::axis_h(profile, z);
    MomentPair {
        x1: 1.0 / f,
        mu: (h / f - z) / a,
    }
}

/// Coefficient of the Kähler volume form,
/// `4 V (U_rhoz^2 + U_zz^2)/(rho U_rho^4)`; equals `x1^4 sqrt(det g)`.
pub fn volume_density(profile: &Profile, rho: f64, z: f64) -> Result<f64> {
    let s = eval_fields(profile, rho, z)?;
    let p = RodSums::new(profile, rho, z).p;
    Ok(rho * s.e2nu / p.powi(4))
}

/// `g_K = x1^2 g` in coordinates `(t, x3, rho, z)`.
pub fn kahler_metric(profile: &Profile, rho: f64, z: f64) -> Result<Mat4> {
    let x1 = moments(profile, rho, z)?.x1;
    Ok(metric_matrix(profile, rho, z)? * (x1 * x1))
}

/// Finite-difference scalar curvature of `g_K` and the expected `12 A x1`.
pub fn scalar_curvature_check(profile: &Profile, rho: f64, z: f64, h: f64) -> Result<(f64, f64)> {
    let c = curvature::curvature_fd(|r, zz| kahler_metric(profile, r, zz), rho, z, h)?;
    let x1 = moments(profile, rho, z)?.x1;
    Ok((c.scalar, 12.0 * profile.a_const() * x1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeEdge {
    /// `E_0 .. E_r`, `E_inf`.
    pub label: String,
    pub from: usize,
    pub to: usize,
    /// Rod vector whose moment is constant on the edge; absent for `E_inf`.
    pub normal: Option<KillingVector>,
    pub dashed: bool,
}

/// Affine chart `(x, y) = M (x1, mu) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
    pub vertices: Vec<[f64; 2]>,
}

impl Basis {
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + self.offset[0],
            m[1][0] * v[0] + m[1][1] * v[1] + self.offset[1],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    /// `(x1, mu)`: the `z -> -inf` end, the turning points, the `z -> +inf` end.
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<PolytopeEdge>,
    /// Vertices with `mu' = mu + F_0 x1`, which makes `E_0` horizontal
    /// and does not depend on the additive constant of `H`.
    pub regauged: Vec<[f64; 2]>,
    /// Largest difference between a vertex `mu` computed from the two
    /// adjacent intervals, where both have nonzero slope.
    pub side_mismatch: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
}

impl Polytope {
    /// `z` cross products of consecutive edge vectors around the cycle.
    pub fn turning_cross_products(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let c = self.vertices[(i + 2) % n];
                (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            })
            .collect()
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        let cs = self.turning_cross_products();
        cs.iter().all(|c| *c >= -tol) || cs.iter().all(|c| *c <= tol)
    }

    /// Unit direction of each edge in the regauged chart.
    pub fn regauged_directions(&self) -> Vec<[f64; 2]> {
        let n = self.regauged.len();
        (0..n)
            .map(|i| {
                let a = self.regauged[i];
                let b = self.regauged[(i + 1) % n];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                [dx / len, dy / len]
            })
            .collect()
    }
}

/// Moment polytope with unit angles unless `angles` (one per axis
/// interval) are given; the angles only scale the edge normals.
pub fn polytope(profile: &Profile, angles: Option<&[f64]>) -> Result<Polytope> {
    polytope_with_h_shift(profile, angles, 0.0)
}

/// As [`polytope`] with `H` replaced by `H + c`, which sends
/// `F -> F - c/A` and `mu -> mu + (c/A) x1`.
pub fn polytope_with_h_shift(
    profile: &Profile,
    angles: Option<&[f64]>,
    c: f64,
) -> Result<Polytope> {
    let a = profile.a_const();
    let r = profile.r();
    let slopes = profile.slopes();
    let axis = axis_data(profile);
    let unit = vec![1.0; r + 1];
    let alphas = angles.unwrap_or(&unit);
    let normals = killing_vectors(profile, &axis, alphas)?;
    let fc: Vec<Option<f64>> = axis.f_consts.iter().map(|f| f.map(|f| f - c / a)).collect();
    let fv = profile.turn_values();

    // edge j in the chart is mu = -F_j x1 + (f_i/f'_j - z_i)/A
    let branch = |j: usize, i: usize| -> Option<f64> {
        let (f, t) = (fv[i], profile.turns()[i]);
        fc[j].map(|fj| -fj / f + (f / slopes[j] - t.z) / a)
    };
    let m1 = profile.first_moment();
    let mut vertices = vec![[0.0, -(a + m1) / a]];
    let mut side_mismatch = 0.0f64;
    for (i, f) in fv.iter().enumerate() {
        let (lo, hi) = (i, i + 1);
        if slopes[lo] == 0.0 && slopes[hi] == 0.0 {
            return Err(Error::AdjacentSlopesBothZero(i + 1));
        }
        let pick = if slopes[hi].abs() > slopes[lo].abs() {
            hi
        } else {
            lo
        };
        let mu = branch(pick, i).ok_or(Error::AdjacentSlopesBothZero(i + 1))?;
        if let (Some(x), Some(y)) = (branch(lo, i), branch(hi, i)) {
            side_mismatch = side_mismatch.max((x - y).abs());
        }
        vertices.push([1.0 / f, mu]);
    }
    vertices.push([0.0, (a - m1) / a]);

    let mut edges: Vec<PolytopeEdge> = (0..=r)
        .map(|j| PolytopeEdge {
            label: format!("E_{j}"),
            from: j,
            to: j + 1,
            normal: Some(normals[j]),
            dashed: false,
        })
        .collect();
    edges.push(PolytopeEdge {
        label: "E_inf".into(),
        from: r + 1,
        to: 0,
        normal: None,
        dashed: true,
    });
    let f0 = fc[0].expect("outer slope is -1");
    let regauged = vertices.iter().map(|v| [v[0], v[1] + f0 * v[0]]).collect();
    Ok(Polytope {
        vertices,
        edges,
        regauged,
        side_mismatch,
        basis: None,
    })
}

/// `p` when `profile` is the `chen_teo_instanton` preset for some `p`.
pub fn detect_chen_teo_instanton(profile: &Profile) -> Option<f64> {
    if profile.r() != 3 {
        return None;
    }
    let p = -profile.slopes()[1];
    let preset = Preset::ChenTeoInstanton { p }
        .build()
        .ok()?
        .into_alf()
        .ok()?;
    let same = (preset.a_const() - profile.a_const()).abs() <= 1e-9
        && preset
            .turns()
            .iter()
            .zip(profile.turns())
            .all(|(x, y)| (x.z - y.z).abs() <= 1e-9 && (x.a - y.a).abs() <= 1e-9);
    same.then_some(p)
}

/// Polytope of the `chen_teo_instanton` preset in the chart
/// `y = mu + F_0 x1 + (p^{3/2} - q^{3/2} - p + q)/(2A)`,
/// `x = -p (y + (F_1 - F_0) x1)`, `q = 1 - p`.
pub fn chen_teo_chart(p: f64) -> Result<Polytope> {
    let profile = Preset::ChenTeoInstanton { p }.build()?.into_alf()?;
    let mut poly = polytope(&profile, None)?;
    let axis = axis_data(&profile);
    let (f0, f1) = (axis.f_consts[0].unwrap(), axis.f_consts[1].unwrap());
    let q = 1.0 - p;
    let two_a = 2.0 * profile.a_const();
    let c0 = (p.powf(1.5) - q.powf(1.5) - p + q) / two_a;
    let mut basis = Basis {
        matrix: [[-p * f1, -p], [f0, 1.0]],
        offset: [-p * c0, c0],
        vertices: Vec::new(),
    };
    basis.vertices = poly.vertices.iter().map(|v| basis.apply(*v)).collect();
    poly.basis = Some(basis);
    Ok(poly)
}
