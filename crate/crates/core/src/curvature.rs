//! Finite-difference curvature of a 4-metric that depends only on the last
//! two coordinates `(rho, z)`; the first two (`t`, `x3`) are cyclic.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<f64>;

const RHO: usize = 2;
const Z: usize = 3;

/// Condition number above which curvature is not attempted.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct CurvatureFd {
    pub metric: Mat4,
    pub ricci: Mat4,
    pub scalar: f64,
    /// Largest absolute second derivative of a metric entry.
    pub max_second_derivative: f64,
}

/// Default step: `1e-4 max(1, rho)`.
pub fn default_step(rho: f64) -> f64 {
    1e-4 * rho.max(1.0)
}

pub fn condition_number(g: &Mat4) -> f64 {
    let eig = SymmetricEigen::new(*g).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| {
        (lo.min(e.abs()), hi.max(e.abs()))
    });
    hi / lo
}

struct Stencil {
    /// `d_c g` for `c` in `{rho, z}`.
    d1: [Mat4; 2],
    /// `d_c d_e g`.
    d2: [[Mat4; 2]; 2],
}

fn stencil<F>(metric: &F, rho: f64, z: f64, h: f64, g0: &Mat4) -> Result<Stencil>
where
    F: Fn(f64, f64) -> Result<Mat4>,
{
    let rp = metric(rho + h, z)?;
    let rm = metric(rho - h, z)?;
    let zp = metric(rho, z + h)?;
    let zm = metric(rho, z - h)?;
    let pp = metric(rho + h, z + h)?;
    let pm = metric(rho + h, z - h)?;
    let mp = metric(rho - h, z + h)?;
    let mm = metric(rho - h, z - h)?;
    let h2 = h * h;
    let mixed = (pp - pm - mp + mm) / (4.0 * h2);
    Ok(Stencil {
        d1: [(rp - rm) / (2.0 * h), (zp - zm) / (2.0 * h)],
        d2: [
            [(rp - 2.0 * g0 + rm) / h2, mixed],
            [mixed, (zp - 2.0 * g0 + zm) / h2],
        ],
    })
}

/// Ricci tensor and scalar curvature by central differences with one
/// Richardson level (steps `h` and `h/2`), Christoffel symbols assembled
/// from the differenced metric.
pub fn curvature_fd<F>(metric: F, rho: f64, z: f64, h: f64) -> Result<CurvatureFd>
where
    F: Fn(f64, f64) -> Result<Mat4>,
{
    if !(h > 0.0) || !(rho > 2.0 * h) {
        return Err(Error::StepTooLarge { step: h, rho });
    }
    let g = metric(rho, z)?;
    let cond = condition_number(&g);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let coarse = stencil(&metric, rho, z, h, &g)?;
    let fine = stencil(&metric, rho, z, 0.5 * h, &g)?;
    let rich = |a: &Mat4, b: &Mat4| (4.0 * b - a) / 3.0;
    let d1 = [
        rich(&coarse.d1[0], &fine.d1[0]),
        rich(&coarse.d1[1], &fine.d1[1]),
    ];
    let mut d2 = [[Mat4::zeros(); 2]; 2];
    for (i, row) in d2.iter_mut().enumerate() {
        for (j, m) in row.iter_mut().enumerate() {
            *m = rich(&coarse.d2[i][j], &fine.d2[i][j]);
        }
    }
    let ricci = ricci_from_derivatives(&g, &d1, &d2)?;
    let ginv = g
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let scalar = (ginv * ricci).trace();
    let max_second_derivative = d2.iter().flatten().map(|m| m.amax()).fold(0.0, f64::max);
    Ok(CurvatureFd {
        metric: g,
        ricci,
        scalar,
        max_second_derivative,
    })
}

/// `R_bd = d_a G^a_bd - d_d G^a_ab + G^a_ae G^e_bd - G^a_de G^e_ab`, where
/// only `rho` and `z` derivatives are nonzero.
pub fn ricci_from_derivatives(g: &Mat4, d1: &[Mat4; 2], d2: &[[Mat4; 2]; 2]) -> Result<Mat4> {
    let ginv = g
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    // full-index views: derivative along coordinate c
    let dg = |c: usize| -> Mat4 {
        match c {
            RHO => d1[0],
            Z => d1[1],
            _ => Mat4::zeros(),
        }
    };
    let ddg = |c: usize, e: usize| -> Mat4 {
        match (c, e) {
            (RHO, RHO) => d2[0][0],
            (RHO, Z) => d2[0][1],
            (Z, RHO) => d2[1][0],
            (Z, Z) => d2[1][1],
            _ => Mat4::zeros(),
        }
    };
    let dgs: Vec<Mat4> = (0..4).map(dg).collect();
    let dginv: Vec<Mat4> = dgs.iter().map(|d| -ginv * d * ginv).collect();

    // first-kind combination [bc, d] = d_b g_dc + d_c g_db - d_d g_bc
    let mut gamma = [[[0.0f64; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += ginv[(a, d)] * (dgs[b][(d, c)] + dgs[c][(d, b)] - dgs[d][(b, c)]);
                }
                gamma[a][b][c] = 0.5 * s;
            }
        }
    }
    // d_e Gamma^a_bc, nonzero only for e in {rho, z}
    let mut dgamma = [[[[0.0f64; 4]; 4]; 4]; 4];
    for e in [RHO, Z] {
        let dd: Vec<Mat4> = (0..4).map(|c| ddg(e, c)).collect();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let mut s = 0.0;
                    for d in 0..4 {
                        s += dginv[e][(a, d)] * (dgs[b][(d, c)] + dgs[c][(d, b)] - dgs[d][(b, c)]);
                        s += ginv[(a, d)] * (dd[b][(d, c)] + dd[c][(d, b)] - dd[d][(b, c)]);
                    }
                    dgamma[e][a][b][c] = 0.5 * s;
                }
            }
        }
    }
    let mut ric = Mat4::zeros();
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += dgamma[a][a][b][d] - dgamma[d][a][a][b];
                for e in 0..4 {
                    s += gamma[a][a][e] * gamma[e][b][d] - gamma[a][d][e] * gamma[e][a][b];
                }
            }
            ric[(b, d)] = s;
        }
    }
    Ok(ric)
}
