//! The `alf` command line. [`run`] parses arguments, writes JSON or CSV,
//! and returns the process exit code: 0 on success, 1 when a requested
//! check fails, 2 on usage or input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chen_teo::{self, ChenTeoParams, FamilyMember};
use crate::curvature;
use crate::kahler;
use crate::metric::{self, AxisData, FieldSample};
use crate::potential;
use crate::profile::{sample_grid, AnyProfile, Preset, Profile, PRESET_NAMES};
use crate::regularity::{self, ExactParams, RegularityReport, ScanGrid, ScanRow};
use crate::serde_util::fmt_f64;

#[derive(Parser, Debug)]
#[command(
    name = "alf",
    version,
    about = "Toric ALF instantons from rod profiles"
)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate or sample a profile.
    #[command(subcommand)]
    Profile(ProfileCmd),
    /// The harmonic potential and its derivatives.
    #[command(subcommand)]
    Potential(PotentialCmd),
    /// Metric fields, axis data and the Ricci check.
    #[command(subcommand)]
    Metric(MetricCmd),
    /// Moment maps, polytopes and the Kähler scalar curvature.
    #[command(subcommand)]
    Kahler(KahlerCmd),
    /// Regularity report for three-turning-point parameters.
    Classify(ClassifyArgs),
    /// A member of a named one-parameter family.
    Family(FamilyArgs),
    /// Parallel grid scan over (p, q, a, b).
    Scan(ScanArgs),
}

#[derive(Subcommand, Debug)]
enum ProfileCmd {
    /// Check a profile JSON file.
    Validate { file: PathBuf },
    /// Sample f(z) on a grid (CSV).
    Plot {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        z_min: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        z_max: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum PotentialCmd {
    /// U, its derivatives and H at one point (JSON).
    Sample {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        at: Point,
    },
    /// U and H on a (rho, z) grid (CSV).
    Grid {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        grid: Grid,
    },
}

#[derive(Subcommand, Debug)]
enum MetricCmd {
    /// V, F, e^{2nu} and the metric matrix at one point (JSON).
    Sample {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        at: Point,
    },
    /// Axis constants F_i and asymptotic data (JSON).
    Axis {
        #[command(flatten)]
        src: Source,
    },
    /// Finite-difference Ricci residual at random off-axis points.
    CheckRicci {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        check: Check,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
enum KahlerCmd {
    /// Moment polytope (JSON).
    Polytope {
        #[command(flatten)]
        src: Source,
        /// Emit the chen_teo_instanton polytope in its standard (x, y) chart.
        #[arg(long)]
        fig2_basis: bool,
        /// Cone parameters, one per axis interval.
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        /// Constant added to H.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        h_shift: f64,
    },
    /// x1, mu and the volume density on a grid (CSV).
    MomentsGrid {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        grid: Grid,
    },
    /// Scalar curvature of the Kähler metric against 12 A x1.
    ScalarCheck {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        check: Check,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

/// A profile from a file or a preset.
#[derive(Args, Debug)]
struct Source {
    /// Profile JSON file.
    #[arg(long, conflicts_with = "preset")]
    profile: Option<PathBuf>,
    /// One of the named presets.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long = "A", allow_hyphen_values = true)]
    big_a: Option<f64>,
}

#[derive(Args, Debug)]
struct Point {
    #[arg(long)]
    rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
}

#[derive(Args, Debug)]
#[group(id = "grid_opts")]
struct Grid {
    #[arg(long, default_value_t = 4.0)]
    rho_max: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    z_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    z_max: f64,
    #[arg(long, default_value_t = 40)]
    nrho: usize,
    #[arg(long, default_value_t = 81)]
    nz: usize,
}

#[derive(Args, Debug)]
#[group(id = "check_opts")]
struct Check {
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Finite-difference step; defaults to 1e-4 max(1, rho).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, num_args = 2, default_values_t = [0.2, 3.0])]
    rho_range: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [-3.0, 3.0], allow_hyphen_values = true)]
    z_range: Vec<f64>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Parameters as inline JSON or a path to a JSON file:
    /// {"p","q","a","b"} or {"p","q","d1","d3"}.
    #[arg(long, required_unless_present = "scan")]
    params: Option<String>,
    /// Relative tolerance for the integer test on the NUT charge.
    #[arg(long, default_value_t = regularity::INTEGER_TOL)]
    tol: f64,
    /// Decide integrality in rational arithmetic from the literal inputs.
    #[arg(long)]
    exact: bool,
    /// Grid scan: p0 p1 q0 q1 a0 a1 b0 b1 (CSV).
    #[arg(
        long,
        num_args = 8,
        allow_hyphen_values = true,
        conflicts_with = "params"
    )]
    scan: Option<Vec<f64>>,
    #[arg(long, default_value_t = 11)]
    steps: usize,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// pc33, pc33-limit, af-equal-angles, af-equal-angles-limit, af-q-tau, eh
    name: String,
    /// key=value, repeated.
    #[arg(long = "param", value_parser = parse_key_val)]
    params: Vec<(String, f64)>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, num_args = 2, allow_hyphen_values = true, default_values_t = [-0.9, 0.9])]
    p_range: Vec<f64>,
    #[arg(long, num_args = 2, allow_hyphen_values = true, default_values_t = [-0.9, 0.9])]
    q_range: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [0.25, 5.0])]
    a_range: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [0.25, 5.0])]
    b_range: Vec<f64>,
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[arg(long, default_value_t = regularity::INTEGER_TOL)]
    tol: f64,
    /// Keep only rows where all four angles can be 2 pi.
    #[arg(long)]
    smooth_only: bool,
}

fn parse_key_val(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|_| format!("not a number: `{v}`"))?;
    Ok((k.to_string(), v))
}

enum Failure {
    Usage(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Out = std::result::Result<(String, bool), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn json<T: Serialize>(v: &T) -> std::result::Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl Source {
    fn load_any(&self) -> std::result::Result<AnyProfile, Failure> {
        match (&self.profile, &self.preset) {
            (Some(path), _) => {
                let text = read(path)?;
                let p = Profile::from_json(&text)
                    .map_err(|e| usage(format!("invalid profile {}: {e}", path.display())))?;
                Ok(AnyProfile::Alf(p))
            }
            (None, Some(name)) => {
                let preset = Preset::from_name(name, |k| match k {
                    "m" => self.m,
                    "n" => self.n,
                    "a" => self.a,
                    "b" => self.b,
                    "p" => self.p,
                    "A" => self.big_a,
                    _ => None,
                })?;
                Ok(preset.build()?)
            }
            (None, None) => Err(usage(format!(
                "give --profile FILE or --preset NAME ({})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    fn load(&self) -> std::result::Result<Profile, Failure> {
        Ok(self.load_any()?.into_alf()?)
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn opt_f(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt_i(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

impl Grid {
    fn points(&self) -> std::result::Result<Vec<(f64, f64)>, Failure> {
        if self.nrho == 0 || self.nz == 0 || !(self.rho_max > 0.0) {
            return Err(usage("grid needs nrho, nz >= 1 and rho_max > 0"));
        }
        let rhos: Vec<f64> = (1..=self.nrho)
            .map(|k| self.rho_max * k as f64 / self.nrho as f64)
            .collect();
        let zs = linspace(self.z_min, self.z_max, self.nz);
        Ok(rhos
            .iter()
            .flat_map(|&r| zs.iter().map(move |&z| (r, z)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckPoint {
    pub rho: f64,
    pub z: f64,
    /// Absent when the evaluation failed.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_residual: f64,
    pub passed: bool,
    pub points: Vec<CheckPoint>,
}

impl Check {
    fn run(
        &self,
        tol: f64,
        f: impl Fn(f64, f64, f64) -> crate::Result<f64> + Sync,
    ) -> std::result::Result<CheckReport, Failure> {
        if self.samples == 0 || !(tol > 0.0) {
            return Err(usage("need samples >= 1 and tol > 0"));
        }
        let (r0, r1) = (self.rho_range[0], self.rho_range[1]);
        let (z0, z1) = (self.z_range[0], self.z_range[1]);
        if !(r0 > 0.0 && r1 > r0 && z1 > z0) {
            return Err(usage("need 0 < rho_min < rho_max and z_min < z_max"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pts: Vec<(f64, f64)> = (0..self.samples)
            .map(|_| (rng.gen_range(r0..r1), rng.gen_range(z0..z1)))
            .collect();
        let points: Vec<CheckPoint> = pts
            .par_iter()
            .map(|&(rho, z)| {
                let h = self.step.unwrap_or_else(|| curvature::default_step(rho));
                CheckPoint {
                    rho,
                    z,
                    residual: f(rho, z, h).ok().filter(|r| r.is_finite()),
                }
            })
            .collect();
        let max_residual = points
            .iter()
            .map(|p| p.residual.unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        Ok(CheckReport {
            samples: self.samples,
            seed: self.seed,
            tol,
            passed: max_residual < tol,
            max_residual: if max_residual.is_finite() {
                max_residual
            } else {
                f64::MAX
            },
            points,
        })
    }
}

#[derive(Serialize)]
struct Validation<'a> {
    valid: bool,
    #[serde(rename = "A")]
    a: f64,
    r: usize,
    slopes: &'a [f64],
    turn_values: Vec<f64>,
    minimum: f64,
    af_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub fields: FieldSample,
    /// Absent on the axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<[[f64; 4]; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    #[serde(flatten)]
    pub axis: AxisData,
    pub turn_values: Vec<f64>,
    pub jump_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTauMember {
    pub q: f64,
    pub tau: f64,
    pub p: f64,
    pub alpha: f64,
    pub profile: AnyProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ChenTeoParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RegularityReport>,
}

fn profile_cmd(cmd: ProfileCmd) -> Out {
    match cmd {
        ProfileCmd::Validate { file } => {
            let text = read(&file)?;
            let p = Profile::from_json(&text)
                .map_err(|e| usage(format!("invalid profile {}: {e}", file.display())))?;
            let axis = metric::axis_data(&p);
            let v = Validation {
                valid: true,
                a: p.a_const(),
                r: p.r(),
                slopes: p.slopes(),
                turn_values: p.turn_values(),
                minimum: p.minimum(),
                af_defect: axis.af_defect,
            };
            Ok((json(&v)?, true))
        }
        ProfileCmd::Plot {
            src,
            z_min,
            z_max,
            samples,
        } => {
            if samples == 0 || !(z_max >= z_min) {
                return Err(usage("need samples >= 1 and z_min <= z_max"));
            }
            let p = src.load_any()?;
            let rows = sample_grid(&p, z_min, z_max, samples)
                .into_iter()
                .map(|(z, f)| vec![fmt_f64(z), fmt_f64(f)]);
            Ok((csv(&["z", "f"], rows), true))
        }
    }
}

fn potential_cmd(cmd: PotentialCmd) -> Out {
    match cmd {
        PotentialCmd::Sample { src, at } => {
            let p = src.load()?;
            Ok((json(&potential::eval_potential(&p, at.rho, at.z)?)?, true))
        }
        PotentialCmd::Grid { src, grid } => {
            let p = src.load()?;
            let rows: Vec<Vec<String>> = grid
                .points()?
                .par_iter()
                .map(|&(rho, z)| {
                    vec![
                        fmt_f64(rho),
                        fmt_f64(z),
                        opt_f(potential::eval_u(&p, rho, z).ok()),
                        opt_f(potential::eval_h(&p, rho, z).ok()),
                    ]
                })
                .collect();
            Ok((csv(&["rho", "z", "U", "H"], rows), true))
        }
    }
}

fn metric_cmd(cmd: MetricCmd) -> Out {
    match cmd {
        MetricCmd::Sample { src, at } => {
            let p = src.load()?;
            let sample = if at.rho == 0.0 {
                MetricSample {
                    fields: metric::eval_axis_fields(&p, at.z)?,
                    g: None,
                }
            } else {
                let fields = metric::eval_fields(&p, at.rho, at.z)?;
                let g = metric::MetricAtPoint::from_fields(&fields).g;
                MetricSample { fields, g: Some(g) }
            };
            Ok((json(&sample)?, true))
        }
        MetricCmd::Axis { src } => {
            let p = src.load()?;
            let axis = metric::axis_data(&p);
            let report = AxisReport {
                jump_residual: axis.jump_residual(&p),
                turn_values: p.turn_values(),
                axis,
            };
            Ok((json(&report)?, true))
        }
        MetricCmd::CheckRicci { src, check, tol } => {
            let p = src.load()?;
            let r = check.run(tol, |rho, z, h| metric::ricci_residual(&p, rho, z, h))?;
            Ok((json(&r)?, r.passed))
        }
    }
}

fn kahler_cmd(cmd: KahlerCmd) -> Out {
    match cmd {
        KahlerCmd::Polytope {
            src,
            fig2_basis,
            angles,
            h_shift,
        } => {
            let p = src.load()?;
            let poly = if fig2_basis {
                let x = kahler::detect_chen_teo_instanton(&p).ok_or_else(|| {
                    usage("--fig2-basis applies only to the chen_teo_instanton preset")
                })?;
                if angles.is_some() || h_shift != 0.0 {
                    return Err(usage("--fig2-basis takes no --angles or --h-shift"));
                }
                kahler::chen_teo_chart(x)?
            } else {
                kahler::polytope_with_h_shift(&p, angles.as_deref(), h_shift)?
            };
            Ok((json(&poly)?, true))
        }
        KahlerCmd::MomentsGrid { src, grid } => {
            let p = src.load()?;
            let rows: Vec<Vec<String>> = grid
                .points()?
                .par_iter()
                .map(|&(rho, z)| {
                    let m = kahler::moments(&p, rho, z).ok();
                    vec![
                        fmt_f64(rho),
                        fmt_f64(z),
                        opt_f(m.map(|m| m.x1)),
                        opt_f(m.map(|m| m.mu)),
                        opt_f(kahler::volume_density(&p, rho, z).ok()),
                    ]
                })
                .collect();
            Ok((csv(&["rho", "z", "x1", "mu", "volume_density"], rows), true))
        }
        KahlerCmd::ScalarCheck { src, check, tol } => {
            let p = src.load()?;
            let r = check.run(tol, |rho, z, h| {
                let (scal, want) = kahler::scalar_curvature_check(&p, rho, z, h)?;
                Ok((scal - want).abs() / want.abs())
            })?;
            Ok((json(&r)?, r.passed))
        }
    }
}

fn scan_csv(rows: &[ScanRow]) -> String {
    csv(
        &[
            "p",
            "q",
            "a",
            "b",
            "nut_charge",
            "regular",
            "smooth",
            "l1",
            "l2",
            "alpha0",
            "alpha1",
            "alpha2",
            "alpha3",
        ],
        rows.iter().map(|r| {
            let mut v = vec![
                fmt_f64(r.p),
                fmt_f64(r.q),
                fmt_f64(r.a),
                fmt_f64(r.b),
                fmt_f64(r.nut_charge),
                r.regular.to_string(),
                r.smooth.to_string(),
                opt_i(r.l1),
                opt_i(r.l2),
            ];
            for i in 0..4 {
                v.push(opt_f(r.alphas.map(|a| a[i])));
            }
            v
        }),
    )
}

fn grid_of(
    p: &[f64],
    q: &[f64],
    a: &[f64],
    b: &[f64],
    steps: usize,
) -> std::result::Result<ScanGrid, Failure> {
    if steps == 0 {
        return Err(usage("steps must be at least 1"));
    }
    Ok(ScanGrid {
        p: (p[0], p[1]),
        q: (q[0], q[1]),
        a: (a[0], a[1]),
        b: (b[0], b[1]),
        steps: [steps; 4],
    })
}

fn classify_cmd(args: ClassifyArgs) -> Out {
    if !(args.tol > 0.0) {
        return Err(usage("tol must be positive"));
    }
    if let Some(s) = &args.scan {
        let grid = grid_of(&s[0..2], &s[2..4], &s[4..6], &s[6..8], args.steps)?;
        return Ok((scan_csv(&regularity::scan_grid(&grid, args.tol)), true));
    }
    let raw = args.params.expect("clap enforces --params");
    let text = if raw.trim_start().starts_with('{') {
        raw
    } else {
        read(Path::new(&raw))?
    };
    let report = if args.exact {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("params: {e}")))?;
        regularity::classify_exact(&ExactParams::from_json(&value)?)?
    } else {
        let c = ChenTeoParams::from_json(&text).map_err(|e| usage(format!("params: {e}")))?;
        regularity::classify(&c, args.tol)?
    };
    let ok = report.regular;
    Ok((json(&report)?, ok))
}

fn family_cmd(args: FamilyArgs) -> Out {
    let get = |k: &str| {
        args.params
            .iter()
            .rev()
            .find(|(key, _)| key == k)
            .map(|(_, v)| *v)
            .ok_or_else(|| usage(format!("family {} needs --param {k}=...", args.name)))
    };
    let int = |k: &str| -> std::result::Result<i64, Failure> {
        let v = get(k)?;
        if v.fract() != 0.0 {
            return Err(usage(format!("{k} must be an integer")));
        }
        Ok(v as i64)
    };
    let out = match args.name.replace('_', "-").as_str() {
        "pc33" => json::<FamilyMember>(&chen_teo::family_pc33(get("p")?, int("l2")?)?)?,
        "pc33-limit" => {
            let l2 = int("l2")?;
            let prof = match int("alpha")? {
                1 => chen_teo::pc33_limit_alpha1(l2)?,
                2 => chen_teo::pc33_limit_alpha2(l2)?,
                _ => return Err(usage("alpha must be 1 or 2")),
            };
            json(&prof)?
        }
        "af-equal-angles" => json(&chen_teo::family_af_equal_angles(get("p")?, get("q")?)?)?,
        "af-equal-angles-limit" => match int("pq")? {
            0 => json(&chen_teo::af_equal_angles_limit_zero())?,
            1 => json(&chen_teo::af_equal_angles_limit_one())?,
            _ => return Err(usage("pq must be 0 or 1")),
        },
        "af-q-tau" => {
            let (q, tau) = (get("q")?, get("tau")?);
            let profile = chen_teo::family_af_q_tau(q, tau)?;
            let (p, alpha) = chen_teo::af_q_tau_params(q, tau);
            let params = match &profile {
                AnyProfile::Alf(pr) if pr.r() == 3 => ChenTeoParams::from_profile(pr).ok(),
                _ => None,
            };
            let report = params.and_then(|c| regularity::solve_regularity(&c).ok());
            json(&QTauMember {
                q,
                tau,
                p,
                alpha,
                profile,
                params,
                report,
            })?
        }
        "eh" => json(&chen_teo::family_eh(get("A")?)?)?,
        other => {
            return Err(usage(format!(
                "unknown family `{other}` (pc33, pc33-limit, af-equal-angles, \
                 af-equal-angles-limit, af-q-tau, eh)"
            )))
        }
    };
    Ok((out, true))
}

fn scan_cmd(args: ScanArgs) -> Out {
    let grid = grid_of(
        &args.p_range,
        &args.q_range,
        &args.a_range,
        &args.b_range,
        args.steps,
    )?;
    let smooth_only = args.smooth_only;
    let rows = regularity::scan_grid_filtered(&grid, args.tol, |r| r.smooth || !smooth_only);
    Ok((scan_csv(&rows), true))
}

fn dispatch(cli: Cli) -> Out {
    match cli.command {
        Command::Profile(c) => profile_cmd(c),
        Command::Potential(c) => potential_cmd(c),
        Command::Metric(c) => metric_cmd(c),
        Command::Kahler(c) => kahler_cmd(c),
        Command::Classify(a) => classify_cmd(a),
        Command::Family(a) => family_cmd(a),
        Command::Scan(a) => scan_cmd(a),
    }
}

/// Runs the command line with `argv[0]` the program name, writing the
/// artifact to `out` (or to `--output`) and messages to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let target = cli.output.clone();
    let (body, ok) = match dispatch(cli) {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {}", m.lines().next().unwrap_or(""));
            return 2;
        }
    };
    let written = match &target {
        Some(path) => std::fs::write(path, body.as_bytes()).map_err(|e| e.to_string()),
        None => out.write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return 2;
    }
    if ok {
        0
    } else {
        let _ = writeln!(err, "check failed");
        1
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("alf").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn parses_every_subcommand() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["nonsense"]).0, 2);
        assert_eq!(call(&["metric", "axis"]).0, 2);
        assert_eq!(
            call(&["metric", "axis", "--preset", "kerr", "--m", "1"]).0,
            2
        );
        let (code, _, err) = call(&["family", "nope"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("classify"));
    }

    #[test]
    fn csv_header_and_line_endings() {
        let (code, out, _) = call(&[
            "profile",
            "plot",
            "--preset",
            "taub_nut",
            "--n",
            "0.5",
            "--samples",
            "3",
        ]);
        assert_eq!(code, 0);
        assert!(!out.contains('\r'));
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "z,f");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "0.0000000000000000e0,1.0000000000000000e0");
    }

    #[test]
    fn classify_scan_rows() {
        let (code, out, _) = call(&[
            "classify", "--scan", "0.5", "0.5", "0.5", "0.5", "2", "2", "2", "2", "--steps", "1",
        ]);
        assert_eq!(code, 0);
        let row = out.lines().nth(1).unwrap();
        assert!(row.contains(",true,true,1,1,"), "{row}");
    }
}
