use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use ruelle_kit::kernels::{Kernel, KernelCombination, KernelKind};
use ruelle_kit::probes::annulus_probes;
use ruelle_kit::rational_map::{critical_data, orbit_cocycle, MapSpec, MobiusTransform, SpherePoint};
use ruelle_kit::series::{
    forward_series, modified_series_eval, rs_truncated, summability_report, SeriesQuery, SeriesReport, SeriesRow,
    DEFAULT_ORDER,
};
use ruelle_kit::stability::{build_linear_system, instability_certificate, DEFAULT_RANK_TOL, DEFAULT_TRIVIALITY_TOL};
use ruelle_kit::verify::{run_suite, SuiteConfig};
use ruelle_kit::{RationalMap, Tolerances, TransferOperator};

use crate::output::{Format, Report};
use crate::{Cli, Command, Failure, KernelArg, SeriesKind, EXIT_VERIFICATION};

/// Critical points given on the command line are matched within this distance.
const POINT_MATCH: f64 = 1e-6;
const GRID_ESCAPE_RADIUS: f64 = 1e6;
const GRID_MAX_ITER: u32 = 500;

pub fn load_map(path: Option<&Path>) -> Result<RationalMap, Failure> {
    let path = path.ok_or_else(|| Failure::input("--map is required for this command"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let spec: MapSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: malformed map spec: {e}", path.display())))?;
    Ok(RationalMap::from_spec(&spec)?)
}

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    let tol = Tolerances::default();
    let order = cli.order.unwrap_or(DEFAULT_ORDER);
    let f = cli.format;
    if let Command::Verify { suite, trials, samples } = &cli.command {
        let mut config = SuiteConfig::new(*suite, cli.seed);
        config.trials = trials.unwrap_or(config.trials);
        config.samples = samples.unwrap_or(config.samples);
        config.tol = cli.tol.unwrap_or(config.tol);
        let report = run_suite(&config);
        let rows = report.trials.clone();
        Report { json: &report, rows }.emit(f)?;
        return Ok(if report.passed { 0 } else { EXIT_VERIFICATION });
    }

    let map = load_map(cli.map.as_deref())?;
    match &cli.command {
        Command::Analyze => analyze(&map, cli.seed, f)?,
        Command::Summability { point } => {
            let r = summability_report(&map, *point, order, &tol)?;
            let rows = r.forward.rows();
            Report { json: &r, rows }.emit(f)?;
        }
        Command::RuelleApply { kernel, base, at } => ruelle_apply(map, *kernel, *base, at, f)?,
        Command::Series { kind, base, x, z } => series(map, *kind, *base, *x, *z, order, f)?,
        Command::Stability { point, index } => {
            let op = TransferOperator::new(map, tol)?;
            let i = match (point, index) {
                (_, Some(i)) => *i,
                (Some(p), None) => critical_index(&op, *p)?,
                (None, None) => return Err(Failure::input("stability needs --point or --index")),
            };
            let r = instability_certificate(&op, i, order, cli.tol.unwrap_or(DEFAULT_TRIVIALITY_TOL))?;
            let rows = r.coefficients.iter().map(CoefficientRow::from).collect();
            Report { json: &r, rows }.emit(f)?;
        }
        Command::Rank { points } => {
            let op = TransferOperator::new(map, tol)?;
            let indices = points
                .iter()
                .map(|&p| critical_index(&op, p))
                .collect::<Result<Vec<_>, _>>()?;
            let s = build_linear_system(&op, &indices, order, DEFAULT_RANK_TOL)?;
            let rows = s
                .matrix
                .iter()
                .enumerate()
                .flat_map(|(r, row)| {
                    row.iter().enumerate().map(move |(c, v)| MatrixRow {
                        row: r,
                        col: c,
                        re: v.re,
                        im: v.im,
                    })
                })
                .collect();
            Report { json: &s, rows }.emit(f)?;
        }
        Command::Orbit { point, n } => {
            let o = orbit_cocycle(&map, *point, *n, &tol);
            let rows = o
                .points
                .iter()
                .zip(&o.cocycle)
                .enumerate()
                .map(|(n, (p, d))| OrbitRow {
                    n,
                    re: p.re,
                    im: p.im,
                    cocycle_re: d.re,
                    cocycle_im: d.im,
                    abs_cocycle: d.norm(),
                })
                .collect();
            Report { json: &o, rows }.emit(f)?;
        }
        Command::Grid { window, resolution } => {
            let rows = grid(&map, *window, *resolution);
            Report {
                json: &rows,
                rows: rows.clone(),
            }
            .emit(f)?;
        }
        Command::Verify { .. } => unreachable!("handled above"),
    }
    Ok(0)
}

fn critical_index(op: &TransferOperator, p: Complex64) -> Result<usize, Failure> {
    op.critical()
        .index_of(p, POINT_MATCH)
        .ok_or_else(|| Failure::input(format!("{p} is not a finite critical point of the map")))
}

#[derive(Serialize)]
struct CriticalRow {
    index: usize,
    c_re: f64,
    c_im: f64,
    b_re: f64,
    b_im: f64,
    d_re: f64,
    d_im: f64,
}

#[derive(Serialize)]
struct Normalization {
    /// `standard`, `normalized` or `unavailable`.
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<MobiusTransform>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<MapSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

#[derive(Serialize)]
struct Analysis {
    map: MapSpec,
    degree: usize,
    standard: bool,
    fixes_infinity: bool,
    normalization: Normalization,
    critical_points: Vec<Complex64>,
    residues: Vec<Complex64>,
    critical_values: Vec<Complex64>,
    omega: Complex64,
    decomposition_residual: f64,
}

/// Conjugation sending the two finite fixed points with smallest
/// `(re, im)` to `0, 1` and keeping `∞`.
fn normalize(map: &RationalMap, tol: &Tolerances) -> Normalization {
    if map.is_standard() {
        return Normalization {
            status: "standard",
            transform: None,
            map: None,
            reason: None,
        };
    }
    let attempt = || -> ruelle_kit::Result<(RationalMap, MobiusTransform)> {
        if !map.fixes_infinity() {
            return Err(ruelle_kit::Error::InfinityNotFixed);
        }
        let mut fixed = map.finite_fixed_points()?;
        fixed.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        if fixed.len() < 2 {
            return Err(ruelle_kit::Error::DegenerateTriple);
        }
        map.normalize_to_standard([fixed[0].into(), fixed[1].into(), SpherePoint::Infinity], tol)
    };
    match attempt() {
        Ok((conj, h)) => Normalization {
            status: "normalized",
            transform: Some(h),
            map: Some(conj.to_spec()),
            reason: None,
        },
        Err(e) => Normalization {
            status: "unavailable",
            transform: None,
            map: None,
            reason: Some(e.to_string()),
        },
    }
}

fn analyze(map: &RationalMap, seed: u64, f: Format) -> Result<(), Failure> {
    let tol = Tolerances::default();
    let cd = critical_data(map, &tol)?;
    let probes = annulus_probes(32, seed, &cd.points);
    let report = Analysis {
        map: map.to_spec(),
        degree: map.degree(),
        standard: map.is_standard(),
        fixes_infinity: map.fixes_infinity(),
        normalization: normalize(map, &tol),
        critical_points: cd.points.clone(),
        residues: cd.residues.clone(),
        critical_values: cd.values.clone(),
        omega: cd.omega,
        decomposition_residual: cd.decomposition_residual(map, &probes),
    };
    let rows = (0..cd.len())
        .map(|i| CriticalRow {
            index: i,
            c_re: cd.points[i].re,
            c_im: cd.points[i].im,
            b_re: cd.residues[i].re,
            b_im: cd.residues[i].im,
            d_re: cd.values[i].re,
            d_im: cd.values[i].im,
        })
        .collect();
    Report { json: &report, rows }.emit(f)
}

#[derive(Serialize)]
struct Evaluation {
    z: Complex64,
    closed_form: Complex64,
    preimage_sum: Complex64,
    residual: f64,
}

#[derive(Serialize)]
struct ApplyReport {
    kernel: Kernel,
    image: KernelCombination,
    evaluations: Vec<Evaluation>,
}

#[derive(Serialize)]
struct TermRow {
    kind: KernelKind,
    base_re: f64,
    base_im: f64,
    coeff_re: f64,
    coeff_im: f64,
}

fn ruelle_apply(
    map: RationalMap,
    kind: KernelArg,
    base: Complex64,
    at: &[Complex64],
    f: Format,
) -> Result<(), Failure> {
    let op = TransferOperator::new(map, Tolerances::default())?;
    let kernel = match kind {
        KernelArg::Gamma => Kernel::gamma(base),
        KernelArg::Tau => Kernel::tau(base),
    };
    let image = op.apply_to_kernel(&kernel)?;
    let evaluations = at
        .iter()
        .map(|&z| {
            let closed_form = image.eval(z)?;
            let preimage_sum = op.apply_pointwise(&kernel, z)?;
            Ok(Evaluation {
                z,
                closed_form,
                preimage_sum,
                residual: (closed_form - preimage_sum).norm(),
            })
        })
        .collect::<ruelle_kit::Result<Vec<_>>>()?;
    let rows = image
        .terms()
        .iter()
        .map(|t| TermRow {
            kind: t.kind,
            base_re: t.base.re,
            base_im: t.base.im,
            coeff_re: t.coeff.re,
            coeff_im: t.coeff.im,
        })
        .collect();
    Report {
        json: &ApplyReport {
            kernel,
            image,
            evaluations,
        },
        rows,
    }
    .emit(f)
}

#[derive(Serialize)]
struct SeriesOutput {
    kind: &'static str,
    base: Complex64,
    weight: Complex64,
    z: Option<Complex64>,
    order: usize,
    value: Complex64,
    tail_estimate: Option<f64>,
    report: SeriesReport,
}

fn series(
    map: RationalMap,
    kind: SeriesKind,
    base: Complex64,
    x: Complex64,
    z: Option<Complex64>,
    order: usize,
    f: Format,
) -> Result<(), Failure> {
    let tol = Tolerances::default();
    let q = SeriesQuery::new(base, x, order)?;
    let need_z = || z.ok_or_else(|| Failure::input("--z is required for this series"));
    let (name, report, tail) = match kind {
        SeriesKind::Forward => {
            let r = forward_series(&map, base, order, &tol)?;
            ("forward", r, None)
        }
        SeriesKind::Modified => {
            let v = modified_series_eval(&map, &q, need_z()?)?;
            (
                "modified",
                SeriesReport::from_terms(v.terms, v.truncated),
                Some(v.tail_estimate),
            )
        }
        SeriesKind::Backward => {
            let op = TransferOperator::new(map, tol)?;
            let v = rs_truncated(&op, &q, need_z()?)?;
            ("backward", SeriesReport::from_terms(v.terms, false), None)
        }
    };
    let rows: Vec<SeriesRow> = report.rows();
    let out = SeriesOutput {
        kind: name,
        base,
        weight: x,
        z,
        order,
        value: report.sum(),
        tail_estimate: tail.or(Some(report.tail_estimate)),
        report,
    };
    Report { json: &out, rows }.emit(f)
}

#[derive(Serialize)]
struct CoefficientRow {
    index: usize,
    c_re: f64,
    c_im: f64,
    value_re: f64,
    value_im: f64,
    b_c_re: f64,
    b_c_im: f64,
    tail: f64,
    degenerate: bool,
}

impl From<&ruelle_kit::stability::CoefficientEntry> for CoefficientRow {
    fn from(e: &ruelle_kit::stability::CoefficientEntry) -> Self {
        Self {
            index: e.index,
            c_re: e.critical_point.re,
            c_im: e.critical_point.im,
            value_re: e.value.re,
            value_im: e.value.im,
            b_c_re: e.b_c.re,
            b_c_im: e.b_c.im,
            tail: e.tail,
            degenerate: e.degenerate,
        }
    }
}

#[derive(Serialize)]
struct MatrixRow {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct OrbitRow {
    n: usize,
    re: f64,
    im: f64,
    cocycle_re: f64,
    cocycle_im: f64,
    #[serde(rename = "|cocycle|")]
    abs_cocycle: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridRow {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
    iterations: u32,
    escaped: bool,
}

fn axis(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n <= 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

/// Row-major escape-time grid; row 0 is the top edge `im = ymax`.
fn grid(map: &RationalMap, [x0, x1, y0, y1]: [f64; 4], n: usize) -> Vec<GridRow> {
    (0..n)
        .into_par_iter()
        .flat_map_iter(|row| {
            let im = axis(y1, y0, n, row);
            (0..n).map(move |col| {
                let re = axis(x0, x1, n, col);
                let mut z = Complex64::new(re, im);
                let mut iterations = 0;
                let mut escaped = false;
                while iterations < GRID_MAX_ITER {
                    if !(z.norm() <= GRID_ESCAPE_RADIUS) {
                        escaped = true;
                        break;
                    }
                    z = map.eval(z);
                    iterations += 1;
                }
                escaped |= !(z.norm() <= GRID_ESCAPE_RADIUS);
                GridRow {
                    row,
                    col,
                    re,
                    im,
                    iterations,
                    escaped,
                }
            })
        })
        .collect()
}
