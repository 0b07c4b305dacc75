//! Command dispatch and report files.
//!
//! A run produces one JSON report (`report.json`, field `"schema": 1`) and a
//! few flat CSV tables next to it. Output depends only on the config, so
//! identical configs give byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{
    a_p, b_p, c_p, certify_odd, lower_bound_constant_width, lower_bound_linear, lower_bound_variable_width,
    lyapunov_bound, lyapunov_report, odd_mode_threshold, pi_comparison_table, pi_p, test_function_upper_bound,
    uniform_x_grid, BoundReport, Certificate, ComparisonRow, Threshold, DEFAULT_CHECK_TOL,
};
use crate::asymptotics::{epsilon_sweep, SweepResult};
use crate::config::{Command, RunConfig};
use crate::eig1d::{solve_discretized, solve_shooting, EigenResult, OneDimProblem};
use crate::eig2d::{build_mesh, solve_mu1, Eigen2DResult, Mode};
use crate::error::{Error, Result};
use crate::geometry::FermiDomain;

pub const REPORT_SCHEMA: u32 = 1;
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Serialize)]
pub struct Grids {
    pub samples: usize,
    pub ns: usize,
    pub nt: usize,
    pub elements_1d: usize,
    pub validation: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportTolerances {
    pub symmetry: f64,
    pub shooting: f64,
    /// Tolerance of the concavity, constancy and slope checks.
    pub hypothesis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainSummary {
    #[serde(rename = "L")]
    pub length: f64,
    pub samples: usize,
    pub curvature_min: f64,
    pub curvature_max: f64,
    pub width_min: f64,
    pub width_max: f64,
    pub jacobian_min: f64,
    pub injectivity_checked: bool,
    pub valid: bool,
}

impl DomainSummary {
    fn of(d: &FermiDomain) -> Self {
        DomainSummary {
            length: d.length(),
            samples: d.samples(),
            curvature_min: d.curve.curvature.min(),
            curvature_max: d.curve.curvature.max(),
            width_min: d.width.delta.min(),
            width_max: d.width.delta.max(),
            jacobian_min: d.jacobian_min,
            injectivity_checked: d.injectivity_checked,
            valid: d.valid,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Bounds {
        /// `pi_p`, `A_p`, `B_p`, `C_p`, `L`, `p`.
        constants: BTreeMap<String, f64>,
        bounds: Vec<BoundReport>,
        certificate: Option<Certificate>,
    },
    Certify {
        threshold: Threshold,
        certificate: Certificate,
    },
    Solve1d {
        lyapunov_bound: f64,
        shooting: EigenResult,
        discretized: EigenResult,
        /// `|shooting − discretized| / discretized`.
        relative_difference: f64,
    },
    Solve2d {
        full: Eigen2DResult,
        odd: Eigen2DResult,
        test_function_upper_bound: f64,
    },
    Sweep(SweepResult),
    PiComparison {
        rows: Vec<ComparisonRow>,
        min_b_minus_r: f64,
    },
}

/// A CSV table: header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(name: &str, header: &[&str]) -> Self {
        CsvTable {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: Command,
    pub config_hash: String,
    pub config: RunConfig,
    pub grids: Grids,
    pub tolerances: ReportTolerances,
    pub domain: Option<DomainSummary>,
    pub results: Results,
    #[serde(skip)]
    pub tables: Vec<CsvTable>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn profile_table(d: &FermiDomain) -> CsvTable {
    let mut t = CsvTable::new("profile", &["s", "k", "delta", "jacobian_outer"]);
    for (i, s) in d.curve.curvature.nodes().enumerate() {
        let k = d.curve.curvature.values[i];
        let delta = d.width.delta.values[i];
        t.push(vec![num(s), num(k), num(delta), num(1.0 + delta * k)]);
    }
    t
}

fn constants_table(constants: &BTreeMap<String, f64>, bounds: &[BoundReport]) -> CsvTable {
    let mut t = CsvTable::new("bounds", &["name", "value"]);
    for (k, v) in constants {
        t.push(vec![k.clone(), num(*v)]);
    }
    for b in bounds {
        let kind = serde_json::to_value(b.kind).expect("kind serializes");
        let kind = kind.as_str().unwrap_or_default();
        t.push(vec![format!("bound.{kind}"), num(b.value)]);
        t.push(vec![format!("applicable.{kind}"), num(b.applicable as u8 as f64)]);
    }
    t
}

/// Runs `command` on a validated config.
pub fn run_command(config: &RunConfig, command: Command) -> Result<Report> {
    config.require_inputs(command)?;
    let domain = if command.needs_domain() {
        Some(config.domain()?)
    } else {
        None
    };
    let mut tables = Vec::new();
    let results = match command {
        Command::Bounds => {
            let d = domain.as_ref().expect("domain built");
            let p = config.exponent()?;
            d.require_valid()?;
            let mut constants = BTreeMap::new();
            constants.insert("pi_p".to_string(), pi_p(p)?);
            constants.insert("A_p".to_string(), a_p(d, p)?);
            constants.insert("B_p".to_string(), b_p(d, p)?);
            constants.insert("C_p".to_string(), c_p(p)?);
            constants.insert("L".to_string(), d.length());
            constants.insert("p".to_string(), p);
            let mut bounds = vec![
                lower_bound_constant_width(d, p)?,
                lower_bound_variable_width(d, p)?,
                lyapunov_report(d, p)?,
            ];
            let certificate = if p == 2.0 {
                let cert = certify_odd(d)?;
                bounds.push(lower_bound_linear(d, &cert, false)?);
                bounds.push(lower_bound_linear(d, &cert, true)?);
                Some(cert)
            } else {
                None
            };
            tables.push(constants_table(&constants, &bounds));
            tables.push(profile_table(d));
            Results::Bounds {
                constants,
                bounds,
                certificate,
            }
        }
        Command::Certify => {
            let d = domain.as_ref().expect("domain built");
            let threshold = odd_mode_threshold(d)?;
            let certificate = certify_odd(d)?;
            let mut t = CsvTable::new("certify", &["name", "value"]);
            for (name, v) in [
                ("threshold", certificate.threshold),
                ("outer_max", threshold.outer_max),
                ("inner_max", threshold.inner_max),
                ("mu1_upper", certificate.mu1_upper),
                ("certified", certificate.certified as u8 as f64),
            ] {
                t.push(vec![name.to_string(), num(v)]);
            }
            tables.push(t);
            tables.push(profile_table(d));
            Results::Certify { threshold, certificate }
        }
        Command::Solve1d => {
            let d = domain.as_ref().expect("domain built");
            let p = config.exponent()?;
            let problem = OneDimProblem::thin_limit(d, p)?;
            let lyap = lyapunov_bound(&problem.weight, p)?;
            let shooting = solve_shooting(&problem, config.tolerances.shooting)?;
            let discretized = solve_discretized(&problem, config.mesh.elements_1d)?;
            let mut t = CsvTable::new("solve1d_shooting", &["s", "weight", "u", "du"]);
            for (i, s) in shooting.u.nodes().enumerate() {
                t.push(vec![
                    num(s),
                    num(problem.weight.eval(s)),
                    num(shooting.u.values[i]),
                    num(shooting.du.values[i]),
                ]);
            }
            tables.push(t);
            let mut t = CsvTable::new("solve1d_discretized", &["s", "u"]);
            for (i, s) in discretized.u.nodes().enumerate() {
                t.push(vec![num(s), num(discretized.u.values[i])]);
            }
            tables.push(t);
            Results::Solve1d {
                lyapunov_bound: lyap,
                relative_difference: (shooting.mu - discretized.mu).abs() / discretized.mu,
                shooting,
                discretized,
            }
        }
        Command::Solve2d => {
            let d = domain.as_ref().expect("domain built");
            let p = config.exponent()?;
            d.require_valid()?;
            let mesh = build_mesh(d, config.mesh.ns, config.mesh.nt)?;
            let full = solve_mu1(&mesh, p, Mode::Full)?;
            let odd = solve_mu1(&mesh, p, Mode::Odd)?;
            let upper = test_function_upper_bound(d, p)?;
            let mut t = CsvTable::new(
                "solve2d",
                &["mode", "mu", "dofs", "residual", "iterations", "converged"],
            );
            for (name, r) in [("full", &full), ("odd", &odd)] {
                t.push(vec![
                    name.to_string(),
                    num(r.mu),
                    r.dofs.to_string(),
                    num(r.residual),
                    r.iterations.to_string(),
                    r.converged.to_string(),
                ]);
            }
            tables.push(t);
            Results::Solve2d {
                full,
                odd,
                test_function_upper_bound: upper,
            }
        }
        Command::Sweep => {
            let d = domain.as_ref().expect("domain built");
            let p = config.exponent()?;
            let eps = config.epsilons.as_deref().expect("checked by require_inputs");
            let sweep = epsilon_sweep(d, p, eps, &config.sweep)?;
            let mut t = CsvTable::new("sweep", &["epsilon", "mu", "mu_star", "rel_err"]);
            for pt in &sweep.points {
                t.push(vec![num(pt.epsilon), opt(pt.mu), num(sweep.mu_star), opt(pt.rel_error)]);
            }
            tables.push(t);
            Results::Sweep(sweep)
        }
        Command::PiComparison => {
            let rows = pi_comparison_table(&uniform_x_grid(config.pi_comparison.points))?;
            let mut all = CsvTable::new("figure2", &["x", "r", "b", "b_minus_r"]);
            let mut r_curve = CsvTable::new("figure2_r", &["x", "r"]);
            let mut b_curve = CsvTable::new("figure2_b", &["x", "b"]);
            for row in &rows {
                all.push(vec![num(row.x), num(row.r), num(row.b), num(row.b_minus_r)]);
                r_curve.push(vec![num(row.x), num(row.r)]);
                b_curve.push(vec![num(row.x), num(row.b)]);
            }
            tables.extend([all, r_curve, b_curve]);
            let min_b_minus_r = rows.iter().map(|r| r.b_minus_r).fold(f64::INFINITY, f64::min);
            Results::PiComparison { rows, min_b_minus_r }
        }
    };

    Ok(Report {
        schema: REPORT_SCHEMA,
        command,
        config_hash: config.hash(),
        config: config.clone(),
        grids: Grids {
            samples: config.mesh.samples,
            ns: config.mesh.ns,
            nt: config.mesh.nt,
            elements_1d: config.mesh.elements_1d,
            validation: crate::geometry::DEFAULT_VALIDATION_GRID,
        },
        tolerances: ReportTolerances {
            symmetry: config.tolerances.symmetry,
            shooting: config.tolerances.shooting,
            hypothesis: DEFAULT_CHECK_TOL,
        },
        domain: domain.as_ref().map(DomainSummary::of),
        results,
        tables,
    })
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `report.json` and one `<name>.csv` per table into `dir`, returning
/// the paths written.
pub fn emit_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| io_error(&path, e))?;
    written.push(path);

    for table in &report.tables {
        let path = dir.join(format!("{}.csv", table.name));
        fs::write(&path, csv_bytes(table)?).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// RFC 4180 quoting with LF line endings.
pub fn csv_bytes(table: &CsvTable) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_io = |e: csv::Error| io_error(Path::new(&table.name), std::io::Error::other(e));
    w.write_record(&table.header).map_err(to_io)?;
    for row in &table.rows {
        w.write_record(row).map_err(to_io)?;
    }
    w.into_inner()
        .map_err(|e| io_error(Path::new(&table.name), std::io::Error::other(e.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn rectangle(extra: &str) -> RunConfig {
        parse_config(&format!(
            "p = 2\n{extra}\n[curvature]\nL = 3.141592653589793\nk = \"0\"\n[width]\ndelta = \"0.4\"\n[mesh]\nsamples = 257\n"
        ))
        .unwrap()
    }

    #[test]
    fn certify_rectangle() {
        let report = run_command(&rectangle(""), Command::Certify).unwrap();
        let Results::Certify { certificate, .. } = &report.results else {
            panic!("wrong result kind")
        };
        assert!(certificate.certified);
        assert!((certificate.threshold - 1.5625).abs() < 1e-12);
        assert_eq!(report.schema, 1);
        assert_eq!(report.config_hash.len(), 64);
    }

    #[test]
    fn bounds_with_nonconcave_curvature_is_a_result() {
        let cfg = parse_config(
            "p = 2\n[curvature]\nL = 3.141592653589793\nk = \"0.2*cos(2*pi*s/L)\"\n[width]\ndelta = 0.3\n[mesh]\nsamples = 257\n",
        )
        .unwrap();
        let report = run_command(&cfg, Command::Bounds).unwrap();
        let Results::Bounds { constants, bounds, .. } = &report.results else {
            panic!("wrong result kind")
        };
        let cw = &bounds[0];
        assert!(!cw.applicable);
        assert!(cw.hypotheses.iter().any(|h| h.name == "curvature_concave" && !h.passed));
        for name in ["pi_p", "A_p", "B_p", "L"] {
            assert!(constants.contains_key(name), "{name}");
        }
        let csv = String::from_utf8(csv_bytes(&report.tables[0]).unwrap()).unwrap();
        assert!(csv.starts_with("name,value\n"));
        for name in ["pi_p", "A_p", "B_p", "L"] {
            assert!(csv.lines().any(|l| l.starts_with(&format!("{name},"))));
        }
    }

    #[test]
    fn pi_comparison_table_format() {
        let cfg = parse_config("[pi_comparison]\npoints = 50").unwrap();
        let report = run_command(&cfg, Command::PiComparison).unwrap();
        let csv = String::from_utf8(csv_bytes(&report.tables[0]).unwrap()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,r,b,b_minus_r"));
        let rows: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(rows.len(), 50);
        assert!(rows.iter().all(|v| *v > 0.0));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn sweep_marks_invalid_epsilon_and_keeps_others() {
        // k = -2, delta = 1: width 0.6 folds the domain, smaller widths do not
        let cfg = parse_config(
            "p = 2\nepsilons = [0.6, 0.2]\n[curvature]\nL = 1.0\nk = -2\n[width]\ndelta = 1\n[mesh]\nsamples = 129\n[sweep]\nmin_ns = 64\nmax_ns = 256\nmax_aspect = 1.0\nestimate_error = false\n",
        )
        .unwrap();
        let report = run_command(&cfg, Command::Sweep).unwrap();
        let Results::Sweep(s) = &report.results else {
            panic!("wrong result kind")
        };
        assert!(s.points[0].error.is_some() && s.points[0].mu.is_none());
        assert!(s.points[1].error.is_none() && s.points[1].mu.is_some());
        let csv = String::from_utf8(csv_bytes(&report.tables[0]).unwrap()).unwrap();
        assert!(csv.starts_with("epsilon,mu,mu_star,rel_err\n"));
        assert!(csv.lines().nth(1).unwrap().starts_with("0.6,,"));
    }

    #[test]
    fn reports_are_byte_identical() {
        let cfg = rectangle("");
        let dir = tempfile::tempdir().unwrap();
        let a = emit_report(&run_command(&cfg, Command::Bounds).unwrap(), &dir.path().join("a")).unwrap();
        let b = emit_report(&run_command(&cfg, Command::Bounds).unwrap(), &dir.path().join("b")).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
        }
        let json: serde_json::Value = serde_json::from_slice(&fs::read(&a[0]).unwrap()).unwrap();
        assert_eq!(json["schema"], 1);
        assert!(json["grids"]["samples"].is_number());
        assert!(json["tolerances"]["hypothesis"].is_number());
    }
}
