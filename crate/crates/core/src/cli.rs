//! Batch driver behind the `trianalytic` binary.
//!
//! Exit codes: 0 success, 1 failed check or oracle disagreement, 2 input or
//! usage error, 3 integrator failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{AffineSubtorus, Catalog, HKTorus};
use crate::bundles::subbundle::{box_nodes, examples};
use crate::bundles::{
    gauss_codazzi_check, splitting_check, FrameMap, SplittingReport, SubbundleField,
};
use crate::error::{Error, Result};
use crate::families::{
    family_curvature, fiber_samples, flatness_study, integrate, verify_holomorphy_many,
    verify_isometry, CurvatureRow, DeformationFamily, FamilyReport, GreatCircleFamily,
    IntegratorSettings, LinearFlowFamily, Path, TranslationFamily,
};
use crate::quat::ImaginaryUnit;
use crate::selftest::{run_all, suite_names, SelftestConfig};
use crate::sphere_sampling::sample_structures;
use crate::wirtinger::{is_trianalytic, xi_defect, Subvariety, TrianalyticVerdict, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTEGRATOR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "trianalytic",
    version,
    about = "Trianalytic subvarieties of flat hyperkähler tori"
)]
pub struct Cli {
    /// JSON file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every catalog entry.
    Classify(Flags),
    /// Tabulate the Wirtinger defect of one entry over the structure sphere.
    Sweep(Flags),
    /// Integrate a deformation family and verify its transport.
    Deform(Flags),
    /// Gauss-identity residuals for the example subbundles.
    BundleCheck(Flags),
    /// Run the invariant suites.
    Selftest(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Translation,
    Sphere,
    LinearFlow,
    TwistedFlow,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub sphere_samples: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print suite names without running them.
    #[arg(long)]
    #[serde(skip)]
    pub list: bool,
    /// Catalog entry for `sweep` and the translation family.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Number of fiber samples for `deform`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Path end point in the family's parameter space.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub to: Option<Vec<f64>>,
}

impl Flags {
    /// Command-line values win over the config file.
    fn merged(self, file: Flags) -> Flags {
        Flags {
            catalog: self.catalog.or(file.catalog),
            out: self.out.or(file.out),
            tol: self.tol.or(file.tol),
            sphere_samples: self.sphere_samples.or(file.sphere_samples),
            grid: self.grid.or(file.grid),
            seed: self.seed.or(file.seed),
            list: self.list,
            entry: self.entry.or(file.entry),
            family: self.family.or(file.family),
            samples: self.samples.or(file.samples),
            to: self.to.or(file.to),
        }
    }

    fn tol(&self, default: f64) -> Result<f64> {
        let t = self.tol.unwrap_or(default);
        if !(t > 0.0) {
            return Err(Error::Invalid(format!(
                "tolerance must be positive, got {t}"
            )));
        }
        Ok(t)
    }

    fn catalog(&self) -> Result<Catalog> {
        match &self.catalog {
            Some(p) => {
                Catalog::load(p).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))
            }
            None => Ok(Catalog::bundled()),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StepUnderflow { .. } | Error::Integrator(_) => EXIT_INTEGRATOR,
        Error::OracleDisagreement(_) => EXIT_CHECK_FAILED,
        _ => EXIT_INPUT,
    }
}

fn emit(out: Option<&FsPath>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&FsPath>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str::<Flags>(&text)
                .map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?
        }
        None => Flags::default(),
    };
    match cli.command {
        Command::Classify(f) => classify(f.merged(file)),
        Command::Sweep(f) => sweep(f.merged(file)),
        Command::Deform(f) => deform(f.merged(file)),
        Command::BundleCheck(f) => bundle_check(f.merged(file)),
        Command::Selftest(f) => selftest(f.merged(file)),
    }
}

/// One line of a classification report.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum ClassifyRecord {
    Verdict(TrianalyticVerdict),
    Error { name: String, error: String },
}

pub fn classify(flags: Flags) -> Result<i32> {
    let catalog = flags.catalog()?;
    let tol = flags.tol(DEFAULT_TOL)?;
    let samples = flags.sphere_samples.unwrap_or(64);
    if samples < 3 {
        return Err(Error::Invalid(
            "classification needs at least 3 sphere samples".into(),
        ));
    }
    let results: Vec<(ClassifyRecord, i32)> = catalog
        .entries
        .par_iter()
        .map(|entry| {
            let verdict = catalog
                .subtorus(entry)
                .and_then(|x| is_trianalytic(Subvariety::from(&x), tol, samples));
            match verdict {
                Ok(v) => (
                    ClassifyRecord::Verdict(v.named(entry.name.clone())),
                    EXIT_OK,
                ),
                Err(e) => (
                    ClassifyRecord::Error {
                        name: entry.name.clone(),
                        error: e.to_string(),
                    },
                    exit_code(&e),
                ),
            }
        })
        .collect();
    let code = results.iter().map(|(_, c)| *c).max().unwrap_or(EXIT_OK);
    let records: Vec<ClassifyRecord> = results.into_iter().map(|(r, _)| r).collect();
    emit_json(flags.out.as_deref(), &records)?;
    Ok(code)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    l1: f64,
    l2: f64,
    l3: f64,
    defect: f64,
    complex: bool,
}

pub fn sweep(flags: Flags) -> Result<i32> {
    let catalog = flags.catalog()?;
    let tol = flags.tol(DEFAULT_TOL)?;
    let samples = flags.sphere_samples.unwrap_or(64);
    if samples == 0 {
        return Err(Error::Invalid("--sphere-samples must be positive".into()));
    }
    let entry = match &flags.entry {
        Some(name) => catalog
            .find(name)
            .ok_or_else(|| Error::Invalid(format!("no catalog entry named {name:?}")))?,
        None if catalog.entries.len() == 1 => &catalog.entries[0],
        None => return Err(Error::Invalid("select an entry with --entry".into())),
    };
    let x = catalog.subtorus(entry)?;
    let rows = sample_structures(samples)
        .par_iter()
        .map(|&l| {
            let defect = xi_defect(Subvariety::from(&x), l)?;
            let [l1, l2, l3] = l.components();
            Ok(SweepRow {
                l1,
                l2,
                l3,
                defect,
                complex: defect <= tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    emit(flags.out.as_deref(), &String::from_utf8_lossy(&bytes))?;
    Ok(EXIT_OK)
}

fn translation_family(flags: &Flags) -> Result<TranslationFamily> {
    let catalog = flags.catalog()?;
    let x: AffineSubtorus = match &flags.entry {
        Some(name) => {
            let e = catalog
                .find(name)
                .ok_or_else(|| Error::Invalid(format!("no catalog entry named {name:?}")))?;
            catalog.subtorus(e)?
        }
        None => {
            let w = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
            AffineSubtorus::new(&HKTorus::unit(2), w, DVector::zeros(8))?
        }
    };
    TranslationFamily::full_normal(x)
}

/// Family run summary plus the pass/fail verdict.
#[derive(Debug, Serialize)]
struct DeformOutput {
    #[serde(flatten)]
    report: FamilyReport,
    tol: f64,
    passed: bool,
}

pub fn deform(flags: Flags) -> Result<i32> {
    let tol = flags.tol(1e-6)?;
    let kind = flags.family.unwrap_or(FamilyKind::Translation);
    let family: Arc<dyn DeformationFamily> = match kind {
        FamilyKind::Translation => Arc::new(translation_family(&flags)?),
        FamilyKind::Sphere => Arc::new(GreatCircleFamily::new(1.1, 0.2)?),
        FamilyKind::LinearFlow => Arc::new(LinearFlowFamily::quaternionic()),
        FamilyKind::TwistedFlow => Arc::new(LinearFlowFamily::twisted()),
    };
    let k = family.base_dim();
    let s0 = family.basepoint();
    let s1 = match &flags.to {
        Some(v) if v.len() == k => DVector::from_column_slice(v),
        Some(v) => {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: v.len(),
            })
        }
        None => &s0 + DVector::from_fn(k, |i, _| 0.1 * (i as f64 + 1.0)),
    };
    let n_samples = flags.samples.unwrap_or(100);
    if n_samples < 2 {
        return Err(Error::Invalid("--samples must be at least 2".into()));
    }
    let settings = IntegratorSettings::default();
    let path = Path::straight(&s0, &s1)?;
    let xs = fiber_samples(family.as_ref(), &s0, n_samples, flags.seed.unwrap_or(1));
    let t = integrate(&family, &path, &xs, settings)?;
    let pairs: Vec<(usize, usize)> = (0..n_samples).map(|i| (i, (i + 1) % n_samples)).collect();
    let iso = verify_isometry(&t, &pairs, tol);
    let mut passed = iso.holds;

    let holomorphy = if matches!(kind, FamilyKind::Sphere) {
        Vec::new()
    } else {
        let ls = sample_structures(flags.sphere_samples.unwrap_or(11).max(3));
        let r = verify_holomorphy_many(&t, &ls, tol)?;
        passed &= r.iter().all(|h| h.holds);
        r
    };

    let curvature = if k >= 2 {
        let a = DVector::from_fn(k, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let b = DVector::from_fn(k, |i, _| if i == 1 { 1.0 } else { 0.0 });
        let probe_samples = &xs[..xs.len().min(16)];
        match kind {
            FamilyKind::Sphere => {
                let mut rows = Vec::new();
                for i in 0..4 {
                    let h = 1e-2 / 2f64.powi(i);
                    let p = family_curvature(&family, &s0, &a, &b, h, probe_samples, settings)?;
                    let expected = GreatCircleFamily::loop_solid_angle(&s0, h) / (h * h);
                    // the sample farthest from the closed form
                    let measured = p
                        .sources
                        .iter()
                        .zip(&p.images)
                        .map(|(x, y)| GreatCircleFamily::rotation_angle(&s0, x, y) / (h * h))
                        .max_by(|a, b| (a - expected).abs().total_cmp(&(b - expected).abs()))
                        .unwrap_or(f64::NAN);
                    passed &= (measured - expected).abs() <= 1e-4;
                    rows.push(CurvatureRow {
                        h,
                        defect: measured,
                        expected: Some(expected),
                    });
                }
                rows
            }
            _ => {
                let rows = flatness_study(&family, &s0, &a, &b, 1e-2, 3, probe_samples, settings)?;
                passed &= rows.iter().all(|r| r.defect <= 1e-8 * (r.h / 1e-2).powi(2));
                rows
            }
        }
    } else {
        Vec::new()
    };

    let report = FamilyReport {
        family: family.name(),
        path,
        n_samples,
        isometry_defect: iso.defect,
        holomorphy_defect: holomorphy,
        curvature_defect: curvature,
        stats: t.stats,
    };
    emit_json(
        flags.out.as_deref(),
        &DeformOutput {
            report,
            tol,
            passed,
        },
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Serialize)]
struct BundleSummary {
    frame: String,
    h: f64,
    r1: f64,
    r3: f64,
    min_positivity: f64,
    splitting: SplittingReport,
}

#[derive(Debug, Serialize)]
struct BundleCsvRow {
    frame: &'static str,
    node: usize,
    r1: f64,
    r3: f64,
    a_norm: f64,
    beta_norm: f64,
    lambda1: f64,
    lambda3: f64,
    positivity: f64,
}

pub fn bundle_check(flags: Flags) -> Result<i32> {
    let tol = flags.tol(1e-4)?;
    let grid = flags.grid.unwrap_or(2);
    if grid == 0 {
        return Err(Error::Invalid("--grid must be positive".into()));
    }
    let h = 1e-3;
    let nodes = box_nodes(&DVector::from_element(4, 0.1), 0.6, grid);
    let frames: [(&'static str, FrameMap); 3] = [
        ("rotating-line", examples::rotating_line(1.3)),
        ("twisted-line", examples::twisted_line(0.8, 0.3, 1.3)),
        ("holomorphic-graph", examples::holomorphic_graph()),
    ];
    let mut summaries = Vec::new();
    let mut csv_out = csv::Writer::from_writer(Vec::new());
    let mut passed = true;
    for (name, frame) in frames {
        let s = SubbundleField::new(1, frame, nodes.clone(), h)?;
        let r = gauss_codazzi_check(&s, ImaginaryUnit::I, h)?;
        let sp = splitting_check(&s, ImaginaryUnit::I, 1e-7)?;
        passed &= r.max_residual() <= tol && r.min_positivity() >= -1e-12 && sp.holds;
        for n in &r.nodes {
            csv_out
                .serialize(BundleCsvRow {
                    frame: name,
                    node: n.node,
                    r1: n.r1,
                    r3: n.r3,
                    a_norm: n.a_norm,
                    beta_norm: n.beta_norm,
                    lambda1: n.lambda1,
                    lambda3: n.lambda3,
                    positivity: n.positivity,
                })
                .map_err(|e| Error::Invalid(e.to_string()))?;
        }
        summaries.push(BundleSummary {
            frame: name.into(),
            h,
            r1: r.r1,
            r3: r.r3,
            min_positivity: r.min_positivity(),
            splitting: sp,
        });
    }
    let bytes = csv_out
        .into_inner()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    match &flags.out {
        Some(p) => {
            std::fs::write(p, &bytes)?;
            emit_json(None, &summaries)?;
        }
        None => emit_json(None, &summaries)?,
    }
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn selftest(flags: Flags) -> Result<i32> {
    if flags.list {
        for name in suite_names() {
            println!("{name}");
        }
        return Ok(EXIT_OK);
    }
    let config = SelftestConfig {
        seed: flags.seed.unwrap_or(1),
        fd_tol: match flags.tol {
            Some(_) => Some(flags.tol(0.0)?),
            None => None,
        },
    };
    let report = run_all(&config, |name, secs, ok| {
        println!(
            "{:<26} {:<4} {:>8.3}s",
            name,
            if ok { "PASS" } else { "FAIL" },
            secs
        );
    })?;
    if let Some(out) = &flags.out {
        emit_json(Some(out), &report)?;
    }
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}
