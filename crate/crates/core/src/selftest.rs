//! Invariant suites run by `trianalytic selftest`. Each suite is
//! deterministic for a fixed seed; timings are kept out of the report so
//! reports can be compared byte for byte.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::ambient::{AffineSubtorus, Catalog, HKTorus};
use crate::bundles::subbundle::{box_nodes, examples};
use crate::bundles::{
    gauss_codazzi_check, gauss_codazzi_convergence, triholomorphic_section_parallel, SectionField,
    SubbundleField,
};
use crate::error::Result;
use crate::exterior::{kahler_form, lambda_op, su2_invariant_basis, ConstantForm};
use crate::families::{
    fiber_samples, flatness_study, integrate, path_independence_check, verify_holomorphy_many,
    verify_isometry, weight_argument_check, DeformationFamily, GreatCircleFamily,
    IntegratorSettings, Path, TranslationFamily,
};
use crate::hk_variety::{hk_axiom_check, HKStructureData};
use crate::quat::{
    complex_structure_operator, random_structure, random_unit, rotate_structure,
    su2_tangent_action, ImaginaryUnit, StructureTriple,
};
use crate::wirtinger::{
    complexity_residual, degree, degree_spread, dual_class, is_trianalytic, xi_ratio, Subvariety,
};

#[derive(Clone, Debug)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Overrides the tolerance of the finite-difference suites.
    pub fd_tol: Option<f64>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 1,
            fd_tol: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

type SuiteFn = fn(&SelftestConfig) -> Result<SuiteReport>;

pub const SUITES: &[(&str, SuiteFn)] = &[
    ("quaternion-algebra", quaternion_algebra),
    ("wirtinger-equality", wirtinger_equality),
    ("trianalytic-criteria", trianalytic_criteria),
    ("degree-invariance", degree_invariance),
    ("lambda-vanishing", lambda_vanishing),
    ("gauss-codazzi", gauss_codazzi),
    ("triholomorphic-parallel", triholomorphic_parallel),
    ("family-flatness", family_flatness),
    ("transport", transport),
    ("weight-argument", weight_argument),
    ("hk-axiom", hk_axiom),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs every suite, calling `on_done(name, seconds, passed)` after each.
pub fn run_all(
    config: &SelftestConfig,
    mut on_done: impl FnMut(&str, f64, bool),
) -> Result<SelftestReport> {
    let mut suites = Vec::new();
    for (name, f) in SUITES {
        let start = Instant::now();
        let report = f(config)?;
        on_done(name, start.elapsed().as_secs_f64(), report.passed);
        suites.push(report);
    }
    Ok(SelftestReport {
        seed: config.seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn report(name: &str, passed: bool, metrics: &[(&str, f64)]) -> SuiteReport {
    SuiteReport {
        name: name.into(),
        passed,
        metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn rng(config: &SelftestConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

fn quaternion_algebra(config: &SelftestConfig) -> Result<SuiteReport> {
    let mut rng = rng(config, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = random_unit(&mut rng);
        let t = StructureTriple::rotated(u)?;
        let [i, j, k] = [t.i, t.j, t.k].map(|l| complex_structure_operator(l, 2).into_matrix());
        worst = worst.max((&i * &j - &k).norm());
        worst = worst.max((&i * &j + &j * &i).norm());
        worst = worst.max((&i * &i + DMatrix::identity(8, 8)).norm());
        let l = random_structure(&mut rng);
        let a = su2_tangent_action(u, 2)?.into_matrix();
        let lhs = &a * complex_structure_operator(l, 2).into_matrix() * a.transpose();
        let rhs = complex_structure_operator(rotate_structure(u, l)?, 2).into_matrix();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(report(
        "quaternion-algebra",
        worst <= 1e-10,
        &[("cases", 100.0), ("max_defect", worst)],
    ))
}

/// A random `2m`-dimensional subspace of `ℍ²`, complex for `l` when given.
fn random_subspace<R: Rng>(rng: &mut R, m: usize, l: Option<ImaginaryUnit>) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = match l {
        Some(l) => {
            let op = complex_structure_operator(l, 2).into_matrix();
            (0..m)
                .flat_map(|_| {
                    let v = gaussian_vector(rng, 8);
                    let lv = &op * &v;
                    [v, lv]
                })
                .collect()
        }
        None => (0..2 * m).map(|_| gaussian_vector(rng, 8)).collect(),
    };
    DMatrix::from_columns(&cols)
}

fn wirtinger_equality(config: &SelftestConfig) -> Result<SuiteReport> {
    let mut rng = rng(config, 2);
    let (mut mismatches, mut excess, mut complex_cases) = (0usize, 0f64, 0usize);
    for case in 0..10_000 {
        let m = 1 + case % 3;
        let l = random_structure(&mut rng);
        // complex for l, complex for another structure, or generic
        let w = match case % 4 {
            0 => random_subspace(&mut rng, m, Some(l)),
            1 => {
                let other = random_structure(&mut rng);
                random_subspace(&mut rng, m, Some(other))
            }
            _ => random_subspace(&mut rng, m, None),
        };
        let xi = xi_ratio(&w, l)?;
        let complex = complexity_residual(&w, l)? <= 1e-9;
        complex_cases += complex as usize;
        excess = excess.max(xi - 1.0);
        if ((xi - 1.0).abs() <= 1e-9) != complex {
            mismatches += 1;
        }
    }
    Ok(report(
        "wirtinger-equality",
        mismatches == 0 && excess <= 1e-12 && complex_cases > 0,
        &[
            ("cases", 10_000.0),
            ("complex_cases", complex_cases as f64),
            ("mismatches", mismatches as f64),
            ("max_excess", excess.max(0.0)),
        ],
    ))
}

fn trianalytic_criteria(_config: &SelftestConfig) -> Result<SuiteReport> {
    let cat = Catalog::bundled();
    let mut disagreements = 0usize;
    let mut trianalytic = 0usize;
    for e in &cat.entries {
        let x = cat.subtorus(e)?;
        let by_volume = is_trianalytic(Subvariety::from(&x), 1e-8, 64)?.is_trianalytic();
        let by_dual = crate::exterior::is_su2_invariant(&dual_class(&x), 1e-9)?;
        let by_oracle = x.is_quaternionic();
        trianalytic += by_oracle as usize;
        if by_volume != by_oracle || by_dual != by_oracle {
            disagreements += 1;
        }
    }
    Ok(report(
        "trianalytic-criteria",
        disagreements == 0,
        &[
            ("entries", cat.entries.len() as f64),
            ("trianalytic", trianalytic as f64),
            ("disagreements", disagreements as f64),
        ],
    ))
}

fn random_invariant_form<R: Rng>(rng: &mut R, degree: usize) -> Result<ConstantForm> {
    let basis = su2_invariant_basis(8, degree)?;
    let c = gaussian_vector(rng, basis.ncols());
    ConstantForm::from_real_coefficients(8, degree, (basis.as_ref() * c).as_slice())
}

fn degree_invariance(config: &SelftestConfig) -> Result<SuiteReport> {
    let mut rng = rng(config, 4);
    let torus = HKTorus::unit(2);
    let structures: Vec<ImaginaryUnit> = (0..20).map(|_| random_structure(&mut rng)).collect();
    let mut spread: f64 = 0.0;
    for _ in 0..10 {
        let alpha = random_invariant_form(&mut rng, 4)?;
        spread = spread.max(degree_spread(&alpha, &structures, &torus)?);
    }
    let control = degree_spread(
        &kahler_form(ImaginaryUnit::I, 2).power(2),
        &structures,
        &torus,
    )?;
    Ok(report(
        "degree-invariance",
        spread <= 1e-10 && control > 0.1,
        &[("max_spread", spread), ("control_spread", control)],
    ))
}

fn lambda_vanishing(config: &SelftestConfig) -> Result<SuiteReport> {
    let mut rng = rng(config, 5);
    let torus = HKTorus::unit(2);
    let (mut lam, mut deg): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let f = random_invariant_form(&mut rng, 2)?;
        for _ in 0..20 {
            let l = random_structure(&mut rng);
            lam = lam.max(lambda_op(&f, l)?.norm());
            deg = deg.max(degree(&f, l, &torus)?.abs());
        }
    }
    Ok(report(
        "lambda-vanishing",
        lam <= 1e-10 && deg <= 1e-10,
        &[("max_lambda", lam), ("max_degree", deg)],
    ))
}

fn gauss_codazzi(config: &SelftestConfig) -> Result<SuiteReport> {
    let tol = config.fd_tol.unwrap_or(1e-4);
    let nodes = box_nodes(&DVector::from_element(4, 0.1), 0.6, 2);
    let rotating = SubbundleField::new(1, examples::rotating_line(1.3), nodes.clone(), 1e-3)?;
    let residual = gauss_codazzi_check(&rotating, ImaginaryUnit::I, 1e-3)?.max_residual();
    let twisted = SubbundleField::new(1, examples::twisted_line(0.8, 0.3, 1.3), nodes, 1e-3)?;
    let study = gauss_codazzi_convergence(&twisted, ImaginaryUnit::I, 1e-2, 3)?;
    let finest = *study.residuals.last().expect("nonempty study");
    Ok(report(
        "gauss-codazzi",
        residual <= tol && finest <= tol && study.order >= 1.9,
        &[
            ("rotating_residual", residual),
            ("twisted_residual", finest),
            ("order", study.order),
        ],
    ))
}

/// Sections over the quaternionic line: constants, and polynomials with
/// random nonzero coefficients.
fn generated_sections(seed: u64, count: usize) -> Result<Vec<(SectionField, bool)>> {
    let torus = HKTorus::unit(2);
    let w = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
    let x = AffineSubtorus::new(&torus, w, DVector::zeros(8))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let c0 = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let (section, parallel): (crate::bundles::SectionMap, bool) = match i % 5 {
                0 => (
                    Arc::new(move |_: &DVector<f64>| DVector::from_element(2, c0)),
                    true,
                ),
                1 | 2 => {
                    let m = DMatrix::from_fn(2, 4, |_, _| {
                        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    });
                    (
                        Arc::new(move |x: &DVector<f64>| {
                            let u = x.rows(0, 4).map(|v| Complex64::new(v, 0.0));
                            &m * u + DVector::from_element(2, c0)
                        }),
                        false,
                    )
                }
                3 => {
                    // I-holomorphic: (x₀ + i x₁)² + c
                    (
                        Arc::new(move |x: &DVector<f64>| {
                            let z = Complex64::new(x[0], x[1]);
                            DVector::from_element(1, z * z + c0)
                        }),
                        false,
                    )
                }
                _ => {
                    let a: f64 = rng.random_range(0.5..2.0);
                    (
                        Arc::new(move |x: &DVector<f64>| {
                            DVector::from_element(
                                1,
                                Complex64::from_polar(1.0, a * x[2] + a * x[3]) * c0,
                            )
                        }),
                        false,
                    )
                }
            };
            Ok((SectionField::new(x.clone(), section, 2, 1e-3)?, parallel))
        })
        .collect()
}

fn triholomorphic_parallel(config: &SelftestConfig) -> Result<SuiteReport> {
    let tol = config.fd_tol.unwrap_or(1e-8);
    let mut rng = rng(config, 7);
    let sections = generated_sections(rng.random(), 50)?;
    let (mut wrong, mut inconsistent) = (0usize, 0usize);
    for (field, parallel) in &sections {
        let l = random_structure(&mut rng);
        let r = triholomorphic_section_parallel(field, l, tol)?;
        wrong += (r.parallel != *parallel) as usize;
        inconsistent += (!r.consistent) as usize;
    }
    Ok(report(
        "triholomorphic-parallel",
        wrong == 0 && inconsistent == 0,
        &[
            ("sections", sections.len() as f64),
            ("misclassified", wrong as f64),
            ("false_implications", inconsistent as f64),
        ],
    ))
}

fn quaternionic_translation_family() -> Result<Arc<dyn DeformationFamily>> {
    let torus = HKTorus::unit(2);
    let w = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
    let x = AffineSubtorus::new(&torus, w, DVector::from_element(8, 0.25))?;
    Ok(Arc::new(TranslationFamily::full_normal(x)?))
}

fn family_flatness(config: &SelftestConfig) -> Result<SuiteReport> {
    let tol = config.fd_tol.unwrap_or(1e-8);
    let settings = IntegratorSettings::default();
    let f = quaternionic_translation_family()?;
    let s = f.basepoint();
    let xs = fiber_samples(f.as_ref(), &s, 16, config.seed);
    let e = |i: usize| DVector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 });
    let rows = flatness_study(&f, &s, &e(0), &e(2), 1e-2, 3, &xs, settings)?;
    let torus_ok = rows.iter().all(|r| r.defect <= tol * (r.h / 1e-2).powi(2));
    let torus_max = rows.iter().map(|r| r.defect).fold(0.0, f64::max);

    let g: Arc<dyn DeformationFamily> = Arc::new(GreatCircleFamily::new(1.1, 0.2)?);
    let sg = g.basepoint();
    let ys = fiber_samples(g.as_ref(), &sg, 8, config.seed);
    let h = 1e-2;
    let a = DVector::from_vec(vec![1.0, 0.0]);
    let b = DVector::from_vec(vec![0.0, 1.0]);
    let probe = crate::families::family_curvature(&g, &sg, &a, &b, h, &ys, settings)?;
    let exact = GreatCircleFamily::loop_solid_angle(&sg, h) / (h * h);
    let sphere_err = probe
        .sources
        .iter()
        .zip(&probe.images)
        .map(|(x, y)| (GreatCircleFamily::rotation_angle(&sg, x, y) / (h * h) - exact).abs())
        .fold(0.0, f64::max);
    Ok(report(
        "family-flatness",
        torus_ok && sphere_err <= 1e-4 && exact > 0.5,
        &[
            ("torus_max_defect", torus_max),
            ("sphere_density", exact),
            ("sphere_error", sphere_err),
        ],
    ))
}

fn transport(config: &SelftestConfig) -> Result<SuiteReport> {
    let settings = IntegratorSettings::default();
    let f = quaternionic_translation_family()?;
    let s0 = f.basepoint();
    let s1 = DVector::from_vec(vec![0.3, -0.2, 0.15, 0.4]);
    let xs = fiber_samples(f.as_ref(), &s0, 1000, config.seed);
    let t = integrate(&f, &Path::straight(&s0, &s1)?, &xs, settings)?;
    let pairs: Vec<(usize, usize)> = (0..1000).map(|i| (i, (i * 7 + 1) % 1000)).collect();
    let iso = verify_isometry(&t, &pairs, 1e-6);
    let mut rng = rng(config, 9);
    let mut ls = vec![ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::K];
    ls.extend((0..8).map(|_| random_structure(&mut rng)));
    let hol = verify_holomorphy_many(&t, &ls, 1e-6)?;
    let hol_max = hol
        .iter()
        .map(|r| r.defect.max(r.tangent_leak))
        .fold(0.0, f64::max);
    let mid = DVector::from_vec(vec![0.3, 0.0, 0.0, 0.0]);
    let pi = path_independence_check(
        &f,
        &Path::straight(&s0, &s1)?,
        &Path::new(vec![s0.clone(), mid, s1.clone()])?,
        &xs[..100],
        settings,
        1e-7,
    )?;
    Ok(report(
        "transport",
        iso.holds && hol.iter().all(|r| r.holds) && pi.holds,
        &[
            ("isometry_defect", iso.defect),
            ("holomorphy_defect", hol_max),
            ("path_discrepancy", pi.discrepancy),
        ],
    ))
}

fn weight_argument(_config: &SelftestConfig) -> Result<SuiteReport> {
    let r = weight_argument_check(1e-10)?;
    Ok(report(
        "weight-argument",
        r.invariant_dim == 0 && r.control_dims == [4, 3],
        &[
            ("hom_dim", r.hom_dim as f64),
            ("invariant_dim", r.invariant_dim as f64),
            ("min_singular_value", r.min_singular_value),
        ],
    ))
}

fn hk_axiom(config: &SelftestConfig) -> Result<SuiteReport> {
    let mut rng = rng(config, 11);
    let triples: Vec<StructureTriple> = (0..20)
        .map(|_| StructureTriple::rotated(random_unit(&mut rng)))
        .collect::<Result<_>>()?;
    let mut worst = hk_axiom_check(&HKStructureData::torus(2), &triples, 1e-10)?.defect;
    let cat = Catalog::bundled();
    for e in &cat.entries {
        let x = cat.subtorus(e)?;
        if x.is_quaternionic() {
            worst = worst
                .max(hk_axiom_check(&HKStructureData::restricted(&x)?, &triples, 1e-10)?.defect);
        }
    }
    Ok(report("hk-axiom", worst <= 1e-10, &[("max_defect", worst)]))
}
