//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; the process exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use trianalytic::ambient::{AffineSubtorus, Catalog, HKTorus};
use trianalytic::bundles::subbundle::{box_nodes, examples};
use trianalytic::bundles::{
    gauss_codazzi_check, gauss_codazzi_convergence, triholomorphic_section_parallel, SectionField,
    SectionMap, SubbundleField,
};
use trianalytic::exterior::{is_su2_invariant, lambda_op, su2_pullback, ConstantForm};
use trianalytic::families::{
    fiber_samples, flatness_study, integrate, path_independence_check, verify_holomorphy_many,
    verify_isometry, weight_argument_check, DeformationFamily, GreatCircleFamily,
    IntegratorSettings, Path, TranslationFamily,
};
use trianalytic::hk_variety::{hk_axiom_check, model_symplectic, HKStructureData};
use trianalytic::quat::{
    complex_structure_operator, qmul, rotate_structure, su2_tangent_action, ImaginaryUnit,
    Quaternion, StructureTriple,
};
use trianalytic::selftest::{run_all, SelftestConfig};
use trianalytic::wirtinger::{
    degree, degree_spread, dual_class, is_trianalytic, xi_ratio, Subvariety,
};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

// ---------------------------------------------------------------------------
// Test-local oracles, written without the library's quaternion code.

type Q = [f64; 4];

fn ham(p: Q, q: Q) -> Q {
    let [a, b, c, d] = p;
    let [w, x, y, z] = q;
    [
        a * w - b * x - c * y - d * z,
        a * x + b * w + c * z - d * y,
        a * y - b * z + c * w + d * x,
        a * z + b * y - c * x + d * w,
    ]
}

fn qconj(q: Q) -> Q {
    [q[0], -q[1], -q[2], -q[3]]
}

fn qnorm(q: Q) -> f64 {
    q.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Blockwise matrix of `v ↦ f(v)` on `ℍⁿ`.
fn block_matrix(n: usize, f: impl Fn(Q) -> Q) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for c in 0..4 {
        let mut e = [0.0; 4];
        e[c] = 1.0;
        let img = f(e);
        for b in 0..n {
            for r in 0..4 {
                m[(4 * b + r, 4 * b + c)] = img[r];
            }
        }
    }
    m
}

fn left(q: Q, n: usize) -> DMatrix<f64> {
    block_matrix(n, |v| ham(q, v))
}

fn imag(l: ImaginaryUnit) -> Q {
    let [a, b, c] = l.components();
    [0.0, a, b, c]
}

fn gaussian<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

fn random_unit_q<R: Rng>(rng: &mut R) -> Q {
    let v = gaussian(rng, 4).normalize();
    [v[0], v[1], v[2], v[3]]
}

fn random_l<R: Rng>(rng: &mut R) -> ImaginaryUnit {
    let v = gaussian(rng, 3).normalize();
    ImaginaryUnit::new(v[0], v[1], v[2]).expect("unit vector")
}

fn orthonormal(w: &DMatrix<f64>) -> DMatrix<f64> {
    w.clone().qr().q()
}

/// `‖(1 − QQᵀ) M Q‖` for orthonormal `Q`.
fn leak(q: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let mq = m * q;
    (&mq - q * (q.transpose() * &mq)).norm()
}

/// Whether `span W` is closed under left multiplication by `i` and `j`.
fn quaternionic_oracle(w: &DMatrix<f64>) -> bool {
    let q = orthonormal(w);
    let n = w.nrows() / 4;
    leak(&q, &left([0.0, 1.0, 0.0, 0.0], n)) < 1e-9
        && leak(&q, &left([0.0, 0.0, 1.0, 0.0], n)) < 1e-9
}

/// The invariant 2-form `(v, w) ↦ ⟨v_a, w_b q⟩ − ⟨w_a, v_b q⟩` on `ℍ²`.
fn invariant_two_form(a: usize, b: usize, q: Q) -> ConstantForm {
    let mut m = DMatrix::zeros(8, 8);
    for alpha in 0..4 {
        for beta in 0..4 {
            let mut e = [0.0; 4];
            e[beta] = 1.0;
            // ⟨e_α, e_β q⟩ is the α-th coordinate of e_β q
            let v = ham(e, q)[alpha];
            m[(4 * a + alpha, 4 * b + beta)] += v;
            m[(4 * b + beta, 4 * a + alpha)] -= v;
        }
    }
    ConstantForm::from_bilinear(&m)
}

fn random_invariant_two_form<R: Rng>(rng: &mut R) -> ConstantForm {
    let mut f = ConstantForm::zero(8, 2);
    for a in 0..2 {
        for b in 0..2 {
            for q in 0..4 {
                let mut e = [0.0; 4];
                e[q] = 1.0;
                let c: f64 = rng.sample(StandardNormal);
                f = &f + &(&invariant_two_form(a, b, e) * c);
            }
        }
    }
    f
}

/// `ω_L(v, w) = ⟨Lv, w⟩` as a form.
fn kahler(l: ImaginaryUnit) -> ConstantForm {
    ConstantForm::from_bilinear(&left(imag(l), 2).transpose())
}

/// `⟨α, β⟩` for real 2-forms given as bilinear matrices, summing over `a < b`.
fn pairing(alpha: &ConstantForm, beta: &ConstantForm) -> f64 {
    alpha
        .coefficients()
        .iter()
        .zip(beta.coefficients())
        .map(|(x, y)| x.re * y.re)
        .sum()
}

// ---------------------------------------------------------------------------
// Criteria.

fn c01_quaternion_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let id = DMatrix::<f64>::identity(8, 8);
    for _ in 0..100 {
        let (p, q) = (random_unit_q(&mut rng), gaussian(&mut rng, 4));
        let q = [q[0], q[1], q[2], q[3]];
        let lib = qmul(Quaternion::from_array(p), Quaternion::from_array(q)).to_array();
        let pq = ham(p, q);
        worst = worst.max(qnorm([
            lib[0] - pq[0],
            lib[1] - pq[1],
            lib[2] - pq[2],
            lib[3] - pq[3],
        ]));
        worst = worst.max((qnorm(pq) - qnorm(p) * qnorm(q)).abs());

        let u = random_unit_q(&mut rng);
        let t = StructureTriple::rotated(Quaternion::from_array(u))?;
        let [i, j, k] = [t.i, t.j, t.k].map(|l| complex_structure_operator(l, 2).into_matrix());
        for (l, m) in [(t.i, &i), (t.j, &j), (t.k, &k)] {
            worst = worst.max((m - left(imag(l), 2)).norm());
        }
        worst = worst.max((&i * &j - &k).norm());
        worst = worst.max((&i * &j + &j * &i).norm());
        worst = worst.max((&i * &i + &id).norm());
        // the rotated triple is the conjugate of the standard one
        let expect_i = ham(ham(u, [0.0, 1.0, 0.0, 0.0]), qconj(u));
        worst = worst.max((&i - left(expect_i, 2)).norm());

        let l = random_l(&mut rng);
        let a = su2_tangent_action(Quaternion::from_array(u), 2)?.into_matrix();
        worst = worst.max((&a - block_matrix(2, |v| ham(ham(u, v), qconj(u)))).norm());
        let lhs = &a * left(imag(l), 2) * a.transpose();
        let rotated = ham(ham(u, imag(l)), qconj(u));
        worst = worst.max((&lhs - left(rotated, 2)).norm());
        let lib_rot = rotate_structure(Quaternion::from_array(u), l)?;
        worst = worst.max((&lhs - complex_structure_operator(lib_rot, 2).into_matrix()).norm());
    }
    Ok((worst <= 1e-10, format!("100 cases, max defect {worst:.2e}")))
}

fn c02_wirtinger_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut mismatches, mut complex_cases, mut excess) = (0usize, 0usize, f64::NEG_INFINITY);
    for case in 0..10_000 {
        let m = 1 + case % 3;
        let l = random_l(&mut rng);
        let cols: Vec<DVector<f64>> = match case % 4 {
            0 | 1 => {
                let base = if case % 4 == 0 { l } else { random_l(&mut rng) };
                let op = left(imag(base), 2);
                (0..m)
                    .flat_map(|_| {
                        let v = gaussian(&mut rng, 8);
                        let lv = &op * &v;
                        [v, lv]
                    })
                    .collect()
            }
            _ => (0..2 * m).map(|_| gaussian(&mut rng, 8)).collect(),
        };
        let w = DMatrix::from_columns(&cols);
        let xi = xi_ratio(&w, l)?;
        let complex = leak(&orthonormal(&w), &left(imag(l), 2)) <= 1e-9;
        complex_cases += complex as usize;
        excess = excess.max(xi - 1.0);
        if ((xi - 1.0).abs() <= 1e-9) != complex {
            mismatches += 1;
        }
    }
    let ok = mismatches == 0 && excess <= 1e-12 && complex_cases >= 2500;
    Ok((
        ok,
        format!("10000 subspaces, {complex_cases} complex, {mismatches} mismatches, max Ξ−1 {excess:.2e}"),
    ))
}

fn c03_trianalytic_criteria() -> Outcome {
    let cat = Catalog::bundled();
    let (mut disagreements, mut trianalytic) = (0usize, 0usize);
    for e in &cat.entries {
        let x = cat.subtorus(e)?;
        let by_volume = is_trianalytic(Subvariety::from(&x), 1e-8, 64)?.is_trianalytic();
        let by_dual = is_su2_invariant(&dual_class(&x), 1e-9)?;
        let by_oracle = quaternionic_oracle(x.spanning());
        trianalytic += by_oracle as usize;
        if by_volume != by_oracle || by_dual != by_oracle {
            disagreements += 1;
        }
    }
    let ok = cat.entries.len() == 6 && disagreements == 0 && trianalytic > 0 && trianalytic < 6;
    Ok((
        ok,
        format!(
            "{} entries, {trianalytic} trianalytic, {disagreements} disagreements",
            cat.entries.len()
        ),
    ))
}

fn c04_degree_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let torus = HKTorus::unit(2);
    let structures: Vec<ImaginaryUnit> = (0..20).map(|_| random_l(&mut rng)).collect();
    let mut spread: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for _ in 0..10 {
        let alpha = random_invariant_two_form(&mut rng).wedge(&random_invariant_two_form(&mut rng));
        let u = Quaternion::from_array(random_unit_q(&mut rng));
        invariance = invariance.max(su2_pullback(u, &alpha)?.distance(&alpha));
        spread = spread.max(degree_spread(&alpha, &structures, &torus)?);
    }
    let control = degree_spread(&kahler(ImaginaryUnit::I).power(2), &structures, &torus)?;
    let ok = invariance <= 1e-10 && spread <= 1e-10 && control > 0.1;
    Ok((
        ok,
        format!("max spread {spread:.2e}, control spread {control:.3}, pullback defect {invariance:.2e}"),
    ))
}

fn c05_lambda_vanishing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let torus = HKTorus::unit(2);
    let (mut lam, mut deg, mut adjoint): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let f = random_invariant_two_form(&mut rng);
        for _ in 0..20 {
            let l = random_l(&mut rng);
            let out = lambda_op(&f, l)?;
            lam = lam.max(out.norm());
            // Λ on 2-forms is the pairing with ω_L
            adjoint = adjoint.max((out.coefficients()[0].re - pairing(&f, &kahler(l))).abs());
            deg = deg.max(degree(&f, l, &torus)?.abs());
        }
    }
    // positive control: Λ_L ω_L = 2n
    let control = lambda_op(&kahler(ImaginaryUnit::J), ImaginaryUnit::J)?.coefficients()[0].re;
    let ok = lam <= 1e-10 && deg <= 1e-10 && adjoint <= 1e-12 && (control - 4.0).abs() <= 1e-12;
    Ok((
        ok,
        format!("max |Λ| {lam:.2e}, max |deg| {deg:.2e}, Λω = {control}"),
    ))
}

fn c06_gauss_codazzi() -> Outcome {
    let nodes = box_nodes(&DVector::from_element(4, 0.1), 0.6, 2);
    let rate = 1.3;
    let rotating = SubbundleField::new(1, examples::rotating_line(rate), nodes.clone(), 1e-3)?;
    let residual = gauss_codazzi_check(&rotating, ImaginaryUnit::I, 1e-3)?.max_residual();
    // A(e_a) = ½(β(e_a) + iβ(Ie_a)) and only β(e₀) = rate·(−sin, cos) is nonzero
    let expected = [rate / 2.0, rate / 2.0, 0.0, 0.0];
    let mut a_err: f64 = 0.0;
    for x in &nodes {
        for (slot, m) in rotating.a_at(x, ImaginaryUnit::I)?.iter().enumerate() {
            a_err = a_err.max((m.norm() - expected[slot]).abs());
        }
    }

    let (a, theta0, b) = (0.8, 0.3, 1.3);
    let twisted =
        SubbundleField::new(1, examples::twisted_line(a, theta0, b), nodes.clone(), 1e-3)?;
    // Θ₁(e₀, e₁) = √−1·θ'·φ'·sin 2θ for the twisted line
    let mut theta_err: f64 = 0.0;
    for x in &nodes {
        let t = a * x[0] + theta0;
        let got = twisted.theta1_at(x, 1e-3)?[0][(0, 0)];
        theta_err = theta_err.max((got - Complex64::new(0.0, a * b * (2.0 * t).sin())).norm());
    }
    let study = gauss_codazzi_convergence(&twisted, ImaginaryUnit::I, 1e-2, 3)?;
    let finest = *study.residuals.last().expect("nonempty study");
    let ok = residual <= 1e-4
        && a_err <= 1e-6
        && theta_err <= 1e-4
        && finest <= 1e-4
        && study.order >= 1.9;
    Ok((
        ok,
        format!(
            "rotating residual {residual:.2e}, |A| error {a_err:.2e}, twisted Θ₁ error {theta_err:.2e}, \
             residuals {:?}, order {:.3}",
            study.residuals.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
            study.order
        ),
    ))
}

fn c07_triholomorphic_parallel() -> Outcome {
    let torus = HKTorus::unit(2);
    let w = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
    let x = AffineSubtorus::new(&torus, w, DVector::zeros(8))?;
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut false_pos, mut false_neg, mut inconsistent, mut parallel_count) =
        (0usize, 0usize, 0usize, 0usize);
    for i in 0..50 {
        let c0 = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        // ground truth: on a flat trivial bundle only constants are parallel
        let (section, truth): (SectionMap, bool) = match i % 5 {
            0 => (
                Arc::new(move |_: &DVector<f64>| DVector::from_element(3, c0)),
                true,
            ),
            1 => {
                let m =
                    DMatrix::from_fn(2, 4, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0));
                (
                    Arc::new(move |x: &DVector<f64>| {
                        &m * x.rows(0, 4).map(|v| Complex64::new(v, 0.0))
                    }),
                    false,
                )
            }
            2 => (
                Arc::new(move |x: &DVector<f64>| {
                    let z = Complex64::new(x[0], x[1]);
                    DVector::from_element(1, z * z * z + c0)
                }),
                false,
            ),
            3 => (
                Arc::new(move |x: &DVector<f64>| {
                    let z = Complex64::new(x[2], -x[3]);
                    DVector::from_element(1, z * c0)
                }),
                false,
            ),
            _ => {
                let k: f64 = rng.random_range(0.5..2.0);
                (
                    Arc::new(move |x: &DVector<f64>| {
                        DVector::from_element(2, Complex64::from_polar(1.0, k * x[1]) * c0)
                    }),
                    false,
                )
            }
        };
        let field = SectionField::new(x.clone(), section, 2, 1e-3)?;
        let r = triholomorphic_section_parallel(&field, random_l(&mut rng), 1e-8)?;
        parallel_count += truth as usize;
        false_pos += (r.parallel && !truth) as usize;
        false_neg += (!r.parallel && truth) as usize;
        inconsistent += (!r.consistent) as usize;
    }
    let ok = false_pos == 0 && false_neg == 0 && inconsistent == 0;
    Ok((
        ok,
        format!(
            "50 sections ({parallel_count} parallel), {false_pos} false positives, {false_neg} false negatives, \
             {inconsistent} broken implications"
        ),
    ))
}

fn pole(s: &DVector<f64>) -> [f64; 3] {
    [s[0].sin() * s[1].cos(), s[0].sin() * s[1].sin(), s[0].cos()]
}

fn c08_family_flatness() -> Outcome {
    let settings = IntegratorSettings::default();
    let torus = HKTorus::unit(2);
    let w = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
    let fiber = AffineSubtorus::new(&torus, w, DVector::from_element(8, 0.25))?;
    let f: Arc<dyn DeformationFamily> = Arc::new(TranslationFamily::full_normal(fiber)?);
    let s = f.basepoint();
    let xs = fiber_samples(f.as_ref(), &s, 16, 8);
    let e = |i: usize| DVector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 });
    let rows = flatness_study(&f, &s, &e(0), &e(2), 1e-2, 3, &xs, settings)?;
    let torus_ok = rows.len() == 4 && rows.iter().all(|r| r.defect <= 1e-8 * (r.h / 1e-2).powi(2));
    // direct holonomy: transport around the loop and compare with the start
    let loop_path = Path::parallelogram(&s, &e(1), &e(3), 1e-2)?;
    let t = integrate(&f, &loop_path, &xs, settings)?;
    let direct = t
        .sources
        .iter()
        .zip(&t.images)
        .map(|(x, y)| (y - x).norm())
        .fold(0.0, f64::max)
        / 1e-4;

    let (theta, phi) = (1.1, 0.2);
    let g: Arc<dyn DeformationFamily> = Arc::new(GreatCircleFamily::new(theta, phi)?);
    let sg = g.basepoint();
    let ys = fiber_samples(g.as_ref(), &sg, 8, 8);
    let h = 1e-2;
    let square = Path::parallelogram(
        &sg,
        &DVector::from_vec(vec![1.0, 0.0]),
        &DVector::from_vec(vec![0.0, 1.0]),
        h,
    )?;
    let tg = integrate(&g, &square, &ys, settings)?;
    // enclosed solid angle of the pole's square, per unit parameter area
    let exact = (sg[0].cos() - (sg[0] + h).cos()) / h;
    let p = pole(&sg);
    let mut sphere_err: f64 = 0.0;
    for (x, y) in tg.sources.iter().zip(&tg.images) {
        let cross = [
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ];
        let sin = p[0] * cross[0] + p[1] * cross[1] + p[2] * cross[2];
        let angle = sin.atan2(x[0] * y[0] + x[1] * y[1] + x[2] * y[2]);
        sphere_err = sphere_err.max((angle.abs() / (h * h) - exact).abs());
    }
    let ok = torus_ok && direct <= 1e-8 && sphere_err <= 1e-4 && exact > 0.5;
    Ok((
        ok,
        format!(
            "torus defects {:?}, direct {direct:.1e}; sphere density {exact:.6} error {sphere_err:.2e}",
            rows.iter().map(|r| format!("{:.1e}", r.defect)).collect::<Vec<_>>()
        ),
    ))
}

fn torus_distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (x - y).map(|d| d - d.round()).norm()
}

fn c09_transport() -> Outcome {
    let settings = IntegratorSettings::default();
    let torus = HKTorus::unit(2);
    let w = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
    let fiber = AffineSubtorus::new(&torus, w, DVector::from_element(8, 0.25))?;
    let family = TranslationFamily::full_normal(fiber)?;
    let b = family.directions().clone();
    let f: Arc<dyn DeformationFamily> = Arc::new(family);
    let s0 = f.basepoint();
    let s1 = DVector::from_vec(vec![0.3, -0.2, 0.15, 0.4]);
    let xs = fiber_samples(f.as_ref(), &s0, 1000, 9);
    let t = integrate(&f, &Path::straight(&s0, &s1)?, &xs, settings)?;

    // closed form: every point moves by B·Δs
    let shift = &b * (&s1 - &s0);
    let closed = t
        .sources
        .iter()
        .zip(&t.images)
        .map(|(x, y)| (y - x - &shift).norm())
        .fold(0.0, f64::max);

    let pairs: Vec<(usize, usize)> = (0..1000).map(|i| (i, (i * 7 + 1) % 1000)).collect();
    let iso_lib = verify_isometry(&t, &pairs, 1e-6);
    let iso = pairs
        .iter()
        .map(|&(i, j)| {
            (torus_distance(&t.images[i], &t.images[j])
                - torus_distance(&t.sources[i], &t.sources[j]))
            .abs()
        })
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut ls = vec![ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::K];
    ls.extend((0..8).map(|_| random_l(&mut rng)));
    let hol = verify_holomorphy_many(&t, &ls, 1e-6)?;
    let hol_lib = hol
        .iter()
        .map(|r| r.defect.max(r.tangent_leak))
        .fold(0.0, f64::max);
    // dΨ is expressed on the fiber frame e₀..e₃, which every L preserves
    let frame = DMatrix::from_fn(8, 4, |r, c| if r == c { 1.0 } else { 0.0 });
    let mut commutator: f64 = 0.0;
    for x in t.sources.iter().step_by(100) {
        let d = t.differential(x, 1e-3)?;
        for &l in &ls {
            let m = left(imag(l), 2);
            let on_fiber = frame.transpose() * &m * &frame;
            commutator = commutator.max((&d * on_fiber - &m * &d).norm());
        }
    }

    let mid = DVector::from_vec(vec![0.3, 0.0, 0.0, 0.0]);
    let bent = Path::new(vec![s0.clone(), mid, s1.clone()])?;
    let pi = path_independence_check(
        &f,
        &Path::straight(&s0, &s1)?,
        &bent,
        &xs[..100],
        settings,
        1e-7,
    )?;
    let tb = integrate(&f, &bent, &xs, settings)?;
    let direct_pi = t
        .images
        .iter()
        .zip(&tb.images)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let ok = closed <= 1e-6
        && iso <= 1e-6
        && iso_lib.holds
        && hol.iter().all(|r| r.holds)
        && commutator <= 1e-6
        && pi.holds
        && direct_pi <= 1e-7;
    Ok((
        ok,
        format!(
            "1000 pairs, 11 structures: isometry {iso:.1e}, commutator {:.1e}, path discrepancy {:.1e}, \
             closed-form error {closed:.1e}",
            commutator.max(hol_lib),
            pi.discrepancy.max(direct_pi)
        ),
    ))
}

/// Constraint matrix of `φ ∈ Hom(Λ²V, V)` commuting with the generators,
/// in the basis `E_ab = e_a e_bᵀ − e_b e_aᵀ` of `Λ²V ≅ so(4)`.
fn weight_constraints() -> DMatrix<f64> {
    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|a| ((a + 1)..4).map(move |b| (a, b)))
        .collect();
    let basis: Vec<DMatrix<f64>> = pairs
        .iter()
        .map(|&(a, b)| {
            let mut m = DMatrix::zeros(4, 4);
            m[(a, b)] = 1.0;
            m[(b, a)] = -1.0;
            m
        })
        .collect();
    let coords =
        |m: &DMatrix<f64>| DVector::from_iterator(6, pairs.iter().map(|&(a, b)| m[(a, b)]));
    let gens = [
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
    .map(|q| left(q, 1));
    let mut rows = DMatrix::zeros(3 * 24, 24);
    for (g, x) in gens.iter().enumerate() {
        // action on Λ²: A ↦ XA + AXᵀ, as a 6×6 matrix
        let ad = DMatrix::from_columns(
            &basis
                .iter()
                .map(|e| coords(&(x * e + e * x.transpose())))
                .collect::<Vec<_>>(),
        );
        for k in 0..24 {
            let mut phi = DMatrix::zeros(4, 6);
            phi[(k / 6, k % 6)] = 1.0;
            let d = x * &phi - &phi * &ad;
            for r in 0..24 {
                rows[(24 * g + r, k)] = d[(r / 6, r % 6)];
            }
        }
    }
    rows
}

fn c10_weight_argument() -> Outcome {
    let sv = weight_constraints().singular_values();
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let oracle_dim = sv.iter().filter(|s| **s <= 1e-10).count();
    let r = weight_argument_check(1e-10)?;
    let ok = oracle_dim == 0 && r.invariant_dim == 0 && r.hom_dim == 24 && r.control_dims == [4, 3];
    Ok((
        ok,
        format!(
            "Hom dim {}, invariant dim {} (oracle {oracle_dim}), min singular value {min:.3} (library {:.3})",
            r.hom_dim, r.invariant_dim, r.min_singular_value
        ),
    ))
}

fn c11_hk_axiom() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let triples: Vec<StructureTriple> = (0..20)
        .map(|_| StructureTriple::rotated(Quaternion::from_array(random_unit_q(&mut rng))))
        .collect::<Result<_, _>>()?;
    let mut lib = hk_axiom_check(&HKStructureData::torus(2), &triples, 1e-10)?.defect;
    let cat = Catalog::bundled();
    let mut subtori = vec![AffineSubtorus::full(&HKTorus::unit(2))];
    for e in &cat.entries {
        let x = cat.subtorus(e)?;
        if x.is_quaternionic() {
            lib =
                lib.max(hk_axiom_check(&HKStructureData::restricted(&x)?, &triples, 1e-10)?.defect);
            subtori.push(x);
        }
    }
    // −Re Ω(a, Jb) against ⟨a, b⟩ for tangent vectors of each subtorus
    let mut oracle: f64 = 0.0;
    for t in &triples {
        let omega = model_symplectic(t, 2)?;
        let j = left(imag(t.j), 2);
        for x in &subtori {
            let frame = x.tangent_frame();
            for _ in 0..5 {
                let a = frame * gaussian(&mut rng, frame.ncols());
                let b = frame * gaussian(&mut rng, frame.ncols());
                let r = -omega.evaluate(&[a.clone(), &j * &b])?.re;
                oracle = oracle.max((r - a.dot(&b)).abs());
            }
        }
    }
    let ok = lib <= 1e-10 && oracle <= 1e-10 && subtori.len() > 1;
    Ok((
        ok,
        format!(
            "{} spaces, 20 triples: defect {lib:.2e}, oracle {oracle:.2e}",
            subtori.len()
        ),
    ))
}

fn c12_selftest() -> Outcome {
    let config = SelftestConfig::default();
    let start = Instant::now();
    let first = run_all(&config, |_, _, _| {})?;
    let elapsed = start.elapsed().as_secs_f64();
    let second = run_all(&config, |_, _, _| {})?;
    let (a, b) = (
        serde_json::to_string(&first)?,
        serde_json::to_string(&second)?,
    );
    let failed: Vec<&str> = first
        .suites
        .iter()
        .filter(|s| !s.passed)
        .map(|s| s.name.as_str())
        .collect();
    let ok = first.passed && a == b && elapsed < 180.0;
    Ok((
        ok,
        format!(
            "{} suites, failed {failed:?}, identical reports: {}, single run {elapsed:.1} s",
            first.suites.len(),
            a == b
        ),
    ))
}

type Criterion = (&'static str, f64, fn() -> Outcome);

const CRITERIA: [Criterion; 12] = [
    ("quaternion algebra", 1.0, c01_quaternion_algebra),
    ("wirtinger equality case", 10.0, c02_wirtinger_equality),
    (
        "trianalyticity criteria agree",
        10.0,
        c03_trianalytic_criteria,
    ),
    ("degree invariance", 1.0, c04_degree_invariance),
    ("lambda vanishing", 1.0, c05_lambda_vanishing),
    ("gauss-codazzi identities", 30.0, c06_gauss_codazzi),
    (
        "triholomorphic implies parallel",
        5.0,
        c07_triholomorphic_parallel,
    ),
    ("family flatness", 30.0, c08_family_flatness),
    ("integrated transport", 60.0, c09_transport),
    ("weight argument", 1.0, c10_weight_argument),
    ("hyperkähler variety axiom", 1.0, c11_hk_axiom),
    ("selftest deterministic", 360.0, c12_selftest),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (index, (name, budget, f)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok && secs < *budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += (!ok) as usize;
        println!(
            "criterion {:02} {name}: {} ({detail}; {secs:.2} s, budget {budget} s)",
            index + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CRITERIA.len() - failures,
        CRITERIA.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
