//! Kähler forms, the holomorphic symplectic form, Hodge types and `Λ`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ConstantForm;
use crate::error::{Error, Result};
use crate::quat::{complex_structure_operator, ImaginaryUnit, StructureTriple};

/// `ω_L(v, w) = g(L v, w)` on `ℍⁿ`.
pub fn kahler_form(l: ImaginaryUnit, n: usize) -> ConstantForm {
    let m = complex_structure_operator(l, n).into_matrix();
    ConstantForm::from_bilinear(&m.transpose())
}

/// `Ω = ω_J + √−1 ω_K`, of type (2,0) for `I`.
pub fn holomorphic_symplectic(triple: &StructureTriple, n: usize) -> Result<ConstantForm> {
    let checked = StructureTriple::new(triple.i, triple.j, triple.k)?;
    let oj = kahler_form(checked.j, n);
    let ok = kahler_form(checked.k, n);
    Ok(&oj + &ok.scale(Complex64::new(0.0, 1.0)))
}

#[derive(Clone, Debug)]
pub struct HodgeComponent {
    pub p: usize,
    pub q: usize,
    pub form: ConstantForm,
}

/// Splits `α` into its `(p, q)` parts for `L`, listed with `p` ascending.
///
/// A `(1,0)` covector satisfies `ξ∘L = √−1 ξ`, so pulling back by
/// `exp(tL) = cos t + L sin t` multiplies a `(p,q)` part by `e^{i(p−q)t}`.
/// The parts are recovered exactly by a discrete Fourier average over
/// `2k+1` equally spaced angles.
pub fn hodge_components(alpha: &ConstantForm, l: ImaginaryUnit) -> Result<Vec<HodgeComponent>> {
    let k = alpha.degree();
    let dim = alpha.dim();
    if !dim.is_multiple_of(4) {
        return Err(Error::Invalid(format!(
            "dimension {dim} is not a multiple of 4"
        )));
    }
    let lm = complex_structure_operator(l, dim / 4).into_matrix();
    let samples = 2 * k + 1;
    let rotated: Vec<(f64, ConstantForm)> = (0..samples)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / samples as f64;
            let a = DMatrix::identity(dim, dim) * t.cos() + &lm * t.sin();
            (t, alpha.pullback(&a))
        })
        .collect();
    let mut out = Vec::with_capacity(k + 1);
    for p in 0..=k {
        let q = k - p;
        let d = p as f64 - q as f64;
        let mut acc = ConstantForm::zero(dim, k);
        for (t, f) in &rotated {
            let phase = Complex64::from_polar(1.0 / samples as f64, -d * t);
            acc = &acc + &f.scale(phase);
        }
        out.push(HodgeComponent { p, q, form: acc });
    }
    Ok(out)
}

/// The `(p,p)` part of `α` for `L`; zero in odd degree.
pub fn pp_part(alpha: &ConstantForm, l: ImaginaryUnit) -> Result<ConstantForm> {
    let k = alpha.degree();
    if k % 2 == 1 {
        if !alpha.dim().is_multiple_of(4) {
            return Err(Error::Invalid(format!(
                "dimension {} is not a multiple of 4",
                alpha.dim()
            )));
        }
        return Ok(ConstantForm::zero(alpha.dim(), k));
    }
    let comps = hodge_components(alpha, l)?;
    Ok(comps
        .into_iter()
        .find(|c| c.p == c.q)
        .map(|c| c.form)
        .expect("even degree has a diagonal part"))
}

/// `Λ_L`, the adjoint of `β ↦ ω_L ∧ β`: `Σ_{a<b} ω_{ab} ι_b ι_a`.
pub fn lambda_op(alpha: &ConstantForm, l: ImaginaryUnit) -> Result<ConstantForm> {
    if alpha.degree() < 2 {
        return Err(Error::DegreeTooLow(alpha.degree()));
    }
    let dim = alpha.dim();
    if !dim.is_multiple_of(4) {
        return Err(Error::Invalid(format!(
            "dimension {dim} is not a multiple of 4"
        )));
    }
    let omega = kahler_form(l, dim / 4);
    let mut out = ConstantForm::zero(dim, alpha.degree() - 2);
    for (idx, w) in omega.terms() {
        let term = alpha.interior(idx[0]).interior(idx[1]);
        out = &out + &term.scale(w);
    }
    Ok(out)
}
