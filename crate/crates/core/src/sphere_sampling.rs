//! Deterministic samples of the sphere of induced complex structures.

use std::f64::consts::PI;

use crate::quat::ImaginaryUnit;

/// `count` structures: `I, J, K, −I, −J, −K` first, then a Fibonacci lattice.
pub fn sample_structures(count: usize) -> Vec<ImaginaryUnit> {
    let axes = [
        ImaginaryUnit::I,
        ImaginaryUnit::J,
        ImaginaryUnit::K,
        -ImaginaryUnit::I,
        -ImaginaryUnit::J,
        -ImaginaryUnit::K,
    ];
    let mut out: Vec<ImaginaryUnit> = axes.iter().copied().take(count).collect();
    let rest = count.saturating_sub(axes.len());
    let golden = PI * (3.0 - 5f64.sqrt());
    for m in 0..rest {
        let z = 1.0 - 2.0 * (m as f64 + 0.5) / rest as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * m as f64;
        out.push(
            ImaginaryUnit::normalized(r * phi.cos(), r * phi.sin(), z)
                .expect("Fibonacci points are nonzero"),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_come_first() {
        let s = sample_structures(8);
        assert_eq!(s.len(), 8);
        assert_eq!(s[0], ImaginaryUnit::I);
        assert_eq!(s[2], ImaginaryUnit::K);
        assert_eq!(s[5], -ImaginaryUnit::K);
        assert_eq!(
            sample_structures(3),
            vec![ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::K]
        );
    }

    #[test]
    fn samples_cover_the_sphere() {
        let s = sample_structures(200);
        // every point of a coarse test grid has a sample within 0.35
        for a in 0..10 {
            for b in 0..10 {
                let th = PI * (a as f64 + 0.5) / 10.0;
                let ph = 2.0 * PI * b as f64 / 10.0;
                let p =
                    ImaginaryUnit::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()).unwrap();
                let d = s
                    .iter()
                    .map(|q| q.distance(p))
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 0.35);
            }
        }
    }
}
