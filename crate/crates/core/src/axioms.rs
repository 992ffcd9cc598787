//! Empirical constants of the estimator axioms on random refinement pairs.
//!
//! Every sample draws a coarse mesh by a few rounds of random marking from
//! the initial mesh, a fine mesh by one more random refinement, and random
//! coefficient vectors. The four quantities measured are
//!
//! * stability: `|eta_h(U, v_h) - eta_H(U, v_H)| / |||v_h - v_H|||` on the
//!   unchanged elements `U`,
//! * reduction: `eta_h(T_h \ T_H, v_H) / eta_H(T_H \ T_h, v_H)`,
//! * reliability: `|||u - u_H||| / eta_H(u_H)` with `u` replaced by a
//!   direct solve on a twice uniformly refined mesh of one degree more,
//! * discrete reliability: `|||u_h - u_H||| / eta_H(R_H, u_H)` with `R_H`
//!   the refined coarse elements.

use std::sync::Arc;

use rand::Rng;

use crate::driver::DriverError;
use crate::estimator::estimate;
use crate::fem::{FeSpace, ProblemData, Prolongation, assemble_system, energy_distance};
use crate::mesh::{MarkedSet, Refinement, Triangulation};
use crate::solver::solve_direct;

/// Measured ratios, one entry per sample where the ratio is defined.
#[derive(Debug, Clone, Default)]
pub struct AxiomSamples {
    pub stability: Vec<f64>,
    pub reduction: Vec<f64>,
    pub reliability: Vec<f64>,
    pub discrete_reliability: Vec<f64>,
}

/// Largest entry, or `None` for an empty sample.
pub fn sample_max(values: &[f64]) -> Option<f64> {
    values.iter().copied().reduce(f64::max)
}

fn random_marking(n: usize, p: f64, rng: &mut impl Rng) -> MarkedSet {
    let mut marked: Vec<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
    if marked.is_empty() {
        marked.push(rng.gen_range(0..n));
    }
    MarkedSet::new(marked)
}

/// A coarse mesh after `1..=max_rounds` random refinements and one further
/// random refinement of it.
pub fn random_pair(
    initial: &Triangulation,
    max_rounds: usize,
    rng: &mut impl Rng,
) -> Result<(Triangulation, Refinement), DriverError> {
    let mut coarse = initial.clone();
    for _ in 0..rng.gen_range(1..=max_rounds.max(1)) {
        let marked = random_marking(coarse.n_elements(), 0.3, rng);
        coarse = coarse.refine(&marked)?.mesh;
    }
    let marked = random_marking(coarse.n_elements(), 0.2, rng);
    let refinement = coarse.refine(&marked)?;
    Ok((coarse, refinement))
}

/// Samples the four axiom ratios on `samples` random refinement pairs of
/// `initial` with polynomial degree `degree`.
pub fn sample_axioms(
    initial: &Triangulation,
    data: &ProblemData,
    degree: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<AxiomSamples, DriverError> {
    let mut out = AxiomSamples::default();
    for _ in 0..samples {
        let (coarse_mesh, r) = random_pair(initial, 4, rng)?;
        let coarse = FeSpace::new(Arc::new(coarse_mesh.clone()), degree)?;
        let fine = FeSpace::new(Arc::new(r.mesh.clone()), degree)?;
        if coarse.dim() == 0 {
            continue;
        }
        let p = Prolongation::from_refinement(&coarse, &fine, &r)?;
        let fine_sys = assemble_system(&fine, data)?;
        let k = &fine_sys.stiffness;
        let unchanged = r.unchanged(&coarse_mesh);
        let children = r.children_count();
        let refined: Vec<bool> = children.iter().map(|&c| c > 1).collect();
        let coarse_unchanged: Vec<bool> = refined.iter().map(|r| !r).collect();
        let new_elements: Vec<bool> = unchanged.iter().map(|u| !u).collect();

        // Stability with independent random vectors.
        let v_coarse: Vec<f64> = (0..coarse.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v_fine: Vec<f64> = (0..fine.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pv = p.apply(&v_coarse);
        let eta_coarse = estimate(&coarse, data, &v_coarse)?;
        let eta_fine = estimate(&fine, data, &v_fine)?;
        let diff = energy_distance(k, &v_fine, &pv);
        if diff > 0.0 {
            let a = eta_fine.restrict_mask(&unchanged);
            let b = eta_coarse.restrict_mask(&coarse_unchanged);
            out.stability.push((a - b).abs() / diff);
        }

        // Reduction for the prolonged coarse vector.
        let eta_prolonged = estimate(&fine, data, &pv)?;
        let den = eta_coarse.restrict_mask(&refined);
        if den > 0.0 {
            out.reduction.push(eta_prolonged.restrict_mask(&new_elements) / den);
        }

        // Discrete reliability and reliability against direct solves.
        let coarse_sys = assemble_system(&coarse, data)?;
        let u_coarse = solve_direct(&coarse_sys.nonsym, &coarse_sys.load)?;
        let u_fine = solve_direct(&fine_sys.nonsym, &fine_sys.load)?;
        let eta_h = estimate(&coarse, data, &u_coarse)?;
        let den = eta_h.restrict_mask(&refined);
        if den > 0.0 {
            out.discrete_reliability.push(energy_distance(k, &u_fine, &p.apply(&u_coarse)) / den);
        }
        if eta_h.total() > 0.0 {
            let e = reference_distance(&coarse, &coarse_mesh, data, &u_coarse)?;
            out.reliability.push(e / eta_h.total());
        }
    }
    Ok(out)
}

/// `|||u_ref - u_H|||` where `u_ref` solves on the twice uniformly refined
/// mesh with degree one higher.
fn reference_distance(
    coarse: &FeSpace,
    coarse_mesh: &Triangulation,
    data: &ProblemData,
    u: &[f64],
) -> Result<f64, DriverError> {
    let r1 = coarse_mesh.refine(&MarkedSet::all(coarse_mesh.n_elements()))?;
    let r2 = r1.mesh.refine(&MarkedSet::all(r1.mesh.n_elements()))?;
    let parent: Vec<usize> = r2.parent.iter().map(|&p| r1.parent[p]).collect();
    let fine = FeSpace::new(Arc::new(r2.mesh), coarse.degree() + 1)?;
    let sys = assemble_system(&fine, data)?;
    let u_ref = solve_direct(&sys.nonsym, &sys.load)?;
    let p = Prolongation::new(coarse, &fine, &parent)?;
    Ok(energy_distance(&sys.stiffness, &u_ref, &p.apply(u)))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mesh::l_shape;

    #[test]
    fn random_pairs_are_nested_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (coarse, r) = random_pair(&l_shape(), 4, &mut rng).unwrap();
            assert!(coarse.is_valid() && r.mesh.is_valid());
            assert!(r.mesh.n_elements() > coarse.n_elements());
            assert_eq!(r.parent.len(), r.mesh.n_elements());
        }
    }

    #[test]
    fn poisson_ratios_are_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_axioms(&l_shape(), &ProblemData::poisson(1.0), 1, 5, &mut rng).unwrap();
        for v in [&s.stability, &s.reduction, &s.reliability, &s.discrete_reliability] {
            assert!(!v.is_empty());
            assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        }
        assert!(sample_max(&s.reduction).unwrap() < 1.0);
        assert_eq!(sample_max(&[]), None);
    }
}
