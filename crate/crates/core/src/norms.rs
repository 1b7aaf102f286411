//! Dyadic-annulus norms.
//!
//! Space is split into the unit ball `D_0 = {|x| <= 1}` and the shells
//! `D_j = {2^{j-1} < |x| <= 2^j}`.  Three weighted norms built on this
//! splitting drive everything else in the crate:
//!
//! * `triple_norm`: `sum_j 2^j max_{D_j} |V|`, the size of a potential,
//! * `b_norm`: `sum_j 2^{j/2} ||f||_{L2(D_j)}`, strong spatial decay,
//! * `b_star_norm`: `max_j 2^{-j/2} ||f||_{L2(D_j)}`, mild spatial growth.
//!
//! The lattice maximum stands in for the essential supremum, and the shell
//! list stops at the last shell meeting the box, so every value here is the
//! exact norm of the sampled restriction rather than an estimate of the
//! continuum one.

use crate::error::Result;
use crate::grid::{Field, Grid, Space};

/// Partition of a grid's lattice points into dyadic shells.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    grid: Grid,
    j_max: usize,
    annulus: Vec<u8>,
}

impl DyadicDecomposition {
    /// Labels every lattice point of `grid` with its shell index.
    pub fn new(grid: Grid) -> DyadicDecomposition {
        let j_max = largest_shell(grid);
        let mut annulus = Vec::with_capacity(grid.point_count());
        for flat in 0..grid.point_count() {
            let pos = grid.position(flat);
            let r = pos.iter().map(|x| x * x).sum::<f64>().sqrt();
            annulus.push(shell_of_radius(r).min(j_max) as u8);
        }
        DyadicDecomposition {
            grid,
            j_max,
            annulus,
        }
    }

    /// Grid the decomposition was built for.
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Largest shell index with lattice points (or box corners) in it.
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Shell index of a flat lattice index.
    pub fn annulus_index(&self, flat: usize) -> usize {
        self.annulus[flat] as usize
    }

    /// Per-shell `L2` masses `(h^n sum_{D_j} |f|^2)^{1/2}`, index `j`.
    pub fn l2_profile(&self, f: &Field) -> Result<Vec<f64>> {
        self.check(f)?;
        let mut sums = vec![0.0f64; self.j_max + 1];
        for (flat, v) in f.values().iter().enumerate() {
            sums[self.annulus[flat] as usize] += v.norm_sqr();
        }
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        Ok(sums.into_iter().map(|s| (cell * s).sqrt()).collect())
    }

    /// Per-shell lattice maxima of `|f|`, index `j`.
    pub fn linf_profile(&self, f: &Field) -> Result<Vec<f64>> {
        self.check(f)?;
        let mut maxima = vec![0.0f64; self.j_max + 1];
        for (flat, v) in f.values().iter().enumerate() {
            let j = self.annulus[flat] as usize;
            maxima[j] = maxima[j].max(v.norm());
        }
        Ok(maxima)
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.space() != Space::Physical {
            return Err(crate::error::Error::SpaceMismatch {
                needed: "physical",
                found: "frequency",
            });
        }
        if f.grid() != self.grid {
            return Err(crate::error::Error::GridMismatch {
                left: format!("{:?}", self.grid),
                right: format!("{:?}", f.grid()),
            });
        }
        Ok(())
    }
}

/// Shell index of radius `r`: 0 inside the unit ball, else `ceil(log2 r)`.
fn shell_of_radius(r: f64) -> usize {
    if r <= 1.0 {
        0
    } else {
        r.log2().ceil() as usize
    }
}

fn largest_shell(grid: Grid) -> usize {
    let corner = grid.half_width() * (grid.dim() as f64).sqrt();
    shell_of_radius(corner)
}

/// Weighted supremum norm `sum_j 2^j max_{D_j} |V|`.
///
/// Homogeneous of degree one and finite on every grid; the shell sum stops at
/// the last shell meeting the box.
pub fn triple_norm(v: &Field) -> Result<f64> {
    let decomp = DyadicDecomposition::new(v.grid());
    let profile = decomp.linf_profile(v)?;
    Ok(profile
        .iter()
        .enumerate()
        .map(|(j, m)| 2f64.powi(j as i32) * m)
        .sum())
}

/// Decay norm `sum_j 2^{j/2} (h^n sum_{D_j} |f|^2)^{1/2}`.
pub fn b_norm(f: &Field) -> Result<f64> {
    let decomp = DyadicDecomposition::new(f.grid());
    let profile = decomp.l2_profile(f)?;
    Ok(profile
        .iter()
        .enumerate()
        .map(|(j, m)| 2f64.powf(j as f64 / 2.0) * m)
        .sum())
}

/// Growth norm `max_j 2^{-j/2} (h^n sum_{D_j} |f|^2)^{1/2}`.
pub fn b_star_norm(f: &Field) -> Result<f64> {
    let decomp = DyadicDecomposition::new(f.grid());
    let profile = decomp.l2_profile(f)?;
    Ok(profile
        .iter()
        .enumerate()
        .map(|(j, m)| 2f64.powf(-(j as f64) / 2.0) * m)
        .fold(0.0, f64::max))
}

/// Discrete `L1` norm `h^n sum |f|` of a physical field.
pub fn l1_norm(f: &Field) -> Result<f64> {
    if f.space() != Space::Physical {
        return Err(crate::error::Error::SpaceMismatch {
            needed: "physical",
            found: "frequency",
        });
    }
    let sum: f64 = f.values().iter().map(|v| v.norm()).sum();
    Ok(sum * f.grid().spacing().powi(f.grid().dim() as i32))
}

/// Lattice supremum `max |f|`.
pub fn linf_norm(f: &Field) -> f64 {
    f.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn indicator(grid: Grid, inner: f64, outer: f64, value: f64) -> Field {
        Field::from_physical_fn(grid, |x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r > inner && r <= outer {
                Complex64::new(value, 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    #[test]
    fn shells_partition_the_lattice() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let d = DyadicDecomposition::new(g);
        assert_eq!(d.j_max(), 3);
        for flat in 0..g.point_count() {
            let pos = g.position(flat);
            let r = (pos[0] * pos[0] + pos[1] * pos[1]).sqrt();
            let j = d.annulus_index(flat);
            if j == 0 {
                assert!(r <= 1.0 + 1e-12);
            } else {
                assert!(r > 2f64.powi(j as i32 - 1) - 1e-12);
                assert!(r <= 2f64.powi(j as i32) + 1e-12);
            }
        }
    }

    #[test]
    fn triple_norm_of_unit_ball_indicator_is_one() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let v = indicator(g, -1.0, 1.0, 1.0);
        assert!((triple_norm(&v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triple_norm_weights_the_first_two_shells() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let c = 0.7;
        let v = indicator(g, -1.0, 2.0, c);
        assert!((triple_norm(&v).unwrap() - 3.0 * c).abs() < 1e-12);
    }

    #[test]
    fn triple_norm_sums_a_geometric_profile() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let d = DyadicDecomposition::new(g);
        let mut v = Field::zeros(g, Space::Physical);
        for flat in 0..g.point_count() {
            let j = d.annulus_index(flat) as i32;
            v.values_mut()[flat] = Complex64::new(4f64.powi(-j), 0.0);
        }
        let want = 2.0 - 2f64.powi(-(d.j_max() as i32));
        assert!((triple_norm(&v).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn ball_indicator_norms_approach_sqrt_pi() {
        let g = Grid::new(2, 512, 2.0).unwrap();
        let f = indicator(g, -1.0, 1.0, 1.0);
        let b = b_norm(&f).unwrap();
        let bs = b_star_norm(&f).unwrap();
        let want = std::f64::consts::PI.sqrt();
        assert!((b - want).abs() < 0.01 * want, "b_norm {b}");
        assert!((b - bs).abs() < 1e-12, "single shell, norms must agree");
    }

    #[test]
    fn single_shell_mass_scales_by_the_dyadic_weights() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let f = indicator(g, 2.0, 4.0, 1.3);
        let m = f.l2_norm();
        assert!(m > 0.0);
        assert!((b_norm(&f).unwrap() - 2.0 * m).abs() < 1e-12 * m);
        assert!((b_star_norm(&f).unwrap() - 0.5 * m).abs() < 1e-12 * m);
    }

    fn complex_field(grid: Grid, parts: &[(f64, f64)]) -> Field {
        let values = parts
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        Field::from_values(grid, Space::Physical, values).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Shell-by-shell Cauchy-Schwarz, exact on the lattice.
        #[test]
        fn pairing_is_dominated_by_dual_norms(
            fs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256),
            gs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256),
        ) {
            let grid = Grid::new(2, 16, 2.0).unwrap();
            let f = complex_field(grid, &fs);
            let g = complex_field(grid, &gs);
            let cell = grid.spacing() * grid.spacing();
            let pairing: Complex64 = f
                .values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| a * b)
                .sum();
            let lhs = (pairing * cell).norm();
            let rhs = b_norm(&f).unwrap() * b_star_norm(&g).unwrap();
            prop_assert!(lhs <= rhs + 1e-12, "pairing {lhs} exceeds bound {rhs}");
        }

        /// Norm ordering, triangle inequality, and the potential product bound.
        #[test]
        fn norm_inequalities_hold(
            fs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256),
            gs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256),
            vs in prop::collection::vec(-1.0..1.0f64, 256),
        ) {
            let grid = Grid::new(2, 16, 2.0).unwrap();
            let f = complex_field(grid, &fs);
            let g = complex_field(grid, &gs);
            let v = Field::from_values(
                grid,
                Space::Physical,
                vs.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            )
            .unwrap();

            let bf = b_norm(&f).unwrap();
            let bsf = b_star_norm(&f).unwrap();
            prop_assert!(bsf <= f.l2_norm() + 1e-12);
            prop_assert!(f.l2_norm() <= bf + 1e-12);

            let sum = f.add(&g).unwrap();
            prop_assert!(b_norm(&sum).unwrap() <= bf + b_norm(&g).unwrap() + 1e-12);
            prop_assert!(
                b_star_norm(&sum).unwrap() <= bsf + b_star_norm(&g).unwrap() + 1e-12
            );

            let vf = v.mul(&f).unwrap();
            let bound = triple_norm(&v).unwrap() * bsf;
            prop_assert!(
                b_norm(&vf).unwrap() <= bound * (1.0 + 1e-12) + 1e-12,
                "product norm {} exceeds {}",
                b_norm(&vf).unwrap(),
                bound
            );
        }
    }
}
