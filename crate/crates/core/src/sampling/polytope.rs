//! Hit-and-Run over a polytope `{x : E x = e, A x ≥ b}`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linprog::{self, Bound, LinearRow, LpProblem, LpStatus, Relation};
use crate::preference::{check_compatibility, LinearConstraintSystem};

/// Feasibility tolerance on equalities and inequalities.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Basis vectors shorter than this after orthogonalization are dropped.
pub const DROP_TOL: f64 = 1e-12;
/// Chords shorter than this are treated as empty.
pub const MIN_CHORD: f64 = 1e-12;
pub const MAX_DIRECTION_RETRIES: usize = 100;
/// Coefficients below this magnitude along a direction do not bound the chord.
const DIRECTION_TOL: f64 = 1e-14;

/// Strictness margin used while sampling: `min(ε*/2, 10·ε_min)`.
pub fn freeze_epsilon(epsilon_star: f64, epsilon_min: f64) -> f64 {
    (epsilon_star / 2.0).min(10.0 * epsilon_min)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    equalities: Vec<(Vec<f64>, f64)>,
    inequalities: Vec<(Vec<f64>, f64)>,
}

impl Polytope {
    pub fn new(dim: usize) -> Self {
        Polytope { dim, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `a·x = b`.
    pub fn add_equality(&mut self, a: Vec<f64>, b: f64) -> Result<()> {
        self.check_len(&a)?;
        self.equalities.push((a, b));
        Ok(())
    }

    /// Adds `a·x ≥ b`.
    pub fn add_inequality(&mut self, a: Vec<f64>, b: f64) -> Result<()> {
        self.check_len(&a)?;
        if a.iter().any(|&v| v != 0.0) || b > 0.0 {
            self.inequalities.push((a, b));
        }
        Ok(())
    }

    fn check_len(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.dim {
            Err(Error::DimensionMismatch { expected: self.dim, got: a.len() })
        } else {
            Ok(())
        }
    }

    /// The Möbius-coordinate polytope of a compiled system with `ε` fixed.
    pub fn from_system(system: &LinearConstraintSystem, epsilon: f64) -> Result<Self> {
        let dim = system.variable_count() - 1;
        let mut p = Polytope::new(dim);
        for row in system.rows() {
            let a = row.coefficients[..dim].to_vec();
            let b = row.rhs - row.coefficients[dim] * epsilon;
            match row.relation {
                Relation::Eq => p.add_equality(a, b)?,
                Relation::Ge => p.add_inequality(a, b)?,
                Relation::Le => p.add_inequality(a.iter().map(|v| -v).collect(), -b)?,
            }
        }
        Ok(p)
    }

    /// Largest constraint violation at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|(a, b)| (dot(a, x) - b).abs());
        let ineq = self.inequalities.iter().map(|(a, b)| b - dot(a, x));
        eq.chain(ineq).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.max_violation(x) <= FEASIBILITY_TOL
    }

    /// Moves `x` along the segment towards `anchor` just far enough to
    /// satisfy every inequality, then halfway again towards the anchor so
    /// the result is off the boundary. Both points must satisfy the
    /// equalities and `anchor` must satisfy every inequality strictly.
    /// Returns `None` if that is not the case.
    pub fn blend_towards(&self, x: &[f64], anchor: &[f64]) -> Option<Vec<f64>> {
        let mut t: f64 = 0.0;
        for (a, b) in &self.inequalities {
            let sx = dot(a, x) - b;
            let sa = dot(a, anchor) - b;
            if sa <= FEASIBILITY_TOL {
                if sx < sa {
                    return None;
                }
                continue;
            }
            if sx < 0.0 {
                t = t.max(-sx / (sa - sx));
            }
        }
        let t = t + 0.5 * (1.0 - t);
        let p: Vec<f64> = x.iter().zip(anchor).map(|(xi, ai)| xi + t * (ai - xi)).collect();
        self.contains(&p).then_some(p)
    }

    /// A point maximizing the smallest normalized inequality slack, or
    /// `None` if the polytope is empty. The margin is capped at 1.
    pub fn interior_point(&self) -> Result<Option<Vec<f64>>> {
        let d = self.dim;
        let mut objective = vec![0.0; d + 1];
        objective[d] = 1.0;
        let mut bounds = vec![Bound::Free; d];
        bounds.push(Bound::Box { lo: 0.0, hi: 1.0 });
        let mut lp = LpProblem::new(objective).with_bounds(bounds);
        for (a, b) in &self.equalities {
            let mut row = a.clone();
            row.push(0.0);
            lp.push_row(LinearRow::new(row, Relation::Eq, *b));
        }
        for (a, b) in &self.inequalities {
            let norm = libm::sqrt(dot(a, a));
            let mut row = a.clone();
            row.push(-norm);
            lp.push_row(LinearRow::new(row, Relation::Ge, *b));
        }
        let sol = linprog::solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(sol.x[..d].to_vec())),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::UnboundedChord),
            LpStatus::PivotLimit { pivots, .. } => Err(Error::PivotLimit { pivots, last_row: None }),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Hit-and-Run chain: uniform direction in the equality null space,
/// uniform point on the feasible chord.
#[derive(Clone, Debug)]
pub struct HitAndRun {
    polytope: Polytope,
    /// Orthonormalized equality rows with matching right-hand sides.
    row_space: Vec<(Vec<f64>, f64)>,
    null_basis: Vec<Vec<f64>>,
    point: Vec<f64>,
    scratch: Vec<f64>,
}

impl HitAndRun {
    pub fn new(polytope: Polytope, start: Vec<f64>) -> Result<Self> {
        if start.len() != polytope.dim {
            return Err(Error::DimensionMismatch { expected: polytope.dim, got: start.len() });
        }
        let violation = polytope.max_violation(&start);
        if violation > FEASIBILITY_TOL {
            return Err(Error::InfeasiblePoint { violation });
        }
        let row_space = orthonormal_rows(&polytope.equalities);
        let null_basis = null_space(polytope.dim, &row_space);
        let scratch = vec![0.0; polytope.dim];
        let mut chain = HitAndRun { polytope, row_space, null_basis, point: start, scratch };
        chain.project();
        Ok(chain)
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    /// Dimension of the affine hull the chain moves in.
    pub fn free_dimension(&self) -> usize {
        self.null_basis.len()
    }

    /// Moves to a new starting point (must be feasible).
    pub fn reset(&mut self, start: &[f64]) -> Result<()> {
        let violation = self.polytope.max_violation(start);
        if violation > FEASIBILITY_TOL {
            return Err(Error::InfeasiblePoint { violation });
        }
        self.point.copy_from_slice(start);
        self.project();
        Ok(())
    }

    /// One Hit-and-Run move.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<&[f64]> {
        if self.null_basis.is_empty() {
            return Ok(&self.point);
        }
        for _ in 0..MAX_DIRECTION_RETRIES {
            self.draw_direction(rng);
            let (lo, hi) = self.chord()?;
            if hi - lo < MIN_CHORD {
                continue;
            }
            let u: f64 = rng.random();
            let lambda = lo + u * (hi - lo);
            let d = core::mem::take(&mut self.scratch);
            axpy(&mut self.point, lambda, &d);
            self.scratch = d;
            self.project();
            return Ok(&self.point);
        }
        Err(Error::EmptyChord { retries: MAX_DIRECTION_RETRIES })
    }

    fn draw_direction<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        loop {
            self.scratch.iter_mut().for_each(|v| *v = 0.0);
            for b in &self.null_basis {
                let z: f64 = rng.sample(StandardNormal);
                axpy(&mut self.scratch, z, b);
            }
            let norm = libm::sqrt(dot(&self.scratch, &self.scratch));
            if norm > 0.0 {
                self.scratch.iter_mut().for_each(|v| *v /= norm);
                return;
            }
        }
    }

    /// Feasible step interval `[λ⁻, λ⁺]` along the current direction.
    fn chord(&self) -> Result<(f64, f64)> {
        let d = &self.scratch;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (a, b) in &self.polytope.inequalities {
            let slack = (dot(a, &self.point) - b).max(0.0);
            let rate = dot(a, d);
            if rate > DIRECTION_TOL {
                lo = lo.max(-slack / rate);
            } else if rate < -DIRECTION_TOL {
                hi = hi.min(slack / -rate);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::UnboundedChord);
        }
        Ok((lo, hi))
    }

    /// Removes equality drift: `x ← x − Σ_k (q_k·x − c_k) q_k`.
    fn project(&mut self) {
        for (q, c) in &self.row_space {
            let r = dot(q, &self.point) - c;
            axpy(&mut self.point, -r, q);
        }
    }
}

fn orthonormal_rows(rows: &[(Vec<f64>, f64)]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in rows {
        let mut v = a.clone();
        let mut c = *b;
        for _ in 0..2 {
            for (q, qc) in &out {
                let proj = dot(q, &v);
                axpy(&mut v, -proj, q);
                c -= proj * qc;
            }
        }
        let norm = libm::sqrt(dot(&v, &v));
        if norm > DROP_TOL {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push((v, c / norm));
        }
    }
    out
}

fn null_space(dim: usize, row_space: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        for _ in 0..2 {
            for q in row_space.iter().map(|(q, _)| q).chain(basis.iter()) {
                let proj = dot(q, &v);
                axpy(&mut v, -proj, q);
            }
        }
        let norm = libm::sqrt(dot(&v, &v));
        if norm > DROP_TOL && basis.len() + row_space.len() < dim {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Starting point for sampling a compiled system.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedPoint {
    pub point: Vec<f64>,
    pub epsilon_star: f64,
    pub epsilon_freeze: f64,
}

/// Solves the compatibility LP, freezes `ε`, and returns a point strictly
/// inside the frozen polytope where one exists.
pub fn seed_point(system: &LinearConstraintSystem, epsilon_min: f64) -> Result<SeedPoint> {
    let compat = check_compatibility(system, epsilon_min)?;
    let Some(epsilon_star) = compat.epsilon.filter(|_| compat.compatible) else {
        return Err(Error::Incompatible { epsilon: compat.epsilon });
    };
    let epsilon_freeze = freeze_epsilon(epsilon_star, epsilon_min);
    let polytope = Polytope::from_system(system, epsilon_freeze)?;
    let point = match polytope.interior_point()? {
        Some(p) if polytope.contains(&p) => p,
        _ => compat.point.expect("optimal LP has a point"),
    };
    Ok(SeedPoint { point, epsilon_star, epsilon_freeze })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::MobiusCapacity;
    use crate::preference::compile_mb;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_box(dim: usize) -> Polytope {
        let mut p = Polytope::new(dim);
        for k in 0..dim {
            let mut a = vec![0.0; dim];
            a[k] = 1.0;
            p.add_inequality(a.clone(), 0.0).unwrap();
            p.add_inequality(a.iter().map(|v| -v).collect(), -1.0).unwrap();
        }
        p
    }

    #[test]
    fn null_space_of_simplex_equality() {
        let mut p = unit_box(3);
        p.add_equality(vec![1.0, 1.0, 1.0], 1.0).unwrap();
        let chain = HitAndRun::new(p, vec![1.0 / 3.0; 3]).unwrap();
        assert_eq!(chain.free_dimension(), 2);
        for b in &chain.null_basis {
            assert!(dot(b, &[1.0, 1.0, 1.0]).abs() < 1e-12);
            assert!((dot(b, b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_stays_feasible() {
        let mut p = unit_box(3);
        p.add_equality(vec![1.0, 2.0, 1.0], 1.5).unwrap();
        let mut chain = HitAndRun::new(p.clone(), vec![0.5, 0.25, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5000 {
            let x = chain.step(&mut rng).unwrap().to_vec();
            assert!(p.max_violation(&x) <= FEASIBILITY_TOL);
        }
    }

    #[test]
    fn blend_repairs_towards_anchor() {
        let p = unit_box(2);
        // Crossing x0 = 1 at t = 0.5, then halfway on to the anchor.
        let q = p.blend_towards(&[1.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((q[0] - 0.75).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12);
        // Anchor on the boundary of a row the point violates.
        assert!(p.blend_towards(&[-0.5, 0.5], &[0.0, 0.5]).is_none());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        assert!(matches!(HitAndRun::new(unit_box(2), vec![2.0, 0.5]), Err(Error::InfeasiblePoint { .. })));
    }

    #[test]
    fn unbounded_polytope_is_reported() {
        let mut p = Polytope::new(2);
        p.add_inequality(vec![1.0, 0.0], 0.0).unwrap();
        let mut chain = HitAndRun::new(p, vec![1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(chain.step(&mut rng), Err(Error::UnboundedChord)));
    }

    #[test]
    fn flat_polytope_exhausts_retries() {
        // x ≥ 0 and x ≤ 0 leave a zero-width slab the null space does not see.
        let mut p = unit_box(1);
        p.add_inequality(vec![-1.0], 0.0).unwrap();
        let mut chain = HitAndRun::new(p, vec![0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(chain.step(&mut rng), Err(Error::EmptyChord { retries: MAX_DIRECTION_RETRIES })));
    }

    #[test]
    fn interior_point_of_box() {
        let p = unit_box(2);
        let x = p.interior_point().unwrap().unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
        let mut empty = unit_box(1);
        empty.add_inequality(vec![1.0], 2.0).unwrap();
        assert!(empty.interior_point().unwrap().is_none());
    }

    #[test]
    fn seed_point_for_unconstrained_capacities() {
        let sys = compile_mb(2).unwrap();
        let seed = seed_point(&sys, 1e-6).unwrap();
        assert!((seed.epsilon_star - 1.0).abs() < 1e-12);
        assert!((seed.epsilon_freeze - 1e-5).abs() < 1e-18);
        assert!(sys.is_satisfied(&seed.point, seed.epsilon_freeze, 1e-9));
        let m = MobiusCapacity::from_coefficients(2, seed.point).unwrap();
        assert!(m.validate().is_valid());
    }

    #[test]
    fn uniform_capacity_is_a_valid_start() {
        let sys = compile_mb(4).unwrap();
        let p = Polytope::from_system(&sys, 0.0).unwrap();
        assert!(HitAndRun::new(p, MobiusCapacity::uniform(4).into_coefficients()).is_ok());
    }
}
