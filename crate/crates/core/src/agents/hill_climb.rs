//! One-step-lookahead goal pursuit: steepest descent on the distance to the
//! active goal with a line-searched step length.

use std::fmt;

use crate::smw::{Environment, GoalSpec};

/// Residuals below this weighted norm leave the gradient undefined.
pub const ZERO_RESIDUAL_EPS: f64 = 1e-9;
/// Directions that move the goal dims less than this are treated as inert.
pub const INERT_DIRECTION_EPS: f64 = 1e-12;

/// The drift alone already lands on the goal targets, so the distance has no
/// gradient at `a = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroResidual;

impl fmt::Display for ZeroResidual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("goal residual after drift is zero; gradient undefined")
    }
}

impl std::error::Error for ZeroResidual {}

/// Gradient with respect to the action of the weighted distance between the
/// next state and the goal, evaluated at `a = 0`.
pub fn goal_gradient(env: &Environment, s: &[f64], goal: &GoalSpec) -> Result<Vec<f64>, ZeroResidual> {
    gradient_from_drift(env, &env.drift(s), goal)
}

pub(crate) fn gradient_from_drift(env: &Environment, drift: &[f64], goal: &GoalSpec) -> Result<Vec<f64>, ZeroResidual> {
    let mut grad = vec![0.0; env.num_actions()];
    gradient_into(env, drift, goal, &mut grad)?;
    Ok(grad)
}

/// Writes the gradient into `grad` (length M).
pub(crate) fn gradient_into(
    env: &Environment,
    drift: &[f64],
    goal: &GoalSpec,
    grad: &mut [f64],
) -> Result<(), ZeroResidual> {
    let d0 = goal.distance(drift);
    if d0 < ZERO_RESIDUAL_EPS {
        return Err(ZeroResidual);
    }
    let b = env.input();
    grad.fill(0.0);
    for ((&dim, target), gk) in goal.dims().iter().zip(goal.targets()).zip(goal.scale()) {
        let w = gk * (drift[dim] - target) / d0;
        for (gj, bj) in grad.iter_mut().zip(b.row(dim)) {
            *gj += bj * w;
        }
    }
    Ok(())
}

/// Step length along `direction` minimising the distance to `goal` after one
/// round. Never negative; zero if `direction` does not move the goal dims.
pub fn optimal_step_size(env: &Environment, s: &[f64], goal: &GoalSpec, direction: &[f64]) -> f64 {
    step_from_drift(env, &env.drift(s), goal, direction)
}

pub(crate) fn step_from_drift(env: &Environment, drift: &[f64], goal: &GoalSpec, direction: &[f64]) -> f64 {
    let b = env.input();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut moved = 0.0;
    for ((&dim, target), gk) in goal.dims().iter().zip(goal.targets()).zip(goal.scale()) {
        let bu = crate::smw::dot(b.row(dim), direction);
        let rk = drift[dim] - target;
        num += gk * rk * bu;
        den += gk * bu * bu;
        moved += bu * bu;
    }
    if moved.sqrt() < INERT_DIRECTION_EPS || den == 0.0 {
        return 0.0;
    }
    (-num / den).max(0.0)
}

/// Noise-free action of an agent with step multiplier `lambda`, written
/// into `out` (length M).
pub(crate) fn action_into(env: &Environment, drift: &[f64], goal: &GoalSpec, lambda: f64, out: &mut [f64]) {
    if gradient_into(env, drift, goal, out).is_err() {
        out.fill(0.0);
        return;
    }
    let norm = out.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    out.iter_mut().for_each(|g| *g = -*g / norm);
    let t = step_from_drift(env, drift, goal, out);
    out.iter_mut().for_each(|u| *u *= lambda * t);
}

pub(crate) fn action_from_drift(env: &Environment, drift: &[f64], goal: &GoalSpec, lambda: f64) -> Vec<f64> {
    let mut out = vec![0.0; env.num_actions()];
    action_into(env, drift, goal, lambda, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smw::Matrix;

    fn scalar_env(b: f64) -> Environment {
        Environment::from_matrices(Matrix::identity(1), Matrix::from_rows(&[vec![b]]).unwrap()).unwrap()
    }

    fn origin(scale: f64) -> GoalSpec {
        GoalSpec::full(vec![0.0], vec![scale], 1.0).unwrap()
    }

    fn distance_after(env: &Environment, s: &[f64], goal: &GoalSpec, a: &[f64]) -> f64 {
        goal.distance(&env.step(s, a).unwrap())
    }

    #[test]
    fn scalar_gradient_matches_finite_difference() {
        let env = scalar_env(1.0);
        let goal = origin(1.0);
        let g = goal_gradient(&env, &[2.0], &goal).unwrap();
        let h = 1e-6;
        let fd = (distance_after(&env, &[2.0], &goal, &[h]) - distance_after(&env, &[2.0], &goal, &[-h])) / (2.0 * h);
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[0] - fd).abs() < 1e-6);
    }

    #[test]
    fn zero_residual_is_signalled() {
        let env = scalar_env(1.0);
        let goal = GoalSpec::full(vec![3.0], vec![1.0], 1.0).unwrap();
        assert_eq!(goal_gradient(&env, &[3.0], &goal), Err(ZeroResidual));
    }

    #[test]
    fn gradient_direction_invariant_to_scale_multiple() {
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.3]]).unwrap();
        let env = Environment::from_matrices(Matrix::identity(2), b).unwrap();
        let g1 = GoalSpec::full(vec![0.0, 1.0], vec![0.3, 2.0], 1.0).unwrap();
        let g2 = GoalSpec::full(vec![0.0, 1.0], vec![0.3 * 9.0, 2.0 * 9.0], 1.0).unwrap();
        let a = goal_gradient(&env, &[4.0, -3.0], &g1).unwrap();
        let b = goal_gradient(&env, &[4.0, -3.0], &g2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((3.0 * x - y).abs() < 1e-12);
        }
    }

    fn grid_line_search(env: &Environment, s: &[f64], goal: &GoalSpec, u: &[f64], hi: f64) -> f64 {
        let steps = 200_000;
        (0..=steps)
            .map(|i| hi * i as f64 / steps as f64)
            .map(|t| {
                let a: Vec<f64> = u.iter().map(|x| x * t).collect();
                (t, distance_after(env, s, goal, &a))
            })
            .fold(
                (0.0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            )
            .0
    }

    #[test]
    fn scalar_optimal_step_lands_on_target() {
        let env = scalar_env(1.0);
        let goal = origin(1.0);
        let t = optimal_step_size(&env, &[2.0], &goal, &[-1.0]);
        assert_eq!(t, 2.0);
        let oracle = grid_line_search(&env, &[2.0], &goal, &[-1.0], 4.0);
        assert!((t - oracle).abs() < 1e-4);
    }

    #[test]
    fn doubling_input_matrix_halves_step() {
        let b = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.2, -1.0], vec![0.0, 0.3]]).unwrap();
        let env1 = Environment::from_matrices(Matrix::identity(3), b.clone()).unwrap();
        let env2 = Environment::from_matrices(Matrix::identity(3), b.scaled(2.0)).unwrap();
        let goal = GoalSpec::full(vec![0.0; 3], vec![1.0, 0.5, 2.0], 1.0).unwrap();
        let s = [5.0, -2.0, 1.0];
        let g = goal_gradient(&env1, &s, &goal).unwrap();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = g.iter().map(|x| -x / n).collect();
        let t1 = optimal_step_size(&env1, &s, &goal, &u);
        let t2 = optimal_step_size(&env2, &s, &goal, &u);
        assert!((t1 - 2.0 * t2).abs() < 1e-12);
        let o1 = grid_line_search(&env1, &s, &goal, &u, 2.0 * t1);
        let o2 = grid_line_search(&env2, &s, &goal, &u, 2.0 * t1);
        assert!((t1 - o1).abs() < 1e-4 && (t2 - o2).abs() < 1e-4);
    }

    #[test]
    fn inert_direction_has_zero_step() {
        let b = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let env = Environment::from_matrices(Matrix::identity(2), b).unwrap();
        let goal = GoalSpec::full(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        assert_eq!(optimal_step_size(&env, &[3.0, 3.0], &goal, &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn ascent_direction_is_clamped() {
        let env = scalar_env(1.0);
        assert_eq!(optimal_step_size(&env, &[2.0], &origin(1.0), &[1.0]), 0.0);
    }
}
