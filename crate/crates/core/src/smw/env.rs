use crate::error::{Error, Result};

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(Error::contract(format!(
                "row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A linear microworld: `s' = A s + B a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    state_names: Vec<String>,
    action_names: Vec<String>,
    a: Matrix,
    b: Matrix,
}

impl Environment {
    pub fn new(state_names: Vec<String>, action_names: Vec<String>, a: Matrix, b: Matrix) -> Result<Self> {
        let n = state_names.len();
        let m = action_names.len();
        if n == 0 || m == 0 {
            return Err(Error::contract("environment needs at least one state and one action"));
        }
        if let Some(d) = first_duplicate(&state_names) {
            return Err(Error::contract(format!("duplicate state name `{d}`")));
        }
        if let Some(d) = first_duplicate(&action_names) {
            return Err(Error::contract(format!("duplicate action name `{d}`")));
        }
        if a.rows != n || a.cols != n {
            return Err(Error::contract(format!("A is {}x{}, expected {n}x{n}", a.rows, a.cols)));
        }
        if b.rows != n || b.cols != m {
            return Err(Error::contract(format!("B is {}x{}, expected {n}x{m}", b.rows, b.cols)));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::contract("matrix entries must be finite"));
        }
        Ok(Self {
            state_names,
            action_names,
            a,
            b,
        })
    }

    /// Builds an environment with generated names `s0..`, `a0..`.
    pub fn from_matrices(a: Matrix, b: Matrix) -> Result<Self> {
        let states = (0..a.rows).map(|i| format!("s{i}")).collect();
        let actions = (0..b.cols).map(|i| format!("a{i}")).collect();
        Self::new(states, actions, a, b)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn transition(&self) -> &Matrix {
        &self.a
    }

    pub fn input(&self) -> &Matrix {
        &self.b
    }

    /// Advances one round. Fails on dimension mismatch or non-finite input.
    pub fn step(&self, s: &[f64], a: &[f64]) -> Result<Vec<f64>> {
        self.check_state(s)?;
        self.check_action(a)?;
        Ok(self.step_unchecked(s, a))
    }

    pub(crate) fn step_unchecked(&self, s: &[f64], a: &[f64]) -> Vec<f64> {
        let mut out = self.drift(s);
        for (i, o) in out.iter_mut().enumerate() {
            *o += dot(self.b.row(i), a);
        }
        out
    }

    /// `A s`, the state reached by taking the zero action.
    pub fn drift(&self, s: &[f64]) -> Vec<f64> {
        debug_assert_eq!(s.len(), self.num_states());
        (0..self.a.rows).map(|i| dot(self.a.row(i), s)).collect()
    }

    pub fn check_state(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.num_states() {
            return Err(Error::contract(format!(
                "state has length {}, expected {}",
                s.len(),
                self.num_states()
            )));
        }
        if !s.iter().all(|v| v.is_finite()) {
            return Err(Error::contract("state entries must be finite"));
        }
        Ok(())
    }

    pub fn check_action(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.num_actions() {
            return Err(Error::contract(format!(
                "action has length {}, expected {}",
                a.len(),
                self.num_actions()
            )));
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::contract("action entries must be finite"));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn first_duplicate(names: &[String]) -> Option<&str> {
    let mut seen = std::collections::HashSet::new();
    names.iter().find(|n| !seen.insert(n.as_str())).map(String::as_str)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn farm_like() -> Environment {
        let mut a = Matrix::identity(5);
        a.set(0, 0, 1.5);
        let b = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.5, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 2.0],
        ])
        .unwrap();
        Environment::from_matrices(a, b).unwrap()
    }

    #[test]
    fn self_amplifying_state_grows() {
        let env = farm_like();
        let s = [10.0, 1.0, 2.0, 3.0, 4.0];
        let next = env.step(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(next, vec![15.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn identity_drift_with_zero_action_is_noop() {
        let b = Matrix::from_rows(&[vec![3.0, -1.0], vec![0.2, 7.0]]).unwrap();
        let env = Environment::from_matrices(Matrix::identity(2), b).unwrap();
        assert_eq!(env.step(&[4.0, -2.5], &[0.0, 0.0]).unwrap(), vec![4.0, -2.5]);
    }

    #[test]
    fn zero_drift_passes_action_through() {
        let env = Environment::from_matrices(Matrix::zeros(1, 1), Matrix::identity(1)).unwrap();
        assert_eq!(env.step(&[7.0], &[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let env = farm_like();
        assert!(matches!(env.step(&[1.0; 4], &[0.0; 2]), Err(Error::Contract(_))));
        assert!(matches!(env.step(&[1.0; 5], &[0.0; 3]), Err(Error::Contract(_))));
        assert!(env.step(&[f64::NAN; 5], &[0.0; 2]).is_err());
    }

    #[test]
    fn constructor_validates_shapes_and_names() {
        let ok_b = Matrix::zeros(2, 1);
        assert!(Environment::from_matrices(Matrix::zeros(2, 3), ok_b.clone()).is_err());
        assert!(Environment::from_matrices(Matrix::identity(2), Matrix::zeros(3, 1)).is_err());
        let dup = Environment::new(
            vec!["x".into(), "x".into()],
            vec!["u".into()],
            Matrix::identity(2),
            ok_b.clone(),
        );
        assert!(dup.is_err());
        let mut inf = Matrix::identity(2);
        inf.set(0, 1, f64::INFINITY);
        assert!(Environment::from_matrices(inf, ok_b).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
