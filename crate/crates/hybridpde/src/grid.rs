//! Periodic 1D grids, real-valued fields, and trajectory containers.

/// Uniform periodic grid on `[0, length)` with `n` points, `x_j = j * dx`.
///
/// `n` must be even (the Nyquist mode of the real transform needs it) and at
/// least 8.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Grid1D {
        assert!(n >= 8, "grid needs at least 8 points, got {n}");
        assert!(n % 2 == 0, "grid point count must be even, got {n}");
        assert!(
            length.is_finite() && length > 0.0,
            "domain length must be positive"
        );
        Grid1D { n, length }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Always true; only periodic boundaries are supported.
    pub fn periodic(&self) -> bool {
        true
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }
}

/// Real solution sample vector on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Field {
        assert_eq!(values.len(), grid.n(), "field length != grid size");
        Field { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Field {
        Field {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Field {
        let values = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry is finite. A non-finite entry marks blowup.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Total variation with periodic wrap.
    pub fn total_variation(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[(i + 1) % n] - self.values[i]).abs())
            .sum()
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Time-ordered sequence of states on one grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Field>,
}

impl Trajectory {
    pub fn new(t0: f64, u0: Field) -> Trajectory {
        Trajectory {
            times: vec![t0],
            states: vec![u0],
        }
    }

    pub fn push(&mut self, t: f64, state: Field) {
        assert!(
            t > *self.times.last().unwrap(),
            "times must be strictly increasing"
        );
        assert_eq!(state.grid(), self.states[0].grid(), "grid changed");
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid(&self) -> Grid1D {
        self.states[0].grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Field {
        &self.states[i]
    }

    pub fn last_state(&self) -> &Field {
        self.states.last().unwrap()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }
}
