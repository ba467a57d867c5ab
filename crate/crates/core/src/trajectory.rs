//! Time samples of a field on `[0, T]`.

use alloc::format;
use alloc::vec::Vec;

use crate::field::Field;
use crate::grid::Grid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl Trajectory {
    /// Times must start at `0` and increase strictly; all fields share a grid.
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.is_empty() || fields.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if times.len() != fields.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidTrajectory(format!("first time is {}, not 0", times[0])));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTrajectory(format!(
                "times not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let grid = fields[0].grid();
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, fields })
    }

    /// The same field at every given time.
    pub fn constant(field: Field, times: Vec<f64>) -> Result<Self> {
        let fields = core::iter::repeat(field).take(times.len()).collect();
        Self::new(times, fields)
    }

    /// Zero field at `count` uniform times on `[0, period]`.
    pub fn zeros(grid: &Grid, period: f64, count: usize) -> Result<Self> {
        let count = count.max(2);
        let times = uniform_times(period, count - 1);
        Self::constant(Field::zeros(grid), times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final sample time.
    pub fn period(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn first(&self) -> &Field {
        &self.fields[0]
    }

    pub fn last(&self) -> &Field {
        self.fields.last().expect("nonempty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Field)> {
        self.times.iter().copied().zip(&self.fields)
    }

    /// Linear interpolation in time, clamped to the sampled interval.
    pub fn interpolate(&self, t: f64) -> Field {
        let (i, w) = self.locate(t);
        if w == 0.0 {
            return self.fields[i].clone();
        }
        self.fields[i]
            .combine(1.0 - w, &self.fields[i + 1], w)
            .expect("shared grid")
    }

    /// Sample index `i` and weight `w` with `t = (1−w)·tᵢ + w·tᵢ₊₁`.
    pub(crate) fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[last] {
            return (last, 0.0);
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        if self.times[i] == t {
            return (i, 0.0);
        }
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        (i, w)
    }

    /// Samplewise `self − other`; the sample times must agree.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times != other.times {
            return Err(Error::InvalidTrajectory("sample times differ".into()));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.times.clone(), fields)
    }

    pub fn scaled(&self, c: f64) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            fields: self.fields.iter().map(|f| f.scaled(c)).collect(),
        }
    }
}

/// `steps + 1` times `i·dt` on `[0, period]`, the last one exactly `period`.
pub fn uniform_times(period: f64, steps: usize) -> Vec<f64> {
    let dt = period / steps as f64;
    let mut times: Vec<f64> = (0..steps).map(|i| i as f64 * dt).collect();
    times.push(period);
    times
}
