//! Seeded parallel ensembles with bit-stable statistics.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spde::solver::HeatSolver;
use crate::spde::stream::RngStreamSpec;

/// Which time steps of each path enter the statistics.
#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub output_steps: Vec<usize>,
}

impl EnsembleOptions {
    pub fn at_steps(output_steps: Vec<usize>) -> Self {
        Self { output_steps }
    }

    /// `count` evenly spaced steps ending at `n_steps`.
    pub fn evenly_spaced(n_steps: usize, count: usize) -> Self {
        let count = count.clamp(1, n_steps);
        let mut output_steps: Vec<usize> =
            (1..=count).map(|k| k * n_steps / count).collect();
        output_steps.dedup();
        Self { output_steps }
    }

    fn validate(&self, n_steps: usize) -> Result<()> {
        if self.output_steps.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one output step is required".into(),
            ));
        }
        if self.output_steps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "output steps must be strictly increasing".into(),
            ));
        }
        if *self.output_steps.last().unwrap() > n_steps {
            return Err(Error::InvalidParameter(format!(
                "output step {} exceeds {} time steps",
                self.output_steps.last().unwrap(),
                n_steps
            )));
        }
        Ok(())
    }
}

/// Per-(t, x) sample mean and variance over the simulated paths, with the
/// paths' values at observer points kept for distribution-level checks.
///
/// The variance uses divisor `s` (the plain second moment about the sample
/// mean, not the unbiased `s − 1` form).
pub struct EnsembleStats {
    pub step_indices: Vec<usize>,
    pub times: Vec<f64>,
    pub interior: Vec<f64>,
    pub observer_xs: Vec<f64>,
    pub mean: DMatrix<f64>,
    pub variance: DMatrix<f64>,
    pub observer_mean: DMatrix<f64>,
    pub observer_variance: DMatrix<f64>,
    /// One `(n_paths × n_observers)` matrix per output step.
    pub observer_samples: Vec<DMatrix<f64>>,
    pub n_paths: usize,
    pub master_seed: u64,
}

/// Mean and divisor-`s` variance over equally shaped matrices, accumulated
/// in slice order so the result is independent of how the slices were
/// produced.
pub fn pathwise_moments(slices: &[DMatrix<f64>]) -> (DMatrix<f64>, DMatrix<f64>) {
    let count = slices.len() as f64;
    let (rows, cols) = slices[0].shape();
    let mut mean = DMatrix::zeros(rows, cols);
    for slice in slices {
        mean += slice;
    }
    mean /= count;
    let mut variance = DMatrix::zeros(rows, cols);
    for slice in slices {
        let centered = slice - &mean;
        variance += centered.component_mul(&centered);
    }
    variance /= count;
    (mean, variance)
}

impl HeatSolver {
    /// Simulate `n_paths` independent paths and reduce their statistics.
    ///
    /// Paths are distributed over the rayon pool; each one owns the stream
    /// derived from `(master seed, path index)` and lands in its own slot,
    /// and the reduction runs in index order, so the output is identical for
    /// any worker count.
    pub fn run_ensemble(
        &self,
        n_paths: usize,
        streams: RngStreamSpec,
        options: &EnsembleOptions,
    ) -> Result<EnsembleStats> {
        if n_paths < 2 {
            return Err(Error::InvalidParameter(
                "an ensemble needs at least two paths".into(),
            ));
        }
        options.validate(self.problem().steps())?;
        let out_steps = &options.output_steps;
        let n_out = out_steps.len();
        let n = self.system().points().n_interior();
        let n_obs = self.observer_xs().len();

        let slices: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..n_paths as u64)
            .into_par_iter()
            .map(|p| {
                let mut stream = streams.path_stream(p);
                let path = self.run_path(&mut stream)?;
                let mut values = DMatrix::zeros(n_out, n);
                let mut observers = DMatrix::zeros(n_out, n_obs);
                for (row, &step) in out_steps.iter().enumerate() {
                    values.row_mut(row).copy_from(&path.values.row(step));
                    if n_obs > 0 {
                        observers.row_mut(row).copy_from(&path.observers.row(step));
                    }
                }
                Ok((values, observers))
            })
            .collect::<Result<_>>()?;

        let value_slices: Vec<DMatrix<f64>> = slices.iter().map(|(v, _)| v.clone()).collect();
        let (mean, variance) = pathwise_moments(&value_slices);

        let (observer_mean, observer_variance, observer_samples) = if n_obs > 0 {
            let obs_slices: Vec<DMatrix<f64>> = slices.iter().map(|(_, o)| o.clone()).collect();
            let (m, v) = pathwise_moments(&obs_slices);
            let samples = (0..n_out)
                .map(|row| {
                    DMatrix::from_fn(n_paths, n_obs, |p, i| obs_slices[p][(row, i)])
                })
                .collect();
            (m, v, samples)
        } else {
            (
                DMatrix::zeros(n_out, 0),
                DMatrix::zeros(n_out, 0),
                Vec::new(),
            )
        };

        let delta_t = self.problem().delta_t();
        Ok(EnsembleStats {
            step_indices: out_steps.clone(),
            times: out_steps.iter().map(|&j| j as f64 * delta_t).collect(),
            interior: self.system().points().interior().to_vec(),
            observer_xs: self.observer_xs().to_vec(),
            mean,
            variance,
            observer_mean,
            observer_variance,
            observer_samples,
            n_paths,
            master_seed: streams.master_seed(),
        })
    }
}
