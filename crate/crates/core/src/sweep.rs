//! Parameter sweeps and their CSV encodings.

use std::io::Write;

use crate::analytic::{bmax_analytic, ChannelParams};
use crate::error::{Error, Result};
use crate::exec::{map_points, Execution};
use crate::threshold::{r_from_gamma, Scenario, ScenarioMode, ThresholdPoint};

pub const MAX_SWEEP_ROWS: usize = 100_000;

pub const SWEEP_HEADER: [&str; 8] = ["r", "lambda", "R_A", "R_B", "alpha", "beta", "bmax", "violated"];
pub const THRESHOLD_HEADER: [&str; 5] = ["r", "r_max", "fit", "gamma_max", "rel_fit_error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Beamsplitter reflectivity `R`.
    Damping,
    /// Squeezing `r`.
    Squeezing,
    /// Absorption coefficient, converted to `R`.
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub mode: ScenarioMode,
    /// Squeezing held fixed in damping and gamma sweeps.
    pub r: f64,
    /// Damping held fixed in squeezing sweeps.
    pub damping: f64,
    pub series_tol: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::Config("sweep bounds must be finite".into()));
        }
        if !(self.start < self.stop) {
            return Err(Error::Config(format!("sweep start {} must be below stop {}", self.start, self.stop)));
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!("sweep step {} must be positive", self.step)));
        }
        if (self.stop - self.start) / self.step > MAX_SWEEP_ROWS as f64 {
            return Err(Error::Config(format!("sweep exceeds {MAX_SWEEP_ROWS} rows")));
        }
        Ok(())
    }

    /// `start + i·step` up to and including `stop` (with a 1e-9 step slack).
    pub fn grid(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }

    fn channel(&self, x: f64) -> Result<ChannelParams> {
        match self.variable {
            SweepVariable::Damping => Scenario::new(self.mode, self.r).channel(x),
            SweepVariable::Gamma => Scenario::new(self.mode, self.r).channel(r_from_gamma(x)?),
            SweepVariable::Squeezing => Scenario::new(self.mode, x).channel(self.damping),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub lambda: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bmax: f64,
    pub violated: bool,
}

pub fn evaluate_row(params: &ChannelParams, series_tol: f64) -> Result<SweepRow> {
    let b = bmax_analytic(params, series_tol)?;
    Ok(SweepRow {
        r: params.r(),
        lambda: params.lambda(),
        r_a: params.r_a(),
        r_b: params.r_b(),
        alpha: b.alpha,
        beta: b.beta,
        bmax: b.bmax,
        violated: b.violated,
    })
}

/// Rows in grid order; the first failing point aborts the sweep.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    let grid = spec.grid()?;
    map_points(&grid, exec, |&x| spec.channel(x).and_then(|p| evaluate_row(&p, spec.series_tol)))
        .into_iter()
        .collect()
}

/// Fixed 12-significant-digit decimal rendering.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn csv_error(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for row in rows {
        let fields = [
            format_sig(row.r),
            format_sig(row.lambda),
            format_sig(row.r_a),
            format_sig(row.r_b),
            format_sig(row.alpha),
            format_sig(row.beta),
            format_sig(row.bmax),
            row.violated.to_string(),
        ];
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_threshold_csv<W: Write>(points: &[ThresholdPoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THRESHOLD_HEADER).map_err(csv_error)?;
    for p in points {
        let fields = [
            format_sig(p.r),
            format_sig(p.r_max),
            format_sig(p.fit_value),
            format_sig(p.gamma_max),
            format_sig(p.rel_fit_error()),
        ];
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DEFAULT_SERIES_TOL;

    fn spec(variable: SweepVariable, start: f64, stop: f64, step: f64) -> SweepSpec {
        SweepSpec {
            variable,
            start,
            stop,
            step,
            mode: ScenarioMode::Symmetric,
            r: 1.0,
            damping: 0.0,
            series_tol: DEFAULT_SERIES_TOL,
        }
    }

    #[test]
    fn grid_includes_stop() {
        let g = spec(SweepVariable::Damping, 0.0, 0.6, 0.01).grid().unwrap();
        assert_eq!(g.len(), 61);
        assert!((g[60] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        assert!(spec(SweepVariable::Damping, 0.5, 0.5, 0.1).validate().is_err());
        assert!(spec(SweepVariable::Damping, 0.0, 0.5, 0.0).validate().is_err());
        assert!(spec(SweepVariable::Damping, 0.0, 1.0, 1e-6).validate().is_err());
    }

    #[test]
    fn symmetric_r1_crosses_near_042() {
        let rows = run_sweep(&spec(SweepVariable::Damping, 0.0, 0.6, 0.01), Execution::Parallel).unwrap();
        let first_local = rows.iter().position(|r| !r.violated).unwrap();
        assert!(rows[first_local].r_a >= 0.41 && rows[first_local].r_a <= 0.43);
        assert!(rows[first_local - 1].r_a >= 0.40);
    }

    #[test]
    fn zero_squeezing_is_flat() {
        let mut s = spec(SweepVariable::Damping, 0.0, 1.0, 0.1);
        s.r = 0.0;
        let rows = run_sweep(&s, Execution::Sequential).unwrap();
        assert!(rows.iter().all(|r| r.bmax == 2.0 && !r.violated));
    }

    #[test]
    fn squeezing_sweep_is_increasing_and_lossless() {
        let rows = run_sweep(&spec(SweepVariable::Squeezing, 0.1, 3.0, 0.1), Execution::Parallel).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].bmax > w[0].bmax);
        }
        for row in &rows {
            let a = 2.0 * row.lambda / (1.0 + row.lambda * row.lambda);
            assert!((row.bmax - 2.0 * (1.0 + a * a).sqrt()).abs() < 1e-10);
            assert!(row.bmax <= 2.0 * std::f64::consts::SQRT_2);
        }
    }

    #[test]
    fn gamma_sweep_converts_to_damping() {
        let rows = run_sweep(&spec(SweepVariable::Gamma, 0.0, 0.2, 0.05), Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 5);
        assert!((rows[2].r_a - r_from_gamma(0.1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(2.0), "2.00000000000");
        assert_eq!(format_sig(0.0123456789012345), "0.0123456789012");
        assert_eq!(format_sig(-1234.5), "-1234.50000000");
    }

    #[test]
    fn csv_is_deterministic() {
        let s = spec(SweepVariable::Damping, 0.0, 0.5, 0.05);
        let render = |exec| {
            let mut buf = Vec::new();
            write_sweep_csv(&run_sweep(&s, exec).unwrap(), &mut buf).unwrap();
            buf
        };
        let a = render(Execution::Parallel);
        assert_eq!(a, render(Execution::Sequential));
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("r,lambda,R_A,R_B,alpha,beta,bmax,violated\n"));
        assert_eq!(text.lines().count(), 12);
    }
}
