//! θ sweeps and kernel tables over parameter grids.

use crate::bounds::{all_certificates, ErrorCertificate, KnownNorms};
use crate::error::{QuadError, Result};
use crate::exec::Execution;
use crate::integrate::reference_integral_fn;
use crate::kernel::{cross_check, KernelCrossCheck, RuleSpec};
use crate::rules::{apply_rule, Integrand};

/// Inclusive grid `start, start+step, ..., end`. `end` is kept when it lies
/// within a millionth of a step of the last grid point.
pub fn theta_grid(start: f64, step: f64, end: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && step.is_finite() && end.is_finite()) {
        return Err(QuadError::validation("grid bounds must be finite"));
    }
    if !(step > 0.0) || end < start {
        return Err(QuadError::validation(format!(
            "grid {start}:{step}:{end} needs step > 0 and start <= end"
        )));
    }
    let count = ((end - start) / step + 1e-6).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(QuadError::validation("grid has more than 10^6 points"));
    }
    Ok((0..count)
        .map(|i| {
            let t = start + step * i as f64;
            if (t - end).abs() <= 1e-6 * step { end } else { t }
        })
        .collect())
}

/// One θ of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub f_n_value: f64,
    /// `|I - F_n|`
    pub true_error: f64,
    /// `|I - F_n - perturbation|`, even n only.
    pub perturbed_error: Option<f64>,
    /// Every applicable certificate, in kind order.
    pub certificates: Vec<ErrorCertificate>,
}

/// Rule value, true error and all certificates (from exact norms) for each θ.
pub fn theta_sweep<F>(
    f: &F,
    n: usize,
    a: f64,
    b: f64,
    thetas: &[f64],
    oracle_tol: f64,
    exec: Execution,
) -> Result<Vec<SweepRow>>
where
    F: Integrand + KnownNorms + ?Sized,
{
    f.require_interval(a, b)?;
    let norms = f.norm_data(n, a, b)?;
    let band = f.band(n, a, b)?;
    let exact = reference_integral_fn(|x| f.value(x), a, b, oracle_tol, exec)?;
    let rows = exec.map_slice(thetas, |&theta| -> Result<SweepRow> {
        let spec = RuleSpec::new(theta, n, a, b)?;
        let r = apply_rule(f, &spec)?;
        Ok(SweepRow {
            theta,
            f_n_value: r.f_n_value,
            true_error: (exact - r.f_n_value).abs(),
            perturbed_error: r.perturbation_term.map(|_| (exact - r.perturbed_value()).abs()),
            certificates: all_certificates(&spec, &norms, Some(&band))?,
        })
    });
    rows.into_iter().collect()
}

/// Closed-form versus brute-force kernel statistics for every spec.
pub fn kernel_table(specs: &[RuleSpec], exec: Execution) -> Vec<KernelCrossCheck> {
    exec.map_slice(specs, cross_check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::Builtin;

    #[test]
    fn grid_shapes() {
        assert_eq!(theta_grid(0.0, 0.25, 1.0).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = theta_grid(0.0, 0.1, 1.0).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(theta_grid(0.5, 0.1, 0.5).unwrap(), vec![0.5]);
        assert_eq!(theta_grid(0.0, 0.3, 1.0).unwrap().len(), 4);
        assert!(theta_grid(0.0, 0.0, 1.0).is_err());
        assert!(theta_grid(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn sweep_rows_are_certified() {
        let thetas = theta_grid(0.0, 0.25, 1.0).unwrap();
        for n in 1..=4 {
            let rows = theta_sweep(&Builtin::Exp, n, 0.0, 1.0, &thetas, 1e-13, Execution::default()).unwrap();
            assert_eq!(rows.len(), thetas.len());
            for row in &rows {
                assert_eq!(row.perturbed_error.is_some(), n % 2 == 0);
                for c in &row.certificates {
                    let err = if c.covers_perturbed_rule { row.perturbed_error.unwrap() } else { row.true_error };
                    assert!(err <= c.bound + 1e-12, "n={n} θ={} {}: {err} > {}", row.theta, c.kind, c.bound);
                }
            }
        }
    }

    #[test]
    fn modes_agree() {
        let thetas = theta_grid(0.0, 0.1, 1.0).unwrap();
        let f = Builtin::Sine { omega: 3.0 };
        let s = theta_sweep(&f, 3, -1.0, 2.0, &thetas, 1e-12, Execution::Sequential).unwrap();
        let p = theta_sweep(&f, 3, -1.0, 2.0, &thetas, 1e-12, Execution::Parallel).unwrap();
        assert_eq!(s, p);
        let specs: Vec<RuleSpec> = thetas.iter().map(|&t| RuleSpec::new(t, 5, 0.0, 1.0).unwrap()).collect();
        assert_eq!(kernel_table(&specs, Execution::Sequential), kernel_table(&specs, Execution::Parallel));
    }
}
