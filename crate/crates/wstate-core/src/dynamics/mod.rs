//! Time evolution: the Schrödinger equation for the closed system, the
//! Lindblad master equation for the open system, and an exact
//! piecewise-propagator oracle for cross-checking the integrators.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, min_eigenvalue};
use crate::model::{build_hamiltonian, build_jump_operators, PulseSpec, SystemParams};

mod oracle;
mod rk;

pub use oracle::{liouvillian_matrix, propagate_density_oracle, propagate_state_oracle};

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Largest admissible drift of the state norm (closed) or density-matrix
/// trace (open) over a run.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Largest admissible Hermiticity residual of a recorded density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Adaptive embedded Runge–Kutta of order 5(4). Default.
    AdaptiveEmbeddedRk,
    /// Classic fixed-step RK4 with step size `max_step`.
    FixedRk4,
}

/// Tolerances and scheme selection for the integrators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Relative tolerance of the adaptive error control.
    pub rtol: f64,
    /// Absolute tolerance of the adaptive error control.
    pub atol: f64,
    /// Largest step in ns; also the fixed step of [`Method::FixedRk4`].
    pub max_step: f64,
    pub method: Method,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 10.0,
            method: Method::AdaptiveEmbeddedRk,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !self.rtol.is_finite() || self.rtol <= 0.0 {
            return Err(Error::InvalidParams {
                field: "rtol",
                reason: "relative tolerance must be positive".into(),
            });
        }
        if !self.atol.is_finite() || self.atol <= 0.0 {
            return Err(Error::InvalidParams {
                field: "atol",
                reason: "absolute tolerance must be positive".into(),
            });
        }
        if !self.max_step.is_finite() || self.max_step <= 0.0 {
            return Err(Error::InvalidParams {
                field: "max_step",
                reason: "maximum step must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Uniform sample grid across a span, endpoints included.
pub fn uniform_samples(t_span: (f64, f64), n: usize) -> Vec<f64> {
    assert!(n >= 2, "need at least two sample points");
    let (t0, t1) = t_span;
    let dt = (t1 - t0) / (n - 1) as f64;
    let mut times: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
    times[n - 1] = t1;
    times
}

/// Default number of sample points across a span.
pub const DEFAULT_SAMPLES: usize = 2001;

/// Recorded closed-system evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sample times in ns, strictly increasing.
    pub times: Vec<f64>,
    /// State vectors at the sample times; norms stay within 1e-6 of one.
    pub states: Vec<Array1<C64>>,
    /// Drive amplitude Ω(t) at the sample times, 1/ns.
    pub pulse_values: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Array1<C64> {
        self.states.last().expect("trajectory is never empty")
    }

    /// |ψ_index(t)|² at each sample.
    pub fn population(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index].norm_sqr()).collect()
    }
}

/// Recorded open-system evolution.
#[derive(Clone, Debug)]
pub struct DensityTrajectory {
    pub times: Vec<f64>,
    /// Density matrices at the sample times, symmetrized; traces stay within
    /// 1e-6 of one and Hermiticity residuals within 1e-10.
    pub rhos: Vec<Array2<C64>>,
    pub pulse_values: Vec<f64>,
}

impl DensityTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_rho(&self) -> &Array2<C64> {
        self.rhos.last().expect("trajectory is never empty")
    }

    /// Re ρ[index, index] at each sample.
    pub fn population(&self, index: usize) -> Vec<f64> {
        self.rhos.iter().map(|r| r[[index, index]].re).collect()
    }

    /// Smallest eigenvalue over all samples; the positivity check.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut least = f64::INFINITY;
        for rho in &self.rhos {
            least = least.min(min_eigenvalue(rho)?);
        }
        Ok(least)
    }
}

fn vector_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate dψ/dt = −i H(Ω(t)) ψ over the closed basis and record the state
/// at `sample_times`.
///
/// The initial state must be unit-norm over the N+2 closed basis; the run
/// fails with the time of failure if the norm drifts by more than 1e-6 or the
/// step size underflows.
pub fn evolve_schrodinger(
    params: &SystemParams,
    pulse: &PulseSpec,
    initial: &Array1<C64>,
    t_span: (f64, f64),
    sample_times: &[f64],
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    pulse.validate()?;
    let dim = params.closed_dim();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: initial.len(),
        });
    }
    let norm = vector_norm(initial);
    if (norm - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::InvalidParams {
            field: "initial",
            reason: format!("initial state norm {norm} is not 1"),
        });
    }

    let rhs = |t: f64, psi: &Array1<C64>| -> Array1<C64> {
        let h = build_hamiltonian(params, pulse.value(t), false);
        let mut dpsi = h.dot(psi);
        dpsi.mapv_inplace(|v| v * MINUS_I);
        dpsi
    };

    let mut traj = Trajectory {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        pulse_values: Vec::with_capacity(sample_times.len()),
    };
    rk::integrate(rhs, initial, t_span, sample_times, settings, |t, y| {
        let norm = vector_norm(y);
        if (norm - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::Integration {
                t,
                reason: format!("norm drift {:.3e} exceeds 1e-6", (norm - 1.0).abs()),
            });
        }
        traj.times.push(t);
        traj.states.push(y.clone());
        traj.pulse_values.push(pulse.value(t));
        Ok(())
    })?;
    Ok(traj)
}

/// The Lindblad right-hand side `−i[H,ρ] + Σ_k ½(2L_kρL_k† − L_k†L_kρ −
/// ρL_k†L_k)` with the jump operators fixed and H supplied per call.
pub(crate) struct LindbladRhs {
    jumps: Vec<Array2<C64>>,
    jump_adjoints: Vec<Array2<C64>>,
    /// Σ L†L, which is diagonal for this system's jump operators.
    gsum: Array2<C64>,
}

impl LindbladRhs {
    pub(crate) fn new(params: &SystemParams) -> Self {
        let dim = params.open_dim();
        let jumps: Vec<Array2<C64>> = build_jump_operators(params)
            .into_iter()
            .filter(|l| l.iter().any(|v| v.norm_sqr() > 0.0))
            .collect();
        let jump_adjoints: Vec<Array2<C64>> = jumps.iter().map(adjoint).collect();
        let mut gsum = Array2::<C64>::zeros((dim, dim));
        for (l, ld) in jumps.iter().zip(&jump_adjoints) {
            gsum = gsum + ld.dot(l);
        }
        LindbladRhs {
            jumps,
            jump_adjoints,
            gsum,
        }
    }

    pub(crate) fn jumps(&self) -> &[Array2<C64>] {
        &self.jumps
    }

    pub(crate) fn apply(&self, h: &Array2<C64>, rho: &ndarray::ArrayView2<C64>) -> Array2<C64> {
        let mut d = h.dot(rho) - rho.dot(h);
        d.mapv_inplace(|v| v * MINUS_I);
        for (l, ld) in self.jumps.iter().zip(&self.jump_adjoints) {
            d = d + l.dot(rho).dot(ld);
        }
        let damp = self.gsum.dot(rho) + rho.dot(&self.gsum);
        d.zip_mut_with(&damp, |a, &b| *a -= 0.5 * b);
        d
    }
}

fn hermiticity_residual(rho: &ndarray::ArrayView2<C64>) -> f64 {
    let dim = rho.nrows();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            let r = (rho[[i, j]] - rho[[j, i]].conj()).norm() / 2.0;
            worst = worst.max(r);
        }
    }
    worst
}

fn symmetrize(rho: &ndarray::ArrayView2<C64>) -> Array2<C64> {
    let dim = rho.nrows();
    let mut out = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            out[[i, j]] = 0.5 * (rho[[i, j]] + rho[[j, i]].conj());
        }
    }
    out
}

/// Integrate the Lindblad master equation `dρ/dt = −i[H,ρ] + Σ_k ½(2L_kρL_k†
/// − L_k†L_kρ − ρL_k†L_k)` over the N+3 open basis and record ρ at
/// `sample_times`.
///
/// The initial matrix must be a valid density matrix: Hermitian within 1e-10,
/// unit trace within 1e-6, smallest eigenvalue ≥ −1e-10. Recorded matrices
/// are symmetrized; the run fails if the pre-symmetrization residual exceeds
/// 1e-10 or the trace drifts by more than 1e-6.
pub fn evolve_lindblad(
    params: &SystemParams,
    pulse: &PulseSpec,
    initial: &Array2<C64>,
    t_span: (f64, f64),
    sample_times: &[f64],
    settings: &IntegratorSettings,
) -> Result<DensityTrajectory> {
    pulse.validate()?;
    let dim = params.open_dim();
    if initial.dim() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: initial.nrows(),
        });
    }
    if hermiticity_residual(&initial.view()) > HERMITICITY_TOL {
        return Err(Error::InvalidParams {
            field: "initial",
            reason: "initial density matrix is not Hermitian".into(),
        });
    }
    let trace: C64 = initial.diag().iter().sum();
    if (trace.re - 1.0).abs() > NORM_DRIFT_TOL || trace.im.abs() > NORM_DRIFT_TOL {
        return Err(Error::InvalidParams {
            field: "initial",
            reason: format!("initial trace {trace} is not 1"),
        });
    }
    let least = min_eigenvalue(initial)?;
    if least < -1e-10 {
        return Err(Error::InvalidParams {
            field: "initial",
            reason: format!("initial density matrix has eigenvalue {least} < -1e-10"),
        });
    }

    let lindblad = LindbladRhs::new(params);
    let rhs = |t: f64, v: &Array1<C64>| -> Array1<C64> {
        let rho = v
            .view()
            .into_shape_with_order((dim, dim))
            .expect("flattened density matrix is contiguous");
        let h = build_hamiltonian(params, pulse.value(t), true);
        let d = lindblad.apply(&h, &rho);
        d.into_shape_with_order(dim * dim)
            .expect("derivative matrix is contiguous")
    };

    let flat_initial = initial
        .to_owned()
        .into_shape_with_order(dim * dim)
        .expect("density matrix is contiguous");

    let mut traj = DensityTrajectory {
        times: Vec::with_capacity(sample_times.len()),
        rhos: Vec::with_capacity(sample_times.len()),
        pulse_values: Vec::with_capacity(sample_times.len()),
    };
    rk::integrate(
        rhs,
        &flat_initial,
        t_span,
        sample_times,
        settings,
        |t, y| {
            let rho = y
                .view()
                .into_shape_with_order((dim, dim))
                .expect("flattened density matrix is contiguous");
            let residual = hermiticity_residual(&rho);
            if residual > HERMITICITY_TOL {
                return Err(Error::Integration {
                    t,
                    reason: format!("hermiticity residual {residual:.3e} exceeds 1e-10"),
                });
            }
            let trace: C64 = rho.diag().iter().sum();
            if (trace.re - 1.0).abs() > NORM_DRIFT_TOL {
                return Err(Error::Integration {
                    t,
                    reason: format!("trace drift {:.3e} exceeds 1e-6", (trace.re - 1.0).abs()),
                });
            }
            traj.times.push(t);
            traj.rhos.push(symmetrize(&rho));
            traj.pulse_values.push(pulse.value(t));
            Ok(())
        },
    )?;
    Ok(traj)
}

/// Density matrix |index⟩⟨index| of the given dimension.
pub fn basis_density(dim: usize, index: usize) -> Array2<C64> {
    let mut rho = Array2::<C64>::zeros((dim, dim));
    rho[[index, index]] = C64::new(1.0, 0.0);
    rho
}

/// Unit basis vector |index⟩ of the given dimension.
pub fn basis_state(dim: usize, index: usize) -> Array1<C64> {
    let mut psi = Array1::<C64>::zeros(dim);
    psi[index] = C64::new(1.0, 0.0);
    psi
}
