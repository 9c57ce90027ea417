//! Runge–Kutta engines over complex state vectors: an adaptive embedded
//! Dormand–Prince 5(4) scheme with FSAL and a fixed-step classic RK4.
//!
//! The engines integrate a generic linear right-hand side and stop exactly on
//! every requested sample time; the caller records states through a callback
//! and may abort the run by returning an error from it.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::dynamics::{IntegratorSettings, Method};
use crate::error::{Error, Result};

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order solution weights (also the last stage row: FSAL).
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

fn combine(y: &Array1<C64>, h: f64, terms: &[(f64, &Array1<C64>)]) -> Array1<C64> {
    let mut out = y.clone();
    for &(coeff, k) in terms {
        let c = C64::new(h * coeff, 0.0);
        out.zip_mut_with(k, |o, &kv| *o += c * kv);
    }
    out
}

fn scaled_rms_error(
    err: &Array1<C64>,
    y_old: &Array1<C64>,
    y_new: &Array1<C64>,
    atol: f64,
    rtol: f64,
) -> f64 {
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y_old.iter()).zip(y_new.iter()) {
        let scale = atol + rtol * a.norm().max(b.norm());
        let r = e.norm() / scale;
        acc += r * r;
    }
    (acc / err.len() as f64).sqrt()
}

/// Validate a sample grid against the requested span.
pub(crate) fn validate_samples(t_span: (f64, f64), sample_times: &[f64]) -> Result<()> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
        return Err(Error::InvalidParams {
            field: "t_span",
            reason: format!("need finite t0 < t1, got ({t0}, {t1})"),
        });
    }
    if sample_times.is_empty() {
        return Err(Error::InvalidParams {
            field: "sample_times",
            reason: "at least one sample time is required".into(),
        });
    }
    let eps = 1e-9 * (t1 - t0);
    for pair in sample_times.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidParams {
                field: "sample_times",
                reason: "sample times must be strictly increasing".into(),
            });
        }
    }
    if sample_times[0] < t0 - eps || *sample_times.last().expect("non-empty") > t1 + eps {
        return Err(Error::InvalidParams {
            field: "sample_times",
            reason: "sample times must lie within t_span".into(),
        });
    }
    Ok(())
}

/// Integrate dy/dt = rhs(t, y) from `t_span.0` to `t_span.1`, stopping exactly
/// on every entry of `sample_times` (plus the span end) and invoking `record`
/// at each sample.
pub(crate) fn integrate<F, R>(
    mut rhs: F,
    y0: &Array1<C64>,
    t_span: (f64, f64),
    sample_times: &[f64],
    settings: &IntegratorSettings,
    mut record: R,
) -> Result<()>
where
    F: FnMut(f64, &Array1<C64>) -> Array1<C64>,
    R: FnMut(f64, &Array1<C64>) -> Result<()>,
{
    settings.validate()?;
    validate_samples(t_span, sample_times)?;
    match settings.method {
        Method::AdaptiveEmbeddedRk => {
            integrate_dopri5(&mut rhs, y0, t_span, sample_times, settings, &mut record)
        }
        Method::FixedRk4 => {
            integrate_rk4(&mut rhs, y0, t_span, sample_times, settings, &mut record)
        }
    }
}

fn integrate_dopri5<F, R>(
    rhs: &mut F,
    y0: &Array1<C64>,
    t_span: (f64, f64),
    sample_times: &[f64],
    settings: &IntegratorSettings,
    record: &mut R,
) -> Result<()>
where
    F: FnMut(f64, &Array1<C64>) -> Array1<C64>,
    R: FnMut(f64, &Array1<C64>) -> Result<()>,
{
    let (t0, t1) = t_span;
    let span = t1 - t0;
    let h_min = (span * 1e-14).max(f64::MIN_POSITIVE * 16.0);
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = rhs(t, &y);

    // Initial step from the first derivative scale.
    let f_scale = k1.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h_prop = if f_scale > 0.0 {
        (0.01 / f_scale).min(settings.max_step).min(span / 10.0)
    } else {
        settings.max_step.min(span / 10.0)
    };

    let eps = 1e-9 * span;
    let mut targets: Vec<(f64, bool)> = sample_times.iter().map(|&ts| (ts, true)).collect();
    if targets.last().expect("non-empty").0 < t1 - eps {
        targets.push((t1, false));
    }

    let mut k = vec![Array1::<C64>::zeros(y.len()); 7];
    for &(target, is_sample) in &targets {
        if (target - t).abs() <= eps {
            if is_sample {
                record(target, &y)?;
            }
            continue;
        }
        while t < target - eps {
            let h = h_prop.min(target - t).min(settings.max_step);
            if h < h_min {
                return Err(Error::Integration {
                    t,
                    reason: "step size underflow: error tolerance unreachable".into(),
                });
            }

            k[0] = k1.clone();
            let y2 = combine(&y, h, &[(A2[0], &k[0])]);
            k[1] = rhs(t + C[1] * h, &y2);
            let y3 = combine(&y, h, &[(A3[0], &k[0]), (A3[1], &k[1])]);
            k[2] = rhs(t + C[2] * h, &y3);
            let y4 = combine(&y, h, &[(A4[0], &k[0]), (A4[1], &k[1]), (A4[2], &k[2])]);
            k[3] = rhs(t + C[3] * h, &y4);
            let y5 = combine(
                &y,
                h,
                &[
                    (A5[0], &k[0]),
                    (A5[1], &k[1]),
                    (A5[2], &k[2]),
                    (A5[3], &k[3]),
                ],
            );
            k[4] = rhs(t + C[4] * h, &y5);
            let y6 = combine(
                &y,
                h,
                &[
                    (A6[0], &k[0]),
                    (A6[1], &k[1]),
                    (A6[2], &k[2]),
                    (A6[3], &k[3]),
                    (A6[4], &k[4]),
                ],
            );
            k[5] = rhs(t + C[5] * h, &y6);
            let y_new = combine(
                &y,
                h,
                &[
                    (B5[0], &k[0]),
                    (B5[2], &k[2]),
                    (B5[3], &k[3]),
                    (B5[4], &k[4]),
                    (B5[5], &k[5]),
                ],
            );
            k[6] = rhs(t + h, &y_new);

            let mut err = Array1::<C64>::zeros(y.len());
            for (coeff, ki) in E.iter().zip(k.iter()) {
                if *coeff != 0.0 {
                    let c = C64::new(h * coeff, 0.0);
                    err.zip_mut_with(ki, |e, &kv| *e += c * kv);
                }
            }
            let err_norm = scaled_rms_error(&err, &y, &y_new, settings.atol, settings.rtol);

            if err_norm.is_finite() && err_norm <= 1.0 {
                t += h;
                y = y_new;
                k1 = k[6].clone();
                let fac = if err_norm == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                h_prop = (h * fac).min(settings.max_step);
            } else {
                let fac = if err_norm.is_finite() {
                    (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, 0.9)
                } else {
                    FAC_MIN
                };
                h_prop = h * fac;
            }
        }
        t = target;
        if is_sample {
            record(target, &y)?;
        }
    }
    Ok(())
}

fn integrate_rk4<F, R>(
    rhs: &mut F,
    y0: &Array1<C64>,
    t_span: (f64, f64),
    sample_times: &[f64],
    settings: &IntegratorSettings,
    record: &mut R,
) -> Result<()>
where
    F: FnMut(f64, &Array1<C64>) -> Array1<C64>,
    R: FnMut(f64, &Array1<C64>) -> Result<()>,
{
    let (t0, t1) = t_span;
    let eps = 1e-9 * (t1 - t0);
    let mut t = t0;
    let mut y = y0.clone();
    let mut targets: Vec<(f64, bool)> = sample_times.iter().map(|&ts| (ts, true)).collect();
    if targets.last().expect("non-empty").0 < t1 - eps {
        targets.push((t1, false));
    }
    for &(target, is_sample) in &targets {
        if (target - t).abs() <= eps {
            if is_sample {
                record(target, &y)?;
            }
            continue;
        }
        let n_sub = ((target - t) / settings.max_step).ceil().max(1.0) as usize;
        let h = (target - t) / n_sub as f64;
        for _ in 0..n_sub {
            let k1 = rhs(t, &y);
            let y2 = combine(&y, h, &[(0.5, &k1)]);
            let k2 = rhs(t + 0.5 * h, &y2);
            let y3 = combine(&y, h, &[(0.5, &k2)]);
            let k3 = rhs(t + 0.5 * h, &y3);
            let y4 = combine(&y, h, &[(1.0, &k3)]);
            let k4 = rhs(t + h, &y4);
            y = combine(
                &y,
                h,
                &[
                    (1.0 / 6.0, &k1),
                    (2.0 / 6.0, &k2),
                    (2.0 / 6.0, &k3),
                    (1.0 / 6.0, &k4),
                ],
            );
            t += h;
        }
        t = target;
        if is_sample {
            record(target, &y)?;
        }
    }
    Ok(())
}
