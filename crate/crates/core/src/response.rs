//! Membrane response to the photon-imbalance force.
//!
//! The membrane position obeys
//!
//! ```text
//! x'' + 2 κ_M x' + ω_M² x = (g/m) e^{−2κt} (ΔN(0) cos λt + ΔK(0) sin λt)
//! ```
//!
//! and is written as `X_M(t) = c ΔN(0) + d ΔK(0) + h X_M(0) + j P_M(0)`.
//! The two driven channels are the real and imaginary parts of one complex
//! response to `e^{st}` with `s = −2κ + iλ`.

use num_complex::Complex64;
use ode_solvers::{Dop853, OutputType, System, Vector4};

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// `c, d, h, j` and their time derivatives at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResponseCoefficients {
    pub t: f64,
    pub c: f64,
    pub d: f64,
    pub h: f64,
    pub j: f64,
    pub c_dot: f64,
    pub d_dot: f64,
    pub h_dot: f64,
    pub j_dot: f64,
}

impl ResponseCoefficients {
    /// Channel values in the order c, d, h, j.
    pub fn values(&self) -> [f64; 4] {
        [self.c, self.d, self.h, self.j]
    }

    pub fn derivatives(&self) -> [f64; 4] {
        [self.c_dot, self.d_dot, self.h_dot, self.j_dot]
    }
}

/// Force per unit mass `e^{−decay·t}(a_cos cos(carrier t), a_sin sin(carrier t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingSpec {
    pub amplitude_cos: f64,
    pub amplitude_sin: f64,
    pub decay: f64,
    pub carrier: f64,
}

impl ForcingSpec {
    /// Unit photon imbalance in both channels: amplitude `g/m`, decay `2κ`,
    /// carrier `λ`.
    pub fn from_params(params: &SystemParams) -> Self {
        let a = params.g_over_m();
        ForcingSpec {
            amplitude_cos: a,
            amplitude_sin: a,
            decay: 2.0 * params.kappa,
            carrier: params.lambda,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        ForcingSpec {
            amplitude_cos: self.amplitude_cos * factor,
            amplitude_sin: self.amplitude_sin * factor,
            ..self
        }
    }

    fn exponent(&self) -> Complex64 {
        Complex64::new(-self.decay, self.carrier)
    }
}

/// Closed-form coefficients for the system's own forcing.
pub fn response_closed_form(params: &SystemParams, t: f64) -> ResponseCoefficients {
    response_closed_form_with(params, &ForcingSpec::from_params(params), t)
}

/// Closed-form coefficients for an arbitrary forcing of the membrane in `params`.
pub fn response_closed_form_with(
    params: &SystemParams,
    forcing: &ForcingSpec,
    t: f64,
) -> ResponseCoefficients {
    let osc = Oscillator::new(params.omega_m, params.kappa_m);
    let (x, v) = osc.driven(forcing.exponent(), t);
    let (e_c, e_s) = osc.basis(t);
    let beta = osc.beta;
    let w2 = osc.omega0 * osc.omega0;
    ResponseCoefficients {
        t,
        c: forcing.amplitude_cos * x.re,
        d: forcing.amplitude_sin * x.im,
        h: e_c + beta * e_s,
        j: e_s / params.mass,
        c_dot: forcing.amplitude_cos * v.re,
        d_dot: forcing.amplitude_sin * v.im,
        h_dot: -w2 * e_s,
        j_dot: (e_c - beta * e_s) / params.mass,
    }
}

#[derive(Debug, Clone, Copy)]
struct Oscillator {
    omega0: f64,
    beta: f64,
}

impl Oscillator {
    fn new(omega0: f64, beta: f64) -> Self {
        Oscillator { omega0, beta }
    }

    fn underdamped(&self) -> bool {
        self.beta < self.omega0
    }

    /// `(e^{−βt} C(t), e^{−βt} S(t))` where `C, S` are `cos Ωt, sin(Ωt)/Ω`
    /// when underdamped and `cosh qt, sinh(qt)/q` otherwise.
    fn basis(&self, t: f64) -> (f64, f64) {
        let (b, w) = (self.beta, self.omega0);
        if self.underdamped() {
            let om = ((w - b) * (w + b)).sqrt();
            let decay = (-b * t).exp();
            (decay * (om * t).cos(), decay * (om * t).sin() / om)
        } else {
            let q = ((b - w) * (b + w)).sqrt();
            if q == 0.0 {
                let decay = (-b * t).exp();
                return (decay, t * decay);
            }
            let grow = ((q - b) * t).exp();
            let m = (-2.0 * q * t).exp_m1();
            // e^{−βt} cosh(qt) and e^{−βt} sinh(qt)/q without overflow.
            (grow * (1.0 + 0.5 * m), -grow * 0.5 * m / q)
        }
    }

    /// Response `(x, x')` to `e^{st}` from rest.
    fn driven(&self, s: Complex64, t: f64) -> (Complex64, Complex64) {
        let b = self.beta;
        let w = self.omega0;
        let (e_c, e_s) = self.basis(t);
        if self.underdamped() {
            let om = ((w - b) * (w + b)).sqrt();
            let r = Complex64::new(-b, om);
            let eps = s - r;
            let ert = (r * t).exp();
            let e = if (eps * t).norm() < 1e-3 {
                ert * t * phi1(eps * t)
            } else {
                ((s * t).exp() - ert) / eps
            };
            let den = eps + Complex64::new(0.0, 2.0 * om);
            let x = (e - e_s) / den;
            let v = (s * e + ert - (e_c - b * e_s)) / den;
            (x, v)
        } else {
            let p = s * s + 2.0 * b * s + w * w;
            let est = (s * t).exp();
            let hom = e_c + (s + b) * e_s;
            let hom_dot = -b * e_c + (b * b - w * w) * e_s + (s + b) * (e_c - b * e_s);
            ((est - hom) / p, (s * est - hom_dot) / p)
        }
    }
}

/// `(e^z − 1)/z`, with a series near the origin.
fn phi1(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    one + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0))))
}

/// Scalar channel with the decaying carrier carried as two extra state
/// components `e^{−kτ}(cos lτ, sin lτ)`, which keeps the system autonomous.
struct Channel {
    two_b: f64,
    amplitude: f64,
    decay: f64,
    carrier: f64,
    sine: bool,
}

impl System<f64, Vector4<f64>> for Channel {
    fn system(&self, _tau: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let trig = if self.sine { y[3] } else { y[2] };
        dy[0] = y[1];
        dy[1] = self.amplitude * trig - self.two_b * y[1] - y[0];
        dy[2] = -self.decay * y[2] - self.carrier * y[3];
        dy[3] = self.carrier * y[2] - self.decay * y[3];
    }
}

const ODE_TOL: f64 = 1e-12;

/// Integrates the four channels numerically on a uniform grid starting at 0.
///
/// Time is rescaled to `τ = ω_M t` and each driven channel is normalised so
/// its response is of order one; tolerances are fixed at 1e-12.
pub fn response_numeric(
    params: &SystemParams,
    forcing: &ForcingSpec,
    t_grid: &[f64],
) -> Result<Vec<ResponseCoefficients>> {
    let n = t_grid.len();
    if n < 2 || t_grid[0] != 0.0 {
        return Err(Error::Integration(
            "grid must start at t = 0 and contain at least two points".into(),
        ));
    }
    let dt = t_grid[1] - t_grid[0];
    let uniform = t_grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
    if dt.is_nan() || dt <= 0.0 || !uniform {
        return Err(Error::Integration(
            "grid must be uniform and increasing".into(),
        ));
    }
    let w0 = params.omega_m;
    let b = params.kappa_m / w0;
    let k = forcing.decay / w0;
    let l = forcing.carrier / w0;
    let s_hat = Complex64::new(-k, l);
    let p_hat = s_hat * s_hat + 2.0 * b * s_hat + 1.0;
    let sigma = p_hat.norm().max(1.0);

    let run = |amplitude: f64, sine: bool, x0: f64, v0: f64| -> Result<Vec<Vector4<f64>>> {
        let ch = Channel {
            two_b: 2.0 * b,
            amplitude,
            decay: k,
            carrier: l,
            sine,
        };
        let y0 = Vector4::new(x0, v0, 1.0, 0.0);
        let dtau = dt * w0;
        let tau_end = t_grid[n - 1] * w0;
        let mut solver = Dop853::from_param(
            ch,
            0.0,
            tau_end + 0.5 * dtau,
            dtau,
            y0,
            ODE_TOL,
            ODE_TOL,
            0.9,
            0.0,
            0.333,
            6.0,
            tau_end + 0.5 * dtau,
            0.0,
            50_000_000,
            u32::MAX,
            OutputType::Dense,
        );
        solver
            .integrate()
            .map_err(|e| Error::Integration(format!("{e} (tau = ω_M t)")))?;
        let ys = solver.y_out();
        if ys.len() < n {
            return Err(Error::Integration(format!(
                "dense output produced {} of {} samples",
                ys.len(),
                n
            )));
        }
        Ok(ys[..n].to_vec())
    };

    let yc = run(sigma, false, 0.0, 0.0)?;
    let ys = run(sigma, true, 0.0, 0.0)?;
    let yh = run(0.0, false, 1.0, 0.0)?;
    let yj = run(0.0, false, 0.0, 1.0)?;

    let scale_c = forcing.amplitude_cos / (w0 * w0 * sigma);
    let scale_s = forcing.amplitude_sin / (w0 * w0 * sigma);
    let m = params.mass;
    Ok((0..n)
        .map(|i| ResponseCoefficients {
            t: t_grid[i],
            c: scale_c * yc[i][0],
            d: scale_s * ys[i][0],
            h: yh[i][0],
            j: yj[i][0] / (m * w0),
            c_dot: scale_c * w0 * yc[i][1],
            d_dot: scale_s * w0 * ys[i][1],
            h_dot: w0 * yh[i][1],
            j_dot: yj[i][1] / m,
        })
        .collect())
}

/// Per-channel deviation `max|a − b| / max|b|` for c, d, h, j; channels that
/// vanish identically in `reference` use the absolute deviation.
pub fn channel_deviation(
    candidate: &[ResponseCoefficients],
    reference: &[ResponseCoefficients],
) -> [f64; 4] {
    let mut diff = [0.0f64; 4];
    let mut peak = [0.0f64; 4];
    for (a, b) in candidate.iter().zip(reference) {
        let (va, vb) = (a.values(), b.values());
        for k in 0..4 {
            diff[k] = diff[k].max((va[k] - vb[k]).abs());
            peak[k] = peak[k].max(vb[k].abs());
        }
    }
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = if peak[k] > 0.0 {
            diff[k] / peak[k]
        } else {
            diff[k]
        };
    }
    out
}

/// Closed form against [`response_numeric`] on `n` uniform samples of
/// `[0, periods · 2π/ω_M]`; returns [`channel_deviation`] per channel.
pub fn closed_form_deviation(params: &SystemParams, periods: f64, n: usize) -> Result<[f64; 4]> {
    let t_end = periods * 2.0 * std::f64::consts::PI / params.omega_m;
    let grid: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
    let forcing = ForcingSpec::from_params(params);
    let numeric = response_numeric(params, &forcing, &grid)?;
    let closed: Vec<_> = numeric
        .iter()
        .map(|r| response_closed_form_with(params, &forcing, r.t))
        .collect();
    Ok(channel_deviation(&closed, &numeric))
}

/// Random membrane/drive parameters in units of `ω_M = 1`, `m = g = 1`:
/// `λ` log-uniform on [0.1, 100], `κ` zero or log-uniform on [1e-3, 10],
/// `κ_M` zero or log-uniform on [1e-4, 0.1]. The first entries are fixed
/// undamped resonant and near-resonant cases.
pub fn sample_parameter_space(seed: u64, count: usize) -> Vec<SystemParams> {
    use rand::{rngs::StdRng, Rng, SeedableRng};
    let base = SystemParams {
        g: 1.0,
        omega: 0.0,
        omega_m: 1.0,
        lambda: 1.0,
        mass: 1.0,
        kappa: 0.0,
        kappa_m: 0.0,
    };
    let mut out = vec![
        base,
        SystemParams {
            lambda: 1.0 + 5e-7,
            ..base
        },
        SystemParams {
            lambda: 1.0 - 3e-4,
            ..base
        },
        SystemParams {
            lambda: 1.0,
            kappa_m: 1e-3,
            ..base
        },
    ];
    let mut rng = StdRng::seed_from_u64(seed);
    let log_uniform = |rng: &mut StdRng, lo: f64, hi: f64| (rng.gen_range(lo.ln()..hi.ln())).exp();
    while out.len() < count {
        let lambda = log_uniform(&mut rng, 0.1, 100.0);
        let kappa = if rng.gen_bool(0.3) {
            0.0
        } else {
            log_uniform(&mut rng, 1e-3, 10.0)
        };
        let kappa_m = if rng.gen_bool(0.3) {
            0.0
        } else {
            log_uniform(&mut rng, 1e-4, 0.1)
        };
        out.push(SystemParams {
            lambda,
            kappa,
            kappa_m,
            ..base
        });
    }
    out.truncate(count);
    out
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(omega_m: f64, lambda: f64, kappa: f64, kappa_m: f64, g_over_m: f64) -> SystemParams {
        SystemParams {
            g: g_over_m,
            omega: 0.0,
            omega_m,
            lambda,
            mass: 1.0,
            kappa,
            kappa_m,
        }
    }

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn initial_conditions() {
        let p = params(1.3, 0.7, 0.2, 0.05, 2.0);
        let r = response_closed_form(&p, 0.0);
        assert_eq!((r.c, r.d, r.j), (0.0, 0.0, 0.0));
        assert!((r.h - 1.0).abs() < 1e-15);
        assert!(r.c_dot.abs() < 1e-15 && r.d_dot.abs() < 1e-15);
        assert!((r.j_dot - 1.0 / p.mass).abs() < 1e-15);
        assert_eq!(r.h_dot, 0.0);
    }

    #[test]
    fn undamped_matches_numeric() {
        let p = params(1.0, 2.0, 0.0, 0.0, 1.0);
        let ts = grid(20.0, 201);
        let num = response_numeric(&p, &ForcingSpec::from_params(&p), &ts).unwrap();
        let cf: Vec<_> = ts.iter().map(|&t| response_closed_form(&p, t)).collect();
        let dev = channel_deviation(&cf, &num);
        assert!(dev.iter().all(|&d| d < 1e-8), "{dev:?}");
        // c = (cos t − cos 2t)/3 for this case.
        for r in &cf {
            let exact = ((r.t).cos() - (2.0 * r.t).cos()) / 3.0;
            assert!((r.c - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn damped_drive_decays() {
        let p = params(1.0, 1.7, 0.3, 0.2, 1.0);
        let r = response_closed_form(&p, 400.0);
        for v in r.values().iter().chain(r.derivatives().iter()) {
            assert!(v.abs() < 1e-20);
        }
    }

    #[test]
    fn free_oscillator_numeric() {
        let p = params(1.0, 1.0, 0.0, 0.0, 0.0);
        let ts = grid(30.0, 301);
        let out = response_numeric(&p, &ForcingSpec::from_params(&p), &ts).unwrap();
        for r in &out {
            assert!((r.h - r.t.cos()).abs() < 1e-10);
            assert_eq!(r.c, 0.0);
        }
    }

    #[test]
    fn damped_free_energy_non_increasing() {
        let p = params(2.0, 1.0, 0.0, 0.15, 0.0);
        let ts = grid(20.0, 400);
        let out = response_numeric(&p, &ForcingSpec::from_params(&p), &ts).unwrap();
        let energy = |x: f64, v: f64| 0.5 * (v * v + p.omega_m * p.omega_m * x * x);
        let mut prev = f64::INFINITY;
        for r in &out {
            let e = energy(r.h, r.h_dot);
            assert!(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }

    #[test]
    fn off_resonant_amplitude() {
        let lambda = 200.0;
        let p = params(1.0, lambda, 0.0, 0.0, 1.0);
        // Over one slow period the fast particular part swings with amplitude ≈ A/λ².
        let ts = grid(2.0 * PI / lambda, 200);
        let num = response_numeric(&p, &ForcingSpec::from_params(&p), &ts).unwrap();
        let hi = num.iter().map(|r| r.c).fold(f64::MIN, f64::max);
        let lo = num.iter().map(|r| r.c).fold(f64::MAX, f64::min);
        let swing = 0.5 * (hi - lo);
        assert!((swing * lambda * lambda - 1.0).abs() < 0.02, "{swing}");
    }

    #[test]
    fn finite_difference_derivatives() {
        for p in [
            params(1.0, 3.0, 0.1, 0.02, 1.5),
            params(1.0, 0.4, 0.0, 2.5, 1.0),
            params(1.0, 1.0, 0.0, 1.0, 1.0),
        ] {
            let t = 3.7;
            let r = response_closed_form(&p, t);
            let mut errs = Vec::new();
            for h in [1e-3, 5e-4] {
                let a = response_closed_form(&p, t + h);
                let b = response_closed_form(&p, t - h);
                let fd = |f: fn(&ResponseCoefficients) -> f64| (f(&a) - f(&b)) / (2.0 * h);
                errs.push([
                    (fd(|r| r.c) - r.c_dot).abs(),
                    (fd(|r| r.d) - r.d_dot).abs(),
                    (fd(|r| r.h) - r.h_dot).abs(),
                    (fd(|r| r.j) - r.j_dot).abs(),
                ]);
            }
            for k in 0..4 {
                assert!(errs[0][k] < 1e-5);
                // Second order: halving h quarters the error.
                if errs[0][k] > 1e-11 {
                    let ratio = errs[0][k] / errs[1][k];
                    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
                }
            }
        }
    }

    #[test]
    fn linear_in_forcing() {
        let p = params(1.0, 2.3, 0.05, 0.01, 1.0);
        let f = ForcingSpec::from_params(&p);
        for t in [0.5, 4.0, 17.0] {
            let a = response_closed_form_with(&p, &f, t);
            let b = response_closed_form_with(&p, &f.scaled(3.0), t);
            assert_eq!(b.c, 3.0 * a.c);
            assert_eq!(b.d, 3.0 * a.d);
            assert_eq!(b.h, a.h);
        }
    }

    #[test]
    fn exact_resonance_is_secular() {
        let p = params(1.0, 1.0, 0.0, 0.0, 1.0);
        // Resonant sine drive: x = (sin t − t cos t)/2 for the sine channel.
        for t in [0.1, 1.0, 10.0, 100.0] {
            let r = response_closed_form(&p, t);
            let exact = (t.sin() - t * t.cos()) / 2.0;
            assert!((r.d - exact).abs() < 1e-12 * t.max(1.0), "{t}");
            let exact_c = t * t.sin() / 2.0;
            assert!((r.c - exact_c).abs() < 1e-12 * t.max(1.0));
        }
        let near = params(1.0, 1.0 + 1e-9, 0.0, 0.0, 1.0);
        let r = response_closed_form(&near, 50.0);
        assert!(r.c.is_finite() && (r.c - 25.0 * 50f64.sin()).abs() < 1e-5);
    }
}
