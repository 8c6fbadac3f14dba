//! Dormand-Prince 5(4) integrator with dense output and positivity control.
//!
//! The state is a fixed-size array. Accepted steps keep every component
//! non-negative: a trial step that would push a component below
//! [`NEGATIVE_REJECT`] is rejected with a halved step, and smaller overshoots
//! are clamped to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A trial step whose raw result dips below this is rejected.
pub const NEGATIVE_REJECT: f64 = -1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size (`f64::INFINITY` for none).
    pub h_max: f64,
    /// Accepted plus rejected steps before the run is cut off.
    pub max_steps: usize,
}

/// Fifth-order solution, embedded error estimate and stage derivatives.
type Stages<const D: usize> = ([f64; D], [f64; D], [[f64; D]; 7]);

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-3).contains(&self.rtol) {
            return Err(Error::InvalidParameter {
                name: "rtol",
                value: self.rtol,
                reason: "relative tolerance must lie in [1e-12, 1e-3]",
            });
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "atol",
                value: self.atol,
                reason: "must be positive",
            });
        }
        if !(self.h_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h_max",
                value: self.h_max,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Both tolerances halved.
    pub fn halved(self) -> Self {
        Self {
            rtol: 0.5 * self.rtol,
            atol: 0.5 * self.atol,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub positivity_rejections: usize,
    pub evaluations: usize,
    /// Smallest raw component value of any accepted step before clamping.
    pub min_component: f64,
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const D: usize> {
    pub t0: f64,
    pub h: f64,
    r: [[f64; D]; 5],
}

impl<const D: usize> DenseStep<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn y0(&self) -> [f64; D] {
        self.r[0]
    }

    pub fn y1(&self) -> [f64; D] {
        let mut y = [0.0; D];
        for (i, v) in y.iter_mut().enumerate() {
            *v = self.r[0][i] + self.r[1][i];
        }
        y
    }

    /// Fifth-order-consistent interpolant at `t` within the step.
    pub fn eval(&self, t: f64) -> [f64; D] {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let mut y = [0.0; D];
        for (i, v) in y.iter_mut().enumerate() {
            let r = &self.r;
            *v = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn comb<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (i, v) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *v += h * acc;
    }
    out
}

/// Adaptive stepper. `f(t, y)` may fail; a failing stage rejects the step.
pub struct Dopri5<F, const D: usize>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
{
    f: F,
    t: f64,
    y: [f64; D],
    k1: [f64; D],
    h: f64,
    tol: Tolerances,
    nonnegative: bool,
    stats: IntegrationStats,
}

impl<F, const D: usize> Dopri5<F, D>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
{
    pub fn new(mut f: F, t0: f64, y0: [f64; D], tol: Tolerances) -> Result<Self> {
        tol.validate()?;
        let k1 = f(t0, &y0)?;
        let mut s = Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            tol,
            nonnegative: true,
            stats: IntegrationStats {
                evaluations: 1,
                min_component: y0.iter().copied().fold(f64::INFINITY, f64::min),
                ..Default::default()
            },
        };
        s.h = s.initial_step()?;
        Ok(s)
    }

    /// Turns positivity control off (for fields that may leave the quadrant).
    pub fn allow_negative(mut self) -> Self {
        self.nonnegative = false;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; D] {
        self.y
    }

    pub fn stats(&self) -> IntegrationStats {
        self.stats
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Restarts from a modified state at the current time.
    pub fn reset_state(&mut self, y: [f64; D]) -> Result<()> {
        self.y = y;
        self.k1 = (self.f)(self.t, &y)?;
        self.stats.evaluations += 1;
        Ok(())
    }

    fn scale(&self, y0: &[f64; D], y1: &[f64; D], i: usize) -> f64 {
        self.tol.atol + self.tol.rtol * y0[i].abs().max(y1[i].abs())
    }

    fn initial_step(&mut self) -> Result<f64> {
        let y0 = self.y;
        let sc: Vec<f64> = (0..D)
            .map(|i| self.tol.atol + self.tol.rtol * y0[i].abs())
            .collect();
        let norm = |v: &[f64; D]| {
            (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / D as f64).sqrt()
        };
        let d0 = norm(&y0);
        let d1 = norm(&self.k1);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(self.tol.h_max);
        let y1 = comb(&y0, h0, &[(1.0, &self.k1)]);
        let d2 = match (self.f)(self.t + h0, &y1) {
            Ok(k) => {
                self.stats.evaluations += 1;
                let mut diff = [0.0; D];
                for i in 0..D {
                    diff[i] = k[i] - self.k1[i];
                }
                norm(&diff) / h0
            }
            Err(_) => return Ok(h0 * 1e-3),
        };
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.tol.h_max))
    }

    fn stages(&mut self, h: f64) -> Result<Stages<D>> {
        let (t, y, k1) = (self.t, self.y, self.k1);
        let f = &mut self.f;
        let k2 = f(t + C2 * h, &comb(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * h, &comb(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(
            t + C4 * h,
            &comb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = f(
            t + C5 * h,
            &comb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            t + h,
            &comb(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y1 = comb(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y1)?;
        self.stats.evaluations += 6;
        let err = comb(
            &[0.0; D],
            h,
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        Ok((y1, err, [k1, k2, k3, k4, k5, k6, k7]))
    }

    /// Takes one accepted step, never stepping past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<D>> {
        loop {
            if self.stats.accepted + self.stats.rejected >= self.tol.max_steps {
                return Err(Error::NotConverged {
                    stage: "integrate",
                    iterations: self.tol.max_steps,
                });
            }
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.tol.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let h_min = 1e-14 * self.t.abs().max(1.0);
            if h < h_min && !last {
                return Err(Error::StepSizeUnderflow {
                    t: self.t,
                    h,
                    prey: self.y[0],
                    predator: if D > 1 { self.y[1] } else { 0.0 },
                });
            }
            let trial = self.stages(h);
            let (y1, err, k) = match trial {
                Ok(v) => v,
                Err(_) => {
                    self.stats.rejected += 1;
                    self.h = 0.5 * h;
                    continue;
                }
            };
            let mut e2 = 0.0;
            for (i, e) in err.iter().enumerate() {
                let s = self.scale(&self.y, &y1, i);
                e2 += (e / s).powi(2);
            }
            let en = (e2 / D as f64).sqrt();
            if !en.is_finite() {
                self.stats.rejected += 1;
                self.h = 0.25 * h;
                continue;
            }
            if en > 1.0 {
                self.stats.rejected += 1;
                self.h = h * (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
                continue;
            }
            let min_raw = y1.iter().copied().fold(f64::INFINITY, f64::min);
            if self.nonnegative && min_raw < NEGATIVE_REJECT {
                self.stats.rejected += 1;
                self.stats.positivity_rejections += 1;
                self.h = 0.5 * h;
                continue;
            }

            let y0 = self.y;
            let mut dense = [[0.0; D]; 5];
            for i in 0..D {
                let dy = y1[i] - y0[i];
                let bspl = h * k[0][i] - dy;
                dense[0][i] = y0[i];
                dense[1][i] = dy;
                dense[2][i] = bspl;
                dense[3][i] = dy - h * k[6][i] - bspl;
                dense[4][i] = h
                    * (D1 * k[0][i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let step = DenseStep {
                t0: self.t,
                h,
                r: dense,
            };

            self.stats.accepted += 1;
            self.stats.min_component = self.stats.min_component.min(min_raw);
            self.t = if last { t_limit } else { self.t + h };
            let mut clamped = false;
            let mut y = y1;
            if self.nonnegative {
                for v in y.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                        clamped = true;
                    }
                }
            }
            self.y = y;
            if clamped {
                self.reset_state(y)?;
            } else {
                self.k1 = k[6];
            }
            let fac = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last {
                self.h = h * fac;
            } else {
                self.h = self.h.max(h * fac);
            }
            return Ok(step);
        }
    }

    /// Integrates to `t_end`, returning the final state.
    pub fn run_to(&mut self, t_end: f64) -> Result<[f64; D]> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(self.y)
    }
}

/// Finds `t` in the step where `g(y(t))` changes sign, by bisection on the
/// dense output. Requires `g(y(t0))` and `g(y(t1))` of opposite signs.
pub fn locate_crossing<const D: usize>(
    step: &DenseStep<D>,
    mut g: impl FnMut(&[f64; D]) -> f64,
    t_tol: f64,
) -> (f64, [f64; D]) {
    let (mut lo, mut hi) = (step.t0, step.t1());
    let glo = g(&step.eval(lo));
    for _ in 0..200 {
        if hi - lo <= t_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(&step.eval(mid));
        if (gm > 0.0) == (glo > 0.0) && gm != 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, step.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let tol = Tolerances::new(1e-10, 1e-14);
        let mut s = Dopri5::new(|_, y: &[f64; 1]| Ok([-2.0 * y[0]]), 0.0, [1.0], tol).unwrap();
        let y = s.run_to(3.0).unwrap();
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-11);
        assert_eq!(s.t(), 3.0);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let tol = Tolerances::new(1e-10, 1e-12);
        let mut s = Dopri5::new(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [0.0, 1.0], tol)
            .unwrap()
            .allow_negative();
        while s.t() < 10.0 {
            let st = s.step(10.0).unwrap();
            for j in 0..=4 {
                let t = st.t0 + st.h * j as f64 / 4.0;
                let y = st.eval(t);
                assert!((y[0] - t.sin()).abs() < 1e-8, "t={t}");
            }
        }
    }

    #[test]
    fn positivity_is_preserved() {
        // Fast decay toward zero: explicit steps overshoot without control.
        let tol = Tolerances::new(1e-3, 1e-3);
        let mut s =
            Dopri5::new(|_, y: &[f64; 1]| Ok([-50.0 * y[0] - 1.0]), 0.0, [1.0], tol).unwrap();
        let mut hit_zero = false;
        while s.t() < 1.0 {
            match s.step(1.0) {
                Ok(_) => {}
                Err(_) => break,
            }
            assert!(s.y()[0] >= 0.0);
            hit_zero |= s.y()[0] == 0.0;
            if hit_zero {
                break;
            }
        }
        assert!(s.stats().min_component >= NEGATIVE_REJECT);
    }

    #[test]
    fn crossing_located() {
        let tol = Tolerances::new(1e-10, 1e-12);
        let mut s = Dopri5::new(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [0.0, 1.0], tol)
            .unwrap()
            .allow_negative();
        loop {
            let st = s.step(10.0).unwrap();
            if st.y0()[0] > 0.0 && st.y1()[0] <= 0.0 {
                let (t, _) = locate_crossing(&st, |y| y[0], 1e-12);
                assert!((t - std::f64::consts::PI).abs() < 1e-8);
                break;
            }
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let tol = Tolerances::new(1e-2, 1e-12);
        assert!(Dopri5::new(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], tol).is_err());
    }
}
