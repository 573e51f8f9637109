//! Dormand–Prince 5(4) integrator for two-component systems, with the
//! classic fourth-order continuous extension.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) type State<T> = [T; 2];

/// One accepted step together with its dense-output coefficients.
#[derive(Debug, Clone)]
pub(crate) struct DenseStep<T> {
    pub t0: T,
    pub t1: T,
    pub y0: State<T>,
    pub y1: State<T>,
    /// f(t1, y1)
    rcont: [State<T>; 5],
}

impl<T: Scalar> DenseStep<T> {
    pub fn eval(&self, t: T) -> State<T> {
        let h = self.t1 - self.t0;
        let theta = (t - self.t0) / h;
        let theta1 = T::one() - theta;
        let r = &self.rcont;
        let mut out = [T::zero(); 2];
        for (i, o) in out.iter_mut().enumerate() {
            *o = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }

    /// Whether `t` lies in the closed step interval, regardless of direction.
    pub fn contains(&self, t: T) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        t >= lo && t <= hi
    }
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub h_max: T,
    pub max_steps: usize,
}

pub(crate) struct Finish<T> {
    pub y: State<T>,
}

struct Tableau<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    e: [T; 7],
    d: [T; 7],
}

impl<T: Scalar> Tableau<T> {
    fn new() -> Self {
        let l = T::lit;
        let z = T::zero();
        Self {
            c: [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), l(1.0), l(1.0)],
            a: [
                [z; 6],
                [l(0.2), z, z, z, z, z],
                [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
                [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
                [
                    l(19372.0 / 6561.0),
                    l(-25360.0 / 2187.0),
                    l(64448.0 / 6561.0),
                    l(-212.0 / 729.0),
                    z,
                    z,
                ],
                [
                    l(9017.0 / 3168.0),
                    l(-355.0 / 33.0),
                    l(46732.0 / 5247.0),
                    l(49.0 / 176.0),
                    l(-5103.0 / 18656.0),
                    z,
                ],
                [
                    l(35.0 / 384.0),
                    z,
                    l(500.0 / 1113.0),
                    l(125.0 / 192.0),
                    l(-2187.0 / 6784.0),
                    l(11.0 / 84.0),
                ],
            ],
            e: [
                l(71.0 / 57600.0),
                z,
                l(-71.0 / 16695.0),
                l(71.0 / 1920.0),
                l(-17253.0 / 339200.0),
                l(22.0 / 525.0),
                l(-1.0 / 40.0),
            ],
            d: [
                l(-12715105075.0 / 11282082432.0),
                z,
                l(87487479700.0 / 32700410799.0),
                l(-10690763975.0 / 1880347072.0),
                l(701980252875.0 / 199316789632.0),
                l(-1453857185.0 / 822651844.0),
                l(69997945.0 / 29380423.0),
            ],
        }
    }
}

impl<T: Scalar> Dopri5<T> {
    /// Integrates from `t0` towards `t_end` (either direction), handing every
    /// accepted step to `on_step`. Stops early when the callback says so.
    pub fn integrate<F, C>(
        &self,
        f: F,
        t0: T,
        y0: State<T>,
        t_end: T,
        mut on_step: C,
    ) -> Result<Finish<T>>
    where
        F: Fn(T, &State<T>) -> Result<State<T>>,
        C: FnMut(&DenseStep<T>) -> Flow,
    {
        let tab = Tableau::<T>::new();
        let span = t_end - t0;
        let dir = if span >= T::zero() { T::one() } else { -T::one() };
        let mut t = t0;
        let mut y = y0;
        if span == T::zero() {
            return Ok(Finish { y });
        }
        let h_max = self.h_max.min(span.abs());
        let mut h = (T::lit(1e-4) * (T::one() + t0.abs())).min(h_max) * dir;
        let h_floor = T::epsilon() * T::lit(16.0);
        let mut k: [State<T>; 7] = [[T::zero(); 2]; 7];
        k[0] = f(t, &y)?;
        let mut steps = 0usize;
        let mut rejected_last = false;

        loop {
            if steps >= self.max_steps {
                return Err(Error::Integration {
                    radius: t.as_f64(),
                    reason: format!("step budget of {} exhausted", self.max_steps),
                });
            }
            let remaining = t_end - t;
            if remaining * dir <= T::zero() {
                return Ok(Finish { y });
            }
            if (h * dir) > remaining * dir {
                h = remaining;
            }

            for s in 1..7 {
                let mut ys = y;
                for (i, yi) in ys.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for j in 0..s {
                        acc += tab.a[s][j] * k[j][i];
                    }
                    *yi += h * acc;
                }
                k[s] = f(t + tab.c[s] * h, &ys)?;
            }
            // stage 7 is evaluated at the 5th-order solution (FSAL)
            let mut y_new = y;
            for (i, yi) in y_new.iter_mut().enumerate() {
                let mut acc = T::zero();
                for j in 0..6 {
                    acc += tab.a[6][j] * k[j][i];
                }
                *yi += h * acc;
            }
            let mut err_sq = T::zero();
            for i in 0..2 {
                let mut e = T::zero();
                for j in 0..7 {
                    e += tab.e[j] * k[j][i];
                }
                e = e * h;
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / T::lit(2.0)).sqrt();
            if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                h = h * T::lit(0.25);
                if h.abs() < h_floor * (T::one() + t.abs()) {
                    return Err(Error::Integration {
                        radius: t.as_f64(),
                        reason: "non-finite state".into(),
                    });
                }
                rejected_last = true;
                continue;
            }

            let fac = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
            };

            if err <= T::one() {
                let t_new = t + h;
                let mut rcont = [[T::zero(); 2]; 5];
                for i in 0..2 {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k[0][i] - ydiff;
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k[6][i] - bspl;
                    let mut d = T::zero();
                    for j in 0..7 {
                        d += tab.d[j] * k[j][i];
                    }
                    rcont[4][i] = h * d;
                }
                let step = DenseStep {
                    t0: t,
                    t1: t_new,
                    y0: y,
                    y1: y_new,
                    rcont,
                };
                steps += 1;
                t = t_new;
                y = y_new;
                k[0] = k[6];
                if let Flow::Stop = on_step(&step) {
                    return Ok(Finish { y });
                }
                let grow = if rejected_last { fac.min(T::one()) } else { fac };
                rejected_last = false;
                h = h * grow;
                if h.abs() > h_max {
                    h = h_max * dir;
                }
            } else {
                rejected_last = true;
                h = h * fac.min(T::one());
                if h.abs() < h_floor * (T::one() + t.abs()) {
                    return Err(Error::Integration {
                        radius: t.as_f64(),
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
    }
}

/// Bisection on the dense output of a step for the first zero of `g`.
/// Requires `g(t0)` and `g(t1)` of opposite signs (or `g(t1) == 0`).
pub(crate) fn locate_root<T: Scalar, G>(step: &DenseStep<T>, g: G) -> T
where
    G: Fn(&State<T>) -> T,
{
    let mut a = step.t0;
    let mut b = step.t1;
    let ga = g(&step.y0);
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid == a || mid == b {
            break;
        }
        let gm = g(&step.eval(mid));
        if (gm > T::zero()) == (ga > T::zero()) && gm != T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver() -> Dopri5<f64> {
        Dopri5 {
            rtol: 1e-11,
            atol: 1e-13,
            h_max: 0.5,
            max_steps: 100_000,
        }
    }

    #[test]
    fn harmonic_oscillator_forward_and_back() {
        let f = |_t: f64, y: &State<f64>| Ok([y[1], -y[0]]);
        let end = solver()
            .integrate(f, 0.0, [1.0, 0.0], 10.0, |_| Flow::Continue)
            .unwrap();
        assert!((end.y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((end.y[1] + 10f64.sin()).abs() < 1e-9);
        let back = solver()
            .integrate(f, 10.0, end.y, 0.0, |_| Flow::Continue)
            .unwrap();
        assert!((back.y[0] - 1.0).abs() < 1e-9);
        assert!(back.y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_exact_solution_inside_steps() {
        let f = |_t: f64, y: &State<f64>| Ok([y[1], -y[0]]);
        let mut worst: f64 = 0.0;
        solver()
            .integrate(f, 0.0, [1.0, 0.0], 6.0, |s| {
                for j in 1..4 {
                    let t = s.t0 + (s.t1 - s.t0) * j as f64 / 4.0;
                    let y = s.eval(t);
                    worst = worst.max((y[0] - t.cos()).abs());
                }
                Flow::Continue
            })
            .unwrap();
        assert!(worst < 1e-8, "dense output error {worst}");
    }

    #[test]
    fn root_location_on_dense_output() {
        let f = |_t: f64, y: &State<f64>| Ok([y[1], -y[0]]);
        let mut root = None;
        solver()
            .integrate(f, 0.0, [1.0, 0.0], 3.0, |s| {
                if s.y1[0] <= 0.0 {
                    root = Some(locate_root(s, |y| y[0]));
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            })
            .unwrap();
        assert!((root.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let f = |t: f64, _y: &State<f64>| {
            if t > 1.0 {
                Err(Error::Domain("blow-up".into()))
            } else {
                Ok([1.0, 0.0])
            }
        };
        assert!(solver()
            .integrate(f, 0.0, [0.0, 0.0], 2.0, |_| Flow::Continue)
            .is_err());
    }
}
