//! Classical RK4 time stepping over any vector-space state.
//!
//! Both the full-order vorticity field and reduced coefficient vectors step
//! through the same integrator, so the trait below captures just the
//! operations RK4 needs. Right-hand sides are fallible; divergence surfaces
//! as a typed error rather than silent non-finite values.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::scalar::Real;

/// Field max-abs beyond which integration aborts with a divergence error.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// State vector interface for the RK4 integrator.
pub trait OdeState<T: Real>: Clone {
    /// self + a * other, leaving self untouched.
    fn add_scaled(&self, a: T, other: &Self) -> Self;
    /// Largest absolute entry (0 for an empty state).
    fn max_abs(&self) -> T;
    /// True when every entry is finite.
    fn all_finite(&self) -> bool;
}

impl<T: Real> OdeState<T> for Field<T> {
    fn add_scaled(&self, a: T, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(a, other);
        out
    }

    fn max_abs(&self) -> T {
        Field::max_abs(self)
    }

    fn all_finite(&self) -> bool {
        Field::all_finite(self)
    }
}

impl<T: Real> OdeState<T> for Vec<T> {
    fn add_scaled(&self, a: T, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        self.iter().zip(other).map(|(x, y)| *x + a * *y).collect()
    }

    fn max_abs(&self) -> T {
        self.iter().fold(T::zero(), |m, v| {
            if v.abs() > m {
                v.abs()
            } else {
                m
            }
        })
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// One classical fourth-order Runge-Kutta step.
///
/// Each stage's slope is checked for finiteness; a non-finite slope aborts
/// with a divergence error naming the stage (1-4).
pub fn rk4_step<T, S, F>(state: &S, dt: T, mut rhs: F) -> Result<S>
where
    T: Real,
    S: OdeState<T>,
    F: FnMut(&S) -> Result<S>,
{
    let half = dt * T::of(0.5);
    let sixth = dt / T::of(6.0);

    let check = |k: &S, stage: u8| {
        if k.all_finite() {
            Ok(())
        } else {
            Err(Error::RkDiverged { stage })
        }
    };

    let k1 = rhs(state)?;
    check(&k1, 1)?;
    let k2 = rhs(&state.add_scaled(half, &k1))?;
    check(&k2, 2)?;
    let k3 = rhs(&state.add_scaled(half, &k2))?;
    check(&k3, 3)?;
    let k4 = rhs(&state.add_scaled(dt, &k3))?;
    check(&k4, 4)?;

    let two = T::of(2.0);
    let mut out = state.add_scaled(sixth, &k1);
    out = out.add_scaled(sixth * two, &k2);
    out = out.add_scaled(sixth * two, &k3);
    Ok(out.add_scaled(sixth, &k4))
}

/// Takes `steps` RK4 steps of size `dt`, aborting once the state magnitude
/// passes the blow-up threshold. `t0` stamps divergence errors with model
/// time.
pub fn advance<T, S, F>(state: S, t0: f64, dt: T, steps: usize, mut rhs: F) -> Result<S>
where
    T: Real,
    S: OdeState<T>,
    F: FnMut(&S) -> Result<S>,
{
    let threshold = T::of(BLOW_UP_THRESHOLD);
    let mut cur = state;
    for s in 0..steps {
        cur = rk4_step(&cur, dt, &mut rhs)?;
        let mag = cur.max_abs();
        if !(mag <= threshold) || !cur.all_finite() {
            return Err(Error::BlowUp {
                time: t0 + (s + 1) as f64 * dt.as_f64(),
                max_abs: mag.as_f64(),
                threshold: BLOW_UP_THRESHOLD,
            });
        }
    }
    Ok(cur)
}
