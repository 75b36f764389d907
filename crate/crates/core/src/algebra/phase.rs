use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// A point of the unit circle written in turns, `e^{2 pi i t}` with `t` in `[0, 1)`.
///
/// Rational turns are kept exact; everything else is a float.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Phase {
    Exact(#[serde(serialize_with = "ser_rational")] Rational64),
    Approx(f64),
}

fn ser_rational<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn wrap_rational(r: Rational64) -> Rational64 {
    r - r.floor()
}

fn wrap_float(t: f64) -> f64 {
    let w = t - t.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl Phase {
    pub const ONE: Phase = Phase::Exact(Rational64::new_raw(0, 1));

    pub fn exact(p: i64, q: i64) -> Phase {
        Phase::Exact(wrap_rational(Rational64::new(p, q)))
    }

    pub fn rational(r: Rational64) -> Phase {
        Phase::Exact(wrap_rational(r))
    }

    pub fn approx(t: f64) -> Phase {
        Phase::Approx(wrap_float(t))
    }

    /// Phase of a nonzero complex number.
    pub fn of_complex(z: Complex64) -> Phase {
        Phase::approx(z.arg() / std::f64::consts::TAU)
    }

    pub fn turns(&self) -> f64 {
        match self {
            Phase::Exact(r) => r.to_f64().unwrap_or(0.0),
            Phase::Approx(t) => *t,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Phase::Exact(_))
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Phase::Exact(r) => {
                let (p, q) = (*r.numer(), *r.denom());
                // hit the obvious points exactly
                match (p * 4).checked_rem(q) {
                    Some(0) => match (4 * p / q) % 4 {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    },
                    _ => Complex64::from_polar(1.0, std::f64::consts::TAU * self.turns()),
                }
            }
            Phase::Approx(t) => Complex64::from_polar(1.0, std::f64::consts::TAU * t),
        }
    }

    pub fn add(&self, other: &Phase) -> Phase {
        match (self, other) {
            (Phase::Exact(a), Phase::Exact(b)) => Phase::Exact(wrap_rational(a + b)),
            _ => Phase::approx(self.turns() + other.turns()),
        }
    }

    pub fn neg(&self) -> Phase {
        match self {
            Phase::Exact(a) => Phase::Exact(wrap_rational(-a)),
            Phase::Approx(t) => Phase::approx(-t),
        }
    }

    pub fn times(&self, m: i64) -> Phase {
        match self {
            Phase::Exact(a) => Phase::Exact(wrap_rational(a * Rational64::from_integer(m))),
            Phase::Approx(t) => Phase::approx(t * m as f64),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Phase::Exact(a) => a.is_zero(),
            Phase::Approx(t) => *t == 0.0,
        }
    }

    /// Distance on the circle measured in turns, in `[0, 1/2]`.
    pub fn distance(&self, other: &Phase) -> f64 {
        let d = (self.turns() - other.turns()).abs();
        d.min(1.0 - d)
    }

    /// Multiplicative order when exact, `None` for float phases.
    pub fn order(&self) -> Option<u64> {
        match self {
            Phase::Exact(a) => Some(*a.denom() as u64),
            Phase::Approx(_) => None,
        }
    }

    /// Index `j` with `self` equal (or within `tol` turns) to `j/k`.
    pub fn root_class(&self, k: u64, tol: f64) -> Option<u64> {
        match self {
            Phase::Exact(a) => {
                let scaled = a * Rational64::from_integer(k as i64);
                scaled.is_integer().then(|| scaled.to_integer().mod_floor(&(k as i64)) as u64)
            }
            Phase::Approx(t) => {
                let s = t * k as f64;
                let j = s.round();
                ((s - j).abs() <= tol * k as f64).then(|| (j as i64).mod_floor(&(k as i64)) as u64)
            }
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Exact(r) => write!(f, "ph({}/{})", r.numer(), r.denom()),
            Phase::Approx(t) => write!(f, "ph({t:.16e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_wraps() {
        let a = Phase::exact(2, 3);
        let b = Phase::exact(1, 2);
        assert_eq!(a.add(&b), Phase::exact(1, 6));
        assert_eq!(a.neg(), Phase::exact(1, 3));
        assert_eq!(a.times(3), Phase::ONE);
        assert_eq!(Phase::exact(-1, 4).order(), Some(4));
    }

    #[test]
    fn quarter_turns_are_exact_in_floating_point() {
        assert_eq!(Phase::exact(1, 2).to_complex(), Complex64::new(-1.0, 0.0));
        assert_eq!(Phase::exact(3, 4).to_complex(), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn root_classes() {
        assert_eq!(Phase::exact(2, 3).root_class(6, 0.0), Some(4));
        assert_eq!(Phase::exact(1, 4).root_class(6, 0.0), None);
        assert_eq!(Phase::approx(0.5 + 1e-13).root_class(2, 1e-10), Some(1));
        assert_eq!(Phase::approx(0.999_999_999_999).root_class(3, 1e-10), Some(0));
    }
}
