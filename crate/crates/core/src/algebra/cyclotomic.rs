//! Exact arithmetic in cyclotomic fields `Q(zeta_n)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

use super::phase::Phase;

/// Integer coefficients of the n-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Phi_d with d a proper divisor of n
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = exact_divide(&num, &cyclotomic_polynomial(d));
        }
    }
    cache.lock().unwrap().insert(n, num.clone());
    num
}

fn exact_divide(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd] / lead;
        quot[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    quot
}

/// Element of `Q(zeta_n)`, stored reduced modulo the n-th cyclotomic polynomial.
///
/// The representation is canonical within a fixed field, so zero tests are exact.
/// Equality compares in the common field.
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    n: u64,
    coeffs: Vec<Rational64>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Cyclotomic { n: 1, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::rational(Rational64::one())
    }

    pub fn rational(r: Rational64) -> Self {
        let mut c = Cyclotomic { n: 1, coeffs: vec![r] };
        c.trim();
        c
    }

    /// `zeta_q^p` for an exact phase `p/q`.
    pub fn root_of_unity(phase: Rational64) -> Self {
        let q = *phase.denom() as u64;
        let p = phase.numer().mod_floor(phase.denom()) as usize;
        let mut coeffs = vec![Rational64::zero(); p + 1];
        coeffs[p] = Rational64::one();
        Self::reduce(q, coeffs)
    }

    pub fn from_phase(phase: &Phase) -> Option<Self> {
        match phase {
            Phase::Exact(r) => Some(Self::root_of_unity(*r)),
            Phase::Approx(_) => None,
        }
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    /// The exact phase when this element is a root of unity.
    pub fn as_root_of_unity(&self) -> Option<Phase> {
        let ph = Phase::of_complex(self.to_complex());
        // every root of unity in Q(zeta_n) is a 2n-th root
        let q = 2 * self.n.max(1) as i64;
        let cand = Phase::exact((ph.turns() * q as f64).round() as i64, q);
        (Self::from_phase(&cand)? == *self).then_some(cand)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.n = 1;
        }
    }

    fn reduce(n: u64, mut coeffs: Vec<Rational64>) -> Self {
        let phi = cyclotomic_polynomial(n);
        let deg = phi.len() - 1;
        // Phi_n is monic
        while coeffs.len() > deg {
            let top = coeffs.len() - 1;
            let c = coeffs[top];
            if !c.is_zero() {
                for (j, &p) in phi.iter().enumerate() {
                    coeffs[top - deg + j] -= c * Rational64::from_integer(p);
                }
            }
            coeffs.pop();
        }
        let mut out = Cyclotomic { n, coeffs };
        out.trim();
        out.shrink();
        out
    }

    /// Drop to the smallest field when only rationals remain.
    fn shrink(&mut self) {
        if self.coeffs.len() <= 1 {
            self.n = 1;
        }
    }

    /// Re-express in `Q(zeta_m)` where `n | m`.
    fn lift(&self, m: u64) -> Vec<Rational64> {
        if self.n == m {
            return self.coeffs.clone();
        }
        let step = (m / self.n) as usize;
        let mut out = vec![Rational64::zero(); (self.coeffs.len().saturating_sub(1)) * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            out[j * step] = *c;
        }
        out
    }

    fn common(&self, other: &Self) -> u64 {
        self.n.lcm(&other.n)
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.common(other);
        let mut a = self.lift(m);
        let b = other.lift(m);
        if b.len() > a.len() {
            a.resize(b.len(), Rational64::zero());
        }
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        Self::reduce(m, a)
    }

    pub fn neg(&self) -> Self {
        Cyclotomic { n: self.n, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let m = self.common(other);
        let a = self.lift(m);
        let b = other.lift(m);
        let mut out = vec![Rational64::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Self::reduce(m, out)
    }

    pub fn scale(&self, r: Rational64) -> Self {
        let mut out = Cyclotomic { n: self.n, coeffs: self.coeffs.iter().map(|c| c * r).collect() };
        out.trim();
        out
    }

    /// Complex conjugate, `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Self {
        let n = self.n as usize;
        if n <= 2 {
            return self.clone();
        }
        let mut out = vec![Rational64::zero(); n];
        for (j, c) in self.coeffs.iter().enumerate() {
            out[(n - j) % n] += c;
        }
        Self::reduce(self.n, out)
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = Phase::exact(j as i64, self.n as i64).to_complex();
            z += w * (*c.numer() as f64 / *c.denom() as f64);
        }
        z
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn sum_of_roots_vanishes() {
        for n in 2..13 {
            let mut s = Cyclotomic::zero();
            for j in 0..n {
                s = s.add(&Cyclotomic::root_of_unity(r(j, n)));
            }
            assert!(s.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn mixed_orders() {
        let w3 = Cyclotomic::root_of_unity(r(1, 3));
        let m1 = Cyclotomic::root_of_unity(r(1, 2));
        let w6 = Cyclotomic::root_of_unity(r(5, 6));
        assert_eq!(w3.mul(&m1), w6);
        assert_eq!(w3.conj(), Cyclotomic::root_of_unity(r(2, 3)));
        assert_eq!(w3.mul(&w3.conj()), Cyclotomic::one());
        assert_eq!(Cyclotomic::root_of_unity(r(2, 6)), w3);
        assert!((w6.to_complex() - Phase::exact(5, 6).to_complex()).norm() < 1e-15);
    }
}
