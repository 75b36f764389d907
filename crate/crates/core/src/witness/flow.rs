use crate::algebra::C64;

fn parity_theta(n: usize, theta: f64) -> f64 {
    if n % 2 == 1 {
        1.0
    } else {
        theta
    }
}

/// `e^{-2πiθ_n r}(n^{-1} e^{-2nπi r} + (n-1)/n)`, evaluated as written.
///
/// This is not the normalized trace of `[cycle(n), v_n(r)]`; see
/// [`flow_commutator_trace`] for that value.
pub fn closed_form_flow_trace(n: usize, theta: f64, r: f64) -> C64 {
    let theta_n = parity_theta(n, theta);
    let tau = std::f64::consts::TAU;
    let nf = n as f64;
    C64::from_polar(1.0, -tau * theta_n * r) * (C64::from_polar(1.0, -tau * nf * r) / nf + (nf - 1.0) / nf)
}

/// `τ([cycle(n), v_n(r)])` from the diagonal of the commutator:
/// `e^{-2πiθ_n r}(n^{-1} e^{2πiθ_n n r} + (n-1)/n)`.
///
/// Agrees with [`closed_form_flow_trace`] only when `e^{2πi(θ_n+1) n r} = 1`.
pub fn flow_commutator_trace(n: usize, theta: f64, r: f64) -> C64 {
    let theta_n = parity_theta(n, theta);
    let tau = std::f64::consts::TAU;
    let nf = n as f64;
    C64::from_polar(1.0, -tau * theta_n * r) * (C64::from_polar(1.0, tau * theta_n * nf * r) / nf + (nf - 1.0) / nf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::diagonal_flow;
    use crate::algebra::{commutator, cycle_unitary, ONE};
    use crate::groups::Real;
    use num_rational::Rational64;

    #[test]
    fn derived_formula_matches_matrices() {
        for n in 1..9 {
            let v = diagonal_flow(n, Real::Sqrt(2), Real::Rational(Rational64::new(1, 3)));
            let t = commutator(&cycle_unitary(n), &v).unwrap().normalized_trace();
            let c = flow_commutator_trace(n, 2f64.sqrt(), 1.0 / 3.0);
            assert!((t - c).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn closed_form_at_half_turn() {
        let c = closed_form_flow_trace(3, 1.0, 0.5);
        assert!((c - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((closed_form_flow_trace(5, 2f64.sqrt(), 0.0) - ONE).norm() < 1e-15);
        // [u_1, v_1] = 1 but the displayed formula gives e^{-4πi/3}
        assert!((closed_form_flow_trace(1, 1.0, 1.0 / 3.0) - ONE).norm() > 0.5);
    }
}
