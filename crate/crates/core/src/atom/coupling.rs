//! Dipole coupling strengths between Zeeman sublevels.
//!
//! Angular momenta are passed doubled (`2j`, `2m`) so half-integers stay exact.

use super::{Sublevel, Term};
use crate::error::{Error, Result};

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ (Condon-Shortley phase) by
/// the Racah sum. All arguments are twice the physical value.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    // triangle rule with integer sums
    if j < (j1 - j2).abs() || j > j1 + j2 || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let prefactor = ((j + 1) as f64
        * factorial(h(j + j1 - j2))
        * factorial(h(j - j1 + j2))
        * factorial(h(j1 + j2 - j))
        / factorial(h(j1 + j2 + j) + 1))
        .sqrt();
    let norm = (factorial(h(j + m))
        * factorial(h(j - m))
        * factorial(h(j1 - m1))
        * factorial(h(j1 + m1))
        * factorial(h(j2 - m2))
        * factorial(h(j2 + m2)))
    .sqrt();

    let mut sum = 0.0;
    for k in 0..=h(j1 + j2 + j) {
        let args = [
            k,
            h(j1 + j2 - j) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(j - j2 + m1) + k,
            h(j - j1 - m2) + k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let denom: f64 = args.iter().map(|&a| factorial(a)).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    prefactor * norm * sum
}

/// Relative dipole amplitude for `lower → upper` absorbing a photon with
/// spherical component `q` (so `m_upper − m_lower = q`).
///
/// Normalized so that for every upper sublevel the squares summed over all
/// lower sublevels of one term and all `q` equal one.
pub fn coupling_coefficient(lower: Sublevel, upper: Sublevel, q: i32) -> Result<f64> {
    if !(-1..=1).contains(&q) {
        return Err(Error::domain(format!("polarization component q = {q}")));
    }
    lower.validate()?;
    upper.validate()?;
    let connected = upper.term == Term::P12 && matches!(lower.term, Term::S12 | Term::D32);
    if !connected {
        return Err(Error::domain(format!(
            "{:?} and {:?} are not dipole connected",
            lower.term, upper.term
        )));
    }
    Ok(clebsch_gordan(
        lower.term.twice_j(),
        lower.twice_m,
        2,
        2 * q,
        upper.term.twice_j(),
        upper.twice_m,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn selection_rule_zero() {
        let s = Sublevel::new(Term::S12, -1);
        let p = Sublevel::new(Term::P12, 1);
        assert_eq!(coupling_coefficient(s, p, 0).unwrap(), 0.0);
    }

    #[test]
    fn sigma_plus_half_to_half() {
        let s = Sublevel::new(Term::S12, -1);
        let p = Sublevel::new(Term::P12, 1);
        let c = coupling_coefficient(s, p, 1).unwrap();
        assert_abs_diff_eq!(c * c, 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn textbook_values() {
        // ⟨1/2 1/2; 1/2 -1/2 | 1 0⟩ = 1/√2
        assert_abs_diff_eq!(
            clebsch_gordan(1, 1, 1, -1, 2, 0),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
        // ⟨1/2 1/2; 1/2 -1/2 | 0 0⟩ = 1/√2
        assert_abs_diff_eq!(
            clebsch_gordan(1, 1, 1, -1, 0, 0),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
        // stretched state
        assert_abs_diff_eq!(clebsch_gordan(3, 3, 2, 2, 5, 5), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn not_connected() {
        let s = Sublevel::new(Term::S12, 1);
        let d = Sublevel::new(Term::D32, 1);
        assert!(coupling_coefficient(s, d, 0).is_err());
        assert!(coupling_coefficient(Sublevel::new(Term::P12, 1), s, 0).is_err());
    }

    #[test]
    fn bad_q() {
        let s = Sublevel::new(Term::S12, -1);
        let p = Sublevel::new(Term::P12, 1);
        assert!(coupling_coefficient(s, p, 2).is_err());
    }
}
