//! Morse and Poincare polynomials of a closed orientable surface.

use serde::{Deserialize, Serialize};

/// Coefficients m0 + m1 t + m2 t^2: counts of minima, saddles, maxima.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MorsePolynomial(pub [u32; 3]);

/// Coefficients b0 + b1 t + b2 t^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PoincarePolynomial(pub [u32; 3]);

impl PoincarePolynomial {
    /// 1 + 2g t + t^2 for the closed orientable surface of genus g.
    pub fn of_genus(g: u32) -> Self {
        PoincarePolynomial([1, 2 * g, 1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvalidReason {
    /// No minimum or no maximum was detected.
    Degenerate,
    NegativeB1,
    OddB1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiOne {
    pub value: i64,
    pub reason: Option<InvalidReason>,
}

impl BettiOne {
    pub fn is_valid(&self) -> bool {
        self.reason.is_none()
    }
}

pub fn morse_polynomial(counts: [u32; 3]) -> MorsePolynomial {
    MorsePolynomial(counts)
}

/// b1 from the Morse relations with b0 = b2 = 1.
pub fn betti_one(m: &MorsePolynomial) -> BettiOne {
    let [m0, m1, m2] = m.0.map(i64::from);
    let value = 2 - m0 + m1 - m2;
    let reason = if value < 0 {
        Some(InvalidReason::NegativeB1)
    } else if value % 2 != 0 {
        Some(InvalidReason::OddB1)
    } else {
        None
    };
    BettiOne { value, reason }
}

pub fn genus_estimate(b1: &BettiOne) -> Result<u32, InvalidReason> {
    match b1.reason {
        Some(r) => Err(r),
        None => Ok((b1.value / 2) as u32),
    }
}

pub fn euler_characteristic(m: &MorsePolynomial) -> i64 {
    let [m0, m1, m2] = m.0.map(i64::from);
    m0 - m1 + m2
}

/// m_k >= b_k for every k.
pub fn weak_inequality(m: &MorsePolynomial, p: &PoincarePolynomial) -> bool {
    m.0.iter().zip(p.0.iter()).all(|(a, b)| a >= b)
}

/// Solve M - P = (1 + t) Q for Q = q0 + q1 t with non-negative coefficients.
/// `None` when no such Q exists.
pub fn strong_inequality_q(m: &MorsePolynomial, p: &PoincarePolynomial) -> Option<[u32; 2]> {
    let d: Vec<i64> = (0..3).map(|k| m.0[k] as i64 - p.0[k] as i64).collect();
    let q0 = d[0];
    let q1 = d[1] - q0;
    if q0 < 0 || q1 < 0 || d[2] != q1 {
        return None;
    }
    Some([q0 as u32, q1 as u32])
}

/// No two consecutive non-zero coefficients, which forces a perfect function.
pub fn is_perfect_lacunary(m: &MorsePolynomial) -> bool {
    let [m0, m1, m2] = m.0;
    (m0 == 0 || m1 == 0) && (m1 == 0 || m2 == 0)
}
