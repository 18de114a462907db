use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use crate::arrangement::FlatLattice;
use crate::error::{Error, Result};
use crate::linalg::Field;

/// A monic characteristic polynomial of degree k in alternating-sign form,
/// `t^k - c_1 t^(k-1) + c_2 t^(k-2) - ... ± c_k`, stored as the unsigned
/// coefficients `c_0 = 1, c_1, ..., c_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedCharPoly {
    coeffs: Vec<BigUint>,
}

impl SignedCharPoly {
    /// From unsigned coefficients `c_0..c_k`; `c_0` must be 1.
    pub fn new(coeffs: Vec<BigUint>) -> Result<Self> {
        match coeffs.first() {
            Some(c) if c.is_one() => Ok(SignedCharPoly { coeffs }),
            _ => Err(Error::Input("characteristic polynomial must be monic".into())),
        }
    }

    /// From the ordinary signed coefficients of `t^k, t^(k-1), ..., t^0`.
    /// Fails unless the signs alternate (zero is allowed anywhere).
    pub fn from_signed(signed: &[BigInt]) -> Result<Self> {
        let coeffs = signed
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let c = if i % 2 == 0 { s.clone() } else { -s };
                match c.sign() {
                    Sign::Minus => Err(Error::SignCondition { codim: i }),
                    _ => Ok(c.magnitude().clone()),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub(crate) fn from_lattice<F: Field>(lattice: &FlatLattice<F>) -> Result<Self> {
        let k = lattice.arrangement().k();
        let mut signed = vec![BigInt::zero(); k + 1];
        for (flat, &mu) in lattice.flats().iter().zip(lattice.mobius_values()) {
            let codim = flat.codim();
            let ok = if codim % 2 == 0 { mu > 0 } else { mu < 0 };
            if !ok {
                return Err(Error::SignCondition { codim });
            }
            signed[codim] += mu;
        }
        Self::from_signed(&signed)
    }

    /// Degree of the polynomial (the ambient dimension).
    pub fn k(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Unsigned coefficient `c_i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> BigUint {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Signed coefficients of `t^k, ..., t^0`.
    pub fn signed_coeffs(&self) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let c = BigInt::from(c.clone());
                if i % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect()
    }

    /// Exact value at an arbitrary integer.
    pub fn eval(&self, t: &BigInt) -> BigInt {
        // Horner on the signed coefficients
        self.signed_coeffs()
            .into_iter()
            .fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    /// Number of F_q-points off the arrangement: `chi(q)`.
    pub fn point_count(&self, q: u64) -> Result<BigInt> {
        if q < 1 {
            return Err(Error::Input(format!("field size q = {q} must be at least 1")));
        }
        Ok(self.eval(&BigInt::from(q)))
    }

    /// The coefficients read as cohomology dimensions in degrees 0..=k.
    pub fn betti_numbers(&self) -> Vec<BigUint> {
        self.coeffs.clone()
    }
}

impl fmt::Display for SignedCharPoly {
    /// Alternating-sign form, e.g. `t^3 - 4t^2 + 3t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.k();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let power = k - i;
            if first {
                if i % 2 == 1 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if i % 2 == 0 { '+' } else { '-' })?;
            }
            first = false;
            if !c.is_one() || power == 0 {
                write!(f, "{c}")?;
            }
            match power {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{power}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
