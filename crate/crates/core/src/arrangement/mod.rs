//! Central hyperplane arrangements, their lattices of flats, and
//! characteristic polynomials.

mod charpoly;
mod lattice;

pub use charpoly::SignedCharPoly;
pub use lattice::{Flat, FlatLattice, LatticeOptions};

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Field;

/// A linear hyperplane `{x : form · x = 0}`, scaled so the first nonzero
/// coefficient is 1. Scalar multiples of a form give equal hyperplanes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperplane<F: Field> {
    form: Vec<F::Elem>,
}

impl<F: Field> Hyperplane<F> {
    pub fn new(field: &F, form: Vec<F::Elem>) -> Result<Self> {
        let lead = form.iter().find(|x| !field.is_zero(x)).ok_or(Error::ZeroForm)?;
        let inv = field.inv(lead);
        let form = form.iter().map(|x| field.mul(x, &inv)).collect();
        Ok(Hyperplane { form })
    }

    pub fn form(&self) -> &[F::Elem] {
        &self.form
    }

    /// Support of the form: the coordinates with nonzero coefficient.
    pub fn support(&self, field: &F) -> Vec<usize> {
        self.form
            .iter()
            .enumerate()
            .filter(|(_, x)| !field.is_zero(x))
            .map(|(i, _)| i)
            .collect()
    }

    /// Evaluate the form at a point.
    pub fn eval(&self, field: &F, point: &[F::Elem]) -> F::Elem {
        self.form
            .iter()
            .zip(point)
            .fold(field.zero(), |acc, (c, x)| field.add(&acc, &field.mul(c, x)))
    }
}

impl<F: Field> fmt::Debug for Hyperplane<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.form).finish()
    }
}

/// A central arrangement in k-space: a deduplicated, sorted set of
/// hyperplanes through the origin.
#[derive(Clone, PartialEq, Eq)]
pub struct Arrangement<F: Field> {
    field: F,
    k: usize,
    hyperplanes: Vec<Hyperplane<F>>,
}

impl<F: Field> Arrangement<F> {
    /// Build from homogeneous linear forms of length `k`. Forms are scaled
    /// to canonical representatives and duplicates are dropped.
    pub fn new(field: F, k: usize, forms: Vec<Vec<F::Elem>>) -> Result<Self> {
        let mut hyperplanes = forms
            .into_iter()
            .map(|form| {
                if form.len() != k {
                    return Err(Error::RowLength {
                        expected: k,
                        found: form.len(),
                    });
                }
                Hyperplane::new(&field, form)
            })
            .collect::<Result<Vec<_>>>()?;
        hyperplanes.sort();
        hyperplanes.dedup();
        Ok(Arrangement { field, k, hyperplanes })
    }

    /// Build from equations `form · x = constant`. Any nonzero constant is
    /// rejected: only central arrangements are supported.
    pub fn from_equations(field: F, k: usize, equations: Vec<(Vec<F::Elem>, F::Elem)>) -> Result<Self> {
        let mut forms = Vec::with_capacity(equations.len());
        for (form, constant) in equations {
            if !field.is_zero(&constant) {
                return Err(Error::NonHomogeneous(constant.to_string()));
            }
            forms.push(form);
        }
        Self::new(field, k, forms)
    }

    pub fn from_i64_forms(field: F, k: usize, forms: &[&[i64]]) -> Result<Self> {
        let forms = forms
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::new(field, k, forms)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Ambient dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn hyperplanes(&self) -> &[Hyperplane<F>] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn contains(&self, h: &Hyperplane<F>) -> bool {
        self.hyperplanes.binary_search(h).is_ok()
    }

    /// Relabel coordinates: coordinate `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::Input(format!(
                "permutation of length {} applied to {}-space",
                perm.len(),
                self.k
            )));
        }
        let forms = self
            .hyperplanes
            .iter()
            .map(|h| {
                let mut out = vec![self.field.zero(); self.k];
                for (i, c) in h.form().iter().enumerate() {
                    out[perm[i]] = c.clone();
                }
                out
            })
            .collect();
        Self::new(self.field.clone(), self.k, forms)
    }

    /// Whether a point lies on none of the hyperplanes.
    pub fn avoids(&self, point: &[F::Elem]) -> bool {
        self.hyperplanes
            .iter()
            .all(|h| !self.field.is_zero(&h.eval(&self.field, point)))
    }
}

impl<F: Field> fmt::Debug for Arrangement<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Arrangement")
            .field("field", &self.field.spec())
            .field("k", &self.k)
            .field("hyperplanes", &self.hyperplanes)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Prime, PrimeField, Rationals};

    fn f3() -> PrimeField {
        PrimeField::new(Prime::new(3).unwrap())
    }

    #[test]
    fn scalar_multiples_collapse() {
        // x1 - x2 and x2 - x1 are the same hyperplane
        let a = Arrangement::from_i64_forms(f3(), 2, &[&[1, -1], &[-1, 1], &[2, 1]]).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.hyperplanes()[0].form(), &[1, 2]);
    }

    #[test]
    fn zero_form_rejected() {
        let err = Arrangement::from_i64_forms(f3(), 2, &[&[3, 0]]).unwrap_err();
        assert!(matches!(err, Error::ZeroForm));
    }

    #[test]
    fn affine_equation_rejected() {
        let q = Rationals;
        let eqs = vec![(vec![q.from_i64(1), q.from_i64(-1)], q.from_i64(1))];
        let err = Arrangement::from_equations(q, 2, eqs).unwrap_err();
        assert!(matches!(err, Error::NonHomogeneous(_)));
        let eqs = vec![(vec![q.from_i64(1), q.from_i64(-1)], q.from_i64(0))];
        assert_eq!(Arrangement::from_equations(q, 2, eqs).unwrap().len(), 1);
    }

    #[test]
    fn permutation_relabels() {
        let a = Arrangement::from_i64_forms(f3(), 3, &[&[1, 2, 0]]).unwrap();
        // (0,2,1) rescales to (0,1,2)
        let b = a.permuted(&[2, 1, 0]).unwrap();
        assert_eq!(b.hyperplanes()[0].form(), &[0, 1, 2]);
        let c = a.permuted(&[0, 2, 1]).unwrap();
        assert_eq!(c.hyperplanes()[0].form(), &[1, 0, 2]);
    }
}
