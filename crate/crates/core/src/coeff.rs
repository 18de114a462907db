//! Coefficient sequences `c_i(k)` across k, fitted as integer-valued
//! polynomials in the binomial basis `C(k, j)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arrangement::{FlatLattice, LatticeOptions, SignedCharPoly};
use crate::error::{Error, Result};
use crate::family::GeneratorSchema;
use crate::linalg::{Field, FieldSpec};

/// `c_i(k)` for k = 0, 1, ..., K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffSeries {
    pub i: usize,
    pub field: FieldSpec,
    pub values: Vec<BigUint>,
}

impl CoeffSeries {
    /// Largest k covered.
    pub fn k_max(&self) -> Option<usize> {
        self.values.len().checked_sub(1)
    }

    pub fn value(&self, k: usize) -> Option<&BigUint> {
        self.values.get(k)
    }

    fn truncated(&self, k_max: usize) -> CoeffSeries {
        CoeffSeries {
            values: self.values[..=k_max.min(self.values.len() - 1)].to_vec(),
            ..self.clone()
        }
    }
}

/// Pull the i-th unsigned coefficient out of each polynomial. The keys
/// must be exactly 0..=K.
pub fn extract_series(charpolys: &BTreeMap<usize, SignedCharPoly>, i: usize, field: FieldSpec) -> Result<CoeffSeries> {
    let mut values = Vec::with_capacity(charpolys.len());
    for (expected, (&k, chi)) in charpolys.iter().enumerate() {
        if k != expected {
            return Err(Error::Input(format!(
                "characteristic polynomials must cover k = 0, 1, 2, ...; k = {expected} is missing"
            )));
        }
        if chi.k() != k {
            return Err(Error::Input(format!("polynomial at k = {k} has degree {}", chi.k())));
        }
        values.push(chi.coeff(i));
    }
    Ok(CoeffSeries { i, field, values })
}

/// `P(k) = sum_j a_j C(k, j)` with integer `a_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BinomialPoly {
    coeffs: Vec<BigInt>,
}

impl BinomialPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = BinomialPoly { coeffs };
        while p.coeffs.last().is_some_and(|c| c.is_zero()) {
            p.coeffs.pop();
        }
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `a_j`, zero past the degree.
    pub fn coeff(&self, j: usize) -> BigInt {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, k: usize) -> BigInt {
        let k = BigUint::from(k);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * BigInt::from(binomial(k.clone(), BigUint::from(j))))
            .sum()
    }

    /// Monomial coefficients `b_0, b_1, ...` of `sum_d b_d k^d`.
    pub fn to_monomial(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.coeffs.len()];
        // falling factorial k (k-1) ... (k-j+1), built up in integer coefficients
        let mut falling: Vec<BigInt> = vec![BigInt::one()];
        let mut fact = BigInt::one();
        for (j, a) in self.coeffs.iter().enumerate() {
            if j > 0 {
                fact *= j;
                let shift = BigInt::from(j - 1);
                let mut next = vec![BigInt::zero(); falling.len() + 1];
                for (d, c) in falling.iter().enumerate() {
                    next[d + 1] += c;
                    next[d] -= c * &shift;
                }
                falling = next;
            }
            for (d, c) in falling.iter().enumerate() {
                out[d] += BigRational::new(a * c, fact.clone());
            }
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    /// Inverse of [`to_monomial`](Self::to_monomial). Fails when the
    /// polynomial is not integer-valued.
    pub fn from_monomial(monomial: &[BigRational]) -> Result<Self> {
        let values: Vec<BigRational> = (0..monomial.len())
            .map(|k| {
                let k = BigRational::from_integer(BigInt::from(k));
                monomial.iter().rev().fold(BigRational::zero(), |acc, b| acc * &k + b)
            })
            .collect();
        let diffs = forward_differences(values);
        let coeffs = diffs
            .into_iter()
            .map(|d| {
                if d.is_integer() {
                    Ok(d.to_integer())
                } else {
                    Err(Error::Input(format!(
                        "polynomial is not integer-valued (difference {d})"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

impl fmt::Display for BinomialPoly {
    /// `C(k,2) + C(k,3)`, `1`, `2C(k,3) - C(k,4)`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mag = a.abs();
            if first {
                if a.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if a.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "C(k,{j})")?,
                (_, false) => write!(f, "{mag}C(k,{j})")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `Δ^j v (0)` for j = 0..len.
fn forward_differences<T>(mut row: Vec<T>) -> Vec<T>
where
    T: Clone + for<'a> std::ops::Sub<&'a T, Output = T>,
{
    let mut out = Vec::with_capacity(row.len());
    while let Some(head) = row.first() {
        out.push(head.clone());
        row = row.windows(2).map(|w| w[1].clone() - &w[0]).collect();
    }
    out
}

/// Fit `a_0..a_max_degree` by forward differences at k = 0 and demand an
/// exact match at every supplied k.
pub fn fit_binomial(series: &CoeffSeries, max_degree: usize) -> Result<BinomialPoly> {
    let needed = max_degree + 1;
    if series.values.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            available: series.values.len(),
        });
    }
    let head: Vec<BigInt> = series.values[..needed].iter().cloned().map(BigInt::from).collect();
    let poly = BinomialPoly::new(forward_differences(head));
    for (k, v) in series.values.iter().enumerate() {
        let fitted = poly.eval(k);
        if fitted != BigInt::from(v.clone()) {
            return Err(Error::DegreeBound {
                max_degree,
                k,
                expected: v.to_string(),
                fitted: fitted.to_string(),
            });
        }
    }
    Ok(poly)
}

/// The hand-computed expansions published alongside the polynomiality
/// result: `c_0 = 1`, `c_1 = C(k,2) + C(k,3)`, and
/// `c_2 = 2C(k,3) + 15C(k,4) + 25C(k,5) + 10C(k,6)`.
pub fn reference_expansion(i: usize) -> Option<BinomialPoly> {
    match i {
        0 => Some(BinomialPoly::from_i64(&[1])),
        1 => Some(BinomialPoly::from_i64(&[0, 0, 1, 1])),
        2 => Some(BinomialPoly::from_i64(&[0, 0, 0, 2, 15, 25, 10])),
        _ => None,
    }
}

/// Characteristic polynomials of `A_k` for each requested k, built in
/// parallel.
pub fn char_poly_series<F: Field>(
    schema: &GeneratorSchema<F>,
    ks: impl IntoIterator<Item = usize>,
    opts: LatticeOptions,
) -> Result<BTreeMap<usize, SignedCharPoly>> {
    let ks: Vec<usize> = ks.into_iter().collect();
    ks.into_par_iter()
        .map(|k| {
            let lattice = FlatLattice::build_with(&schema.expand(k), opts)?;
            Ok((k, lattice.char_poly()?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub k: usize,
    pub predicted: BigInt,
    pub actual: BigUint,
}

impl Prediction {
    pub fn matches(&self) -> bool {
        self.predicted == BigInt::from(self.actual.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermDiff {
    pub j: usize,
    pub computed: BigInt,
    pub reference: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueDiff {
    pub k: usize,
    pub computed: BigUint,
    pub reference: BigInt,
}

/// Term-by-term and value-by-value comparison against a reference
/// expansion. Informational only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub reference: BinomialPoly,
    pub terms: Vec<TermDiff>,
    pub values: Vec<ValueDiff>,
}

impl Comparison {
    pub fn new(fitted: &BinomialPoly, series: &CoeffSeries, reference: BinomialPoly) -> Self {
        let width = fitted.coeffs().len().max(reference.coeffs().len());
        let terms = (0..width)
            .map(|j| TermDiff {
                j,
                computed: fitted.coeff(j),
                reference: reference.coeff(j),
            })
            .collect();
        let values = series
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| ValueDiff {
                k,
                computed: v.clone(),
                reference: reference.eval(k),
            })
            .collect();
        Comparison {
            reference,
            terms,
            values,
        }
    }

    pub fn agrees(&self) -> bool {
        self.terms.iter().all(|t| t.computed == t.reference)
    }

    /// Smallest k where the computed value and the reference differ.
    pub fn first_disagreement(&self) -> Option<usize> {
        self.values
            .iter()
            .find(|v| BigInt::from(v.computed.clone()) != v.reference)
            .map(|v| v.k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitReport {
    /// The full series, k = 0..=holdout.
    pub series: CoeffSeries,
    pub fitted: BinomialPoly,
    pub max_degree_allowed: usize,
    pub k_fit_max: usize,
    pub holdout_k: usize,
    /// One per k in (k_fit_max, holdout_k].
    pub predictions: Vec<Prediction>,
    pub comparison: Option<Comparison>,
}

impl FitReport {
    pub fn holdout_match(&self) -> bool {
        self.predictions.iter().all(Prediction::matches)
    }

    pub fn degree_within_bound(&self) -> bool {
        self.fitted.degree().is_none_or(|d| d <= self.max_degree_allowed)
    }
}

/// Fit `c_i(k)` on k = 0..=k_fit_max with degree at most 3i, then check the
/// fit predicts every k up to `holdout` exactly.
pub fn fit_and_verify<F: Field>(
    schema: &GeneratorSchema<F>,
    i: usize,
    k_fit_max: usize,
    holdout: usize,
    reference: Option<BinomialPoly>,
    opts: LatticeOptions,
) -> Result<FitReport> {
    if holdout <= k_fit_max {
        return Err(Error::Input(format!(
            "holdout k = {holdout} must exceed the largest fitted k = {k_fit_max}"
        )));
    }
    let charpolys = char_poly_series(schema, 0..=holdout, opts)?;
    let series = extract_series(&charpolys, i, schema.field().spec())?;
    let max_degree = 3 * i;
    let fitted = fit_binomial(&series.truncated(k_fit_max), max_degree)?;
    let predictions = ((k_fit_max + 1)..=holdout)
        .map(|k| Prediction {
            k,
            predicted: fitted.eval(k),
            actual: series.values[k].clone(),
        })
        .collect();
    let comparison = reference.map(|r| Comparison::new(&fitted, &series, r));
    Ok(FitReport {
        series,
        fitted,
        max_degree_allowed: max_degree,
        k_fit_max,
        holdout_k: holdout,
        predictions,
        comparison,
    })
}
