//! Constraint families as FI-CHA generator schemas.
//!
//! A schema lists finitely many generator forms `c_1 x_a1 + ... + c_r x_ar`.
//! Expanding it at size k places every generator on every injective choice
//! of r coordinates out of k, which makes the resulting family of
//! arrangements closed under coordinate permutations and under forgetting
//! trailing coordinates.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::binomial;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arrangement::{Arrangement, Hyperplane};
use crate::error::{Error, Result};
use crate::linalg::{Field, FieldSpec, Prime};

/// Generators with more slots than this are rejected; canonicalization
/// enumerates all slot permutations.
pub const MAX_ARITY: usize = 8;

/// A schema as written in a schema file: integer coefficients, interpreted
/// in the declared field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub name: String,
    #[serde(serialize_with = "ser_field", deserialize_with = "de_field")]
    pub p: FieldSpec,
    pub generators: Vec<Vec<i64>>,
    #[serde(default = "default_true")]
    pub ensure_distinct: bool,
}

fn default_true() -> bool {
    true
}

fn ser_field<S: Serializer>(field: &FieldSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    match field {
        FieldSpec::Prime(p) => s.serialize_u64(p.get()),
        FieldSpec::Generic => s.serialize_str("generic"),
    }
}

fn de_field<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<FieldSpec, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Str(String),
    }
    let parsed = match Raw::deserialize(d)? {
        Raw::Int(p) => FieldSpec::prime(p),
        Raw::Str(s) if s == "generic" => Ok(FieldSpec::Generic),
        Raw::Str(s) => Err(Error::Schema(format!("p must be a prime or \"generic\", got \"{s}\""))),
    };
    parsed.map_err(serde::de::Error::custom)
}

impl Schema {
    /// x + y + z = 0 over F_3, plus distinctness.
    pub fn set() -> Self {
        Schema {
            name: "set".into(),
            p: FieldSpec::prime(3).unwrap(),
            generators: vec![vec![1, -1], vec![1, 1, 1]],
            ensure_distinct: true,
        }
    }

    /// x + y = z over F_p, plus distinctness.
    pub fn sum_free(p: Prime) -> Self {
        Schema {
            name: format!("sumfree-{}", p.get()),
            p: FieldSpec::Prime(p),
            generators: vec![vec![1, -1], vec![1, 1, -1]],
            ensure_distinct: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// The same generators read in another field.
    pub fn over(&self, field: FieldSpec) -> Self {
        Schema {
            p: field,
            ..self.clone()
        }
    }

    /// Check the axioms and produce the typed schema. `field` must match
    /// `self.p`.
    pub fn validate_in<F: Field>(&self, field: F) -> Result<(GeneratorSchema<F>, ValidationReport)> {
        if field.spec() != self.p {
            return Err(Error::Mismatch(format!(
                "schema declares {}, validated in {}",
                self.p,
                field.spec()
            )));
        }
        let mut generators: Vec<GeneratorForm<F>> = Vec::new();
        let mut duplicates = 0;
        for (index, raw) in self.generators.iter().enumerate() {
            if raw.is_empty() {
                return Err(Error::EmptyGenerator(index));
            }
            if raw.len() > MAX_ARITY {
                return Err(Error::Schema(format!(
                    "generator {index} has arity {} > {MAX_ARITY}",
                    raw.len()
                )));
            }
            let coeffs: Vec<F::Elem> = raw.iter().map(|&c| field.from_i64(c)).collect();
            if coeffs.iter().any(|c| field.is_zero(c)) {
                return Err(Error::DegenerateGenerator {
                    index,
                    coeffs: raw.clone(),
                });
            }
            let g = GeneratorForm::canonical(&field, coeffs);
            if generators.contains(&g) {
                duplicates += 1;
            } else {
                generators.push(g);
            }
        }

        let difference = GeneratorForm::difference(&field);
        let axiom_a = if generators.contains(&difference) {
            AxiomA::Present
        } else if self.ensure_distinct {
            generators.insert(0, difference);
            AxiomA::AutoAdded
        } else {
            return Err(Error::MissingDifferenceGenerator(self.name.clone()));
        };
        if generators.is_empty() {
            return Err(Error::NoGenerators(self.name.clone()));
        }

        let report = ValidationReport {
            name: self.name.clone(),
            field: self.p,
            axiom_a,
            duplicates_dropped: duplicates,
            generators: generators.iter().map(|g| g.to_string()).collect(),
        };
        let schema = GeneratorSchema {
            field,
            name: self.name.clone(),
            generators,
        };
        Ok((schema, report))
    }
}

/// A generator `c_1 x_a1 + ... + c_r x_ar` with every coefficient nonzero,
/// stored as the lexicographically least scaled slot permutation, so
/// equivalent generators compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorForm<F: Field> {
    coeffs: Vec<F::Elem>,
}

impl<F: Field> GeneratorForm<F> {
    fn canonical(field: &F, coeffs: Vec<F::Elem>) -> Self {
        let coeffs = coeffs
            .iter()
            .permutations(coeffs.len())
            .map(|perm| {
                let inv = field.inv(perm[0]);
                perm.into_iter().map(|c| field.mul(c, &inv)).collect::<Vec<_>>()
            })
            .min()
            .unwrap_or_default();
        GeneratorForm { coeffs }
    }

    /// The generator x1 - x2 required by axiom (a).
    pub fn difference(field: &F) -> Self {
        Self::canonical(field, vec![field.one(), field.neg(&field.one())])
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    /// Sum of the coefficients. When zero, every translate of a solution
    /// is a solution.
    pub fn coefficient_sum(&self, field: &F) -> F::Elem {
        self.coeffs.iter().fold(field.zero(), |a, c| field.add(&a, c))
    }

    /// Number of distinct hyperplanes obtained by placing this generator
    /// on a fixed set of `arity` coordinates in every order.
    pub fn orbit_size(&self, field: &F) -> usize {
        let r = self.arity();
        self.coeffs
            .iter()
            .permutations(r)
            .map(|perm| Hyperplane::new(field, perm.into_iter().cloned().collect()).expect("nonzero coefficients"))
            .collect::<BTreeSet<_>>()
            .len()
    }
}

impl<F: Field> fmt::Display for GeneratorForm<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coeffs.iter().join(","))
    }
}

impl<F: Field> fmt::Debug for GeneratorForm<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A validated schema over a concrete field.
#[derive(Clone, Debug)]
pub struct GeneratorSchema<F: Field> {
    field: F,
    name: String,
    generators: Vec<GeneratorForm<F>>,
}

impl<F: Field> GeneratorSchema<F> {
    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[GeneratorForm<F>] {
        &self.generators
    }

    /// The arrangement A_k: every generator on every injection of its
    /// slots into {0..k}.
    pub fn expand(&self, k: usize) -> Arrangement<F> {
        let f = &self.field;
        let mut forms = BTreeSet::new();
        for g in &self.generators {
            if g.arity() > k {
                continue;
            }
            for slots in (0..k).permutations(g.arity()) {
                let mut form = vec![f.zero(); k];
                for (&pos, c) in slots.iter().zip(g.coeffs()) {
                    form[pos] = c.clone();
                }
                forms.insert(Hyperplane::new(f, form).expect("nonzero coefficients"));
            }
        }
        let forms = forms.into_iter().map(|h| h.form().to_vec()).collect();
        Arrangement::new(f.clone(), k, forms).expect("expanded forms are well formed")
    }

    /// Predicted |A_k| = sum over generators of C(k, arity) * orbit size.
    pub fn hyperplane_count_formula(&self, k: usize) -> BigUint {
        self.generators
            .iter()
            .filter(|g| g.arity() <= k)
            .map(|g| binomial(BigUint::from(k), BigUint::from(g.arity())) * BigUint::from(g.orbit_size(&self.field)))
            .sum()
    }

    /// Whether translating every point by a common vector preserves the
    /// constraints (all coefficient sums vanish).
    pub fn translation_invariant(&self) -> bool {
        self.generators
            .iter()
            .all(|g| self.field.is_zero(&g.coefficient_sum(&self.field)))
    }
}

/// How axiom (a) was satisfied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AxiomA {
    Present,
    AutoAdded,
}

/// Outcome of schema validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub name: String,
    pub field: FieldSpec,
    pub axiom_a: AxiomA,
    pub duplicates_dropped: usize,
    /// Canonical generators after reduction into the field.
    pub generators: Vec<String>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "schema `{}` over {}: valid", self.name, self.field)?;
        writeln!(f, "  generators: {}", self.generators.join(" "))?;
        match self.axiom_a {
            AxiomA::Present => writeln!(f, "  (a) difference generator x1 - x2 present")?,
            AxiomA::AutoAdded => writeln!(f, "  (a) difference generator x1 - x2 added (ensure_distinct)")?,
        }
        writeln!(
            f,
            "  (b) holds by construction: expansion ranges over all slot injections"
        )?;
        writeln!(
            f,
            "  (c) holds by construction: A_j is the part of A_k on the first j coordinates"
        )?;
        write!(f, "  (d) holds: {} generator(s)", self.generators.len())?;
        if self.duplicates_dropped > 0 {
            write!(f, ", {} equivalent duplicate(s) dropped", self.duplicates_dropped)?;
        }
        Ok(())
    }
}

/// Built-in families and schema files, as named on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Set,
    SumFree(Prime),
    Custom(PathBuf),
}

impl Family {
    pub fn schema(&self) -> Result<Schema> {
        match self {
            Family::Set => Ok(Schema::set()),
            Family::SumFree(p) => Ok(Schema::sum_free(*p)),
            Family::Custom(path) => Schema::load(path),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "set" => Ok(Family::Set),
            "sumfree-2" | "sumfree-5" | "sumfree-7" => {
                let p = s["sumfree-".len()..].parse().unwrap();
                Ok(Family::SumFree(Prime::new(p)?))
            }
            _ if Path::new(s).is_file() => Ok(Family::Custom(PathBuf::from(s))),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{PrimeField, Rationals};

    fn prime_field(p: u64) -> PrimeField {
        PrimeField::new(Prime::new(p).unwrap())
    }

    fn set_schema() -> GeneratorSchema<PrimeField> {
        Schema::set().validate_in(prime_field(3)).unwrap().0
    }

    #[test]
    fn set_validates() {
        let (s, report) = Schema::set().validate_in(prime_field(3)).unwrap();
        assert_eq!(report.axiom_a, AxiomA::Present);
        assert_eq!(s.generators().len(), 2);
        assert!(s.translation_invariant());
    }

    #[test]
    fn missing_difference_generator() {
        let schema = Schema {
            name: "sums".into(),
            p: FieldSpec::prime(3).unwrap(),
            generators: vec![vec![1, 1, 1]],
            ensure_distinct: false,
        };
        assert!(matches!(
            schema.validate_in(prime_field(3)),
            Err(Error::MissingDifferenceGenerator(_))
        ));
        let auto = Schema {
            ensure_distinct: true,
            ..schema
        };
        let (s, report) = auto.validate_in(prime_field(3)).unwrap();
        assert_eq!(report.axiom_a, AxiomA::AutoAdded);
        assert_eq!(s.expand(3).len(), 4);
    }

    #[test]
    fn reduction_mod_two() {
        // (1,1,-1) = (1,1,1) and (1,-1) = (1,1) mod 2; both nonzero
        let schema = Schema::sum_free(Prime::new(2).unwrap());
        let (s, report) = schema.validate_in(prime_field(2)).unwrap();
        assert_eq!(report.axiom_a, AxiomA::Present);
        assert_eq!(s.generators()[0].coeffs(), &[1, 1]);
        assert_eq!(s.generators()[1].coeffs(), &[1, 1, 1]);
    }

    #[test]
    fn degenerate_coefficient() {
        let schema = Schema {
            name: "bad".into(),
            p: FieldSpec::prime(3).unwrap(),
            generators: vec![vec![1, -1], vec![1, 3, 1]],
            ensure_distinct: true,
        };
        assert!(matches!(
            schema.validate_in(prime_field(3)),
            Err(Error::DegenerateGenerator { index: 1, .. })
        ));
    }

    #[test]
    fn equivalent_generators_deduplicate() {
        let schema = Schema {
            name: "dup".into(),
            p: FieldSpec::prime(5).unwrap(),
            generators: vec![vec![1, -1], vec![1, 1, -1], vec![-1, 1, 1], vec![2, 2, -2]],
            ensure_distinct: true,
        };
        let (s, report) = schema.validate_in(prime_field(5)).unwrap();
        assert_eq!(s.generators().len(), 2);
        assert_eq!(report.duplicates_dropped, 2);
    }

    #[test]
    fn expand_set() {
        let s = set_schema();
        let a2 = s.expand(2);
        assert_eq!(a2.len(), 1);
        assert_eq!(a2.hyperplanes()[0].form(), &[1, 2]);
        let a3 = s.expand(3);
        let forms: Vec<&[u64]> = a3.hyperplanes().iter().map(|h| h.form()).collect();
        assert_eq!(forms, vec![&[0, 1, 2][..], &[1, 0, 2], &[1, 1, 1], &[1, 2, 0]]);
        assert_eq!(s.expand(4).len(), 10);
        assert_eq!(s.expand(0).len(), 0);
        assert_eq!(s.expand(1).len(), 0);
    }

    #[test]
    fn count_formula() {
        let s = set_schema();
        assert_eq!(s.hyperplane_count_formula(5), BigUint::from(20u8));
        assert_eq!(s.hyperplane_count_formula(1), BigUint::from(0u8));
        let sf = Schema::sum_free(Prime::new(5).unwrap())
            .validate_in(prime_field(5))
            .unwrap()
            .0;
        assert_eq!(sf.hyperplane_count_formula(3), BigUint::from(6u8));
        assert_eq!(sf.expand(3).len(), 6);
        assert!(!sf.translation_invariant());
    }

    #[test]
    fn generic_field() {
        let (s, _) = Schema::set().over(FieldSpec::Generic).validate_in(Rationals).unwrap();
        assert_eq!(s.expand(3).len(), 4);
    }

    #[test]
    fn field_must_match() {
        assert!(matches!(
            Schema::set().validate_in(prime_field(5)),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn schema_json() {
        let s = Schema::from_json(r#"{"name":"set","p":3,"generators":[[1,-1],[1,1,1]]}"#).unwrap();
        assert_eq!(s, Schema::set());
        let g =
            Schema::from_json(r#"{"name":"g","p":"generic","generators":[[1,1,-1]],"ensure_distinct":false}"#).unwrap();
        assert_eq!(g.p, FieldSpec::Generic);
        assert!(!g.ensure_distinct);
        assert_eq!(Schema::from_json(&g.to_json()).unwrap(), g);
        assert!(Schema::from_json(r#"{"name":"x","p":4,"generators":[]}"#).is_err());
        assert!(Schema::from_json(r#"{"name":"x","p":"z","generators":[]}"#).is_err());
    }

    #[test]
    fn family_names() {
        assert_eq!("set".parse::<Family>().unwrap(), Family::Set);
        assert_eq!(
            "sumfree-7".parse::<Family>().unwrap(),
            Family::SumFree(Prime::new(7).unwrap())
        );
        assert!(matches!("sumfree-4".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(matches!("nope".parse::<Family>(), Err(Error::UnknownFamily(_))));
    }
}
