//! Command-line surface: argument definitions, the commands themselves,
//! and report rendering. The `setfree` binary is a thin wrapper around
//! [`run`].
//!
//! Exit codes: 0 success, 1 a mathematical cross-check failed, 2 invalid
//! input, 3 work budget exceeded.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arrangement::{FlatLattice, LatticeOptions, SignedCharPoly};
use crate::coeff::{fit_and_verify, reference_expansion, FitReport};
use crate::error::{Error, Result};
use crate::family::{Family, GeneratorSchema, Schema};
use crate::linalg::{Field, FieldSpec, PrimeField, Rationals};
use crate::oracle::{count_avoiders, estimate_probability, CountMode, CountQuery};

#[derive(Debug, Parser)]
#[command(
    name = "setfree",
    version,
    about = "Count SET-free and constraint-avoiding subsets of F_p^n exactly"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Elementary-step budget for lattice builds and enumeration.
    #[arg(long, global = true, default_value_t = crate::DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Built-in family (set, sumfree-2, sumfree-5, sumfree-7) or a schema file.
    #[arg(long, default_value = "set")]
    pub family: String,
    /// Coefficient field: a prime, or `generic` for the rationals.
    /// Defaults to the family's own field.
    #[arg(long = "char")]
    pub field: Option<String>,
}

impl FamilyArgs {
    pub fn schema(&self) -> Result<Schema> {
        let schema = self.family.parse::<Family>()?.schema()?;
        match &self.field {
            Some(f) => Ok(schema.over(f.parse()?)),
            None => Ok(schema),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic polynomial of A_k and lattice statistics.
    Chi {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        k: usize,
    },
    /// Exact number of avoiding k-subsets of F_p^n by enumeration.
    Count {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, conflicts_with = "unordered")]
        ordered: bool,
        #[arg(long)]
        unordered: bool,
        /// Also evaluate chi(p^n) from the lattice; exit 1 on mismatch.
        #[arg(long)]
        verify: bool,
    },
    /// Fit c_i(k) in the binomial basis and check it on a holdout k.
    Coeffs {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        i: usize,
        /// Largest k used for fitting.
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// k used only for prediction.
        #[arg(long, default_value_t = 7)]
        holdout: usize,
        /// Compare with the published hand-computed expansion (i <= 2).
        #[arg(long)]
        compare_paper: bool,
    },
    /// Monte Carlo estimate of the probability a random k-subset avoids.
    Prob {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
    /// Table of chi coefficients, chi(q) and enumerated counts.
    Table {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = 0)]
        nmax: u32,
    },
    /// Compare lattices and chi of one family across several fields.
    Compare {
        #[arg(long, default_value = "set")]
        family: String,
        #[arg(long)]
        kmax: usize,
        /// Comma-separated fields.
        #[arg(long, default_value = "3,5,7,generic", value_delimiter = ',')]
        chars: Vec<String>,
        /// Also tabulate c_i(k) per field, next to the published value.
        #[arg(long)]
        coeff: Option<usize>,
    },
    /// Check a schema against the FI-CHA axioms.
    Validate {
        #[command(flatten)]
        family: FamilyArgs,
    },
}

/// A named pass/fail cross-check printed with every report.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything a command produces, renderable in each output format.
#[derive(Clone, Debug)]
pub struct Report {
    pub query: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub human: String,
    /// CSV rows (first row is the header); defaults to key/value pairs.
    pub csv: Option<Vec<Vec<String>>>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().all(|c| c.passed) {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Human => {
                let mut out = self.human.clone();
                if !self.checks.is_empty() {
                    out.push_str("checks:\n");
                    for c in &self.checks {
                        let _ = writeln!(
                            out,
                            "  [{}] {}: {}",
                            if c.passed { "ok" } else { "FAIL" },
                            c.name,
                            c.detail
                        );
                    }
                }
                Ok(out)
            }
            Format::Json => {
                let checks: Vec<Value> = self
                    .checks
                    .iter()
                    .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
                    .collect();
                let doc = json!({"query": self.query, "result": self.result, "checks": checks});
                Ok(serde_json::to_string_pretty(&doc)? + "\n")
            }
            Format::Csv => {
                let rows = match &self.csv {
                    Some(rows) => rows.clone(),
                    None => {
                        let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
                        flatten_json("", &self.result, &mut rows);
                        rows
                    }
                };
                let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
                for row in rows {
                    w.write_record(&row)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }
}

fn flatten_json(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_json(&key, v, rows);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let joined = items.iter().map(scalar).collect::<Vec<_>>().join(" ");
            rows.push(vec![prefix.to_string(), joined]);
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_json(&format!("{prefix}.{i}"), v, rows);
            }
        }
        other => rows.push(vec![prefix.to_string(), scalar(other)]),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn opts(budget: u64) -> LatticeOptions {
    LatticeOptions { budget }
}

/// Run `f` with the schema's field as a concrete type.
macro_rules! in_field {
    ($schema:expr, |$field:ident| $body:expr) => {
        match $schema.p {
            FieldSpec::Prime(p) => {
                let $field = PrimeField::new(p);
                $body
            }
            FieldSpec::Generic => {
                let $field = Rationals;
                $body
            }
        }
    };
}

fn prime_schema(schema: &Schema, what: &str) -> Result<GeneratorSchema<PrimeField>> {
    match schema.p {
        FieldSpec::Prime(p) => Ok(schema.validate_in(PrimeField::new(p))?.0),
        FieldSpec::Generic => Err(Error::Input(format!("{what} needs a prime field, not `generic`"))),
    }
}

/// `chi`: build the lattice of A_k and report its characteristic polynomial.
pub fn chi_report(schema: &Schema, k: usize, budget: u64) -> Result<Report> {
    in_field!(schema, |field| chi_report_in(schema, field, k, budget))
}

fn chi_report_in<F: Field>(schema: &Schema, field: F, k: usize, budget: u64) -> Result<Report> {
    let (gs, _) = schema.validate_in(field)?;
    let arrangement = gs.expand(k);
    let lattice = FlatLattice::build_with(&arrangement, opts(budget))?;
    let chi = lattice.char_poly()?;
    let levels = lattice.level_sizes();
    let m = arrangement.len();
    let predicted = gs.hyperplane_count_formula(k);

    let mut checks = vec![
        Check::new("monic", chi.coeff(0).is_one(), "c_0 = 1"),
        Check::new(
            "sign_condition",
            lattice.sign_condition_holds(),
            "(-1)^codim mu(0,x) > 0 for every flat",
        ),
        Check::new(
            "c1_counts_hyperplanes",
            chi.coeff(1) == BigUint::from(m) || k == 0,
            format!("c_1 = {} and |A_k| = {m}", chi.coeff(1)),
        ),
        Check::new(
            "hyperplane_count_formula",
            predicted == BigUint::from(m),
            format!("predicted {predicted}, expanded {m}"),
        ),
    ];
    if m > 0 {
        let at_one = chi.eval(&BigInt::one());
        checks.push(Check::new(
            "vanishes_at_one",
            at_one.is_zero(),
            format!("chi(1) = {at_one}"),
        ));
    }

    let mut human = String::new();
    let _ = writeln!(human, "family {} over {}, k = {k}", schema.name, schema.p);
    let _ = writeln!(human, "chi(t) = {chi}");
    let _ = writeln!(human, "hyperplanes: {m}");
    let _ = writeln!(
        human,
        "flats: {} (by codimension: {})",
        lattice.len(),
        levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
    );
    let _ = writeln!(human, "betti numbers: {}", strings(&chi.betti_numbers()).join(" "));

    Ok(Report {
        query: json!({"command": "chi", "family": schema.name, "field": schema.p.to_string(), "k": k}),
        result: json!({
            "chi": chi.to_string(),
            "coefficients": strings(chi.coeffs()),
            "betti_numbers": strings(&chi.betti_numbers()),
            "hyperplanes": m,
            "flats": lattice.len(),
            "flats_by_codim": levels,
        }),
        checks,
        human,
        csv: None,
    })
}

/// `count`: enumerate avoiding subsets, optionally cross-checked against chi.
pub fn count_report(schema: &Schema, n: u32, k: usize, mode: CountMode, verify: bool, budget: u64) -> Result<Report> {
    let gs = prime_schema(schema, "counting")?;
    let res = count_avoiders(&gs, CountQuery::new(n, k, mode).with_budget(budget))?;
    let mut checks = Vec::new();
    let mut result = json!({
        "value": res.value().to_string(),
        "ordered": res.ordered.to_string(),
        "unordered": res.unordered.to_string(),
        "q": res.q.to_string(),
    });
    let mut human = String::new();
    let _ = writeln!(
        human,
        "family {} over {}, n = {n}, k = {k}, q = {}",
        schema.name, schema.p, res.q
    );
    let _ = writeln!(human, "{} count: {}", mode, res.value());
    let _ = writeln!(human, "elapsed: {:.3?}", res.elapsed);
    if verify {
        let lattice = FlatLattice::build_with(&gs.expand(k), opts(budget))?;
        let chi = lattice.char_poly()?;
        let eval = chi.point_count(res.q)?;
        let ok = eval == BigInt::from(res.ordered.clone());
        let _ = writeln!(human, "chi(t) = {chi}, chi({}) = {eval}", res.q);
        result["chi"] = json!(chi.to_string());
        result["chi_eval"] = json!(eval.to_string());
        checks.push(Check::new(
            "chi_matches_count",
            ok,
            format!("chi({}) = {eval}, ordered count = {}", res.q, res.ordered),
        ));
    }
    Ok(Report {
        query: json!({"command": "count", "family": schema.name, "field": schema.p.to_string(),
                      "n": n, "k": k, "mode": mode.to_string()}),
        result,
        checks,
        human,
        csv: None,
    })
}

/// `coeffs`: fit c_i(k) and check the holdout.
pub fn coeffs_report(
    schema: &Schema,
    i: usize,
    kmax: usize,
    holdout: usize,
    compare: bool,
    budget: u64,
) -> Result<Report> {
    let reference = if compare { reference_expansion(i) } else { None };
    if compare && reference.is_none() {
        return Err(Error::Input(format!("no published expansion for c_{i}")));
    }
    let report = in_field!(schema, |field| {
        let (gs, _) = schema.validate_in(field)?;
        fit_and_verify(&gs, i, kmax, holdout, reference, opts(budget))?
    });
    Ok(render_fit(schema, i, &report))
}

fn render_fit(schema: &Schema, i: usize, r: &FitReport) -> Report {
    let mut human = String::new();
    let _ = writeln!(human, "c_{i}(k) = {}", r.fitted);
    let _ = writeln!(
        human,
        "family {} over {}, fitted on k = 0..{}, degree {} (bound {})",
        schema.name,
        schema.p,
        r.k_fit_max,
        r.fitted.degree().map_or("-".to_string(), |d| d.to_string()),
        r.max_degree_allowed
    );
    let _ = writeln!(
        human,
        "series c_{i}(0..{}): {}",
        r.holdout_k,
        strings(&r.series.values).join(" ")
    );
    for p in &r.predictions {
        let _ = writeln!(
            human,
            "holdout k = {}: predicted {}, computed {}: {}",
            p.k,
            p.predicted,
            p.actual,
            if p.matches() { "ok" } else { "MISMATCH" }
        );
    }
    let mut result = json!({
        "expansion": r.fitted.to_string(),
        "binomial_coefficients": strings(r.fitted.coeffs()),
        "degree": r.fitted.degree(),
        "series": strings(&r.series.values),
        "predictions": r.predictions.iter().map(|p| json!({
            "k": p.k, "predicted": p.predicted.to_string(), "computed": p.actual.to_string(), "match": p.matches()
        })).collect::<Vec<_>>(),
    });
    if let Some(cmp) = &r.comparison {
        let _ = writeln!(
            human,
            "comparison with published expansion c_{i}(k) = {}:",
            cmp.reference
        );
        for t in &cmp.terms {
            let _ = writeln!(
                human,
                "  C(k,{}): computed {}, published {}{}",
                t.j,
                t.computed,
                t.reference,
                if t.computed == t.reference { "" } else { "  DIFFERS" }
            );
        }
        for v in cmp
            .values
            .iter()
            .filter(|v| BigInt::from(v.computed.clone()) != v.reference)
        {
            let _ = writeln!(
                human,
                "  k = {}: computed c_{i}({}) = {}, published gives {}",
                v.k, v.k, v.computed, v.reference
            );
        }
        match cmp.first_disagreement() {
            Some(k) => {
                let _ = writeln!(human, "  first disagreement at k = {k} (informational)");
            }
            None => {
                let _ = writeln!(human, "  agrees on every computed k");
            }
        }
        result["comparison"] = json!({
            "reference": cmp.reference.to_string(),
            "agrees": cmp.agrees(),
            "first_disagreement_k": cmp.first_disagreement(),
            "terms": cmp.terms.iter().map(|t| json!({
                "j": t.j, "computed": t.computed.to_string(), "reference": t.reference.to_string()
            })).collect::<Vec<_>>(),
            "values": cmp.values.iter().map(|v| json!({
                "k": v.k, "computed": v.computed.to_string(), "reference": v.reference.to_string()
            })).collect::<Vec<_>>(),
        });
    }
    let checks = vec![
        Check::new(
            "degree_bound",
            r.degree_within_bound(),
            format!(
                "degree <= 3i = {}, exact on k = 0..{}",
                r.max_degree_allowed, r.k_fit_max
            ),
        ),
        Check::new(
            "holdout",
            r.holdout_match(),
            format!("predictions through k = {}", r.holdout_k),
        ),
    ];
    Report {
        query: json!({"command": "coeffs", "family": schema.name, "field": schema.p.to_string(),
                      "i": i, "kmax": r.k_fit_max, "holdout": r.holdout_k}),
        result,
        checks,
        human,
        csv: None,
    }
}

/// `prob`: Monte Carlo avoiding probability.
pub fn prob_report(schema: &Schema, n: u32, k: usize, samples: u64, seed: u64) -> Result<Report> {
    let gs = prime_schema(schema, "sampling")?;
    let e = estimate_probability(&gs, n, k, samples, seed)?;
    let mut human = String::new();
    let _ = writeln!(human, "family {} over {}, n = {n}, k = {k}", schema.name, schema.p);
    let _ = writeln!(human, "estimate: {:.6} ± {:.6}", e.estimate, e.std_error);
    let _ = writeln!(human, "samples: {} (avoiding: {}), seed: {}", e.samples, e.hits, e.seed);
    Ok(Report {
        query: json!({"command": "prob", "family": schema.name, "field": schema.p.to_string(),
                      "n": n, "k": k, "samples": samples, "seed": seed.to_string()}),
        result: json!({"estimate": e.estimate, "std_error": e.std_error, "hits": e.hits, "samples": e.samples}),
        checks: vec![],
        human,
        csv: None,
    })
}

/// One (k, n) row of the table.
struct TableRow {
    k: usize,
    n: Option<u32>,
    q: Option<u64>,
    chi_eval: Option<BigInt>,
    oracle: Option<BigUint>,
    status: &'static str,
    coeffs: Option<Vec<BigUint>>,
}

/// `table`: chi coefficients for k = 0..=kmax and, over a prime field,
/// chi(p^n) next to the enumerated count for n = 1..=nmax.
pub fn table_report(schema: &Schema, kmax: usize, nmax: u32, budget: u64) -> Result<Report> {
    let mut rows = Vec::new();
    for k in 0..=kmax {
        let chi: Option<SignedCharPoly> = match in_field!(schema, |field| {
            let (gs, _) = schema.validate_in(field)?;
            FlatLattice::build_with(&gs.expand(k), opts(budget)).and_then(|l| l.char_poly())
        }) {
            Ok(chi) => Some(chi),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        let coeffs = chi.as_ref().map(|c| c.coeffs().to_vec());
        let ns: Vec<u32> = match schema.p {
            FieldSpec::Prime(_) if nmax > 0 => (1..=nmax).collect(),
            _ => vec![],
        };
        if ns.is_empty() {
            rows.push(TableRow {
                k,
                n: None,
                q: None,
                chi_eval: None,
                oracle: None,
                status: if chi.is_some() { "" } else { "skipped" },
                coeffs,
            });
            continue;
        }
        let gs = prime_schema(schema, "table")?;
        for n in ns {
            let q = schema.p.characteristic().unwrap().checked_pow(n);
            let chi_eval = match (&chi, q) {
                (Some(c), Some(q)) => Some(c.point_count(q)?),
                _ => None,
            };
            let oracle = match count_avoiders(&gs, CountQuery::new(n, k, CountMode::Ordered).with_budget(budget)) {
                Ok(r) => Some(r.ordered),
                Err(Error::BudgetExceeded { .. } | Error::Input(_)) => None,
                Err(e) => return Err(e),
            };
            let status = match (&chi_eval, &oracle) {
                (Some(a), Some(b)) if *a == BigInt::from(b.clone()) => "match",
                (Some(_), Some(_)) => "mismatch",
                _ => "skipped",
            };
            rows.push(TableRow {
                k,
                n: Some(n),
                q,
                chi_eval,
                oracle,
                status,
                coeffs: coeffs.clone(),
            });
        }
    }

    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut header: Vec<String> = ["k", "n", "q", "chi_eval", "oracle_count", "match"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..=kmax).map(|i| format!("c_{i}")));
    let mut csv_rows = vec![header.clone()];
    let mut json_rows = Vec::new();
    for r in &rows {
        let mut line = vec![
            r.k.to_string(),
            opt(r.n.map(|n| n.to_string())),
            opt(r.q.map(|q| q.to_string())),
            opt(r.chi_eval.as_ref().map(|v| v.to_string())),
            opt(r.oracle.as_ref().map(|v| v.to_string())),
            r.status.to_string(),
        ];
        if let Some(c) = &r.coeffs {
            line.extend(strings(c));
        }
        csv_rows.push(line);
        json_rows.push(json!({
            "k": r.k, "n": r.n, "q": r.q.map(|q| q.to_string()),
            "chi_eval": r.chi_eval.as_ref().map(|v| v.to_string()),
            "oracle_count": r.oracle.as_ref().map(|v| v.to_string()),
            "match": r.status,
            "coefficients": r.coeffs.as_ref().map(|c| strings(c)),
        }));
    }

    let mut human = String::new();
    let _ = writeln!(human, "family {} over {}", schema.name, schema.p);
    for line in &csv_rows {
        let _ = writeln!(human, "{}", line.join("\t"));
    }
    let mismatches = rows.iter().filter(|r| r.status == "mismatch").count();
    let compared = rows.iter().filter(|r| r.status == "match").count();
    let checks = if rows.iter().any(|r| r.n.is_some()) {
        vec![Check::new(
            "chi_matches_count",
            mismatches == 0,
            format!("{compared} matching rows, {mismatches} mismatches"),
        )]
    } else {
        vec![]
    };
    Ok(Report {
        query: json!({"command": "table", "family": schema.name, "field": schema.p.to_string(),
                      "kmax": kmax, "nmax": nmax}),
        result: json!({"rows": json_rows}),
        checks,
        human,
        csv: Some(csv_rows),
    })
}

/// `compare`: the same family's lattice over several fields.
pub fn compare_report(
    family: &str,
    kmax: usize,
    fields: &[FieldSpec],
    coeff: Option<usize>,
    budget: u64,
) -> Result<Report> {
    if fields.is_empty() {
        return Err(Error::Input("no fields to compare".into()));
    }
    let base = family.parse::<Family>()?.schema()?;
    let reference = coeff.and_then(reference_expansion);
    let mut human = String::new();
    let _ = writeln!(
        human,
        "family {} across {}",
        base.name,
        fields.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
    );
    let mut rows = Vec::new();
    let mut header = vec!["k".to_string()];
    for f in fields {
        header.push(format!("flats[{f}]"));
        header.push(format!("chi[{f}]"));
        if let Some(i) = coeff {
            header.push(format!("c_{i}[{f}]"));
        }
    }
    if let (Some(i), Some(_)) = (coeff, &reference) {
        header.push(format!("c_{i}[published]"));
    }
    header.push("agree".into());
    let mut csv_rows = vec![header];

    for k in 0..=kmax {
        let mut entries = Vec::new();
        for &f in fields {
            let schema = base.over(f);
            let (flats, chi) = in_field!(schema, |field| {
                let (gs, _) = schema.validate_in(field)?;
                let l = FlatLattice::build_with(&gs.expand(k), opts(budget))?;
                (l.len(), l.char_poly()?)
            });
            entries.push((f, flats, chi));
        }
        let agree = entries.windows(2).all(|w| w[0].1 == w[1].1 && w[0].2 == w[1].2);
        let _ = writeln!(human, "k = {k}: {}", if agree { "all equal" } else { "DIFFER" });
        let mut line = vec![k.to_string()];
        for (f, flats, chi) in &entries {
            let extra = coeff.map_or(String::new(), |i| format!(", c_{i} = {}", chi.coeff(i)));
            let _ = writeln!(human, "  {f}: {flats} flats, chi = {chi}{extra}");
            line.push(flats.to_string());
            line.push(chi.to_string());
            if let Some(i) = coeff {
                line.push(chi.coeff(i).to_string());
            }
        }
        if let (Some(i), Some(r)) = (coeff, &reference) {
            let _ = writeln!(human, "  published: c_{i} = {}", r.eval(k));
            line.push(r.eval(k).to_string());
        }
        line.push(if agree { "equal" } else { "differs" }.to_string());
        rows.push(json!({
            "k": k,
            "agree": agree,
            "fields": entries.iter().map(|(f, flats, chi)| json!({
                "field": f.to_string(), "flats": flats, "chi": chi.to_string(),
                "coefficients": strings(chi.coeffs()),
            })).collect::<Vec<_>>(),
            "published": match (coeff, &reference) {
                (Some(_), Some(r)) => Value::String(r.eval(k).to_string()),
                _ => Value::Null,
            },
        }));
        csv_rows.push(line);
    }
    Ok(Report {
        query: json!({"command": "compare", "family": base.name, "kmax": kmax,
                      "fields": fields.iter().map(|f| f.to_string()).collect::<Vec<_>>(), "coeff": coeff}),
        result: json!({"rows": rows}),
        checks: vec![],
        human,
        csv: Some(csv_rows),
    })
}

/// `validate`: the axiom report for a schema.
pub fn validate_report(schema: &Schema) -> Result<Report> {
    let report = in_field!(schema, |field| schema.validate_in(field)?.1);
    Ok(Report {
        query: json!({"command": "validate", "family": schema.name, "field": schema.p.to_string()}),
        result: json!({
            "valid": true,
            "axiom_a": format!("{:?}", report.axiom_a),
            "generators": report.generators,
            "duplicates_dropped": report.duplicates_dropped,
        }),
        checks: vec![],
        human: format!("{report}\n"),
        csv: None,
    })
}

/// Execute one parsed command.
pub fn execute(cli: &Cli) -> Result<Report> {
    let budget = cli.global.budget;
    match &cli.command {
        Command::Chi { family, k } => chi_report(&family.schema()?, *k, budget),
        Command::Count {
            family,
            n,
            k,
            unordered,
            verify,
            ..
        } => {
            let mode = if *unordered {
                CountMode::Unordered
            } else {
                CountMode::Ordered
            };
            count_report(&family.schema()?, *n, *k, mode, *verify, budget)
        }
        Command::Coeffs {
            family,
            i,
            kmax,
            holdout,
            compare_paper,
        } => coeffs_report(&family.schema()?, *i, *kmax, *holdout, *compare_paper, budget),
        Command::Prob { family, n, k, samples } => prob_report(&family.schema()?, *n, *k, *samples, cli.global.seed),
        Command::Table { family, kmax, nmax } => table_report(&family.schema()?, *kmax, *nmax, budget),
        Command::Compare {
            family,
            kmax,
            chars,
            coeff,
        } => {
            let fields = chars.iter().map(|c| c.parse()).collect::<Result<Vec<FieldSpec>>>()?;
            compare_report(family, *kmax, &fields, *coeff, budget)
        }
        Command::Validate { family } => validate_report(&family.schema()?),
    }
}

/// Parse-free entry point: run, render, and pick the exit code. Errors
/// are rendered as `error: ...` text.
pub fn run(cli: &Cli) -> (String, i32) {
    let go = || -> Result<(String, i32)> {
        let report = execute(cli)?;
        Ok((report.render(cli.global.format)?, report.exit_code()))
    };
    let outcome = match cli.global.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(Error::Input(e.to_string())),
        },
        None => go(),
    };
    match outcome {
        Ok(ok) => ok,
        Err(e) => (format!("error: {e}\n"), e.exit_code()),
    }
}
