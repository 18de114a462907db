//! Ground truth by enumeration: counting constraint-avoiding k-subsets of
//! F_p^n directly, and estimating the avoiding probability by sampling.
//!
//! Nothing here touches the lattice machinery; the two routes meet only in
//! tests and in the verification commands.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::GeneratorSchema;
use crate::linalg::{Field, PrimeField};

/// Deck sizes above this are refused; encodings are stored as `u32`.
pub const MAX_DECK: u64 = 1 << 31;

const TABLE_LIMIT: usize = 1 << 22;
const SHARD: u64 = 4096;
const FLUSH: u64 = 1 << 14;

/// A card: a vector in F_p^n, with its base-p encoding
/// `sum coords[i] * p^i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeckPoint {
    coords: Vec<u64>,
    encoding: usize,
}

impl DeckPoint {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn encoding(&self) -> usize {
        self.encoding
    }
}

/// The deck F_p^n with precomputed arithmetic tables when small enough.
#[derive(Clone, Debug)]
pub struct Deck {
    field: PrimeField,
    n: u32,
    q: usize,
    add: Option<Vec<u32>>,
    scale: Option<Vec<u32>>,
}

impl Deck {
    pub fn new(field: PrimeField, n: u32) -> Result<Self> {
        let p = field.modulus();
        let q = p
            .checked_pow(n)
            .filter(|&q| q <= MAX_DECK)
            .ok_or_else(|| Error::Input(format!("deck {p}^{n} is too large to enumerate")))? as usize;
        let mut deck = Deck {
            field,
            n,
            q,
            add: None,
            scale: None,
        };
        if q.saturating_mul(q) <= TABLE_LIMIT && (p as usize).saturating_mul(q) <= TABLE_LIMIT {
            let add = (0..q)
                .flat_map(|a| (0..q).map(move |b| (a, b)))
                .map(|(a, b)| deck.add_slow(a, b) as u32)
                .collect();
            let scale = (0..p)
                .flat_map(|c| (0..q).map(move |a| (c, a)))
                .map(|(c, a)| deck.scale_slow(c, a) as u32)
                .collect();
            deck.add = Some(add);
            deck.scale = Some(scale);
        }
        Ok(deck)
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn point(&self, encoding: usize) -> DeckPoint {
        assert!(encoding < self.q, "encoding {encoding} outside deck of size {}", self.q);
        let p = self.field.modulus() as usize;
        let mut e = encoding;
        let coords = (0..self.n)
            .map(|_| {
                let d = (e % p) as u64;
                e /= p;
                d
            })
            .collect();
        DeckPoint { coords, encoding }
    }

    pub fn point_from_coords(&self, coords: &[u64]) -> Result<DeckPoint> {
        if coords.len() != self.n as usize {
            return Err(Error::RowLength {
                expected: self.n as usize,
                found: coords.len(),
            });
        }
        let p = self.field.modulus();
        let encoding = coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * p as usize + (c % p) as usize);
        Ok(self.point(encoding))
    }

    fn digits(&self, mut e: usize) -> impl Iterator<Item = u64> + '_ {
        let p = self.field.modulus() as usize;
        (0..self.n).map(move |_| {
            let d = (e % p) as u64;
            e /= p;
            d
        })
    }

    fn encode_digits(&self, digits: impl DoubleEndedIterator<Item = u64>) -> usize {
        let p = self.field.modulus() as usize;
        digits.rev().fold(0, |acc, d| acc * p + d as usize)
    }

    fn add_slow(&self, a: usize, b: usize) -> usize {
        let f = &self.field;
        let digits: Vec<u64> = self.digits(a).zip(self.digits(b)).map(|(x, y)| f.add(&x, &y)).collect();
        self.encode_digits(digits.into_iter())
    }

    fn scale_slow(&self, c: u64, a: usize) -> usize {
        let f = &self.field;
        let digits: Vec<u64> = self.digits(a).map(|x| f.mul(&c, &x)).collect();
        self.encode_digits(digits.into_iter())
    }

    #[inline]
    fn add(&self, a: usize, b: usize) -> usize {
        match &self.add {
            Some(t) => t[a * self.q + b] as usize,
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    fn scale(&self, c: u64, a: usize) -> usize {
        match &self.scale {
            Some(t) => t[c as usize * self.q + a] as usize,
            None => self.scale_slow(c, a),
        }
    }

    /// `sum c_t * x_t` over the deck.
    pub fn combine(&self, terms: impl IntoIterator<Item = (u64, usize)>) -> usize {
        terms.into_iter().fold(0, |acc, (c, x)| self.add(acc, self.scale(c, x)))
    }
}

/// Definition-level check: no generator vanishes on any injective
/// assignment of the given points to its slots. Repeated points count as
/// distinct positions.
pub fn is_avoiding(schema: &GeneratorSchema<PrimeField>, deck: &Deck, points: &[DeckPoint]) -> bool {
    let encodings: Vec<usize> = points.iter().map(|pt| pt.encoding()).collect();
    schema.generators().iter().all(|g| {
        (0..encodings.len()).permutations(g.arity()).all(|slots| {
            let value = deck.combine(g.coeffs().iter().zip(&slots).map(|(&c, &i)| (c, encodings[i])));
            value != 0
        })
    })
}

/// "Solve for the free slot" rule: a new point `x` is forbidden if
/// `x = y_coef * y + sum rest[t] * z_t` for the most recently chosen point `y`
/// and distinct earlier points `z_t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Completion {
    y_coef: u64,
    rest: Vec<u64>,
}

#[derive(Clone, Debug)]
struct Rules {
    completions: Vec<Completion>,
    // arity-1 generators forbid the zero vector outright
    zero_forbidden: bool,
}

impl Rules {
    fn new(schema: &GeneratorSchema<PrimeField>) -> Self {
        let f = schema.field();
        let mut completions = BTreeSet::new();
        let mut zero_forbidden = false;
        for g in schema.generators() {
            let c = g.coeffs();
            let r = c.len();
            if r == 1 {
                zero_forbidden = true;
                continue;
            }
            for free in 0..r {
                let minus_inv = f.neg(&f.inv(&c[free]));
                let solved: Vec<u64> = c.iter().map(|ct| f.mul(ct, &minus_inv)).collect();
                for y in (0..r).filter(|&s| s != free) {
                    let mut rest: Vec<u64> = (0..r).filter(|&s| s != free && s != y).map(|s| solved[s]).collect();
                    rest.sort_unstable();
                    completions.insert(Completion {
                        y_coef: solved[y],
                        rest,
                    });
                }
            }
        }
        Rules {
            completions: completions.into_iter().collect(),
            zero_forbidden,
        }
    }
}

/// Incremental forbidden-point bookkeeping over a stack of chosen points.
struct Tracker<'a> {
    deck: &'a Deck,
    rules: &'a Rules,
    forbidden: Vec<u32>,
    chosen: Vec<usize>,
    log: Vec<usize>,
    marks: Vec<usize>,
}

impl<'a> Tracker<'a> {
    fn new(deck: &'a Deck, rules: &'a Rules) -> Self {
        Tracker {
            deck,
            rules,
            forbidden: vec![0; deck.size()],
            chosen: Vec::new(),
            log: Vec::new(),
            marks: Vec::new(),
        }
    }

    #[inline]
    fn is_forbidden(&self, x: usize) -> bool {
        self.forbidden[x] > 0 || (self.rules.zero_forbidden && x == 0)
    }

    fn mark(&mut self, x: usize) {
        self.forbidden[x] += 1;
        self.log.push(x);
    }

    /// Choose `y`; returns the number of forbidden entries written.
    fn push(&mut self, y: usize) -> u64 {
        self.marks.push(self.log.len());
        let deck = self.deck;
        for comp in &self.rules.completions {
            let base = deck.scale(comp.y_coef, y);
            match comp.rest.len() {
                0 => self.mark(base),
                1 => {
                    let c = comp.rest[0];
                    for i in 0..self.chosen.len() {
                        let x = deck.add(base, deck.scale(c, self.chosen[i]));
                        self.mark(x);
                    }
                }
                len => {
                    let symmetric = comp.rest.iter().all_equal();
                    let picks: Vec<Vec<usize>> = if symmetric {
                        (0..self.chosen.len()).combinations(len).collect()
                    } else {
                        (0..self.chosen.len()).permutations(len).collect()
                    };
                    for pick in picks {
                        let x = deck.add(
                            base,
                            deck.combine(comp.rest.iter().zip(&pick).map(|(&c, &i)| (c, self.chosen[i]))),
                        );
                        self.mark(x);
                    }
                }
            }
        }
        self.chosen.push(y);
        (self.log.len() - self.marks.last().unwrap()) as u64
    }

    fn pop(&mut self) {
        self.chosen.pop();
        let mark = self.marks.pop().expect("pop without push");
        for x in self.log.drain(mark..) {
            self.forbidden[x] -= 1;
        }
    }

    fn clear(&mut self) {
        while !self.chosen.is_empty() {
            self.pop();
        }
    }
}

/// Whether a count reports ordered tuples or unordered sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    Ordered,
    Unordered,
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Ordered => "ordered",
            CountMode::Unordered => "unordered",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountQuery {
    pub n: u32,
    pub k: usize,
    pub mode: CountMode,
    /// Elementary-step budget (DFS nodes plus forbidden-set updates).
    pub budget: u64,
}

impl CountQuery {
    pub fn new(n: u32, k: usize, mode: CountMode) -> Self {
        CountQuery {
            n,
            k,
            mode,
            budget: crate::DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(self, budget: u64) -> Self {
        CountQuery { budget, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct CountResult {
    pub query: CountQuery,
    pub q: u64,
    pub ordered: BigUint,
    pub unordered: BigUint,
    pub translation_reduced: bool,
    pub steps: u64,
    pub elapsed: Duration,
}

impl CountResult {
    /// The count in the query's mode.
    pub fn value(&self) -> &BigUint {
        match self.query.mode {
            CountMode::Ordered => &self.ordered,
            CountMode::Unordered => &self.unordered,
        }
    }
}

struct Meter<'a> {
    shared: &'a AtomicU64,
    blown: &'a AtomicBool,
    limit: u64,
    local: u64,
}

impl Meter<'_> {
    #[inline]
    fn tick(&mut self, steps: u64) -> bool {
        self.local += steps;
        if self.local >= FLUSH {
            self.flush();
        }
        !self.blown.load(Ordering::Relaxed)
    }

    fn flush(&mut self) {
        let total = self.shared.fetch_add(self.local, Ordering::Relaxed) + self.local;
        self.local = 0;
        if total > self.limit {
            self.blown.store(true, Ordering::Relaxed);
        }
    }
}

/// Leaves below the current prefix: ways to pick `remaining` more points
/// from `start..q`, increasing, none forbidden. `None` when the budget
/// runs out.
fn dfs(t: &mut Tracker, meter: &mut Meter, start: usize, remaining: usize) -> Option<u128> {
    let q = t.deck.size();
    if remaining == 0 {
        return Some(1);
    }
    if remaining == 1 {
        if !meter.tick((q - start) as u64 + 1) {
            return None;
        }
        return Some((start..q).filter(|&x| !t.is_forbidden(x)).count() as u128);
    }
    let mut total = 0u128;
    for x in start..=q.saturating_sub(remaining) {
        if t.is_forbidden(x) {
            continue;
        }
        let steps = t.push(x);
        let sub = if meter.tick(steps + 1) {
            dfs(t, meter, x + 1, remaining - 1)
        } else {
            None
        };
        t.pop();
        total += sub?;
    }
    Some(total)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Exact number of avoiding k-subsets of F_p^n by depth-first search over
/// increasing encodings. When every generator's coefficients sum to zero
/// the first point is pinned to the origin and the count multiplied back.
pub fn count_avoiders(schema: &GeneratorSchema<PrimeField>, query: CountQuery) -> Result<CountResult> {
    let started = Instant::now();
    let deck = Deck::new(*schema.field(), query.n)?;
    let q = deck.size();
    let k = query.k;
    let rules = Rules::new(schema);
    let shared = AtomicU64::new(0);
    let blown = AtomicBool::new(false);
    let translation = k >= 1 && schema.translation_invariant();

    let new_meter = || Meter {
        shared: &shared,
        blown: &blown,
        limit: query.budget,
        local: 0,
    };

    // (prefix, remaining) per root task
    let (prefix, remaining): (Vec<usize>, usize) = if translation { (vec![0], k - 1) } else { (vec![], k) };
    let leaves: Option<u128> = if remaining == 0 {
        let mut t = Tracker::new(&deck, &rules);
        Some(u128::from(prefix.iter().all(|&x| {
            let ok = !t.is_forbidden(x);
            t.push(x);
            ok
        })))
    } else if k > q {
        Some(0)
    } else {
        let first = prefix.last().map_or(0, |&x| x + 1);
        let roots: Vec<usize> = (first..=q - remaining).collect();
        roots
            .into_par_iter()
            .map_init(
                || Tracker::new(&deck, &rules),
                |t, x| {
                    let mut meter = new_meter();
                    t.clear();
                    for &pre in &prefix {
                        t.push(pre);
                    }
                    let sub = if t.is_forbidden(x) {
                        Some(0)
                    } else {
                        let steps = t.push(x);
                        if meter.tick(steps + 1) {
                            dfs(t, &mut meter, x + 1, remaining - 1)
                        } else {
                            None
                        }
                    };
                    meter.flush();
                    sub
                },
            )
            .try_reduce(|| 0, |a, b| Some(a + b))
    };
    let leaves = match leaves {
        Some(l) if !blown.load(Ordering::Relaxed) => l,
        _ => return Err(Error::BudgetExceeded { limit: query.budget }),
    };

    let leaves = BigUint::from(leaves);
    let (ordered, unordered) = if translation {
        let ordered = leaves * BigUint::from(q) * factorial(k - 1);
        let unordered = &ordered / factorial(k);
        (ordered, unordered)
    } else {
        (&leaves * factorial(k), leaves)
    };
    Ok(CountResult {
        query,
        q: q as u64,
        ordered,
        unordered,
        translation_reduced: translation,
        steps: shared.load(Ordering::Relaxed),
        elapsed: started.elapsed(),
    })
}

/// Monte Carlo estimate of the probability that a uniform k-subset avoids
/// every constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub n: u32,
    pub k: usize,
    pub samples: u64,
    pub seed: u64,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Samples are drawn in fixed shards of 4096; shard `i` uses the ChaCha8
/// stream `i` of the seed, so the result does not depend on thread count.
pub fn estimate_probability(
    schema: &GeneratorSchema<PrimeField>,
    n: u32,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Input("sample count must be positive".into()));
    }
    let deck = Deck::new(*schema.field(), n)?;
    let q = deck.size();
    if k > q {
        return Err(Error::Input(format!("k = {k} exceeds the deck size {q}")));
    }
    let rules = Rules::new(schema);
    let shards = samples.div_ceil(SHARD);
    let hits: u64 = (0..shards)
        .into_par_iter()
        .map_init(
            || Tracker::new(&deck, &rules),
            |t, shard| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(shard);
                let take = SHARD.min(samples - shard * SHARD);
                let mut hits = 0;
                for _ in 0..take {
                    let subset = index::sample(&mut rng, q, k);
                    let mut ok = true;
                    for x in subset.iter() {
                        if t.is_forbidden(x) {
                            ok = false;
                            break;
                        }
                        t.push(x);
                    }
                    t.clear();
                    hits += u64::from(ok);
                }
                hits
            },
        )
        .sum();
    let estimate = hits as f64 / samples as f64;
    let std_error = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(Estimate {
        n,
        k,
        samples,
        seed,
        hits,
        estimate,
        std_error,
    })
}

/// Exact avoiding probability from an unordered count: count / C(q, k).
pub fn exact_probability(unordered: &BigUint, q: u64, k: usize) -> f64 {
    let total = num_integer::binomial(BigUint::from(q), BigUint::from(k));
    unordered.to_f64().unwrap_or(f64::NAN) / total.to_f64().unwrap_or(f64::NAN)
}
