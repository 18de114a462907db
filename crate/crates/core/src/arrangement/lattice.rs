use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::arrangement::{Arrangement, SignedCharPoly};
use crate::error::{Error, Result};
use crate::linalg::{Field, RowMatrix};

/// A flat of the arrangement: the solution space of its canonical
/// equation matrix.
#[derive(Clone, Debug)]
pub struct Flat<F: Field> {
    equations: RowMatrix<F>,
    hyperplanes: FixedBitSet,
    dim: usize,
}

impl<F: Field> Flat<F> {
    /// Canonical (reduced row echelon) defining equations.
    pub fn equations(&self) -> &RowMatrix<F> {
        &self.equations
    }

    /// Indices (into the arrangement) of the hyperplanes containing this flat.
    pub fn hyperplanes(&self) -> &FixedBitSet {
        &self.hyperplanes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.equations.nrows()
    }
}

/// Knobs for [`FlatLattice::build_with`].
#[derive(Clone, Copy, Debug)]
pub struct LatticeOptions {
    /// Maximum number of elementary steps (one per flat-hyperplane join and
    /// one per membership test) before giving up.
    pub budget: u64,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            budget: crate::DEFAULT_BUDGET,
        }
    }
}

/// The lattice of flats ordered by reverse inclusion, with Möbius values
/// `mu(0, x)` for every flat.
///
/// Flats are indexed level by level in increasing codimension; inside a
/// level they are sorted by canonical equation entries, so indices depend
/// only on the arrangement.
#[derive(Clone, Debug)]
pub struct FlatLattice<F: Field> {
    arrangement: Arrangement<F>,
    flats: Vec<Flat<F>>,
    level_starts: Vec<usize>,
    mobius: Vec<i128>,
    // join[y * m + h]: index of the flat y ∩ h
    join: Vec<u32>,
}

struct Candidate<F: Field> {
    equations: RowMatrix<F>,
    hyperplanes: FixedBitSet,
}

struct Budget {
    limit: u64,
    used: AtomicU64,
    blown: AtomicBool,
}

impl Budget {
    fn charge(&self, steps: u64) -> bool {
        let used = self.used.fetch_add(steps, Ordering::Relaxed) + steps;
        if used > self.limit {
            self.blown.store(true, Ordering::Relaxed);
        }
        !self.blown.load(Ordering::Relaxed)
    }
}

impl<F: Field> FlatLattice<F> {
    pub fn build(arrangement: &Arrangement<F>) -> Result<Self> {
        Self::build_with(arrangement, LatticeOptions::default())
    }

    /// Closure by frontier: every flat of codimension r + 1 is the
    /// intersection of a codimension-r flat with one hyperplane.
    pub fn build_with(arrangement: &Arrangement<F>, opts: LatticeOptions) -> Result<Self> {
        let field = arrangement.field().clone();
        let k = arrangement.k();
        let m = arrangement.len();
        let forms: Vec<&[F::Elem]> = arrangement.hyperplanes().iter().map(|h| h.form()).collect();
        let budget = Budget {
            limit: opts.budget,
            used: AtomicU64::new(0),
            blown: AtomicBool::new(false),
        };

        let mut flats = vec![Flat {
            equations: RowMatrix::empty(field.clone(), k),
            hyperplanes: FixedBitSet::with_capacity(m),
            dim: k,
        }];
        let mut level_starts = vec![0];
        let mut join: Vec<u32> = Vec::new();

        let mut level = 0..1;
        while !level.is_empty() {
            let candidates: Vec<Vec<Candidate<F>>> = flats[level.clone()]
                .par_iter()
                .map(|y| {
                    let mut out = Vec::new();
                    let mut covered = y.hyperplanes.clone();
                    let mut steps = 0u64;
                    for h in 0..m {
                        if covered.contains(h) {
                            continue;
                        }
                        let eqs = y
                            .equations
                            .with_row(forms[h])
                            .expect("hyperplane outside the flat's closed set");
                        let mut hs = y.hyperplanes.clone();
                        hs.insert(h);
                        for (g, form) in forms.iter().enumerate().skip(h + 1) {
                            if !hs.contains(g) && eqs.contains_vector(form) {
                                hs.insert(g);
                            }
                        }
                        steps += 1 + (m - h) as u64;
                        covered.union_with(&hs);
                        out.push(Candidate {
                            equations: eqs,
                            hyperplanes: hs,
                        });
                    }
                    if !budget.charge(steps) {
                        out.clear();
                    }
                    out
                })
                .collect();
            if budget.blown.load(Ordering::Relaxed) {
                return Err(Error::BudgetExceeded { limit: budget.limit });
            }

            // Deduplicate and order the new level by canonical key.
            let mut keys: Vec<(&[F::Elem], &Candidate<F>)> = candidates
                .iter()
                .flatten()
                .map(|c| (c.equations.entries(), c))
                .collect();
            keys.par_sort_unstable_by(|a, b| a.0.cmp(b.0));
            keys.dedup_by(|a, b| a.0 == b.0);

            let base = flats.len();
            if base + keys.len() > u32::MAX as usize {
                return Err(Error::BudgetExceeded { limit: budget.limit });
            }
            let mut level_join = vec![0u32; level.len() * m];
            for (offset, (y, cands)) in level.clone().zip(&candidates).enumerate() {
                let row = &mut level_join[offset * m..(offset + 1) * m];
                for h in flats[y].hyperplanes.ones() {
                    row[h] = y as u32;
                }
                for c in cands {
                    let idx = base
                        + keys
                            .binary_search_by(|probe| probe.0.cmp(c.equations.entries()))
                            .expect("candidate key present");
                    for h in c.hyperplanes.difference(&flats[y].hyperplanes) {
                        row[h] = idx as u32;
                    }
                }
            }
            join.extend(level_join);

            let new_flats: Vec<Flat<F>> = keys
                .into_iter()
                .map(|(_, c)| Flat {
                    equations: c.equations.clone(),
                    hyperplanes: c.hyperplanes.clone(),
                    dim: k - c.equations.nrows(),
                })
                .collect();
            drop(candidates);
            let next = base..base + new_flats.len();
            flats.extend(new_flats);
            if !next.is_empty() {
                level_starts.push(base);
            }
            level = next;
        }

        let mobius = compute_mobius(&flats, &level_starts, &join, m)?;
        Ok(FlatLattice {
            arrangement: arrangement.clone(),
            flats,
            level_starts,
            mobius,
            join,
        })
    }

    pub fn arrangement(&self) -> &Arrangement<F> {
        &self.arrangement
    }

    pub fn flats(&self) -> &[Flat<F>] {
        &self.flats
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    /// Index of the bottom element, the ambient space.
    pub fn bottom(&self) -> usize {
        0
    }

    /// Highest codimension present (the rank of the arrangement).
    pub fn rank(&self) -> usize {
        self.level_starts.len() - 1
    }

    /// Indices of the flats of codimension `codim`.
    pub fn level(&self, codim: usize) -> std::ops::Range<usize> {
        match self.level_starts.get(codim) {
            None => 0..0,
            Some(&s) => s..self.level_starts.get(codim + 1).copied().unwrap_or(self.flats.len()),
        }
    }

    /// Number of flats of each codimension 0..=rank.
    pub fn level_sizes(&self) -> Vec<usize> {
        (0..=self.rank()).map(|c| self.level(c).len()).collect()
    }

    /// `y <= x` in the lattice, i.e. flat x is contained in flat y.
    pub fn leq(&self, y: usize, x: usize) -> bool {
        self.flats[y].hyperplanes.is_subset(&self.flats[x].hyperplanes)
    }

    /// The flat `y ∩ h` for the arrangement's `h`-th hyperplane.
    pub fn meet_hyperplane(&self, y: usize, h: usize) -> usize {
        self.join[y * self.arrangement.len() + h] as usize
    }

    /// Locate a flat by (not necessarily canonical) defining equations.
    pub fn find(&self, equations: &RowMatrix<F>) -> Option<usize> {
        let canon = equations.rref();
        let range = self.level(canon.nrows());
        let slice = &self.flats[range.clone()];
        slice
            .binary_search_by(|f| f.equations.entries().cmp(canon.entries()))
            .ok()
            .map(|i| range.start + i)
    }

    /// `mu(0, x)`.
    pub fn mobius(&self, x: usize) -> i128 {
        self.mobius[x]
    }

    pub fn mobius_values(&self) -> &[i128] {
        &self.mobius
    }

    /// Whether `(-1)^codim(x) mu(0, x) > 0` for every flat.
    pub fn sign_condition_holds(&self) -> bool {
        self.flats
            .iter()
            .zip(&self.mobius)
            .all(|(f, &mu)| if f.codim() % 2 == 0 { mu > 0 } else { mu < 0 })
    }

    /// The characteristic polynomial `sum_x mu(0, x) t^dim(x)`.
    pub fn char_poly(&self) -> Result<SignedCharPoly> {
        SignedCharPoly::from_lattice(self)
    }
}

fn compute_mobius<F: Field>(flats: &[Flat<F>], level_starts: &[usize], join: &[u32], m: usize) -> Result<Vec<i128>> {
    let n = flats.len();
    let mut mobius = vec![0i128; n];
    mobius[0] = 1;
    for (lvl, &start) in level_starts.iter().enumerate().skip(1) {
        let end = level_starts.get(lvl + 1).copied().unwrap_or(n);
        let done = &mobius;
        let values: Vec<Result<i128>> = (start..end)
            .into_par_iter()
            .map_init(
                || (vec![u32::MAX; n], Vec::new()),
                |(seen, stack), x| {
                    // Walk the interval [0, x) through single-hyperplane meets
                    // using only hyperplanes that contain x.
                    let hs: Vec<usize> = flats[x].hyperplanes.ones().collect();
                    let stamp = x as u32;
                    seen[0] = stamp;
                    stack.push(0usize);
                    let mut sum: i128 = 0;
                    while let Some(y) = stack.pop() {
                        sum = sum.checked_add(done[y]).ok_or(Error::MobiusOverflow)?;
                        let row = &join[y * m..(y + 1) * m];
                        for &h in &hs {
                            let z = row[h] as usize;
                            if z != x && seen[z] != stamp {
                                seen[z] = stamp;
                                stack.push(z);
                            }
                        }
                    }
                    sum.checked_neg().ok_or(Error::MobiusOverflow)
                },
            )
            .collect();
        for (x, v) in (start..end).zip(values) {
            mobius[x] = v?;
        }
    }
    Ok(mobius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Prime, PrimeField, Rationals};

    fn f3() -> PrimeField {
        PrimeField::new(Prime::new(3).unwrap())
    }

    fn set3<F: Field>(field: F) -> Arrangement<F> {
        Arrangement::from_i64_forms(field, 3, &[&[1, -1, 0], &[1, 0, -1], &[0, 1, -1], &[1, 1, 1]]).unwrap()
    }

    #[test]
    fn single_hyperplane() {
        let a = Arrangement::from_i64_forms(f3(), 2, &[&[1, -1]]).unwrap();
        let l = FlatLattice::build(&a).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.mobius_values(), &[1, -1]);
        assert_eq!(l.flats()[1].dim(), 1);
    }

    #[test]
    fn set_h3_over_f3() {
        let l = FlatLattice::build(&set3(f3())).unwrap();
        assert_eq!(l.level_sizes(), vec![1, 4, 1]);
        let diag = l.level(2).start;
        assert_eq!(l.mobius(diag), 3);
        // the diagonal (x,x,x): equations x1 = x3, x2 = x3
        let eqs = RowMatrix::from_i64_rows(f3(), 3, &[&[1, 0, -1], &[0, 1, -1]]).unwrap();
        assert_eq!(l.find(&eqs), Some(diag));
        // it lies on all four hyperplanes, including x1+x2+x3 = 0
        assert_eq!(l.flats()[diag].hyperplanes().count_ones(..), 4);
        assert!(l.sign_condition_holds());
    }

    #[test]
    fn set_h3_over_rationals() {
        let l = FlatLattice::build(&set3(Rationals)).unwrap();
        assert_eq!(l.level_sizes(), vec![1, 4, 4, 1]);
        let mut lines: Vec<i128> = l.level(2).map(|x| l.mobius(x)).collect();
        lines.sort();
        assert_eq!(lines, vec![1, 1, 1, 2]);
        assert_eq!(l.mobius(l.level(3).start), -2);
    }

    #[test]
    fn order_and_meets_are_consistent() {
        let l = FlatLattice::build(&set3(Rationals)).unwrap();
        let m = l.arrangement().len();
        for y in 0..l.len() {
            assert!(l.leq(0, y));
            assert!(l.leq(y, y));
            for h in 0..m {
                let z = l.meet_hyperplane(y, h);
                assert!(l.leq(y, z));
                assert!(l.flats()[z].hyperplanes().contains(h));
                // order agrees with row-space containment of equations
                let a = l.flats()[z].equations();
                let b = l.flats()[y].equations();
                assert!(a.row_space_contains(b).unwrap());
            }
        }
    }

    #[test]
    fn empty_arrangement() {
        let a = Arrangement::<PrimeField>::new(f3(), 4, vec![]).unwrap();
        let l = FlatLattice::build(&a).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.rank(), 0);
        let a0 = Arrangement::<PrimeField>::new(f3(), 0, vec![]).unwrap();
        assert_eq!(FlatLattice::build(&a0).unwrap().len(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let err = FlatLattice::build_with(&set3(Rationals), LatticeOptions { budget: 3 }).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { limit: 3 }));
    }
}
