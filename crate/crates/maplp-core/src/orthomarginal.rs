//! Dense, desk-scale implementation of margins, the ortho-marginal
//! projection, local-consistency checking of pseudo-marginal sets, and
//! lifting a consistent set back to a global function.
//!
//! The projection of `f` onto the span of functions local to a hypersite
//! collection `C` is a weighted sum of f's margins over the frontier
//! closure of `C`:
//!
//! ```text
//! (O_C f)(x) = sum over c in closure of  rho_c * f_c(x_c) / L^(n - |c|)
//! ```
//!
//! with the integer weights from [`rho_coefficients`]. Everything here is
//! dense on purpose: this module exists to verify the algebra exactly, not
//! to scale.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hypersites::{rho_coefficients, Hypersite, HypersiteError, HypersiteSet};
use crate::model::{decode_config, encode_config, table_len, Model, ModelError};
use crate::scalar::{checked_pow, scalar_pow, tol, Scalar};

/// Default cap on dense table sizes (`L^n`), overridable per call site.
pub const DEFAULT_DENSE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrthoError {
    #[error("dense table of size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("dense table has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("dense table size overflow: {num_labels}^{num_sites}")]
    SizeOverflow { num_sites: usize, num_labels: usize },
    #[error("hypersite {scope} is not inside the site domain 1..={num_sites}")]
    ScopeOutOfDomain { scope: Hypersite, num_sites: usize },
    #[error("table over {scope} has {got} entries, expected {expected}")]
    TableLength { scope: Hypersite, expected: usize, got: usize },
    #[error("duplicate scope {0} in marginal set")]
    DuplicateScope(Hypersite),
    #[error("marginal set is not locally consistent ({violations} violation(s))")]
    Inconsistent { violations: usize },
    #[error("frontier tables have unequal total sums; no common global source exists")]
    UnequalTotals,
    #[error(transparent)]
    Hypersite(#[from] HypersiteError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A dense real-valued function over all `L^n` assignments, indexed with the
/// same little-endian convention as factor tables (site 1 least significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFunction<T> {
    num_sites: usize,
    num_labels: usize,
    values: Vec<T>,
}

impl<T: Scalar> DenseFunction<T> {
    pub fn new(num_sites: usize, num_labels: usize, values: Vec<T>) -> Result<Self, OrthoError> {
        Self::with_cap(num_sites, num_labels, values, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(
        num_sites: usize,
        num_labels: usize,
        values: Vec<T>,
        cap: usize,
    ) -> Result<Self, OrthoError> {
        let size = checked_pow(num_labels, num_sites)
            .ok_or(OrthoError::SizeOverflow { num_sites, num_labels })?;
        if size > cap {
            return Err(OrthoError::CapExceeded { size, cap });
        }
        if values.len() != size {
            return Err(OrthoError::WrongLength { expected: size, got: values.len() });
        }
        Ok(Self { num_sites, num_labels, values })
    }

    pub fn zero(num_sites: usize, num_labels: usize) -> Result<Self, OrthoError> {
        let size = checked_pow(num_labels, num_sites)
            .ok_or(OrthoError::SizeOverflow { num_sites, num_labels })?;
        Self::new(num_sites, num_labels, vec![T::zero(); size])
    }

    /// Tabulates the full cost function of a model.
    pub fn from_model(model: &Model<T>, cap: usize) -> Result<Self, OrthoError> {
        let size = checked_pow(model.num_labels(), model.num_sites()).ok_or(
            OrthoError::SizeOverflow {
                num_sites: model.num_sites(),
                num_labels: model.num_labels(),
            },
        )?;
        if size > cap {
            return Err(OrthoError::CapExceeded { size, cap });
        }
        let mut values = Vec::with_capacity(size);
        for idx in 0..size {
            let coords = decode_config(idx, model.num_labels(), model.num_sites());
            values.push(model.evaluate(&crate::model::Assignment::new(coords))?);
        }
        Self::with_cap(model.num_sites(), model.num_labels(), values, cap)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> T {
        let mut acc = T::zero();
        for v in &self.values {
            acc.add_assign_ref(v);
        }
        acc
    }

    pub fn l1_norm(&self) -> T {
        let mut acc = T::zero();
        for v in &self.values {
            acc.add_assign_ref(&v.abs());
        }
        acc
    }

    pub fn inner(&self, other: &DenseFunction<T>) -> T {
        debug_assert_eq!(self.len(), other.len());
        let mut acc = T::zero();
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            acc.add_assign_ref(&a.mul_ref(b));
        }
        acc
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> DenseFunction<T> {
        DenseFunction {
            num_sites: self.num_sites,
            num_labels: self.num_labels,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn zip(&self, other: &DenseFunction<T>, f: impl Fn(&T, &T) -> T) -> DenseFunction<T> {
        debug_assert_eq!(self.len(), other.len());
        DenseFunction {
            num_sites: self.num_sites,
            num_labels: self.num_labels,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Margin with respect to a hypersite: the sum of `f` over every
    /// assignment agreeing with the given local configuration. The margin
    /// with respect to the empty hypersite is the single total sum.
    pub fn margin(&self, scope: &Hypersite) -> Result<Vec<T>, OrthoError> {
        if scope.max_site().is_some_and(|m| m > self.num_sites) {
            return Err(OrthoError::ScopeOutOfDomain {
                scope: scope.clone(),
                num_sites: self.num_sites,
            });
        }
        let out_len = table_len(self.num_labels, scope.len())?;
        let mut out = vec![T::zero(); out_len];
        for (idx, v) in self.values.iter().enumerate() {
            out[local_index_of(idx, scope, self.num_labels)].add_assign_ref(v);
        }
        Ok(out)
    }
}

/// Local-table index of the sub-configuration of global index `idx` on `scope`.
fn local_index_of(idx: usize, scope: &Hypersite, num_labels: usize) -> usize {
    let mut out = 0;
    for &site in scope.sites().iter().rev() {
        let digit = digit_at(idx, site - 1, num_labels);
        out = out * num_labels + digit;
    }
    out
}

fn digit_at(idx: usize, pos: usize, num_labels: usize) -> usize {
    (idx / num_labels.pow(pos as u32)) % num_labels
}

/// Marginalizes a local table over `scope` onto a sub-scope of it.
pub fn margin_local<T: Scalar>(
    table: &[T],
    scope: &Hypersite,
    onto: &Hypersite,
    num_labels: usize,
) -> Vec<T> {
    let positions = onto.positions_in(scope).expect("onto must be a subset of scope");
    let out_len = table_len(num_labels, onto.len()).expect("table size");
    let mut out = vec![T::zero(); out_len];
    for (idx, v) in table.iter().enumerate() {
        let cfg = decode_config(idx, num_labels, scope.len());
        let sub: Vec<usize> = positions.iter().map(|&p| cfg[p]).collect();
        out[encode_config(&sub, num_labels)].add_assign_ref(v);
    }
    out
}

/// Per-hypersite tables indexed against a hypersite collection.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMarginalSet<T> {
    num_labels: usize,
    scopes: HypersiteSet,
    tables: BTreeMap<Hypersite, Vec<T>>,
}

/// Delta-marginal sets share the representation; the distinction is in which
/// axioms (probability vs. delta-probability) the relaxation enforced.
pub type DeltaMarginalSet<T> = PseudoMarginalSet<T>;

impl<T: Scalar> PseudoMarginalSet<T> {
    pub fn new(
        num_labels: usize,
        entries: Vec<(Hypersite, Vec<T>)>,
    ) -> Result<Self, OrthoError> {
        let mut tables = BTreeMap::new();
        for (scope, table) in entries {
            let expected = table_len(num_labels, scope.len())?;
            if table.len() != expected {
                return Err(OrthoError::TableLength { scope, expected, got: table.len() });
            }
            if tables.insert(scope.clone(), table).is_some() {
                return Err(OrthoError::DuplicateScope(scope));
            }
        }
        let scopes = HypersiteSet::from_members(tables.keys().cloned().collect());
        Ok(Self { num_labels, scopes, tables })
    }

    /// True margins of a dense function with respect to every member of `c`.
    pub fn margins_of(
        f: &DenseFunction<T>,
        c: &HypersiteSet,
    ) -> Result<Self, OrthoError> {
        let entries = c
            .iter()
            .map(|scope| Ok((scope.clone(), f.margin(scope)?)))
            .collect::<Result<Vec<_>, OrthoError>>()?;
        Self::new(f.num_labels(), entries)
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn scopes(&self) -> &HypersiteSet {
        &self.scopes
    }

    pub fn table(&self, scope: &Hypersite) -> Option<&[T]> {
        self.tables.get(scope).map(|t| t.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Hypersite, &[T])> {
        self.tables.iter().map(|(h, t)| (h, t.as_slice()))
    }

    pub fn table_sum(&self, scope: &Hypersite) -> Option<T> {
        self.tables.get(scope).map(|t| {
            let mut acc = T::zero();
            for v in t {
                acc.add_assign_ref(v);
            }
            acc
        })
    }

    pub fn table_l1(&self, scope: &Hypersite) -> Option<T> {
        self.tables.get(scope).map(|t| {
            let mut acc = T::zero();
            for v in t {
                acc.add_assign_ref(&v.abs());
            }
            acc
        })
    }
}

/// One failed local-consistency identity.
#[derive(Debug, Clone, PartialEq)]
pub enum ConsistencyViolation {
    /// Margins of two overlapping frontier tables disagree on their overlap.
    OverlapMismatch { a: Hypersite, b: Hypersite, overlap: Hypersite, config: Vec<usize> },
    /// A non-frontier table differs from the margin of its ancestor.
    AncestorMismatch { member: Hypersite, ancestor: Hypersite, config: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub ok: bool,
    pub violations: Vec<ConsistencyViolation>,
}

fn tables_agree<T: Scalar>(a: &T, b: &T) -> bool {
    if T::EXACT {
        a == b
    } else {
        let scale = 1.0 + a.to_f64().abs().max(b.to_f64().abs());
        (a.to_f64() - b.to_f64()).abs() <= tol::CONSISTENCY_REL * scale
    }
}

/// Checks the local-consistency identities: overlapping frontier pairs must
/// agree on their shared margin, and each non-frontier table must equal the
/// margin of its ancestor. Nothing else is checked; in particular the total
/// sums of disjoint frontier members are unconstrained here (the relaxation
/// axioms pin those).
pub fn check_pseudo_marginals<T: Scalar>(p: &PseudoMarginalSet<T>) -> ConsistencyReport {
    let mut violations = Vec::new();
    let front = match p.scopes().frontier() {
        Ok(f) => f,
        Err(_) => return ConsistencyReport { ok: true, violations },
    };
    let anc = p.scopes().ancestry().expect("frontier exists");

    let members: Vec<&Hypersite> = front.iter().collect();
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            let overlap = members[i].intersection(members[j]);
            if overlap.is_empty() {
                continue;
            }
            let ma = margin_local(p.table(members[i]).unwrap(), members[i], &overlap, p.num_labels);
            let mb = margin_local(p.table(members[j]).unwrap(), members[j], &overlap, p.num_labels);
            for (idx, (a, b)) in ma.iter().zip(mb.iter()).enumerate() {
                if !tables_agree(a, b) {
                    violations.push(ConsistencyViolation::OverlapMismatch {
                        a: members[i].clone(),
                        b: members[j].clone(),
                        overlap: overlap.clone(),
                        config: decode_config(idx, p.num_labels, overlap.len()),
                    });
                }
            }
        }
    }
    for (member, ancestor) in &anc {
        let derived = margin_local(p.table(ancestor).unwrap(), ancestor, member, p.num_labels);
        let own = p.table(member).unwrap();
        for (idx, (a, b)) in own.iter().zip(derived.iter()).enumerate() {
            if !tables_agree(a, b) {
                violations.push(ConsistencyViolation::AncestorMismatch {
                    member: member.clone(),
                    ancestor: ancestor.clone(),
                    config: decode_config(idx, p.num_labels, member.len()),
                });
            }
        }
    }
    ConsistencyReport { ok: violations.is_empty(), violations }
}

/// The ortho-marginal projection of `f` with respect to `c`.
pub fn project<T: Scalar>(
    f: &DenseFunction<T>,
    c: &HypersiteSet,
) -> Result<DenseFunction<T>, OrthoError> {
    let front = c.frontier()?;
    let fclos = c.frontier_closure()?;
    let rho = rho_coefficients(&fclos, &front);

    // Per closure member: margin table and the scaled coefficient
    // rho_c / L^(n - |c|). Members with zero coefficient drop out.
    let mut terms: Vec<(&Hypersite, Vec<T>, T)> = Vec::new();
    for member in fclos.iter() {
        let r = rho.get(member).unwrap();
        if r == 0 {
            continue;
        }
        let weight = T::from_int(r)
            .div_ref(&scalar_pow::<T>(f.num_labels(), f.num_sites() - member.len()));
        terms.push((member, f.margin(member)?, weight));
    }

    let mut values = Vec::with_capacity(f.len());
    for idx in 0..f.len() {
        let mut acc = T::zero();
        for (member, margin, weight) in &terms {
            let local = local_index_of(idx, member, f.num_labels());
            acc.add_assign_ref(&margin[local].mul_ref(weight));
        }
        values.push(acc);
    }
    DenseFunction::with_cap(f.num_sites(), f.num_labels(), values, usize::MAX)
}

/// Lifts a locally consistent marginal set to a global function whose
/// margins with respect to the set's scopes reproduce the tables exactly:
///
/// ```text
/// u = (v - O_C v) + sum over closure of rho_c * u_c(x_c) / L^(n - |c|)
/// ```
///
/// The free choice of `v` parameterizes the (non-unique) completions.
/// Requires consistency and equal frontier totals; with unequal totals on
/// disconnected frontiers no global source exists at all.
pub fn lift<T: Scalar>(
    p: &PseudoMarginalSet<T>,
    v: &DenseFunction<T>,
) -> Result<DenseFunction<T>, OrthoError> {
    let report = check_pseudo_marginals(p);
    if !report.ok {
        return Err(OrthoError::Inconsistent { violations: report.violations.len() });
    }
    let front = p.scopes().frontier()?;
    let mut sums = front.iter().map(|s| p.table_sum(s).unwrap());
    if let Some(first) = sums.next() {
        for s in sums {
            if T::EXACT {
                if s != first {
                    return Err(OrthoError::UnequalTotals);
                }
            } else if !tables_agree(&s, &first) {
                return Err(OrthoError::UnequalTotals);
            }
        }
    }

    let fclos = p.scopes().frontier_closure()?;
    let rho = rho_coefficients(&fclos, &front);
    let n = v.num_sites();
    let num_labels = v.num_labels();

    // Tables for closure members come from the lexicographically smallest
    // frontier superset; consistency makes any choice agree.
    let mut terms: Vec<(&Hypersite, Vec<T>, T)> = Vec::new();
    for member in fclos.iter() {
        let r = rho.get(member).unwrap();
        if r == 0 {
            continue;
        }
        let table = match p.table(member) {
            Some(t) if front.contains(member) => t.to_vec(),
            _ => {
                let host = front
                    .iter()
                    .find(|t| member.is_subset_of(t))
                    .expect("closure member sits under a frontier member");
                margin_local(p.table(host).unwrap(), host, member, num_labels)
            }
        };
        let weight = T::from_int(r).div_ref(&scalar_pow::<T>(num_labels, n - member.len()));
        terms.push((member, table, weight));
    }

    let proj_v = project(v, p.scopes())?;
    let mut values = Vec::with_capacity(v.len());
    for idx in 0..v.len() {
        let mut acc = v.values()[idx].sub_ref(&proj_v.values()[idx]);
        for (member, table, weight) in &terms {
            let local = local_index_of(idx, member, num_labels);
            acc.add_assign_ref(&table[local].mul_ref(weight));
        }
        values.push(acc);
    }
    DenseFunction::with_cap(n, num_labels, values, usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hs(sites: &[usize]) -> Hypersite {
        Hypersite::new(sites.to_vec()).unwrap()
    }

    fn set(scopes: &[&[usize]]) -> HypersiteSet {
        HypersiteSet::from_members(scopes.iter().map(|s| hs(s)).collect())
    }

    fn random_dense(n: usize, l: usize, rng: &mut ChaCha8Rng) -> DenseFunction<Rat> {
        let size = l.pow(n as u32);
        let values = (0..size).map(|_| Rat::from_int(rng.random_range(-9..=9))).collect();
        DenseFunction::new(n, l, values).unwrap()
    }

    #[test]
    fn margin_of_constant_function() {
        let f = DenseFunction::new(3, 2, vec![Rat::one(); 8]).unwrap();
        assert_eq!(f.margin(&hs(&[2])).unwrap(), vec![Rat::from_int(4), Rat::from_int(4)]);
    }

    #[test]
    fn margin_of_indicator() {
        let mut vals = vec![Rat::zero(); 8];
        vals[0] = Rat::one(); // indicator of (0,0,0)
        let f = DenseFunction::new(3, 2, vals).unwrap();
        assert_eq!(
            f.margin(&hs(&[1, 2])).unwrap(),
            vec![Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()]
        );
    }

    #[test]
    fn margin_onto_empty_is_total_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_dense(3, 2, &mut rng);
        assert_eq!(f.margin(&Hypersite::empty()).unwrap(), vec![f.total()]);
    }

    #[test]
    fn projection_of_zero_margin_function_vanishes() {
        // f = indicator(000) - indicator(100) has zero margins over {2,3}
        // and the empty set, so projecting onto C = {{2,3}} kills it.
        let mut vals = vec![Rat::zero(); 8];
        vals[0] = Rat::one();
        vals[1] = -Rat::one();
        let f = DenseFunction::new(3, 2, vals).unwrap();
        let c = set(&[&[2, 3]]);
        let proj = project(&f, &c).unwrap();
        assert!(proj.values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn projection_fixes_local_sums() {
        // f built as h_{12}(x_1,x_2) + h_{23}(x_2,x_3) lies in the local
        // span, so projection leaves it untouched.
        let c = set(&[&[1, 2], &[2, 3]]);
        let h12 = [3, -1, 2, 5];
        let h23 = [0, 4, -2, 1];
        let mut vals = Vec::new();
        for idx in 0..8 {
            let coords = decode_config(idx, 2, 3);
            let a = h12[encode_config(&[coords[0], coords[1]], 2)];
            let b = h23[encode_config(&[coords[1], coords[2]], 2)];
            vals.push(Rat::from_int(a + b));
        }
        let f = DenseFunction::new(3, 2, vals).unwrap();
        assert_eq!(project(&f, &c).unwrap(), f);
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_dense(3, 2, &mut rng);
            let g = random_dense(3, 2, &mut rng);
            let c = set(&[&[1, 2], &[2, 3]]);
            let pf = project(&f, &c).unwrap();
            assert_eq!(project(&pf, &c).unwrap(), pf);
            // <f - Of, Og> = 0 exactly.
            let residual = f.zip(&pf, |a, b| a.sub_ref(b));
            let pg = project(&g, &c).unwrap();
            assert!(residual.inner(&pg).is_zero());
            // Margin preservation over the whole closure.
            for member in c.frontier_closure().unwrap().iter() {
                assert_eq!(pf.margin(member).unwrap(), f.margin(member).unwrap());
            }
        }
    }

    #[test]
    fn frontier_margins_determine_local_functions() {
        // Two members of the local span with equal frontier margins must be
        // pointwise equal.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let c = set(&[&[1, 2], &[2, 3]]);
        let f = project(&random_dense(3, 2, &mut rng), &c).unwrap();
        let margins = PseudoMarginalSet::margins_of(&f, &c).unwrap();
        let lifted = lift(&margins, &random_dense(3, 2, &mut rng)).unwrap();
        let g = project(&lifted, &c).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn true_margins_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_dense(4, 2, &mut rng);
        let c = set(&[&[1, 2, 3], &[2, 3, 4], &[2]]);
        let p = PseudoMarginalSet::margins_of(&f, &c).unwrap();
        assert!(check_pseudo_marginals(&p).ok);
    }

    #[test]
    fn inconsistent_overlap_is_reported() {
        let half = Rat::from_int(1) / Rat::from_int(2);
        let p12 = vec![half.clone(), Rat::zero(), Rat::zero(), half.clone()];
        let p23 = vec![Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()];
        let p = PseudoMarginalSet::new(
            2,
            vec![(hs(&[1, 2]), p12), (hs(&[2, 3]), p23)],
        )
        .unwrap();
        let report = check_pseudo_marginals(&p);
        assert!(!report.ok);
        assert!(matches!(
            report.violations[0],
            ConsistencyViolation::OverlapMismatch { .. }
        ));
    }

    #[test]
    fn disjoint_scopes_pass_consistency_regardless_of_sums() {
        // The overlap identities quantify over intersecting pairs only; the
        // relaxation axioms are what pin total sums.
        let p = PseudoMarginalSet::new(
            2,
            vec![
                (hs(&[1, 2]), vec![Rat::one(); 4]),
                (hs(&[3, 4]), vec![Rat::zero(); 4]),
            ],
        )
        .unwrap();
        assert!(check_pseudo_marginals(&p).ok);
    }

    #[test]
    fn ancestor_equation_checked_for_non_frontier_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_dense(3, 2, &mut rng);
        let c = set(&[&[1, 2], &[2, 3], &[2]]);
        let good = PseudoMarginalSet::margins_of(&f, &c).unwrap();
        assert!(check_pseudo_marginals(&good).ok);

        let mut entries: Vec<(Hypersite, Vec<Rat>)> =
            good.iter().map(|(h, t)| (h.clone(), t.to_vec())).collect();
        for (h, t) in &mut entries {
            if h == &hs(&[2]) {
                t[0] = t[0].add_ref(&Rat::one());
            }
        }
        let bad = PseudoMarginalSet::new(2, entries).unwrap();
        let report = check_pseudo_marginals(&bad);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, ConsistencyViolation::AncestorMismatch { .. })));
    }

    #[test]
    fn lift_reproduces_source_when_v_is_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = random_dense(3, 2, &mut rng);
        let c = set(&[&[1, 2], &[2, 3]]);
        let p = PseudoMarginalSet::margins_of(&f, &c).unwrap();
        assert_eq!(lift(&p, &f).unwrap(), f);
    }

    #[test]
    fn lift_with_zero_v_gives_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let f = random_dense(3, 2, &mut rng);
        let c = set(&[&[1, 2], &[2, 3]]);
        let p = PseudoMarginalSet::margins_of(&f, &c).unwrap();
        let zero = DenseFunction::zero(3, 2).unwrap();
        assert_eq!(lift(&p, &zero).unwrap(), project(&f, &c).unwrap());
    }

    #[test]
    fn lift_margins_match_inputs_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let f = random_dense(4, 2, &mut rng);
            let c = set(&[&[1, 2], &[2, 3], &[3, 4], &[2]]);
            let p = PseudoMarginalSet::margins_of(&f, &c).unwrap();
            let v = random_dense(4, 2, &mut rng);
            let u = lift(&p, &v).unwrap();
            for scope in c.iter() {
                assert_eq!(u.margin(scope).unwrap().as_slice(), p.table(scope).unwrap());
            }
        }
    }

    #[test]
    fn lift_rejects_inconsistent_input() {
        let half = Rat::from_int(1) / Rat::from_int(2);
        let p = PseudoMarginalSet::new(
            2,
            vec![
                (hs(&[1, 2]), vec![half.clone(), Rat::zero(), Rat::zero(), half]),
                (hs(&[2, 3]), vec![Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()]),
            ],
        )
        .unwrap();
        let v = DenseFunction::zero(3, 2).unwrap();
        assert!(matches!(lift(&p, &v), Err(OrthoError::Inconsistent { .. })));
    }

    #[test]
    fn lift_rejects_unequal_disjoint_totals() {
        let p = PseudoMarginalSet::new(
            2,
            vec![
                (hs(&[1]), vec![Rat::one(), Rat::zero()]),
                (hs(&[2]), vec![Rat::zero(), Rat::zero()]),
            ],
        )
        .unwrap();
        let v = DenseFunction::zero(2, 2).unwrap();
        assert!(matches!(lift(&p, &v), Err(OrthoError::UnequalTotals)));
    }
}
