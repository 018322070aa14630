//! Cost models over labelled sites: dense factor tables, evaluation, basic
//! diagnostics, and normalization to frontier form.
//!
//! Table indexing convention, used everywhere in this crate: a configuration
//! over a sorted scope `(i_1 < ... < i_k)` maps to index
//! `sum_j x_{i_{j+1}} * L^j`, i.e. the *first* site of the sorted scope is
//! the least significant digit.

use thiserror::Error;

use crate::hypersites::{Hypersite, HypersiteError, HypersiteSet};
use crate::scalar::{checked_pow, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Hypersite(#[from] HypersiteError),
    #[error("model needs at least one site")]
    NoSites,
    #[error("label count must be at least 2, got {0}")]
    TooFewLabels(usize),
    #[error("model needs at least one factor")]
    NoFactors,
    #[error("factor scope must be non-empty")]
    EmptyScope,
    #[error("factor scope {scope} exceeds site count {num_sites}")]
    ScopeOutOfRange { scope: Hypersite, num_sites: usize },
    #[error("factor table over {scope} has {got} entries, expected {expected}")]
    TableLength { scope: Hypersite, expected: usize, got: usize },
    #[error("table size overflow for scope of arity {arity} with {num_labels} labels")]
    TableTooLarge { arity: usize, num_labels: usize },
    #[error("assignment has {got} labels, model has {expected} sites")]
    AssignmentLength { expected: usize, got: usize },
    #[error("label {label} at site {site} is out of range for {num_labels} labels")]
    LabelOutOfRange { site: usize, label: usize, num_labels: usize },
}

/// Number of entries of a dense table over `arity` sites.
pub fn table_len(num_labels: usize, arity: usize) -> Result<usize, ModelError> {
    checked_pow(num_labels, arity).ok_or(ModelError::TableTooLarge { arity, num_labels })
}

/// Table index of a local configuration (first scope site least significant).
pub fn encode_config(labels: &[usize], num_labels: usize) -> usize {
    let mut idx = 0;
    for &x in labels.iter().rev() {
        idx = idx * num_labels + x;
    }
    idx
}

/// Inverse of [`encode_config`].
pub fn decode_config(mut index: usize, num_labels: usize, arity: usize) -> Vec<usize> {
    let mut labels = Vec::with_capacity(arity);
    for _ in 0..arity {
        labels.push(index % num_labels);
        index /= num_labels;
    }
    labels
}

/// All local configurations over `arity` sites in table-index order.
pub fn configs(num_labels: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = checked_pow(num_labels, arity).expect("table size overflow");
    (0..total).map(move |i| decode_config(i, num_labels, arity))
}

/// One local cost term: a dense real table over a scope.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable<T> {
    scope: Hypersite,
    values: Vec<T>,
}

impl<T: Scalar> FactorTable<T> {
    pub fn new(scope: Hypersite, values: Vec<T>) -> Result<Self, ModelError> {
        if scope.is_empty() {
            return Err(ModelError::EmptyScope);
        }
        Ok(Self { scope, values })
    }

    pub fn scope(&self) -> &Hypersite {
        &self.scope
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// A full-length label vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    labels: Vec<usize>,
}

impl Assignment {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sub-configuration restricted to a scope (sites are 1-based).
    pub fn restrict(&self, scope: &Hypersite) -> Vec<usize> {
        scope.sites().iter().map(|&s| self.labels[s - 1]).collect()
    }
}

/// Diagnostics from [`Model::validate`]; advisory only, never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    pub covers: bool,
    pub uncovered_sites: Vec<usize>,
    pub constant_factors: Vec<Hypersite>,
}

/// A sum of local cost tables over a common site domain, immutable after
/// construction. Duplicate scopes are merged (summed) at construction time
/// and factors are kept in lexicographic scope order.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    num_sites: usize,
    num_labels: usize,
    factors: Vec<FactorTable<T>>,
}

impl<T: Scalar> Model<T> {
    pub fn new(
        num_sites: usize,
        num_labels: usize,
        factors: Vec<FactorTable<T>>,
    ) -> Result<Self, ModelError> {
        if num_sites == 0 {
            return Err(ModelError::NoSites);
        }
        if num_labels < 2 {
            return Err(ModelError::TooFewLabels(num_labels));
        }
        if factors.is_empty() {
            return Err(ModelError::NoFactors);
        }
        let mut merged: Vec<FactorTable<T>> = Vec::with_capacity(factors.len());
        for f in factors {
            if f.scope.is_empty() {
                return Err(ModelError::EmptyScope);
            }
            if f.scope.max_site().unwrap() > num_sites {
                return Err(ModelError::ScopeOutOfRange { scope: f.scope, num_sites });
            }
            let expected = table_len(num_labels, f.scope.len())?;
            if f.values.len() != expected {
                return Err(ModelError::TableLength {
                    scope: f.scope,
                    expected,
                    got: f.values.len(),
                });
            }
            match merged.iter_mut().find(|m| m.scope == f.scope) {
                Some(m) => {
                    for (a, b) in m.values.iter_mut().zip(f.values.iter()) {
                        a.add_assign_ref(b);
                    }
                }
                None => merged.push(f),
            }
        }
        merged.sort_by(|a, b| a.scope.cmp(&b.scope));
        Ok(Self { num_sites, num_labels, factors: merged })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn factors(&self) -> &[FactorTable<T>] {
        &self.factors
    }

    pub fn factor(&self, scope: &Hypersite) -> Option<&FactorTable<T>> {
        self.factors.iter().find(|f| f.scope() == scope)
    }

    pub fn scope_set(&self) -> HypersiteSet {
        HypersiteSet::from_members(self.factors.iter().map(|f| f.scope.clone()).collect())
    }

    pub fn check_assignment(&self, x: &Assignment) -> Result<(), ModelError> {
        if x.labels.len() != self.num_sites {
            return Err(ModelError::AssignmentLength {
                expected: self.num_sites,
                got: x.labels.len(),
            });
        }
        for (i, &l) in x.labels.iter().enumerate() {
            if l >= self.num_labels {
                return Err(ModelError::LabelOutOfRange {
                    site: i + 1,
                    label: l,
                    num_labels: self.num_labels,
                });
            }
        }
        Ok(())
    }

    /// Total cost of an assignment: the sum of every factor's table entry at
    /// the restricted configuration.
    pub fn evaluate(&self, x: &Assignment) -> Result<T, ModelError> {
        self.check_assignment(x)?;
        let mut total = T::zero();
        for f in &self.factors {
            let idx = encode_config(&x.restrict(&f.scope), self.num_labels);
            total.add_assign_ref(&f.values[idx]);
        }
        Ok(total)
    }

    /// Reports whether scopes cover every site and which factors are
    /// constant tables. Neither condition aborts any solve.
    pub fn validate(&self) -> Diagnostics {
        let mut covered = vec![false; self.num_sites];
        for f in &self.factors {
            for &s in f.scope.sites() {
                covered[s - 1] = true;
            }
        }
        let uncovered_sites: Vec<usize> = covered
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| i + 1)
            .collect();
        let constant_factors = self
            .factors
            .iter()
            .filter(|f| f.is_constant())
            .map(|f| f.scope.clone())
            .collect();
        Diagnostics {
            covers: uncovered_sites.is_empty(),
            uncovered_sites,
            constant_factors,
        }
    }

    /// Rewrites the model over the frontier of its scope set: every factor
    /// whose scope is strictly contained in another's is broadcast-added
    /// into its lexicographically smallest frontier superset. Evaluation is
    /// unchanged on every assignment.
    pub fn merge_to_frontier(&self) -> Model<T> {
        let scopes = self.scope_set();
        let front = scopes.frontier().expect("model has factors");
        let anc = scopes.ancestry().expect("frontier members exist");
        let mut kept: Vec<FactorTable<T>> = self
            .factors
            .iter()
            .filter(|f| front.contains(&f.scope))
            .cloned()
            .collect();
        for f in &self.factors {
            if front.contains(&f.scope) {
                continue;
            }
            let target = &anc[&f.scope];
            let host = kept
                .iter_mut()
                .find(|k| &k.scope == target)
                .expect("ancestor scope is a kept factor");
            let positions = f.scope.positions_in(&host.scope).expect("scope inside ancestor");
            for (idx, host_val) in host.values.iter_mut().enumerate() {
                let cfg = decode_config(idx, self.num_labels, host.scope.len());
                let sub: Vec<usize> = positions.iter().map(|&p| cfg[p]).collect();
                let sub_idx = encode_config(&sub, self.num_labels);
                host_val.add_assign_ref(&f.values[sub_idx]);
            }
        }
        kept.sort_by(|a, b| a.scope.cmp(&b.scope));
        Model {
            num_sites: self.num_sites,
            num_labels: self.num_labels,
            factors: kept,
        }
    }

    /// True when every scope is maximal in the scope set.
    pub fn is_frontier_form(&self) -> bool {
        let scopes = self.scope_set();
        scopes.frontier().map(|f| f.len() == scopes.len()).unwrap_or(false)
    }
}

/// A model restricted by clamping a set of sites to fixed labels. Sites are
/// renumbered contiguously; `kept_sites[new - 1]` is the originating site.
/// `model` is `None` when nothing is left to optimize (all sites clamped, or
/// every factor was fully clamped); `offset` carries the clamped-away cost.
#[derive(Debug, Clone)]
pub struct ClampedModel<T> {
    pub model: Option<Model<T>>,
    pub offset: T,
    pub kept_sites: Vec<usize>,
}

/// Clamps the sites of `scope` to `labels` and folds the fixed coordinates
/// into the surviving tables; factors entirely inside the clamp become part
/// of the scalar offset.
pub fn conditioned_resolve<T: Scalar>(
    model: &Model<T>,
    scope: &Hypersite,
    labels: &[usize],
) -> Result<ClampedModel<T>, ModelError> {
    if labels.len() != scope.len() {
        return Err(ModelError::AssignmentLength { expected: scope.len(), got: labels.len() });
    }
    for (&site, &l) in scope.sites().iter().zip(labels) {
        if l >= model.num_labels() {
            return Err(ModelError::LabelOutOfRange { site, label: l, num_labels: model.num_labels() });
        }
    }
    let label_of = |site: usize| -> Option<usize> {
        scope.sites().iter().position(|&s| s == site).map(|p| labels[p])
    };
    let kept_sites: Vec<usize> = (1..=model.num_sites()).filter(|&s| !scope.contains(s)).collect();
    let new_index = |site: usize| -> usize {
        kept_sites.binary_search(&site).expect("kept site") + 1
    };

    let mut offset = T::zero();
    let mut factors: Vec<FactorTable<T>> = Vec::new();
    for f in model.factors() {
        let fixed_part = f.scope().intersection(scope);
        let free_part = f.scope().difference(scope);
        if free_part.is_empty() {
            let cfg: Vec<usize> = f.scope().sites().iter().map(|&s| label_of(s).unwrap()).collect();
            offset.add_assign_ref(&f.values()[encode_config(&cfg, model.num_labels())]);
            continue;
        }
        let _ = fixed_part;
        let new_scope =
            Hypersite::new(free_part.sites().iter().map(|&s| new_index(s)).collect())?;
        let len = table_len(model.num_labels(), free_part.len())?;
        let mut values = Vec::with_capacity(len);
        for idx in 0..len {
            let free_cfg = decode_config(idx, model.num_labels(), free_part.len());
            let full_cfg: Vec<usize> = f
                .scope()
                .sites()
                .iter()
                .map(|&s| match label_of(s) {
                    Some(l) => l,
                    None => {
                        let p = free_part.sites().iter().position(|&t| t == s).unwrap();
                        free_cfg[p]
                    }
                })
                .collect();
            values.push(f.values()[encode_config(&full_cfg, model.num_labels())].clone());
        }
        factors.push(FactorTable::new(new_scope, values)?);
    }

    let model = if kept_sites.is_empty() || factors.is_empty() {
        None
    } else {
        Some(Model::new(kept_sites.len(), model.num_labels(), factors)?)
    };
    Ok(ClampedModel { model, offset, kept_sites })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    pub(crate) fn hs(sites: &[usize]) -> Hypersite {
        Hypersite::new(sites.to_vec()).unwrap()
    }

    fn rat_values(vals: &[i64]) -> Vec<Rat> {
        vals.iter().map(|&v| Rat::from_int(v)).collect()
    }

    /// Two binary XOR factors on {1,2} and {2,3}.
    pub(crate) fn model_m1() -> Model<Rat> {
        let xor = rat_values(&[0, 1, 1, 0]);
        Model::new(
            3,
            2,
            vec![
                FactorTable::new(hs(&[1, 2]), xor.clone()).unwrap(),
                FactorTable::new(hs(&[2, 3]), xor).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn index_round_trip() {
        for arity in 0..4 {
            for l in 2..4 {
                let total = table_len(l, arity).unwrap();
                for idx in 0..total {
                    let cfg = decode_config(idx, l, arity);
                    assert_eq!(encode_config(&cfg, l), idx);
                }
            }
        }
    }

    #[test]
    fn evaluate_m1() {
        let m = model_m1();
        let eval = |x: &[usize]| m.evaluate(&Assignment::new(x.to_vec())).unwrap();
        assert_eq!(eval(&[0, 0, 0]), Rat::from_int(0));
        assert_eq!(eval(&[0, 1, 0]), Rat::from_int(2));
        assert_eq!(eval(&[0, 0, 1]), Rat::from_int(1));
    }

    #[test]
    fn evaluate_rejects_bad_assignments() {
        let m = model_m1();
        assert!(matches!(
            m.evaluate(&Assignment::new(vec![0, 1])),
            Err(ModelError::AssignmentLength { .. })
        ));
        assert!(matches!(
            m.evaluate(&Assignment::new(vec![0, 2, 0])),
            Err(ModelError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn duplicate_scopes_are_summed() {
        let m = Model::new(
            2,
            2,
            vec![
                FactorTable::new(hs(&[1, 2]), rat_values(&[0, 1, 1, 0])).unwrap(),
                FactorTable::new(hs(&[1, 2]), rat_values(&[1, 1, 1, 1])).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(m.factors().len(), 1);
        assert_eq!(m.factors()[0].values(), rat_values(&[1, 2, 2, 1]).as_slice());
    }

    #[test]
    fn validate_diagnostics() {
        let m = model_m1();
        let d = m.validate();
        assert!(d.covers);
        assert!(d.constant_factors.is_empty());

        let gap = Model::new(
            3,
            2,
            vec![FactorTable::new(hs(&[1, 2]), rat_values(&[0, 1, 1, 0])).unwrap()],
        )
        .unwrap();
        let d = gap.validate();
        assert!(!d.covers);
        assert_eq!(d.uncovered_sites, vec![3]);

        let constant = Model::new(
            2,
            2,
            vec![FactorTable::new(hs(&[1, 2]), rat_values(&[5, 5, 5, 5])).unwrap()],
        )
        .unwrap();
        assert_eq!(constant.validate().constant_factors, vec![hs(&[1, 2])]);
    }

    #[test]
    fn merge_no_op_on_maximal_scopes() {
        let m = model_m1();
        assert_eq!(m.merge_to_frontier(), m);
    }

    #[test]
    fn merge_broadcasts_subset_factor() {
        let m = Model::new(
            2,
            2,
            vec![
                FactorTable::new(hs(&[1, 2]), rat_values(&[0, 1, 1, 0])).unwrap(),
                FactorTable::new(hs(&[1]), rat_values(&[0, 3])).unwrap(),
            ],
        )
        .unwrap();
        let merged = m.merge_to_frontier();
        assert_eq!(merged.factors().len(), 1);
        // Index order (x1, x2) = 00, 10, 01, 11; the unary table [0,3] on
        // site 1 lands on the entries with x1 = 1.
        assert_eq!(merged.factors()[0].values(), rat_values(&[0, 4, 1, 3]).as_slice());
        for idx in 0..4 {
            let x = Assignment::new(decode_config(idx, 2, 2));
            assert_eq!(m.evaluate(&x).unwrap(), merged.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn merge_is_deterministic_on_ties() {
        // The unary factor {2} sits under both {1,2} and {2,3}; the merge
        // must always pick the lexicographically smaller host.
        let build = || {
            Model::new(
                3,
                2,
                vec![
                    FactorTable::new(hs(&[1, 2]), rat_values(&[0, 1, 1, 0])).unwrap(),
                    FactorTable::new(hs(&[2, 3]), rat_values(&[0, 1, 1, 0])).unwrap(),
                    FactorTable::new(hs(&[2]), rat_values(&[2, 7])).unwrap(),
                ],
            )
            .unwrap()
            .merge_to_frontier()
        };
        let a = build();
        let b = build();
        assert_eq!(a, b);
        // xor(x1,x2) + h(x2) with h = [2,7], index order 00, 10, 01, 11.
        assert_eq!(a.factor(&hs(&[1, 2])).unwrap().values(), rat_values(&[2, 3, 8, 7]).as_slice());
        assert_eq!(a.factor(&hs(&[2, 3])).unwrap().values(), rat_values(&[0, 1, 1, 0]).as_slice());
    }

    #[test]
    fn merge_preserves_evaluation_exhaustively() {
        let m = Model::new(
            4,
            2,
            vec![
                FactorTable::new(hs(&[1, 2, 3]), rat_values(&[0, 1, 2, 3, 4, 5, 6, 7])).unwrap(),
                FactorTable::new(hs(&[2, 3]), rat_values(&[3, 1, 4, 1])).unwrap(),
                FactorTable::new(hs(&[3]), rat_values(&[5, 9])).unwrap(),
                FactorTable::new(hs(&[3, 4]), rat_values(&[2, 6, 5, 3])).unwrap(),
            ],
        )
        .unwrap();
        let merged = m.merge_to_frontier();
        assert!(merged.is_frontier_form());
        for idx in 0..16 {
            let x = Assignment::new(decode_config(idx, 2, 4));
            assert_eq!(m.evaluate(&x).unwrap(), merged.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn clamp_restricts_tables() {
        let m = model_m1();
        let clamped = conditioned_resolve(&m, &hs(&[1, 2]), &[0, 0]).unwrap();
        assert_eq!(clamped.offset, Rat::from_int(0));
        assert_eq!(clamped.kept_sites, vec![3]);
        let rest = clamped.model.unwrap();
        assert_eq!(rest.num_sites(), 1);
        assert_eq!(rest.factors()[0].values(), rat_values(&[0, 1]).as_slice());
    }

    #[test]
    fn clamp_everything_folds_to_offset() {
        let m = model_m1();
        let clamped = conditioned_resolve(&m, &hs(&[1, 2, 3]), &[0, 1, 0]).unwrap();
        assert!(clamped.model.is_none());
        assert_eq!(clamped.offset, Rat::from_int(2));
        assert!(clamped.kept_sites.is_empty());
    }
}
