//! From optimal marginals to an integral assignment: atomicity filtering of
//! the frontier followed by a greedy, causal choice of local sub-samples
//! that agree on every overlap.
//!
//! A frontier factor is *atomic* when its table cannot be written as a sum
//! of functions living on its overlaps with the other frontier members
//! (equivalently, the local ortho-marginal projection onto those overlaps
//! moves it). Non-atomic members are redundant for decoding and are removed
//! one at a time with re-testing; if the surviving members no longer cover
//! every site the instance is reported as unsupported rather than guessed.

use thiserror::Error;

use crate::hypersites::{Hypersite, HypersiteSet};
use crate::model::{encode_config, table_len, Assignment, Model};
use crate::orthomarginal::{project, DenseFunction, PseudoMarginalSet};
use crate::scalar::{tol, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeSign {
    /// Walk the positive support (minimum solutions).
    Inf,
    /// Walk the negative support of a delta set (maximum solutions).
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalKind {
    /// Tables from a probability-axiom solve; support is positive mass.
    Probability,
    /// Tables from a delta-axiom solve; support is sign-stratified.
    Delta,
}

/// Everything needed to report (and later replay) a failed decode step.
#[derive(Debug, Clone)]
pub struct DecodeFailure<T> {
    /// 1-based position of the failing scope in the filtered frontier.
    pub step: usize,
    pub scope: Hypersite,
    /// Partial assignment at the failure point (None = still free).
    pub fixed: Vec<Option<usize>>,
    /// Configurations that passed the mass test but disagreed on overlaps.
    pub candidates: Vec<(Vec<usize>, T)>,
}

#[derive(Debug, Error)]
pub enum DecodeError<T: Scalar> {
    #[error("model must be in frontier form (apply merge_to_frontier first)")]
    NotFrontierForm,
    #[error("hypersite {0} is not a frontier member")]
    NotInFrontier(Hypersite),
    #[error("atomicity filtering left sites {missing:?} uncovered; decoding unsupported")]
    CoverageLost { missing: Vec<usize> },
    #[error("marginal set has no table for frontier scope {0}")]
    MissingTable(Hypersite),
    #[error("no admissible sub-sample at step {} (scope {})", .0.step, .0.scope)]
    Failure(DecodeFailure<T>),
}

/// Re-expresses a local table over `scope` as a dense function on the
/// relabelled domain 1..=|scope|.
fn local_dense<T: Scalar>(
    table: &[T],
    scope_len: usize,
    num_labels: usize,
) -> DenseFunction<T> {
    DenseFunction::with_cap(scope_len, num_labels, table.to_vec(), usize::MAX)
        .expect("local table length matches scope")
}

/// The overlaps of `scope` with the other members, relabelled to positions
/// inside `scope`.
fn overlap_set(scope: &Hypersite, others: &[Hypersite]) -> HypersiteSet {
    let mut members = Vec::new();
    for other in others {
        if other == scope {
            continue;
        }
        let inter = scope.intersection(other);
        if inter.is_empty() {
            continue;
        }
        let relabelled: Vec<usize> = inter
            .positions_in(scope)
            .expect("intersection inside scope")
            .iter()
            .map(|&p| p + 1)
            .collect();
        members.push(Hypersite::new(relabelled).expect("positions strictly increasing"));
    }
    HypersiteSet::from_members(members)
}

fn tables_differ<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).any(|(x, y)| {
        if T::EXACT {
            x != y
        } else {
            let scale = 1.0 + x.to_f64().abs().max(y.to_f64().abs());
            (x.to_f64() - y.to_f64()).abs() > tol::CONSISTENCY_REL * scale
        }
    })
}

fn atomic_within<T: Scalar>(
    table: &[T],
    scope: &Hypersite,
    others: &[Hypersite],
    num_labels: usize,
) -> bool {
    let overlaps = overlap_set(scope, others);
    if overlaps.is_empty() {
        return true;
    }
    let local = local_dense(table, scope.len(), num_labels);
    let projected = project(&local, &overlaps).expect("local projection");
    tables_differ(local.values(), projected.values())
}

/// Whether a frontier factor's table escapes the span of its overlaps with
/// the remaining frontier members.
pub fn is_atomic<T: Scalar>(model: &Model<T>, scope: &Hypersite) -> Result<bool, DecodeError<T>> {
    let front = model
        .scope_set()
        .frontier()
        .map_err(|_| DecodeError::NotFrontierForm)?;
    if !front.contains(scope) {
        return Err(DecodeError::NotInFrontier(scope.clone()));
    }
    let others: Vec<Hypersite> = front.iter().filter(|m| *m != scope).cloned().collect();
    let table = model.factor(scope).expect("frontier scope has a factor").values();
    Ok(atomic_within(table, scope, &others, model.num_labels()))
}

/// Removes non-atomic frontier members one at a time, re-testing after each
/// removal, until every survivor is atomic. Errors when the survivors fail
/// to cover the site domain.
pub fn atomic_frontier<T: Scalar>(model: &Model<T>) -> Result<HypersiteSet, DecodeError<T>> {
    if !model.is_frontier_form() {
        return Err(DecodeError::NotFrontierForm);
    }
    let mut members: Vec<Hypersite> =
        model.factors().iter().map(|f| f.scope().clone()).collect();
    'filter: loop {
        for k in 0..members.len() {
            let table = model.factor(&members[k]).unwrap().values();
            if !atomic_within(table, &members[k], &members, model.num_labels()) {
                members.remove(k);
                continue 'filter;
            }
        }
        break;
    }
    let mut covered = vec![false; model.num_sites()];
    for m in &members {
        for &s in m.sites() {
            covered[s - 1] = true;
        }
    }
    let missing: Vec<usize> = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| i + 1)
        .collect();
    if !missing.is_empty() {
        return Err(DecodeError::CoverageLost { missing });
    }
    Ok(HypersiteSet::from_members(members))
}

fn mass_threshold<T: Scalar>(table: &[T]) -> T {
    if T::EXACT {
        T::zero()
    } else {
        let max = table.iter().map(|v| v.to_f64().abs()).fold(0.0f64, f64::max);
        T::from_f64_approx(tol::DECODE_MASS_REL * max)
    }
}

fn admissible<T: Scalar>(value: &T, threshold: &T, kind: MarginalKind, sign: DecodeSign) -> bool {
    match (kind, sign) {
        (MarginalKind::Probability, _) | (MarginalKind::Delta, DecodeSign::Inf) => {
            value.clone() > threshold.clone()
        }
        (MarginalKind::Delta, DecodeSign::Sup) => value.clone() < -threshold.clone(),
    }
}

/// The lexicographically smallest local configuration carrying admissible
/// mass, if any. Used by the clamp-and-resolve fallback, which conditions
/// on one supported sub-configuration at a time.
pub fn first_supported_config<T: Scalar>(
    table: &[T],
    arity: usize,
    num_labels: usize,
    kind: MarginalKind,
    sign: DecodeSign,
) -> Option<Vec<usize>> {
    let threshold = mass_threshold(table);
    let total = table_len(num_labels, arity).expect("table size");
    for t in 0..total {
        let mut cfg = vec![0usize; arity];
        let mut rem = t;
        for slot in (0..arity).rev() {
            cfg[slot] = rem % num_labels;
            rem /= num_labels;
        }
        if admissible(&table[encode_config(&cfg, num_labels)], &threshold, kind, sign) {
            return Some(cfg);
        }
    }
    None
}

/// Greedy sub-sample assembly: walk the atomic frontier in lexicographic
/// order; at each scope take the lexicographically smallest configuration
/// with admissible mass that agrees with every already-fixed site; stop as
/// soon as all sites are fixed.
pub fn greedy_decode<T: Scalar>(
    marginals: &PseudoMarginalSet<T>,
    kind: MarginalKind,
    sign: DecodeSign,
    model: &Model<T>,
) -> Result<Assignment, DecodeError<T>> {
    let front = atomic_frontier(model)?;
    let num_labels = model.num_labels();
    let mut fixed: Vec<Option<usize>> = vec![None; model.num_sites()];
    let mut fixed_count = 0usize;

    for (step, scope) in front.iter().enumerate() {
        if fixed_count == model.num_sites() {
            break;
        }
        if scope.sites().iter().all(|&s| fixed[s - 1].is_some()) {
            continue;
        }
        let table = marginals
            .table(scope)
            .ok_or_else(|| DecodeError::MissingTable(scope.clone()))?;
        let threshold = mass_threshold(table);
        let arity = scope.len();
        let total = table_len(num_labels, arity).expect("table size");
        let mut chosen: Option<Vec<usize>> = None;
        let mut near_misses: Vec<(Vec<usize>, T)> = Vec::new();
        // Enumerate configurations in lexicographic tuple order: the last
        // site varies fastest in that order, so walk the big-endian index.
        for t in 0..total {
            let mut cfg = vec![0usize; arity];
            let mut rem = t;
            for slot in (0..arity).rev() {
                cfg[slot] = rem % num_labels;
                rem /= num_labels;
            }
            let value = &table[encode_config(&cfg, num_labels)];
            if !admissible(value, &threshold, kind, sign) {
                continue;
            }
            let agrees = scope
                .sites()
                .iter()
                .zip(&cfg)
                .all(|(&site, &label)| fixed[site - 1].is_none_or(|f| f == label));
            if agrees {
                chosen = Some(cfg);
                break;
            }
            near_misses.push((cfg, value.clone()));
        }
        let Some(cfg) = chosen else {
            return Err(DecodeError::Failure(DecodeFailure {
                step: step + 1,
                scope: scope.clone(),
                fixed,
                candidates: near_misses,
            }));
        };
        for (&site, &label) in scope.sites().iter().zip(&cfg) {
            if fixed[site - 1].is_none() {
                fixed[site - 1] = Some(label);
                fixed_count += 1;
            }
        }
    }

    let labels: Vec<usize> = fixed
        .into_iter()
        .map(|f| f.expect("atomic frontier covers all sites"))
        .collect();
    Ok(Assignment::new(labels))
}
