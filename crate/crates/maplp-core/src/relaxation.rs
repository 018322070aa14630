//! Builders for every linear program this library solves, plus extraction of
//! per-hypersite marginal tables from an optimal solution.
//!
//! Local relaxations (the working programs):
//! - probability form: minimize/maximize `sum_s <g_s, p_s>` subject to the
//!   local-consistency identities, per-scope normalization `sum p_s = 1`,
//!   and `p_s >= 0`;
//! - delta form: each `q_s` split as `q_s = a_s - b_s` with `a, b >= 0`,
//!   consistency on the differences, per-scope zero sum, and the L1 cap
//!   `sum (a_s + b_s) <= 2`. Projecting the split feasible set onto q-space
//!   gives exactly the L1 ball section, so the linearization is exact.
//!
//! Verification programs (dense, never for real instances): the convex-hull
//! programs over full joint tables, their global reformulations where only
//! margins are sign- or mass-constrained, and the minimum-L1 completion of
//! a delta-marginal set.
//!
//! Redundant constraints are kept deliberately; the solver's phase 1 copes
//! with them, and keeping the system verbatim makes it auditable.

use thiserror::Error;

use crate::hypersites::Hypersite;
use crate::lp_solver::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense, VarId};
use crate::model::{decode_config, encode_config, table_len, Model};
use crate::orthomarginal::{
    check_pseudo_marginals, DeltaMarginalSet, DenseFunction, OrthoError, PseudoMarginalSet,
};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("model must be in frontier form (apply merge_to_frontier first)")]
    NotFrontierForm,
    #[error("solution status is {0:?}, not optimal; nothing to extract")]
    NotOptimal(LpStatus),
    #[error("delta-marginal set is not locally consistent")]
    InconsistentInput,
    #[error("delta-marginal table over {0} must sum to zero")]
    NonZeroSum(Hypersite),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
}

/// How per-scope marginal tables are represented in the variable space.
#[derive(Debug, Clone)]
pub enum LocalVars {
    /// One variable per table entry.
    Direct(Vec<Vec<VarId>>),
    /// Entry = pos - neg (nonnegative split).
    Split { pos: Vec<Vec<VarId>>, neg: Vec<Vec<VarId>> },
    /// No per-scope variables; tables are margins of the global table.
    FromGlobal,
}

/// Variables of a full joint table, when the program has one.
#[derive(Debug, Clone)]
pub enum GlobalVars {
    Direct(Vec<VarId>),
    Split { pos: Vec<VarId>, neg: Vec<VarId> },
}

/// Bijection between LP variables and their meaning: scope tables,
/// split parts, and the optional global table.
#[derive(Debug, Clone)]
pub struct VariableMap {
    pub num_sites: usize,
    pub num_labels: usize,
    pub scopes: Vec<Hypersite>,
    pub local: LocalVars,
    pub global: Option<GlobalVars>,
}

fn scope_tag(scope: &Hypersite) -> String {
    scope
        .sites()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("_")
}

fn cfg_tag(cfg: &[usize]) -> String {
    cfg.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("_")
}

fn frontier_scopes<T: Scalar>(model: &Model<T>) -> Result<Vec<Hypersite>, RelaxError> {
    if !model.is_frontier_form() {
        return Err(RelaxError::NotFrontierForm);
    }
    Ok(model.factors().iter().map(|f| f.scope().clone()).collect())
}

/// Builder knobs. Everything defaults to the verbatim constraint system.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Keep a single normalization (or zero-sum) row per connected
    /// component of the scope overlap graph; consistency rows propagate
    /// the total to the other members. Cap rows are never dropped.
    pub reduce_normalization: bool,
}

/// Scopes that must keep their own sum row: the lexicographically first
/// member of each overlap-graph component (or all of them when not
/// reducing).
fn sum_row_scopes(scopes: &[Hypersite], opts: BuildOptions) -> Vec<bool> {
    if !opts.reduce_normalization {
        return vec![true; scopes.len()];
    }
    let mut component = (0..scopes.len()).collect::<Vec<_>>();
    fn root(component: &mut [usize], mut i: usize) -> usize {
        while component[i] != i {
            component[i] = component[component[i]];
            i = component[i];
        }
        i
    }
    for i in 0..scopes.len() {
        for j in (i + 1)..scopes.len() {
            if !scopes[i].intersection(&scopes[j]).is_empty() {
                let (a, b) = (root(&mut component, i), root(&mut component, j));
                if a != b {
                    component[a.max(b)] = a.min(b);
                }
            }
        }
    }
    (0..scopes.len()).map(|i| root(&mut component, i) == i).collect()
}

/// Emits the overlap-consistency equalities for every unordered pair of
/// scopes with nonempty intersection. `expr` maps (scope index, table
/// index) to the linear expression representing that table entry.
fn add_overlap_rows<T: Scalar>(
    lp: &mut LinearProgram<T>,
    scopes: &[Hypersite],
    num_labels: usize,
    expr: &dyn Fn(usize, usize) -> Vec<(VarId, T)>,
) -> Result<usize, RelaxError> {
    let mut added = 0;
    for i in 0..scopes.len() {
        for j in (i + 1)..scopes.len() {
            let overlap = scopes[i].intersection(&scopes[j]);
            if overlap.is_empty() {
                continue;
            }
            let rows = table_len(num_labels, overlap.len()).expect("overlap table size");
            let mut coeffs: Vec<Vec<(VarId, T)>> = vec![Vec::new(); rows];
            for (scope_idx, sign) in [(i, T::one()), (j, -T::one())] {
                let scope = &scopes[scope_idx];
                let positions = overlap.positions_in(scope).expect("overlap inside scope");
                let len = table_len(num_labels, scope.len()).expect("scope table size");
                for idx in 0..len {
                    let cfg = decode_config(idx, num_labels, scope.len());
                    let sub: Vec<usize> = positions.iter().map(|&p| cfg[p]).collect();
                    let row = encode_config(&sub, num_labels);
                    for (var, c) in expr(scope_idx, idx) {
                        coeffs[row].push((var, sign.mul_ref(&c)));
                    }
                }
            }
            for row in coeffs {
                lp.add_row(row, Relation::Eq, T::zero())?;
                added += 1;
            }
        }
    }
    Ok(added)
}

fn add_probability_objective<T: Scalar>(
    lp: &mut LinearProgram<T>,
    model: &Model<T>,
    expr: &dyn Fn(usize, usize) -> Vec<(VarId, T)>,
) -> Result<(), RelaxError> {
    let mut terms: Vec<(VarId, T)> = Vec::new();
    for (scope_idx, factor) in model.factors().iter().enumerate() {
        for (idx, g) in factor.values().iter().enumerate() {
            for (var, c) in expr(scope_idx, idx) {
                terms.push((var, g.mul_ref(&c)));
            }
        }
    }
    lp.set_objective(terms)?;
    Ok(())
}

fn build_pseudo_probability<T: Scalar>(
    model: &Model<T>,
    sense: Sense,
    opts: BuildOptions,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    let scopes = frontier_scopes(model)?;
    let keep_sum_row = sum_row_scopes(&scopes, opts);
    let mut lp = LinearProgram::new(sense);
    let mut vars: Vec<Vec<VarId>> = Vec::with_capacity(scopes.len());
    for scope in &scopes {
        let len = table_len(model.num_labels(), scope.len()).expect("table size");
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            let cfg = decode_config(idx, model.num_labels(), scope.len());
            let name = format!("p_{}__{}", scope_tag(scope), cfg_tag(&cfg));
            table.push(lp.add_nonneg(name)?);
        }
        vars.push(table);
    }
    let expr = |scope_idx: usize, idx: usize| vec![(vars[scope_idx][idx], T::one())];
    add_probability_objective(&mut lp, model, &expr)?;
    add_overlap_rows(&mut lp, &scopes, model.num_labels(), &expr)?;
    for (table, &keep) in vars.iter().zip(&keep_sum_row) {
        if !keep {
            continue;
        }
        let row = table.iter().map(|&v| (v, T::one())).collect();
        lp.add_row(row, Relation::Eq, T::one())?;
    }
    let vmap = VariableMap {
        num_sites: model.num_sites(),
        num_labels: model.num_labels(),
        scopes,
        local: LocalVars::Direct(vars),
        global: None,
    };
    Ok((lp, vmap))
}

/// Probability-axiom relaxation of the minimization problem.
pub fn build_pseudo_emin<T: Scalar>(
    model: &Model<T>,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    build_pseudo_probability(model, Sense::Minimize, BuildOptions::default())
}

pub fn build_pseudo_emin_with<T: Scalar>(
    model: &Model<T>,
    opts: BuildOptions,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    build_pseudo_probability(model, Sense::Minimize, opts)
}

/// Probability-axiom relaxation of the maximization problem.
pub fn build_pseudo_emax<T: Scalar>(
    model: &Model<T>,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    build_pseudo_probability(model, Sense::Maximize, BuildOptions::default())
}

pub fn build_pseudo_emax_with<T: Scalar>(
    model: &Model<T>,
    opts: BuildOptions,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    build_pseudo_probability(model, Sense::Maximize, opts)
}

/// Delta-axiom relaxation solving for both modes at once: the optimum is
/// `min g - max g` whenever the relaxation is tight.
pub fn build_pseudo_delta_emin<T: Scalar>(
    model: &Model<T>,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    build_pseudo_delta_emin_with(model, BuildOptions::default())
}

pub fn build_pseudo_delta_emin_with<T: Scalar>(
    model: &Model<T>,
    opts: BuildOptions,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    let scopes = frontier_scopes(model)?;
    let keep_sum_row = sum_row_scopes(&scopes, opts);
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut pos: Vec<Vec<VarId>> = Vec::with_capacity(scopes.len());
    let mut neg: Vec<Vec<VarId>> = Vec::with_capacity(scopes.len());
    for scope in &scopes {
        let len = table_len(model.num_labels(), scope.len()).expect("table size");
        let (mut p, mut n) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for idx in 0..len {
            let cfg = decode_config(idx, model.num_labels(), scope.len());
            p.push(lp.add_nonneg(format!("qp_{}__{}", scope_tag(scope), cfg_tag(&cfg)))?);
            n.push(lp.add_nonneg(format!("qm_{}__{}", scope_tag(scope), cfg_tag(&cfg)))?);
        }
        pos.push(p);
        neg.push(n);
    }
    let expr = |scope_idx: usize, idx: usize| {
        vec![(pos[scope_idx][idx], T::one()), (neg[scope_idx][idx], -T::one())]
    };
    add_probability_objective(&mut lp, model, &expr)?;
    add_overlap_rows(&mut lp, &scopes, model.num_labels(), &expr)?;
    for s in 0..scopes.len() {
        if keep_sum_row[s] {
            let zero_sum = pos[s]
                .iter()
                .map(|&v| (v, T::one()))
                .chain(neg[s].iter().map(|&v| (v, -T::one())))
                .collect();
            lp.add_row(zero_sum, Relation::Eq, T::zero())?;
        }
        let cap = pos[s]
            .iter()
            .chain(neg[s].iter())
            .map(|&v| (v, T::one()))
            .collect();
        lp.add_row(cap, Relation::Le, T::from_int(2))?;
    }
    let vmap = VariableMap {
        num_sites: model.num_sites(),
        num_labels: model.num_labels(),
        scopes,
        local: LocalVars::Split { pos, neg },
        global: None,
    };
    Ok((lp, vmap))
}

/// Which convex-hull (or global) program to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactSense {
    Min,
    Max,
    Delta,
}

/// Exact convex-hull program over the full joint table: one variable per
/// assignment, margin-defining equalities, and the simplex (or delta)
/// axioms on the joint table. Desk scale only.
pub fn build_exact_em<T: Scalar>(
    model: &Model<T>,
    sense: ExactSense,
    cap: usize,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    let scopes: Vec<Hypersite> = model.factors().iter().map(|f| f.scope().clone()).collect();
    let n = model.num_sites();
    let num_labels = model.num_labels();
    let size = crate::scalar::checked_pow(num_labels, n)
        .ok_or(OrthoError::SizeOverflow { num_sites: n, num_labels })?;
    if size > cap {
        return Err(OrthoError::CapExceeded { size, cap }.into());
    }

    let lp_sense = match sense {
        ExactSense::Max => Sense::Maximize,
        _ => Sense::Minimize,
    };
    let mut lp = LinearProgram::new(lp_sense);

    // Global joint table.
    let global = match sense {
        ExactSense::Delta => {
            let pos = (0..size)
                .map(|x| lp.add_nonneg(format!("Qp__{x}")))
                .collect::<Result<Vec<_>, _>>()?;
            let neg = (0..size)
                .map(|x| lp.add_nonneg(format!("Qm__{x}")))
                .collect::<Result<Vec<_>, _>>()?;
            GlobalVars::Split { pos, neg }
        }
        _ => GlobalVars::Direct(
            (0..size)
                .map(|x| lp.add_variable(format!("P__{x}"), Some(T::zero()), None))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    // Per-scope margin variables (free; pinned by the equalities below).
    let mut margin_vars: Vec<Vec<VarId>> = Vec::with_capacity(scopes.len());
    for scope in &scopes {
        let len = table_len(num_labels, scope.len()).expect("table size");
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            let cfg = decode_config(idx, num_labels, scope.len());
            table.push(lp.add_variable(
                format!("m_{}__{}", scope_tag(scope), cfg_tag(&cfg)),
                None,
                None,
            )?);
        }
        margin_vars.push(table);
    }

    let global_expr = |x: usize| -> Vec<(VarId, T)> {
        match &global {
            GlobalVars::Direct(vars) => vec![(vars[x], T::one())],
            GlobalVars::Split { pos, neg } => {
                vec![(pos[x], T::one()), (neg[x], -T::one())]
            }
        }
    };

    // Margin-defining equalities: m_s(cfg) - sum over agreeing x = 0.
    for (scope_idx, scope) in scopes.iter().enumerate() {
        let len = table_len(num_labels, scope.len()).expect("table size");
        let mut rows: Vec<Vec<(VarId, T)>> = (0..len)
            .map(|idx| vec![(margin_vars[scope_idx][idx], T::one())])
            .collect();
        for x in 0..size {
            let coords = decode_config(x, num_labels, n);
            let sub: Vec<usize> = scope.sites().iter().map(|&s| coords[s - 1]).collect();
            let row = encode_config(&sub, num_labels);
            for (var, c) in global_expr(x) {
                rows[row].push((var, -c));
            }
        }
        for row in rows {
            lp.add_row(row, Relation::Eq, T::zero())?;
        }
    }

    // Joint axioms.
    match sense {
        ExactSense::Min | ExactSense::Max => {
            let row = (0..size).flat_map(&global_expr).collect();
            lp.add_row(row, Relation::Eq, T::one())?;
        }
        ExactSense::Delta => {
            let zero_sum = (0..size).flat_map(&global_expr).collect();
            lp.add_row(zero_sum, Relation::Eq, T::zero())?;
            if let GlobalVars::Split { pos, neg } = &global {
                let cap_row = pos
                    .iter()
                    .chain(neg.iter())
                    .map(|&v| (v, T::one()))
                    .collect();
                lp.add_row(cap_row, Relation::Le, T::from_int(2))?;
            }
        }
    }

    // Objective over the margin variables.
    let mut terms: Vec<(VarId, T)> = Vec::new();
    for (scope_idx, factor) in model.factors().iter().enumerate() {
        for (idx, g) in factor.values().iter().enumerate() {
            terms.push((margin_vars[scope_idx][idx], g.clone()));
        }
    }
    lp.set_objective(terms)?;

    let vmap = VariableMap {
        num_sites: n,
        num_labels,
        scopes,
        local: LocalVars::Direct(margin_vars),
        global: Some(global),
    };
    Ok((lp, vmap))
}

/// Global reformulation over a free joint table where only the frontier
/// margins are constrained: sign constraints on margins (probability forms)
/// or a per-scope L1 cap via split margin variables (delta form). Built for
/// verification against the local programs; dense.
pub fn build_global_reform<T: Scalar>(
    model: &Model<T>,
    sense: ExactSense,
    cap: usize,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    let scopes = frontier_scopes(model)?;
    let n = model.num_sites();
    let num_labels = model.num_labels();
    let g = DenseFunction::from_model(model, cap)?;
    let size = g.len();

    let lp_sense = match sense {
        ExactSense::Max => Sense::Maximize,
        _ => Sense::Minimize,
    };
    let mut lp = LinearProgram::new(lp_sense);
    let joint: Vec<VarId> = (0..size)
        .map(|x| lp.add_variable(format!("F__{x}"), None, None))
        .collect::<Result<Vec<_>, _>>()?;
    lp.set_objective(joint.iter().enumerate().map(|(x, &v)| (v, g.values()[x].clone())).collect())?;

    // Margin expression of the joint table on scope `s`.
    let margin_rows = |scope: &Hypersite| -> Vec<Vec<(VarId, T)>> {
        let len = table_len(num_labels, scope.len()).expect("table size");
        let mut rows: Vec<Vec<(VarId, T)>> = vec![Vec::new(); len];
        for (x, &var) in joint.iter().enumerate() {
            let coords = decode_config(x, num_labels, n);
            let sub: Vec<usize> = scope.sites().iter().map(|&s| coords[s - 1]).collect();
            rows[encode_config(&sub, num_labels)].push((var, T::one()));
        }
        rows
    };

    match sense {
        ExactSense::Min | ExactSense::Max => {
            for scope in &scopes {
                for row in margin_rows(scope) {
                    lp.add_row(row, Relation::Ge, T::zero())?;
                }
            }
            let total = joint.iter().map(|&v| (v, T::one())).collect();
            lp.add_row(total, Relation::Eq, T::one())?;
        }
        ExactSense::Delta => {
            for scope in &scopes {
                let len = table_len(num_labels, scope.len()).expect("table size");
                let mut pos = Vec::with_capacity(len);
                let mut neg = Vec::with_capacity(len);
                for idx in 0..len {
                    let cfg = decode_config(idx, num_labels, scope.len());
                    pos.push(lp.add_nonneg(format!("mp_{}__{}", scope_tag(scope), cfg_tag(&cfg)))?);
                    neg.push(lp.add_nonneg(format!("mn_{}__{}", scope_tag(scope), cfg_tag(&cfg)))?);
                }
                for (idx, mut row) in margin_rows(scope).into_iter().enumerate() {
                    row.push((pos[idx], -T::one()));
                    row.push((neg[idx], T::one()));
                    lp.add_row(row, Relation::Eq, T::zero())?;
                }
                let cap_row = pos.iter().chain(neg.iter()).map(|&v| (v, T::one())).collect();
                lp.add_row(cap_row, Relation::Le, T::from_int(2))?;
            }
            let total = joint.iter().map(|&v| (v, T::one())).collect();
            lp.add_row(total, Relation::Eq, T::zero())?;
        }
    }

    let vmap = VariableMap {
        num_sites: n,
        num_labels,
        scopes,
        local: LocalVars::FromGlobal,
        global: Some(GlobalVars::Direct(joint)),
    };
    Ok((lp, vmap))
}

/// Minimum-L1 completion of a consistent zero-sum delta-marginal set: find
/// a joint table whose frontier margins reproduce the given tables with the
/// smallest total absolute mass. The optimum equals
/// `max over frontier scopes of sum |q_s|`.
pub fn build_min_l1_completion<T: Scalar>(
    q: &DeltaMarginalSet<T>,
    num_sites: usize,
    cap: usize,
) -> Result<(LinearProgram<T>, VariableMap), RelaxError> {
    if !check_pseudo_marginals(q).ok {
        return Err(RelaxError::InconsistentInput);
    }
    let front = q.scopes().frontier().map_err(OrthoError::from)?;
    for scope in front.iter() {
        let sum = q.table_sum(scope).unwrap();
        let ok = if T::EXACT {
            sum.is_zero()
        } else {
            sum.to_f64().abs() <= crate::scalar::tol::CONSISTENCY_REL
        };
        if !ok {
            return Err(RelaxError::NonZeroSum(scope.clone()));
        }
    }
    let num_labels = q.num_labels();
    let size = crate::scalar::checked_pow(num_labels, num_sites)
        .ok_or(OrthoError::SizeOverflow { num_sites, num_labels })?;
    if size > cap {
        return Err(OrthoError::CapExceeded { size, cap }.into());
    }

    let mut lp = LinearProgram::new(Sense::Minimize);
    let pos: Vec<VarId> = (0..size)
        .map(|x| lp.add_nonneg(format!("Qp__{x}")))
        .collect::<Result<Vec<_>, _>>()?;
    let neg: Vec<VarId> = (0..size)
        .map(|x| lp.add_nonneg(format!("Qm__{x}")))
        .collect::<Result<Vec<_>, _>>()?;
    lp.set_objective(pos.iter().chain(neg.iter()).map(|&v| (v, T::one())).collect())?;

    let scopes: Vec<Hypersite> = front.iter().cloned().collect();
    for scope in &scopes {
        let len = table_len(num_labels, scope.len()).expect("table size");
        let mut rows: Vec<Vec<(VarId, T)>> = vec![Vec::new(); len];
        for x in 0..size {
            let coords = decode_config(x, num_labels, num_sites);
            let sub: Vec<usize> = scope.sites().iter().map(|&s| coords[s - 1]).collect();
            let row = encode_config(&sub, num_labels);
            rows[row].push((pos[x], T::one()));
            rows[row].push((neg[x], -T::one()));
        }
        let table = q.table(scope).unwrap();
        for (idx, row) in rows.into_iter().enumerate() {
            lp.add_row(row, Relation::Eq, table[idx].clone())?;
        }
    }

    let vmap = VariableMap {
        num_sites,
        num_labels,
        scopes,
        local: LocalVars::FromGlobal,
        global: Some(GlobalVars::Split { pos, neg }),
    };
    Ok((lp, vmap))
}

/// Reassembles per-hypersite tables from an optimal solution.
pub fn extract_marginals<T: Scalar>(
    sol: &LpSolution<T>,
    vmap: &VariableMap,
) -> Result<PseudoMarginalSet<T>, RelaxError> {
    if sol.status != LpStatus::Optimal {
        return Err(RelaxError::NotOptimal(sol.status));
    }
    let mut entries: Vec<(Hypersite, Vec<T>)> = Vec::with_capacity(vmap.scopes.len());
    match &vmap.local {
        LocalVars::Direct(tables) => {
            for (scope, table) in vmap.scopes.iter().zip(tables) {
                entries.push((scope.clone(), table.iter().map(|&v| sol.values[v].clone()).collect()));
            }
        }
        LocalVars::Split { pos, neg } => {
            for ((scope, p), n) in vmap.scopes.iter().zip(pos).zip(neg) {
                let table = p
                    .iter()
                    .zip(n)
                    .map(|(&a, &b)| sol.values[a].sub_ref(&sol.values[b]))
                    .collect();
                entries.push((scope.clone(), table));
            }
        }
        LocalVars::FromGlobal => {
            let joint = extract_global(sol, vmap)?.expect("FromGlobal map carries a joint table");
            for scope in &vmap.scopes {
                entries.push((scope.clone(), joint.margin(scope)?));
            }
        }
    }
    Ok(PseudoMarginalSet::new(vmap.num_labels, entries)?)
}

/// The joint table of an optimal solution, when the program has one.
pub fn extract_global<T: Scalar>(
    sol: &LpSolution<T>,
    vmap: &VariableMap,
) -> Result<Option<DenseFunction<T>>, RelaxError> {
    if sol.status != LpStatus::Optimal {
        return Err(RelaxError::NotOptimal(sol.status));
    }
    let Some(global) = &vmap.global else {
        return Ok(None);
    };
    let values: Vec<T> = match global {
        GlobalVars::Direct(vars) => vars.iter().map(|&v| sol.values[v].clone()).collect(),
        GlobalVars::Split { pos, neg } => pos
            .iter()
            .zip(neg)
            .map(|(&a, &b)| sol.values[a].sub_ref(&sol.values[b]))
            .collect(),
    };
    Ok(Some(DenseFunction::with_cap(
        vmap.num_sites,
        vmap.num_labels,
        values,
        usize::MAX,
    )?))
}
