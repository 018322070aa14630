//! Self-contained LP solver: two-phase primal simplex with Bland's
//! anti-cycling rule on a dense tableau. Exactness and auditability beat
//! speed here — in rational mode every pivot is exact and the reported
//! optimum is a true vertex value.
//!
//! The only presolve is dropping empty rows and empty columns; redundant
//! constraints are kept and handled by phase 1 (redundant rows surface as
//! zero-valued artificial rows and are removed).

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::{tol, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("unknown variable id {0}")]
    UnknownVariable(usize),
    #[error("non-finite value in LP construction")]
    NonFinite,
    #[error("iteration limit {0} exceeded; solve aborted")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Variable handle returned by [`LinearProgram::add_variable`].
pub type VarId = usize;

#[derive(Debug, Clone)]
struct Variable<T> {
    name: String,
    lower: Option<T>,
    upper: Option<T>,
}

#[derive(Debug, Clone)]
struct Row<T> {
    coeffs: Vec<(VarId, T)>,
    relation: Relation,
    rhs: T,
}

/// Sparse standard-form LP with named variables and per-variable bounds
/// (default: free). All validation happens at construction; `solve` never
/// fails on a well-formed program except by iteration limit.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    sense: Sense,
    vars: Vec<Variable<T>>,
    objective: Vec<(VarId, T)>,
    rows: Vec<Row<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Optimal objective value; `None` unless status is `Optimal`.
    pub objective: Option<T>,
    /// Per-variable values in declaration order; empty unless optimal.
    pub values: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(sense: Sense) -> Self {
        Self { sense, vars: Vec::new(), objective: Vec::new(), rows: Vec::new() }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn variable_name(&self, id: VarId) -> Option<&str> {
        self.vars.get(id).map(|v| v.name.as_str())
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: Option<T>,
        upper: Option<T>,
    ) -> Result<VarId, LpError> {
        for b in lower.iter().chain(upper.iter()) {
            check_finite(b)?;
        }
        self.vars.push(Variable { name: name.into(), lower, upper });
        Ok(self.vars.len() - 1)
    }

    /// Convenience: a variable with lower bound zero.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> Result<VarId, LpError> {
        self.add_variable(name, Some(T::zero()), None)
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, T)>) -> Result<(), LpError> {
        for (id, c) in &terms {
            self.check_var(*id)?;
            check_finite(c)?;
        }
        self.objective = terms;
        Ok(())
    }

    pub fn add_row(
        &mut self,
        coeffs: Vec<(VarId, T)>,
        relation: Relation,
        rhs: T,
    ) -> Result<usize, LpError> {
        for (id, c) in &coeffs {
            self.check_var(*id)?;
            check_finite(c)?;
        }
        check_finite(&rhs)?;
        self.rows.push(Row { coeffs, relation, rhs });
        Ok(self.rows.len() - 1)
    }

    fn check_var(&self, id: VarId) -> Result<(), LpError> {
        if id < self.vars.len() {
            Ok(())
        } else {
            Err(LpError::UnknownVariable(id))
        }
    }

    /// Two-phase primal simplex. Deterministic: identical input yields an
    /// identical solution vector (Bland's rule fixes every pivot choice).
    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        Standardized::build(self).solve()
    }

    /// Human-readable dump in the common text LP format, for cross-checking
    /// with external tools. Rational coefficients are emitted as decimal
    /// approximations.
    pub fn write_lp_format(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        out.push_str(" obj:");
        if self.objective.is_empty() {
            out.push_str(" 0 ");
            out.push_str(&self.vars.first().map(|v| v.name.clone()).unwrap_or_default());
        }
        for (id, c) in &self.objective {
            write_term(&mut out, c, &self.vars[*id].name);
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            for (id, c) in &row.coeffs {
                write_term(&mut out, c, &self.vars[*id].name);
            }
            let rel = match row.relation {
                Relation::Eq => "=",
                Relation::Le => "<=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {} {}", rel, row.rhs.to_f64());
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            match (&v.lower, &v.upper) {
                (None, None) => {
                    let _ = writeln!(out, " {} free", v.name);
                }
                (Some(l), None) if l.is_zero() => {}
                (Some(l), None) => {
                    let _ = writeln!(out, " {} <= {}", l.to_f64(), v.name);
                }
                (None, Some(u)) => {
                    let _ = writeln!(out, " -inf <= {} <= {}", v.name, u.to_f64());
                }
                (Some(l), Some(u)) => {
                    let _ = writeln!(out, " {} <= {} <= {}", l.to_f64(), v.name, u.to_f64());
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

fn check_finite<T: Scalar>(v: &T) -> Result<(), LpError> {
    if T::EXACT || v.to_f64().is_finite() {
        Ok(())
    } else {
        Err(LpError::NonFinite)
    }
}

fn write_term<T: Scalar>(out: &mut String, c: &T, name: &str) {
    let v = c.to_f64();
    if v < 0.0 {
        let _ = write!(out, " - {} {}", -v, name);
    } else {
        let _ = write!(out, " + {} {}", v, name);
    }
}

/// One column of the standardized (all variables nonnegative) program.
#[derive(Debug, Clone)]
struct StdCol {
    var: VarId,
    negated: bool,
}

struct Standardized<'a, T> {
    lp: &'a LinearProgram<T>,
    cols: Vec<StdCol>,
    /// Per original variable: constant shift (its finite lower/upper bound).
    base: Vec<T>,
    /// Dense rows over std columns, all relations Eq after slack insertion,
    /// rhs normalized nonnegative.
    matrix: Vec<Vec<T>>,
    rhs: Vec<T>,
    /// Columns eligible as an initial basis (slack with +1 entry), by row.
    slack_basis: Vec<Option<usize>>,
    /// Objective over std columns (minimization form).
    obj: Vec<T>,
    /// True when the bound pattern itself is contradictory.
    infeasible_bounds: bool,
}

impl<'a, T: Scalar> Standardized<'a, T> {
    fn build(lp: &'a LinearProgram<T>) -> Self {
        let mut cols: Vec<StdCol> = Vec::new();
        let mut base = vec![T::zero(); lp.vars.len()];
        // var -> (first col, optional negated col for free vars)
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(lp.vars.len());
        let mut extra_upper_rows: Vec<(usize, T)> = Vec::new(); // (col, u - l)
        let mut infeasible_bounds = false;

        for (j, v) in lp.vars.iter().enumerate() {
            match (&v.lower, &v.upper) {
                (Some(l), None) => {
                    base[j] = l.clone();
                    cols.push(StdCol { var: j, negated: false });
                    var_cols.push((cols.len() - 1, None));
                }
                (None, Some(u)) => {
                    base[j] = u.clone();
                    cols.push(StdCol { var: j, negated: true });
                    var_cols.push((cols.len() - 1, None));
                }
                (Some(l), Some(u)) => {
                    if u < l {
                        infeasible_bounds = true;
                    }
                    base[j] = l.clone();
                    cols.push(StdCol { var: j, negated: false });
                    var_cols.push((cols.len() - 1, None));
                    extra_upper_rows.push((cols.len() - 1, u.sub_ref(l)));
                }
                (None, None) => {
                    cols.push(StdCol { var: j, negated: false });
                    let pos = cols.len() - 1;
                    cols.push(StdCol { var: j, negated: true });
                    var_cols.push((pos, Some(pos + 1)));
                }
            }
        }
        let struct_cols = cols.len();

        // Objective in std space (the reported objective value is later
        // recomputed directly on the reconstructed variables).
        let mut obj = vec![T::zero(); struct_cols];
        for (id, c) in &lp.objective {
            let c = match lp.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
            let (first, second) = var_cols[*id];
            obj[first] = obj[first].add_ref(&if cols[first].negated { -c.clone() } else { c.clone() });
            if let Some(s) = second {
                obj[s] = obj[s].add_ref(&-c.clone());
            }
        }

        // Rows: substitute shifts, then slacks, then sign-normalize rhs.
        let mut matrix: Vec<Vec<T>> = Vec::new();
        let mut rhs: Vec<T> = Vec::new();
        let mut relations: Vec<Relation> = Vec::new();
        for row in &lp.rows {
            let mut dense = vec![T::zero(); struct_cols];
            let mut b = row.rhs.clone();
            for (id, a) in &row.coeffs {
                b = b.sub_mul_ref(a, &base[*id]);
                let (first, second) = var_cols[*id];
                dense[first] =
                    dense[first].add_ref(&if cols[first].negated { -a.clone() } else { a.clone() });
                if let Some(s) = second {
                    dense[s] = dense[s].add_ref(&-a.clone());
                }
            }
            matrix.push(dense);
            rhs.push(b);
            relations.push(row.relation);
        }
        for (col, cap) in extra_upper_rows {
            let mut dense = vec![T::zero(); struct_cols];
            dense[col] = T::one();
            matrix.push(dense);
            rhs.push(cap);
            relations.push(Relation::Le);
        }

        // Slack/surplus columns.
        let mut slack_basis: Vec<Option<usize>> = vec![None; matrix.len()];
        for i in 0..matrix.len() {
            match relations[i] {
                Relation::Eq => {}
                Relation::Le | Relation::Ge => {
                    let sign = if relations[i] == Relation::Le { T::one() } else { -T::one() };
                    for row in matrix.iter_mut() {
                        row.push(T::zero());
                    }
                    obj.push(T::zero());
                    cols.push(StdCol { var: usize::MAX, negated: false });
                    let col = obj.len() - 1;
                    matrix[i][col] = sign;
                    if relations[i] == Relation::Le {
                        slack_basis[i] = Some(col);
                    }
                }
            }
        }
        // Normalize rhs >= 0.
        for i in 0..matrix.len() {
            let flip = if T::EXACT {
                rhs[i].is_negative()
            } else {
                rhs[i].to_f64() < 0.0
            };
            if flip {
                rhs[i] = -rhs[i].clone();
                for v in matrix[i].iter_mut() {
                    if !v.is_zero() {
                        *v = -v.clone();
                    }
                }
                slack_basis[i] = None; // slack coefficient flipped to -1
            }
        }

        Standardized {
            lp,
            cols,
            base,
            matrix,
            rhs,
            slack_basis,
            obj,
            infeasible_bounds,
        }
    }

    fn solve(mut self) -> Result<LpSolution<T>, LpError> {
        if self.infeasible_bounds {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: None,
                values: Vec::new(),
                iterations: 0,
            });
        }
        let eps = pivot_eps::<T>();

        // Presolve: empty rows checked for trivial infeasibility, dropped.
        let mut keep = Vec::with_capacity(self.matrix.len());
        for i in 0..self.matrix.len() {
            if self.matrix[i].iter().all(|v| v.is_zero()) {
                if self.rhs[i].abs() > eps {
                    return Ok(LpSolution {
                        status: LpStatus::Infeasible,
                        objective: None,
                        values: Vec::new(),
                        iterations: 0,
                    });
                }
            } else {
                keep.push(i);
            }
        }
        if keep.len() != self.matrix.len() {
            self.matrix = keep.iter().map(|&i| self.matrix[i].clone()).collect();
            self.rhs = keep.iter().map(|&i| self.rhs[i].clone()).collect();
            self.slack_basis = keep.iter().map(|&i| self.slack_basis[i]).collect();
        }
        // Presolve: a column absent from every row is fixed at zero unless
        // its (minimization) objective coefficient is negative, in which
        // case the program is unbounded.
        let ncols = self.obj.len();
        for c in 0..ncols {
            if self.matrix.iter().all(|row| row[c].is_zero()) && self.obj[c] < -eps.clone() {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    objective: None,
                    values: Vec::new(),
                    iterations: 0,
                });
            }
        }

        let m = self.matrix.len();
        let mut tab = Tableau::<T>::new(&self.matrix, &self.rhs, eps.clone());
        let mut iterations = 0usize;

        // Phase 1: artificials on rows without a usable slack.
        let mut artificials: Vec<usize> = Vec::new();
        for i in 0..m {
            match self.slack_basis[i] {
                Some(col) => tab.basis[i] = col,
                None => {
                    let col = tab.add_column();
                    tab.rows[i][col] = T::one();
                    tab.basis[i] = col;
                    artificials.push(col);
                }
            }
        }
        if !artificials.is_empty() {
            let mut phase1_cost = vec![T::zero(); tab.ncols()];
            for &a in &artificials {
                phase1_cost[a] = T::one();
            }
            tab.set_cost(phase1_cost);
            match tab.run(&mut iterations)? {
                RunOutcome::Optimal => {}
                RunOutcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
            }
            let infeas = tab.current_cost_value();
            let feasible = if T::EXACT { infeas.is_zero() } else { infeas.to_f64().abs() <= tol::LP_FEAS };
            if !feasible {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    objective: None,
                    values: Vec::new(),
                    iterations,
                });
            }
            tab.evict_artificials(&artificials, &mut iterations)?;
        }

        // Phase 2.
        let mut phase2_cost = self.obj.clone();
        phase2_cost.resize(tab.ncols(), T::zero());
        for &a in &artificials {
            if a < phase2_cost.len() {
                phase2_cost[a] = T::zero();
            }
        }
        tab.forbid(&artificials);
        tab.set_cost(phase2_cost);
        let outcome = tab.run(&mut iterations)?;
        if outcome == RunOutcome::Unbounded {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective: None,
                values: Vec::new(),
                iterations,
            });
        }

        // Reconstruct original variable values and evaluate the objective
        // directly on them (exact by construction in rational mode).
        let std_values = tab.primal_values(self.obj.len());
        let mut values = self.base.clone();
        for (c, col) in self.cols.iter().enumerate().take(self.obj.len()) {
            if col.var == usize::MAX {
                continue; // slack
            }
            let v = &std_values[c];
            if v.is_zero() {
                continue;
            }
            if col.negated {
                values[col.var] = values[col.var].sub_ref(v);
            } else {
                values[col.var] = values[col.var].add_ref(v);
            }
        }
        let mut objective = T::zero();
        for (id, c) in &self.lp.objective {
            objective.add_assign_ref(&c.mul_ref(&values[*id]));
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: Some(objective),
            values,
            iterations,
        })
    }
}

fn pivot_eps<T: Scalar>() -> T {
    if T::EXACT {
        T::zero()
    } else {
        T::from_rat(&crate::scalar::Rat::new(
            num_bigint::BigInt::from(1),
            num_bigint::BigInt::from(1_000_000_000u64),
        ))
    }
}

#[derive(Debug, PartialEq, Eq)]
enum RunOutcome {
    Optimal,
    Unbounded,
}

const ITERATION_LIMIT: usize = 200_000;

/// Dense simplex tableau: `rows[i]` holds the constraint coefficients,
/// `rhs[i]` the current basic value, `cost` the reduced-cost row.
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    cost: Vec<T>,
    cost_value: T,
    basis: Vec<usize>,
    blocked: Vec<bool>,
    eps: T,
}

impl<T: Scalar> Tableau<T> {
    fn new(matrix: &[Vec<T>], rhs: &[T], eps: T) -> Self {
        Self {
            rows: matrix.to_vec(),
            rhs: rhs.to_vec(),
            cost: Vec::new(),
            cost_value: T::zero(),
            basis: vec![usize::MAX; matrix.len()],
            blocked: vec![false; matrix.first().map_or(0, |r| r.len())],
            eps,
        }
    }

    fn ncols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    fn add_column(&mut self) -> usize {
        for row in &mut self.rows {
            row.push(T::zero());
        }
        self.blocked.push(false);
        self.ncols() - 1
    }

    fn forbid(&mut self, cols: &[usize]) {
        for &c in cols {
            self.blocked[c] = true;
        }
    }

    /// Installs a cost row and prices out the current basis.
    fn set_cost(&mut self, cost: Vec<T>) {
        self.cost = cost;
        self.cost_value = T::zero();
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            if b == usize::MAX || self.cost[b].is_zero() {
                continue;
            }
            let factor = self.cost[b].clone();
            for (c, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    self.cost[c] = self.cost[c].sub_mul_ref(&factor, v);
                }
            }
            self.cost_value = self.cost_value.sub_mul_ref(&factor, &self.rhs[i]);
        }
    }

    /// Current objective value of the cost row (phase-1 infeasibility).
    fn current_cost_value(&self) -> T {
        -self.cost_value.clone()
    }

    /// Bland's rule iteration loop.
    fn run(&mut self, iterations: &mut usize) -> Result<RunOutcome, LpError> {
        loop {
            // Entering: smallest index with negative reduced cost.
            let entering = (0..self.ncols()).find(|&c| {
                !self.blocked[c] && self.cost[c] < -self.eps.clone()
            });
            let Some(col) = entering else {
                return Ok(RunOutcome::Optimal);
            };
            // Leaving: minimum ratio, ties by smallest basic variable.
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.partial_cmp(&self.eps) != Some(std::cmp::Ordering::Greater) {
                    continue;
                }
                let ratio = self.rhs[i].div_ref(a);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, _)) = best else {
                return Ok(RunOutcome::Unbounded);
            };
            self.pivot(row, col);
            *iterations += 1;
            if *iterations > ITERATION_LIMIT {
                return Err(LpError::IterationLimit(ITERATION_LIMIT));
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if inv != T::one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.mul_ref(&inv);
                }
            }
            self.rhs[r] = self.rhs[r].mul_ref(&inv);
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *v = v.sub_mul_ref(&factor, p);
                }
            }
            self.rows[i][c] = T::zero();
            self.rhs[i] = self.rhs[i].sub_mul_ref(&factor, &pivot_rhs);
        }
        let factor = self.cost[c].clone();
        if !factor.is_zero() {
            for (v, p) in self.cost.iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *v = v.sub_mul_ref(&factor, p);
                }
            }
            self.cost[c] = T::zero();
            self.cost_value = self.cost_value.sub_mul_ref(&factor, &pivot_rhs);
        }
        self.basis[r] = c;
    }

    /// Pivots zero-valued basic artificials out of the basis; rows whose
    /// remaining coefficients are all zero are redundant and removed.
    fn evict_artificials(
        &mut self,
        artificials: &[usize],
        iterations: &mut usize,
    ) -> Result<(), LpError> {
        let is_artificial = |c: usize| artificials.contains(&c);
        let mut drop_rows: Vec<usize> = Vec::new();
        for i in 0..self.rows.len() {
            if !is_artificial(self.basis[i]) {
                continue;
            }
            let replacement = (0..self.ncols())
                .find(|&c| !is_artificial(c) && self.rows[i][c].abs() > self.eps);
            match replacement {
                Some(c) => {
                    self.pivot(i, c);
                    *iterations += 1;
                    if *iterations > ITERATION_LIMIT {
                        return Err(LpError::IterationLimit(ITERATION_LIMIT));
                    }
                }
                None => drop_rows.push(i),
            }
        }
        if !drop_rows.is_empty() {
            for &i in drop_rows.iter().rev() {
                self.rows.remove(i);
                self.rhs.remove(i);
                self.basis.remove(i);
            }
        }
        Ok(())
    }

    fn primal_values(&self, ncols: usize) -> Vec<T> {
        let mut values = vec![T::zero(); ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < ncols {
                values[b] = self.rhs[i].clone();
            }
        }
        values
    }
}
