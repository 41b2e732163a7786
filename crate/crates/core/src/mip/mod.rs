//! Solver-neutral linear models of the location-routing problem.
//!
//! [`MipModel`] holds variables, named rows and a minimisation objective. The
//! builders in this module produce the node-copy model ([`build_m1`]), its
//! arc-tracking variant ([`build_m2`]), the recharge-arc model ([`build_m3`])
//! and the recharge-path model ([`build_m4`]). Models can be checked against an
//! [`Assignment`], written as MPS or LP files and handed to an external solver.

mod assign;
mod backend;
mod blocks;
mod export;
mod m1;
mod m3;
mod m4;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, TOL};

pub use assign::{solution_to_assignment, AssignError};
pub use backend::{
    add_sec_cuts, backend_solve, solve_with_beta_escalation, solve_with_sec_loop, BackendConfig,
    BackendError, BetaStep, SolveResult, SolveStatus, SEC_MAX_ROUNDS,
};
pub use export::{export_lp, export_mps, mangle, read_mps, ExportError, MpsReadError};
pub use m1::{build_m1, build_m2};
pub use m3::build_m3;
pub use m4::build_m4;

/// Index of a variable inside its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Which formulation produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    /// Node-based time and SoC tracking with `beta` copies per station.
    M1 { beta: usize },
    /// Arc-based time and SoC tracking with `beta` copies per station.
    M2 { beta: usize },
    /// Recharge arcs: at most one station between consecutive customers.
    M3,
    /// Recharge paths over a given path set.
    M4,
    /// Read back from a file; variable semantics unknown.
    Imported,
}

impl Formulation {
    pub fn tag(&self) -> &'static str {
        match self {
            Formulation::M1 { .. } => "m1",
            Formulation::M2 { .. } => "m2",
            Formulation::M3 => "m3",
            Formulation::M4 => "m4",
            Formulation::Imported => "imported",
        }
    }
}

/// Arc variables over the routing graph of a node-copy model, used for
/// subtour separation. Node 0 is the depot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArcGraph {
    pub nodes: Vec<String>,
    pub arcs: Vec<(usize, usize, VarId)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipModel {
    pub name: String,
    pub formulation: Formulation,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Minimised linear objective.
    pub objective: Vec<(VarId, f64)>,
    /// Variable name to id. Names double as semantic keys, e.g. `x[0,3]`.
    pub registry: BTreeMap<String, VarId>,
    pub graph: Option<ArcGraph>,
}

impl MipModel {
    pub fn new(name: impl Into<String>, formulation: Formulation) -> Self {
        MipModel {
            name: name.into(),
            formulation,
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            registry: BTreeMap::new(),
            graph: None,
        }
    }

    /// Adds a variable. Panics on a duplicate name, which is a builder bug.
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        let id = VarId(self.variables.len());
        let prev = self.registry.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable {name}");
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            VarKind::Continuous => (lower, upper),
        };
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    /// Adds a row; repeated variables are merged and zero coefficients dropped.
    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merge_terms(terms),
            sense,
            rhs,
        });
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.registry.get(name).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    /// Constraints of one family, e.g. `c2` matches `c2[1]` but not `c21[0,1]`.
    pub fn family<'a>(&'a self, family: &'a str) -> impl Iterator<Item = &'a Constraint> + 'a {
        self.constraints.iter().filter(move |c| {
            c.name
                .strip_prefix(family)
                .is_some_and(|rest| rest.is_empty() || rest.starts_with('['))
        })
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn nonzero_count(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).sum()
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) {
        self.objective = merge_terms(terms);
    }
}

fn merge_terms(terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut acc: BTreeMap<VarId, f64> = BTreeMap::new();
    for (v, c) in terms {
        *acc.entry(v).or_insert(0.0) += c;
    }
    acc.into_iter().filter(|&(_, c)| c != 0.0).collect()
}

/// Values for the variables of one model. Missing entries read as 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Assignment {
    pub values: BTreeMap<VarId, f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("value {value} of {name} is outside [{lower}, {upper}]")]
    OutOfBounds { name: String, value: f64, lower: f64, upper: f64 },
}

impl Assignment {
    pub fn get(&self, v: VarId) -> f64 {
        self.values.get(&v).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, v: VarId, value: f64) {
        self.values.insert(v, value);
    }

    /// Builds an assignment from named values, checking names and bounds.
    pub fn from_named<'a>(
        model: &MipModel,
        named: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self, AssignmentError> {
        let mut out = Assignment::default();
        for (name, value) in named {
            let id = model
                .var(name)
                .ok_or_else(|| AssignmentError::UnknownVariable(name.to_string()))?;
            let var = model.variable(id);
            if !(value >= var.lower - TOL && value <= var.upper + TOL) {
                return Err(AssignmentError::OutOfBounds {
                    name: name.to_string(),
                    value,
                    lower: var.lower,
                    upper: var.upper,
                });
            }
            out.set(id, value);
        }
        Ok(out)
    }

    /// Nonzero values keyed by variable name.
    pub fn to_named(&self, model: &MipModel) -> BTreeMap<String, f64> {
        self.values
            .iter()
            .filter(|(_, v)| **v != 0.0)
            .map(|(id, v)| (model.variable(*id).name.clone(), *v))
            .collect()
    }
}

/// One unsatisfied row or bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    /// Row name, or the variable name for bound and integrality violations.
    pub name: String,
    pub lhs: f64,
    pub sense: Sense,
    pub rhs: f64,
    pub amount: f64,
}

impl fmt::Display for RowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.9} {} {:.9} (off by {:.3e})",
            self.name, self.lhs, self.sense, self.rhs, self.amount
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub feasible: bool,
    pub violations: Vec<RowViolation>,
    pub objective: f64,
    /// Variables without a value in the assignment (read as 0).
    pub missing: usize,
}

fn violation_amount(lhs: f64, sense: Sense, rhs: f64) -> f64 {
    match sense {
        Sense::Le => lhs - rhs,
        Sense::Ge => rhs - lhs,
        Sense::Eq => (lhs - rhs).abs(),
    }
}

/// Checks every row, bound and integrality requirement at tolerance `1e-6`.
pub fn evaluate_assignment(model: &MipModel, a: &Assignment) -> Evaluation {
    let missing = (0..model.variables.len())
        .filter(|&i| !a.values.contains_key(&VarId(i)))
        .count();
    if missing > 0 {
        log::warn!("{missing} variables of {} have no value; treating them as 0", model.name);
    }
    let mut violations = Vec::new();
    for (i, var) in model.variables.iter().enumerate() {
        let v = a.get(VarId(i));
        if v < var.lower - TOL {
            violations.push(RowViolation {
                name: var.name.clone(),
                lhs: v,
                sense: Sense::Ge,
                rhs: var.lower,
                amount: var.lower - v,
            });
        } else if v > var.upper + TOL {
            violations.push(RowViolation {
                name: var.name.clone(),
                lhs: v,
                sense: Sense::Le,
                rhs: var.upper,
                amount: v - var.upper,
            });
        }
        if var.kind == VarKind::Binary && (v - v.round()).abs() > TOL {
            violations.push(RowViolation {
                name: var.name.clone(),
                lhs: v,
                sense: Sense::Eq,
                rhs: v.round(),
                amount: (v - v.round()).abs(),
            });
        }
    }
    for c in &model.constraints {
        let lhs: f64 = c.terms.iter().map(|&(v, k)| k * a.get(v)).sum();
        let amount = violation_amount(lhs, c.sense, c.rhs);
        if amount > TOL {
            violations.push(RowViolation {
                name: c.name.clone(),
                lhs,
                sense: c.sense,
                rhs: c.rhs,
                amount,
            });
        }
    }
    let objective = model.objective.iter().map(|&(v, k)| k * a.get(v)).sum();
    Evaluation {
        feasible: violations.is_empty(),
        violations,
        objective,
        missing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GapError {
    #[error("gap is undefined for a zero objective value")]
    ZeroObjective,
}

/// Relative gap in percent: `100·|bound − val| / |val|`.
pub fn mip_gap(obj_val: f64, obj_bound: f64) -> Result<f64, GapError> {
    if obj_val == 0.0 {
        return Err(GapError::ZeroObjective);
    }
    Ok(100.0 * (obj_bound - obj_val).abs() / obj_val.abs())
}

/// Builds a model on the linearized copy of `inst`.
pub fn build_linear_variant<F>(inst: &Instance, build: F) -> MipModel
where
    F: FnOnce(&Instance) -> MipModel,
{
    let mut m = build(&inst.linearized());
    m.name.push_str("-linear");
    m
}

#[cfg(test)]
mod tests;
