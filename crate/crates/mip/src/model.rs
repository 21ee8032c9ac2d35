//! Model container for mixed-integer convex quadratic programs.
//!
//! The model is solver-agnostic: it stores variables (continuous with box
//! bounds, or binary), two-sided linear rows, and a convex quadratic
//! objective `1/2 x'Qx + c'x + k` where `Q` only touches continuous
//! variables. Binary variables may appear in rows and in the linear
//! objective term.

use crate::error::{MipError, Result};

/// Opaque variable handle. Indices are shared between continuous and binary
/// variables (one column space).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub(crate) usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct VarData {
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

/// One linear row stored two-sided: `lo <= a'x <= hi`.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub cols: Vec<usize>,
    pub coefs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintId(pub(crate) usize);

#[derive(Debug, Clone, Default)]
pub struct MipModel {
    pub(crate) vars: Vec<VarData>,
    pub(crate) rows: Vec<Row>,
    /// Upper-triangular (i <= j) entries of Q, by column index.
    pub(crate) quad: Vec<(usize, usize, f64)>,
    /// Linear objective coefficient per column.
    pub(crate) lin: Vec<f64>,
    pub(crate) obj_const: f64,
    pub(crate) has_objective: bool,
}

impl MipModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn var_kind(&self, v: Var) -> VarKind {
        self.vars[v.0].kind
    }

    pub fn var_bounds(&self, v: Var) -> (f64, f64) {
        (self.vars[v.0].lo, self.vars[v.0].hi)
    }

    /// Declare a continuous variable with box bounds (either may be infinite).
    pub fn add_continuous(&mut self, lo: f64, hi: f64) -> Result<Var> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(MipError::InvalidBounds { lo, hi });
        }
        self.vars.push(VarData {
            kind: VarKind::Continuous,
            lo,
            hi,
        });
        self.lin.push(0.0);
        Ok(Var(self.vars.len() - 1))
    }

    /// Declare a binary variable (bounds fixed to [0, 1]).
    pub fn add_binary(&mut self) -> Var {
        self.vars.push(VarData {
            kind: VarKind::Binary,
            lo: 0.0,
            hi: 1.0,
        });
        self.lin.push(0.0);
        Var(self.vars.len() - 1)
    }

    /// Add `sum(terms) sense rhs`. Duplicate variables in `terms` are merged
    /// by summing their coefficients.
    pub fn add_linear_constraint(
        &mut self,
        terms: &[(Var, f64)],
        sense: Sense,
        rhs: f64,
    ) -> Result<ConstraintId> {
        if terms.is_empty() {
            return Err(MipError::EmptyConstraint);
        }
        if !rhs.is_finite() {
            return Err(MipError::NonFiniteRhs(rhs));
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for &(v, c) in terms {
            if v.0 >= self.vars.len() {
                return Err(MipError::UnknownVariable(v.0, self.vars.len()));
            }
            if !c.is_finite() {
                return Err(MipError::NonFiniteCoefficient { var: v.0, value: c });
            }
            match merged.iter_mut().find(|(col, _)| *col == v.0) {
                Some((_, acc)) => *acc += c,
                None => merged.push((v.0, c)),
            }
        }
        merged.sort_by_key(|&(col, _)| col);
        let (lo, hi) = match sense {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
            Sense::Eq => (rhs, rhs),
        };
        self.rows.push(Row {
            cols: merged.iter().map(|&(c, _)| c).collect(),
            coefs: merged.iter().map(|&(_, v)| v).collect(),
            lo,
            hi,
        });
        Ok(ConstraintId(self.rows.len() - 1))
    }

    /// Set the objective `1/2 x'Qx + c'x + constant` (minimized).
    ///
    /// `quad` holds entries of the symmetric matrix Q given once per pair
    /// (order inside the pair does not matter; duplicates are summed).
    /// Quadratic terms must involve continuous variables only, and Q must be
    /// positive semidefinite (checked by attempted Cholesky factorization of
    /// Q + tol*I).
    pub fn set_objective(
        &mut self,
        quad: &[(Var, Var, f64)],
        linear: &[(Var, f64)],
        constant: f64,
    ) -> Result<()> {
        let n = self.vars.len();
        let mut q_merged: Vec<(usize, usize, f64)> = Vec::with_capacity(quad.len());
        for &(a, b, c) in quad {
            for v in [a, b] {
                if v.0 >= n {
                    return Err(MipError::UnknownVariable(v.0, n));
                }
                if self.vars[v.0].kind == VarKind::Binary {
                    return Err(MipError::QuadraticOnBinary(v.0));
                }
            }
            if !c.is_finite() {
                return Err(MipError::NonFiniteCoefficient { var: a.0, value: c });
            }
            let (i, j) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
            match q_merged.iter_mut().find(|(qi, qj, _)| *qi == i && *qj == j) {
                Some((_, _, acc)) => *acc += c,
                None => q_merged.push((i, j, c)),
            }
        }
        q_merged.retain(|&(_, _, c)| c != 0.0);
        check_psd(&q_merged)?;

        let mut lin = vec![0.0; n];
        for &(v, c) in linear {
            if v.0 >= n {
                return Err(MipError::UnknownVariable(v.0, n));
            }
            if !c.is_finite() {
                return Err(MipError::NonFiniteCoefficient { var: v.0, value: c });
            }
            lin[v.0] += c;
        }
        if !constant.is_finite() {
            return Err(MipError::NonFiniteRhs(constant));
        }
        self.quad = q_merged;
        self.lin = lin;
        self.obj_const = constant;
        self.has_objective = true;
        Ok(())
    }

    /// Objective value of a full assignment (no feasibility check).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let mut val = self.obj_const;
        for (c, xi) in self.lin.iter().zip(x) {
            val += c * xi;
        }
        for &(i, j, q) in &self.quad {
            if i == j {
                val += 0.5 * q * x[i] * x[i];
            } else {
                val += q * x[i] * x[j];
            }
        }
        val
    }

    /// Worst violation of rows and variable bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lo - xi).max(xi - v.hi);
        }
        for row in &self.rows {
            let act: f64 = row
                .cols
                .iter()
                .zip(&row.coefs)
                .map(|(&c, &a)| a * x[c])
                .sum();
            worst = worst.max(row.lo - act).max(act - row.hi);
        }
        worst
    }

    pub(crate) fn binary_columns(&self) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| i)
            .collect()
    }
}

/// PSD test: Cholesky of Q + tol*I over the columns Q actually touches.
/// Succeeding certifies the smallest eigenvalue is >= -tol.
fn check_psd(quad: &[(usize, usize, f64)]) -> Result<()> {
    if quad.is_empty() {
        return Ok(());
    }
    let mut cols: Vec<usize> = quad.iter().flat_map(|&(i, j, _)| [i, j]).collect();
    cols.sort_unstable();
    cols.dedup();
    let m = cols.len();
    let pos = |c: usize| cols.binary_search(&c).unwrap();
    let mut dense = vec![0.0; m * m];
    let mut max_diag: f64 = 0.0;
    for &(i, j, q) in quad {
        let (pi, pj) = (pos(i), pos(j));
        dense[pi * m + pj] += q;
        if pi != pj {
            dense[pj * m + pi] += q;
        } else {
            max_diag = max_diag.max(q.abs());
        }
    }
    let tol = 1e-9 * (1.0 + max_diag);
    for k in 0..m {
        dense[k * m + k] += tol;
    }
    // In-place lower Cholesky; a negative pivot means an eigenvalue < -tol.
    for k in 0..m {
        let mut d = dense[k * m + k];
        for p in 0..k {
            d -= dense[k * m + p] * dense[k * m + p];
        }
        if d <= 0.0 {
            return Err(MipError::NonConvexObjective);
        }
        let d = d.sqrt();
        dense[k * m + k] = d;
        for r in (k + 1)..m {
            let mut v = dense[r * m + k];
            for p in 0..k {
                v -= dense[r * m + p] * dense[k * m + p];
            }
            dense[r * m + k] = v / d;
        }
    }
    Ok(())
}
