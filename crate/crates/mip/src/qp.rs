//! Convex box-QP solver used for continuous relaxations.
//!
//! Problem form: minimize `1/2 x'Px + q'x` subject to `l <= Ax <= u`, where
//! the first `n` rows of A are variable-bound rows (identity) and the rest
//! are general linear rows. The solver is an operator-splitting (ADMM)
//! method with Ruiz equilibration and an active-set polish step that
//! recovers solutions to tight KKT tolerances. The KKT-system matrix does
//! not depend on the bounds `l, u`, so branch-and-bound nodes that only fix
//! binary variables reuse one factorization.

use crate::error::{MipError, Result};

#[derive(Debug, Clone)]
pub(crate) struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.idx
            .iter()
            .zip(&self.val)
            .map(|(&i, &v)| v * x[i])
            .sum()
    }
}

/// Immutable description of one box QP.
#[derive(Debug, Clone)]
pub(crate) struct BoxQp {
    pub n: usize,
    /// Upper-triangular (i <= j) entries of P.
    pub p_upper: Vec<(usize, usize, f64)>,
    pub q: Vec<f64>,
    pub obj_const: f64,
    /// General rows (variable bounds are handled separately).
    pub rows: Vec<SparseVec>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub var_lo: Vec<f64>,
    pub var_hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QpSettings {
    pub sigma: f64,
    pub alpha: f64,
    pub rho0: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub eps_inf: f64,
    pub max_iter: usize,
    pub check_every: usize,
    pub scaling_iters: usize,
    /// Skip the polish KKT solve when n + active rows exceeds this.
    pub polish_cap: usize,
    /// Acceptance tolerance for the polished KKT point.
    pub kkt_tol: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            sigma: 1e-6,
            alpha: 1.6,
            rho0: 0.1,
            eps_abs: 1e-9,
            eps_rel: 1e-9,
            eps_inf: 1e-5,
            max_iter: 200_000,
            check_every: 25,
            scaling_iters: 10,
            polish_cap: 900,
            kkt_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum QpStatus {
    Solved,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
}

#[derive(Debug, Clone)]
#[allow(dead_code)] // diagnostic fields, reported for debugging
pub(crate) struct QpResult {
    pub status: QpStatus,
    /// Unscaled primal point (valid for Solved / MaxIter).
    pub x: Vec<f64>,
    pub objective: f64,
    pub polished: bool,
    pub pri_res: f64,
    pub dua_res: f64,
    pub iterations: usize,
    /// Valid lower bound on the QP optimum (conservative when unpolished).
    pub lower_bound: f64,
}

/// Persistent solver state: scaled data, KKT factor, and warm-start
/// iterates. Bounds can be patched between solves without refactoring.
pub(crate) struct QpSolver {
    n: usize,
    m: usize, // n bound rows + general rows
    settings: QpSettings,

    // Scaled problem data.
    p_upper: Vec<(usize, usize, f64)>,
    q: Vec<f64>,
    obj_const: f64,
    rows: Vec<SparseVec>, // all m rows, scaled
    l: Vec<f64>,
    u: Vec<f64>,

    // Scaling: x = d .* x_scaled, rows scaled by e, cost by c_scale.
    d: Vec<f64>,
    e: Vec<f64>,
    c_scale: f64,

    rho: Vec<f64>,
    kkt_l: Vec<f64>, // dense lower Cholesky factor of P + sigma I + A' diag(rho) A
    refactor_count: usize,

    // Iterates (scaled).
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

impl QpSolver {
    pub fn new(qp: &BoxQp, settings: QpSettings) -> Result<Self> {
        let n = qp.n;
        let m = n + qp.rows.len();
        assert_eq!(qp.q.len(), n);
        assert_eq!(qp.var_lo.len(), n);

        // Assemble all rows: bound rows first (identity), then general rows.
        let mut rows: Vec<SparseVec> = Vec::with_capacity(m);
        let mut l = Vec::with_capacity(m);
        let mut u = Vec::with_capacity(m);
        for j in 0..n {
            rows.push(SparseVec {
                idx: vec![j],
                val: vec![1.0],
            });
            l.push(qp.var_lo[j]);
            u.push(qp.var_hi[j]);
        }
        for (r, row) in qp.rows.iter().enumerate() {
            rows.push(row.clone());
            l.push(qp.row_lo[r]);
            u.push(qp.row_hi[r]);
        }

        let mut solver = Self {
            n,
            m,
            settings,
            p_upper: qp.p_upper.clone(),
            q: qp.q.clone(),
            obj_const: qp.obj_const,
            rows,
            l,
            u,
            d: vec![1.0; n],
            e: vec![1.0; m],
            c_scale: 1.0,
            rho: vec![settings.rho0; m],
            kkt_l: Vec::new(),
            refactor_count: 0,
            x: vec![0.0; n],
            z: vec![0.0; m],
            y: vec![0.0; m],
        };
        solver.equilibrate();
        solver.init_rho();
        solver.factorize()?;
        Ok(solver)
    }

    /// Patch the bounds of variable `col` (used for branching). Values are
    /// in the original, unscaled units.
    pub fn set_var_bounds(&mut self, col: usize, lo: f64, hi: f64) {
        debug_assert!(col < self.n);
        // Scaled bound row: e * x = e * d * x_scaled, so bound scales by e.
        self.l[col] = lo * self.e[col];
        self.u[col] = hi * self.e[col];
    }

    /// Patch a general row's bounds (row index into the original QP rows).
    #[allow(dead_code)]
    pub fn set_row_bounds(&mut self, row: usize, lo: f64, hi: f64) {
        let r = self.n + row;
        self.l[r] = lo * self.e[r];
        self.u[r] = hi * self.e[r];
    }

    /// Ruiz equilibration over the stacked [P A'; A 0] matrix, plus cost
    /// normalization. Mutates the stored (scaled) data.
    fn equilibrate(&mut self) {
        let n = self.n;
        for _ in 0..self.settings.scaling_iters {
            // Column norms over P (symmetric) and A.
            let mut col_norm = vec![0.0f64; n];
            for &(i, j, v) in &self.p_upper {
                let a = v.abs();
                if a > col_norm[j] {
                    col_norm[j] = a;
                }
                if a > col_norm[i] {
                    col_norm[i] = a;
                }
            }
            let mut row_norm = vec![0.0f64; self.m];
            for (r, row) in self.rows.iter().enumerate() {
                for (&c, &v) in row.idx.iter().zip(&row.val) {
                    let a = v.abs();
                    if a > row_norm[r] {
                        row_norm[r] = a;
                    }
                    if a > col_norm[c] {
                        col_norm[c] = a;
                    }
                }
            }
            let step = |norm: f64| -> f64 {
                if norm < 1e-12 {
                    1.0
                } else {
                    1.0 / norm.sqrt().clamp(1e-4, 1e4)
                }
            };
            let dc: Vec<f64> = col_norm.iter().map(|&v| step(v)).collect();
            let ec: Vec<f64> = row_norm.iter().map(|&v| step(v)).collect();

            for (i, j, v) in self.p_upper.iter_mut() {
                *v *= dc[*i] * dc[*j];
            }
            for (jq, v) in self.q.iter_mut().enumerate() {
                *v *= dc[jq];
            }
            for (r, row) in self.rows.iter_mut().enumerate() {
                for (pos, &c) in row.idx.iter().enumerate() {
                    row.val[pos] *= ec[r] * dc[c];
                }
                if self.l[r].is_finite() {
                    self.l[r] *= ec[r];
                }
                if self.u[r].is_finite() {
                    self.u[r] *= ec[r];
                }
            }
            for j in 0..n {
                self.d[j] *= dc[j];
            }
            for r in 0..self.m {
                self.e[r] *= ec[r];
            }
        }
        // Cost scaling: bring the scaled gradient to O(1).
        let mut p_col_norm = vec![0.0f64; n];
        for &(i, j, v) in &self.p_upper {
            let a = v.abs();
            p_col_norm[j] = p_col_norm[j].max(a);
            p_col_norm[i] = p_col_norm[i].max(a);
        }
        let p_mean = if n > 0 {
            p_col_norm.iter().sum::<f64>() / n as f64
        } else {
            0.0
        };
        let q_norm = self.q.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let denom = p_mean.max(q_norm).max(1e-6);
        let c = 1.0 / denom.clamp(1e-4, 1e4);
        for (_, _, v) in self.p_upper.iter_mut() {
            *v *= c;
        }
        for v in self.q.iter_mut() {
            *v *= c;
        }
        self.c_scale = c;
    }

    fn init_rho(&mut self) {
        let base = self.settings.rho0;
        for r in 0..self.m {
            let eq = self.l[r].is_finite() && self.u[r].is_finite() && self.l[r] == self.u[r];
            self.rho[r] = if eq { base * 1e3 } else { base };
        }
    }

    /// Build and factor K = P + sigma I + A' diag(rho) A (dense, scaled).
    fn factorize(&mut self) -> Result<()> {
        let n = self.n;
        let mut k = vec![0.0f64; n * n];
        for j in 0..n {
            k[j * n + j] = self.settings.sigma;
        }
        for &(i, j, v) in &self.p_upper {
            k[i * n + j] += v;
            if i != j {
                k[j * n + i] += v;
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let rho = self.rho[r];
            for (pi, &ci) in row.idx.iter().enumerate() {
                let vi = row.val[pi];
                for (pj, &cj) in row.idx.iter().enumerate() {
                    if cj >= ci {
                        k[ci * n + cj] += rho * vi * row.val[pj];
                    }
                }
            }
        }
        // Mirror to the lower triangle.
        for i in 0..n {
            for j in 0..i {
                k[i * n + j] = k[j * n + i];
            }
        }
        cholesky_in_place(&mut k, n)
            .map_err(|_| MipError::Internal("KKT matrix not positive definite".into()))?;
        self.kkt_l = k;
        Ok(())
    }

    fn kkt_solve(&self, rhs: &mut [f64]) {
        let n = self.n;
        let l = &self.kkt_l;
        // Forward substitution L w = rhs.
        for i in 0..n {
            let mut s = rhs[i];
            for j in 0..i {
                s -= l[i * n + j] * rhs[j];
            }
            rhs[i] = s / l[i * n + i];
        }
        // Back substitution L' x = w.
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in (i + 1)..n {
                s -= l[j * n + i] * rhs[j];
            }
            rhs[i] = s / l[i * n + i];
        }
    }

    fn p_mul(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.p_upper {
            out[i] += v * x[j];
            if i != j {
                out[j] += v * x[i];
            }
        }
    }

    fn a_mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            out[r] = row.dot(x);
        }
    }

    fn at_mul(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, row) in self.rows.iter().enumerate() {
            let yr = y[r];
            if yr != 0.0 {
                for (&c, &v) in row.idx.iter().zip(&row.val) {
                    out[c] += v * yr;
                }
            }
        }
    }

    fn unscaled_x(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.d[j] * self.x[j]).collect()
    }

    fn unscaled_objective(&self, x_unscaled: &[f64]) -> f64 {
        // Recompute from scaled data, undoing both scalings.
        let mut val = self.obj_const;
        for j in 0..self.n {
            val += (self.q[j] / (self.c_scale * self.d[j])) * x_unscaled[j];
        }
        for &(i, j, v) in &self.p_upper {
            let pv = v / (self.c_scale * self.d[i] * self.d[j]);
            if i == j {
                val += 0.5 * pv * x_unscaled[i] * x_unscaled[i];
            } else {
                val += pv * x_unscaled[i] * x_unscaled[j];
            }
        }
        val
    }

    /// Run ADMM from the current iterates, polishing as soon as the
    /// iterates are close enough for the active set to be identifiable.
    pub fn solve(&mut self) -> QpResult {
        let n = self.n;
        let m = self.m;
        let s = self.settings;

        let mut xt = vec![0.0; n]; // x-tilde
        let mut zt = vec![0.0; m];
        let mut rhs = vec![0.0; n];
        let mut work_n = vec![0.0; n];
        let mut work_m = vec![0.0; m];
        let mut prev_x = vec![0.0; n];
        let mut prev_y = vec![0.0; m];

        let mut iterations = 0;
        let mut status = QpStatus::MaxIter;
        let mut pri_res = f64::INFINITY;
        let mut dua_res = f64::INFINITY;
        let mut rho_adaptions = 0usize;
        // Early-polish pacing and stall detection.
        let mut next_polish_at = 100usize;
        let mut best_score = f64::INFINITY;
        let mut best_score_iter = 0usize;

        while iterations < s.max_iter {
            prev_x.copy_from_slice(&self.x);
            prev_y.copy_from_slice(&self.y);

            // x-tilde update: K xt = sigma x - q + A'(rho z - y)
            for r in 0..m {
                work_m[r] = self.rho[r] * self.z[r] - self.y[r];
            }
            self.at_mul(&work_m, &mut rhs);
            for j in 0..n {
                rhs[j] += s.sigma * self.x[j] - self.q[j];
            }
            self.kkt_solve(&mut rhs);
            xt.copy_from_slice(&rhs);

            self.a_mul(&xt, &mut zt);

            // Relaxed updates.
            for j in 0..n {
                self.x[j] = s.alpha * xt[j] + (1.0 - s.alpha) * self.x[j];
            }
            for r in 0..m {
                let z_relaxed = s.alpha * zt[r] + (1.0 - s.alpha) * self.z[r];
                let z_new = (z_relaxed + self.y[r] / self.rho[r]).clamp(self.l[r], self.u[r]);
                self.y[r] += self.rho[r] * (z_relaxed - z_new);
                self.z[r] = z_new;
            }
            iterations += 1;

            if iterations % s.check_every != 0 && iterations != s.max_iter {
                continue;
            }

            // Residuals (scaled space, with norm guards).
            self.a_mul(&self.x.clone(), &mut work_m);
            let mut rp: f64 = 0.0;
            let mut ax_norm: f64 = 0.0;
            let mut z_norm: f64 = 0.0;
            for r in 0..m {
                rp = rp.max((work_m[r] - self.z[r]).abs() / self.e[r]);
                ax_norm = ax_norm.max(work_m[r].abs() / self.e[r]);
                z_norm = z_norm.max(self.z[r].abs() / self.e[r]);
            }
            self.p_mul(&self.x.clone(), &mut work_n);
            self.at_mul(&self.y.clone(), &mut rhs);
            let mut rd: f64 = 0.0;
            let mut px_norm: f64 = 0.0;
            let mut aty_norm: f64 = 0.0;
            let mut q_norm: f64 = 0.0;
            for j in 0..n {
                let inv = 1.0 / (self.c_scale * self.d[j]);
                rd = rd.max((work_n[j] + self.q[j] + rhs[j]).abs() * inv);
                px_norm = px_norm.max(work_n[j].abs() * inv);
                aty_norm = aty_norm.max(rhs[j].abs() * inv);
                q_norm = q_norm.max(self.q[j].abs() * inv);
            }
            pri_res = rp;
            dua_res = rd;

            let eps_pri = s.eps_abs + s.eps_rel * ax_norm.max(z_norm);
            let eps_dua = s.eps_abs + s.eps_rel * px_norm.max(aty_norm).max(q_norm);
            if std::env::var_os("COVPLAN_QP_TRACE").is_some() && iterations % 2000 == 0 {
                let rho_lo = self.rho.iter().cloned().fold(f64::INFINITY, f64::min);
                let rho_hi = self.rho.iter().cloned().fold(0.0f64, f64::max);
                eprintln!(
                    "qp it {iterations} rp {rp:.3e} rd {rd:.3e} eps ({eps_pri:.1e},{eps_dua:.1e}) rho [{rho_lo:.1e},{rho_hi:.1e}] adapt {rho_adaptions}"
                );
            }
            if rp <= eps_pri && rd <= eps_dua {
                status = QpStatus::Solved;
                break;
            }

            // Once the iterates are roughly primal-dual feasible the active
            // set is usually identifiable; a polish that passes the strict
            // KKT validation finishes the solve exactly without grinding
            // first-order iterations down to the final tolerance.
            let near_pri = 3e-3 * (1.0 + ax_norm.max(z_norm));
            let near_dua = 3e-3 * (1.0 + px_norm.max(aty_norm).max(q_norm));
            if rp <= near_pri && rd <= near_dua && iterations >= next_polish_at {
                if let Some(pol) = self.polish() {
                    return QpResult {
                        status: QpStatus::Solved,
                        objective: pol.objective,
                        lower_bound: pol.objective - 1e-9 * (1.0 + pol.objective.abs()),
                        x: pol.x,
                        polished: true,
                        pri_res: pol.pri_res,
                        dua_res: pol.dua_res,
                        iterations,
                    };
                }
                next_polish_at = iterations + (iterations / 2).clamp(100, 2_000);
            }

            // Give up on iterations that have stopped making progress; the
            // caller treats an inconclusive solve soundly.
            let score = rp / (1.0 + ax_norm.max(z_norm))
                + rd / (1.0 + px_norm.max(aty_norm).max(q_norm));
            if score < 0.5 * best_score {
                best_score = score;
                best_score_iter = iterations;
            } else if iterations >= 20_000 && iterations - best_score_iter >= 10_000 {
                break;
            }

            // Infeasibility certificates from one-step differences.
            let dy: Vec<f64> = (0..m).map(|r| self.y[r] - prev_y[r]).collect();
            if self.primal_infeasibility_cert(&dy, &mut rhs) {
                status = QpStatus::PrimalInfeasible;
                break;
            }
            let dx: Vec<f64> = (0..n).map(|j| self.x[j] - prev_x[j]).collect();
            if self.dual_infeasibility_cert(&dx, &mut work_n, &mut work_m) {
                status = QpStatus::DualInfeasible;
                break;
            }

            // Adaptive rho: rebalance when residuals diverge badly.
            if rho_adaptions < 12 && iterations % (s.check_every * 8) == 0 {
                let ratio = (rp / eps_pri.max(1e-300)) / (rd / eps_dua.max(1e-300)).max(1e-300);
                if ratio > 25.0 || ratio < 0.04 {
                    let scale = ratio.sqrt().clamp(1e-3, 1e3);
                    for r in 0..m {
                        self.rho[r] = (self.rho[r] * scale).clamp(1e-7, 1e7);
                    }
                    if self.factorize().is_err() {
                        // Keep going with the previous factor.
                    } else {
                        rho_adaptions += 1;
                        self.refactor_count += 1;
                    }
                }
            }
        }

        match status {
            QpStatus::PrimalInfeasible | QpStatus::DualInfeasible => QpResult {
                status,
                x: self.unscaled_x(),
                objective: f64::INFINITY,
                polished: false,
                pri_res,
                dua_res,
                iterations,
                lower_bound: f64::INFINITY,
            },
            _ => {
                let solved = status == QpStatus::Solved;
                let x_unscaled = self.unscaled_x();
                let objective = self.unscaled_objective(&x_unscaled);
                // Try to recover an exact KKT point.
                if let Some(pol) = self.polish() {
                    return QpResult {
                        status: QpStatus::Solved,
                        objective: pol.objective,
                        lower_bound: pol.objective - 1e-9 * (1.0 + pol.objective.abs()),
                        x: pol.x,
                        polished: true,
                        pri_res: pol.pri_res,
                        dua_res: pol.dua_res,
                        iterations,
                    };
                }
                // Conservative lower bound from residual magnitudes.
                let y_mag = (0..m).fold(0.0f64, |a, r| {
                    a.max((self.e[r] * self.y[r] / self.c_scale).abs())
                });
                let x_mag = x_unscaled.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                let slack = 50.0 * (pri_res * (1.0 + y_mag) + dua_res * (1.0 + x_mag)) + 1e-9;
                QpResult {
                    status,
                    objective,
                    lower_bound: if solved {
                        objective - slack
                    } else {
                        f64::NEG_INFINITY
                    },
                    x: x_unscaled,
                    polished: false,
                    pri_res,
                    dua_res,
                    iterations,
                }
            }
        }
    }

    fn primal_infeasibility_cert(&self, dy: &[f64], work_n: &mut [f64]) -> bool {
        // Farkas direction test in unscaled units: a dual direction v with
        // A'v = 0 and support σ(v) = Σ_{v>0} u·v + Σ_{v<0} l·v < 0 proves
        // there is no feasible point. Floating point never produces an exact
        // A'v = 0, so instead of demanding a tiny residual the test charges
        // the certificate for it: every box-bounded x satisfies
        // v'Ax ≥ −Σ_j |(A'v)_j|·radius_j, so σ(v) + Σ_j |(A'v)_j|·radius_j < 0
        // is still a proof. Columns without finite bounds get no radius and
        // must carry an essentially zero residual.
        let mut dy_norm: f64 = 0.0;
        for r in 0..self.m {
            dy_norm = dy_norm.max((self.e[r] * dy[r]).abs());
        }
        if dy_norm <= 1e-300 {
            return false;
        }
        let eps = self.settings.eps_inf * dy_norm;
        let mut support = 0.0;
        for r in 0..self.m {
            let v = self.e[r] * dy[r]; // unscaled dual direction
            if v > 0.0 {
                if self.u[r].is_infinite() {
                    if v > eps {
                        return false;
                    }
                } else {
                    support += (self.u[r] / self.e[r]) * v;
                }
            } else if v < 0.0 {
                if self.l[r].is_infinite() {
                    if -v > eps {
                        return false;
                    }
                } else {
                    support += (self.l[r] / self.e[r]) * v;
                }
            }
        }
        if support > -eps {
            return false;
        }
        self.at_mul(dy, work_n);
        let mut margin = 0.0f64;
        for j in 0..self.n {
            let g = (work_n[j] / self.d[j]).abs();
            // Identity bound rows lead the row list, so row j carries the
            // box of column j.
            let radius = (self.l[j] / self.e[j])
                .abs()
                .max((self.u[j] / self.e[j]).abs());
            if radius.is_finite() {
                margin += g * radius;
            } else if g > 1e-12 * dy_norm {
                return false;
            }
        }
        support + margin < -eps
    }

    fn dual_infeasibility_cert(&self, dx: &[f64], work_n: &mut [f64], work_m: &mut [f64]) -> bool {
        let mut dx_norm: f64 = 0.0;
        for j in 0..self.n {
            dx_norm = dx_norm.max((self.d[j] * dx[j]).abs());
        }
        if dx_norm <= 1e-300 {
            return false;
        }
        // An unboundedness claim has no residual-charging analogue of the
        // primal Farkas margin, so it keeps a strict tolerance regardless of
        // how eagerly primal infeasibility is declared.
        let eps = self.settings.eps_inf.min(1e-7) * dx_norm;
        self.p_mul(dx, work_n);
        let mut q_dx = 0.0;
        for j in 0..self.n {
            if (work_n[j] / (self.c_scale * self.d[j])).abs() > eps {
                return false;
            }
            q_dx += (self.q[j] / (self.c_scale * self.d[j])) * (self.d[j] * dx[j]);
        }
        if q_dx > -eps {
            return false;
        }
        self.a_mul(dx, work_m);
        for r in 0..self.m {
            let v = work_m[r] / self.e[r];
            if self.u[r].is_finite() && v > eps {
                return false;
            }
            if self.l[r].is_finite() && v < -eps {
                return false;
            }
        }
        true
    }

    /// Active-set polish: guess the active rows, then refine the guess a few
    /// rounds like a primal active-set method — adding rows the candidate
    /// point violates and dropping rows whose multiplier comes out with the
    /// wrong sign — accepting only a result that passes strict KKT checks in
    /// unscaled units. Refinement makes the initial guess uncritical, which
    /// matters because the method is also called from moderately converged
    /// iterates whose duals are still noisy and because LP-degenerate active
    /// rows can carry zero multipliers.
    fn polish(&self) -> Option<PolishOut> {
        let y_norm = self.y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let tol_y = 1e-9 * (1.0 + y_norm);

        // Initial guess: dual-sign actives plus rows sitting near a bound in
        // the primal iterate.
        let mut active: Vec<(usize, Act)> = Vec::new();
        let mut state = vec![0i8; self.m]; // 0 free, -1 lower, +1 upper
        for r in 0..self.m {
            let eq = self.l[r] == self.u[r] && self.l[r].is_finite();
            if eq || self.y[r] < -tol_y {
                if self.l[r].is_finite() {
                    state[r] = -1;
                }
            } else if self.y[r] > tol_y && self.u[r].is_finite() {
                state[r] = 1;
            }
            if state[r] == 0 {
                let zu = self.z[r] / self.e[r];
                let slack_tol = 1e-5 * (1.0 + zu.abs());
                if self.l[r].is_finite() && (zu - self.l[r] / self.e[r]).abs() <= slack_tol {
                    state[r] = -1;
                } else if self.u[r].is_finite() && (self.u[r] / self.e[r] - zu).abs() <= slack_tol
                {
                    state[r] = 1;
                }
            }
        }
        for round in 0..4 {
            active.clear();
            for r in 0..self.m {
                match state[r] {
                    -1 => active.push((r, Act::Lower)),
                    1 => active.push((r, Act::Upper)),
                    _ => {}
                }
            }
            match self.polish_attempt(&active) {
                PolishStep::Done(out) => return Some(out),
                PolishStep::Repair { add, drop } => {
                    if round == 3 || (add.is_empty() && drop.is_empty()) {
                        return None;
                    }
                    for (r, act) in add {
                        state[r] = if act == Act::Upper { 1 } else { -1 };
                    }
                    for r in drop {
                        state[r] = 0;
                    }
                }
                PolishStep::Fail => return None,
            }
        }
        None
    }

    /// One equality-constrained KKT solve against a fixed active-set guess.
    fn polish_attempt(&self, active: &[(usize, Act)]) -> PolishStep {
        let n = self.n;
        let k = active.len();
        if n + k > self.settings.polish_cap {
            return PolishStep::Fail;
        }

        // KKT: [P + dI, A_act'; A_act, -dI] [x; nu] = [-q; b_act]
        let dim = n + k;
        let delta = 1e-8;
        let mut mat = vec![0.0f64; dim * dim];
        let mut rhs = vec![0.0f64; dim];
        for j in 0..n {
            mat[j * dim + j] = delta;
            rhs[j] = -self.q[j];
        }
        for &(i, j, v) in &self.p_upper {
            mat[i * dim + j] += v;
            if i != j {
                mat[j * dim + i] += v;
            }
        }
        for (a, &(r, act)) in active.iter().enumerate() {
            let row = &self.rows[r];
            for (&c, &v) in row.idx.iter().zip(&row.val) {
                mat[c * dim + (n + a)] = v;
                mat[(n + a) * dim + c] = v;
            }
            mat[(n + a) * dim + (n + a)] = -delta;
            rhs[n + a] = match act {
                Act::Lower => self.l[r],
                Act::Upper => self.u[r],
            };
        }

        let mut lu = mat.clone();
        let piv = match lu_factor(&mut lu, dim) {
            Some(p) => p,
            None => return PolishStep::Fail,
        };
        let mut sol = rhs.clone();
        lu_solve(&lu, &piv, dim, &mut sol);
        // One round of iterative refinement against the unregularized system.
        {
            let mut resid = rhs.clone();
            for i in 0..dim {
                let mut acc = 0.0;
                for j in 0..dim {
                    let mut mij = mat[i * dim + j];
                    if i == j {
                        // Remove the regularization for the residual check.
                        mij -= if i < n { delta } else { -delta };
                    }
                    acc += mij * sol[j];
                }
                resid[i] -= acc;
            }
            let mut corr = resid;
            lu_solve(&lu, &piv, dim, &mut corr);
            for i in 0..dim {
                sol[i] += corr[i];
            }
        }

        // Assemble the full candidate (scaled space). Multipliers whose sign
        // contradicts their bound mark rows that should leave the active set;
        // zero them for the validation pass and report them for repair.
        let x_s = &sol[..n];
        let nu_scale = active
            .iter()
            .enumerate()
            .fold(0.0f64, |a, (i, _)| a.max(sol[n + i].abs()));
        let nu_tol = 1e-9 * (1.0 + nu_scale);
        let mut y_s = vec![0.0f64; self.m];
        let mut drop: Vec<usize> = Vec::new();
        for (a, &(r, act)) in active.iter().enumerate() {
            let nu = sol[n + a];
            let eq = self.l[r] == self.u[r];
            if eq {
                y_s[r] = nu;
                continue;
            }
            let wrong = match act {
                Act::Lower => nu > nu_tol,
                Act::Upper => nu < -nu_tol,
            };
            if wrong {
                drop.push(r);
            } else {
                y_s[r] = nu;
            }
        }

        // Unscaled KKT validation.
        let x_u: Vec<f64> = (0..n).map(|j| self.d[j] * x_s[j]).collect();
        let mut px = vec![0.0; n];
        self.p_mul(x_s, &mut px);
        let mut aty = vec![0.0; n];
        self.at_mul(&y_s, &mut aty);
        let mut stat: f64 = 0.0;
        let mut mag: f64 = 1.0;
        for j in 0..n {
            let inv = 1.0 / (self.c_scale * self.d[j]);
            let g = (px[j] + self.q[j] + aty[j]) * inv;
            stat = stat.max(g.abs());
            mag = mag
                .max((px[j] * inv).abs())
                .max((self.q[j] * inv).abs())
                .max((aty[j] * inv).abs());
        }
        let mut pri: f64 = 0.0;
        let mut ax_mag: f64 = 1.0;
        let mut viols: Vec<(usize, f64, f64)> = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let ax = row.dot(x_s) / self.e[r];
            let lo = self.l[r] / self.e[r];
            let hi = self.u[r] / self.e[r];
            let v_lo = if lo.is_finite() { lo - ax } else { 0.0 };
            let v_hi = if hi.is_finite() { ax - hi } else { 0.0 };
            pri = pri.max(v_lo).max(v_hi);
            ax_mag = ax_mag.max(ax.abs());
            if v_lo > 0.0 || v_hi > 0.0 {
                viols.push((r, v_lo, v_hi));
            }
        }

        if stat <= self.settings.kkt_tol * mag && pri <= self.settings.kkt_tol * ax_mag {
            let objective = self.unscaled_objective(&x_u);
            return PolishStep::Done(PolishOut {
                x: x_u,
                objective,
                pri_res: pri,
                dua_res: stat,
            });
        }

        // Violated rows must enter the active set at the violated bound.
        let add_tol = self.settings.kkt_tol * ax_mag;
        let mut add: Vec<(usize, Act)> = Vec::new();
        for (r, v_lo, v_hi) in viols {
            if v_lo > add_tol && v_lo >= v_hi {
                add.push((r, Act::Lower));
            } else if v_hi > add_tol {
                add.push((r, Act::Upper));
            }
        }
        if add.is_empty() && drop.is_empty() {
            return PolishStep::Fail;
        }
        PolishStep::Repair { add, drop }
    }
}

struct PolishOut {
    x: Vec<f64>,
    objective: f64,
    pri_res: f64,
    dua_res: f64,
}

/// Which bound of a constraint row is pinned during polishing.
#[derive(Clone, Copy, PartialEq)]
enum Act {
    Lower,
    Upper,
}

/// Outcome of one polish attempt against a fixed active-set guess.
enum PolishStep {
    Done(PolishOut),
    Repair { add: Vec<(usize, Act)>, drop: Vec<usize> },
    Fail,
}

/// Dense in-place lower Cholesky (row-major). Errors if not PD.
fn cholesky_in_place(a: &mut [f64], n: usize) -> std::result::Result<(), ()> {
    for k in 0..n {
        let mut d = a[k * n + k];
        for p in 0..k {
            d -= a[k * n + p] * a[k * n + p];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(());
        }
        let d = d.sqrt();
        a[k * n + k] = d;
        for r in (k + 1)..n {
            let mut v = a[r * n + k];
            for p in 0..k {
                v -= a[r * n + p] * a[k * n + p];
            }
            a[r * n + k] = v / d;
        }
    }
    Ok(())
}

/// Dense LU with partial pivoting; returns the pivot permutation.
fn lu_factor(a: &mut [f64], n: usize) -> Option<Vec<usize>> {
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            piv.swap(k, p);
        }
        let pivot = a[k * n + k];
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            a[r * n + k] = f;
            if f != 0.0 {
                for c in (k + 1)..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
    }
    Some(piv)
}

fn lu_solve(lu: &[f64], piv: &[usize], n: usize, b: &mut [f64]) {
    let orig = b.to_vec();
    for (i, &p) in piv.iter().enumerate() {
        b[i] = orig[p];
    }
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= lu[i * n + j] * b[j];
        }
        b[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= lu[i * n + j] * b[j];
        }
        b[i] = s / lu[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve_qp(qp: &BoxQp) -> QpResult {
        let mut solver = QpSolver::new(qp, QpSettings::default()).unwrap();
        solver.solve()
    }

    #[test]
    fn scalar_bound_active() {
        // min (x-2)^2 s.t. x <= 1  ->  x = 1, obj = 1.
        let qp = BoxQp {
            n: 1,
            p_upper: vec![(0, 0, 2.0)],
            q: vec![-4.0],
            obj_const: 4.0,
            rows: vec![],
            row_lo: vec![],
            row_hi: vec![],
            var_lo: vec![f64::NEG_INFINITY],
            var_hi: vec![1.0],
        };
        let r = solve_qp(&qp);
        assert_eq!(r.status, QpStatus::Solved);
        assert!(r.polished, "expected polished solution");
        assert!((r.x[0] - 1.0).abs() < 1e-8, "x = {}", r.x[0]);
        assert!((r.objective - 1.0).abs() < 1e-8, "obj = {}", r.objective);
    }

    #[test]
    fn equality_row() {
        // min x^2 + y^2 s.t. x + y = 2  ->  x = y = 1.
        let qp = BoxQp {
            n: 2,
            p_upper: vec![(0, 0, 2.0), (1, 1, 2.0)],
            q: vec![0.0, 0.0],
            obj_const: 0.0,
            rows: vec![SparseVec {
                idx: vec![0, 1],
                val: vec![1.0, 1.0],
            }],
            row_lo: vec![2.0],
            row_hi: vec![2.0],
            var_lo: vec![f64::NEG_INFINITY; 2],
            var_hi: vec![f64::INFINITY; 2],
        };
        let r = solve_qp(&qp);
        assert_eq!(r.status, QpStatus::Solved);
        assert!((r.x[0] - 1.0).abs() < 1e-7);
        assert!((r.x[1] - 1.0).abs() < 1e-7);
        assert!((r.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn pure_lp_vertex() {
        // min -x - 2y s.t. x + y <= 3, 0 <= x,y <= 2  ->  (1, 2), obj -5.
        let qp = BoxQp {
            n: 2,
            p_upper: vec![],
            q: vec![-1.0, -2.0],
            obj_const: 0.0,
            rows: vec![SparseVec {
                idx: vec![0, 1],
                val: vec![1.0, 1.0],
            }],
            row_lo: vec![f64::NEG_INFINITY],
            row_hi: vec![3.0],
            var_lo: vec![0.0, 0.0],
            var_hi: vec![2.0, 2.0],
        };
        let r = solve_qp(&qp);
        assert_eq!(r.status, QpStatus::Solved);
        assert!((r.objective + 5.0).abs() < 1e-7, "obj = {}", r.objective);
    }

    #[test]
    fn detects_primal_infeasible() {
        // x >= 2 and x <= 1 cannot both hold.
        let qp = BoxQp {
            n: 1,
            p_upper: vec![(0, 0, 2.0)],
            q: vec![0.0],
            obj_const: 0.0,
            rows: vec![SparseVec {
                idx: vec![0],
                val: vec![1.0],
            }],
            row_lo: vec![2.0],
            row_hi: vec![f64::INFINITY],
            var_lo: vec![f64::NEG_INFINITY],
            var_hi: vec![1.0],
        };
        let r = solve_qp(&qp);
        assert_eq!(r.status, QpStatus::PrimalInfeasible);
    }

    #[test]
    fn detects_dual_infeasible() {
        // min -x with x unbounded above.
        let qp = BoxQp {
            n: 1,
            p_upper: vec![],
            q: vec![-1.0],
            obj_const: 0.0,
            rows: vec![],
            row_lo: vec![],
            row_hi: vec![],
            var_lo: vec![0.0],
            var_hi: vec![f64::INFINITY],
        };
        let r = solve_qp(&qp);
        assert_eq!(r.status, QpStatus::DualInfeasible);
    }

    #[test]
    fn bound_patch_reuses_factorization() {
        // min (x-3)^2 + (y+1)^2, start with y free then fix y = 0.5.
        let qp = BoxQp {
            n: 2,
            p_upper: vec![(0, 0, 2.0), (1, 1, 2.0)],
            q: vec![-6.0, 2.0],
            obj_const: 10.0,
            rows: vec![],
            row_lo: vec![],
            row_hi: vec![],
            var_lo: vec![f64::NEG_INFINITY; 2],
            var_hi: vec![f64::INFINITY; 2],
        };
        let mut solver = QpSolver::new(&qp, QpSettings::default()).unwrap();
        let r1 = solver.solve();
        assert!((r1.x[0] - 3.0).abs() < 1e-7);
        assert!((r1.x[1] + 1.0).abs() < 1e-7);
        solver.set_var_bounds(1, 0.5, 0.5);
        let r2 = solver.solve();
        assert!((r2.x[0] - 3.0).abs() < 1e-7);
        assert!((r2.x[1] - 0.5).abs() < 1e-8);
        assert!((r2.objective - 2.25).abs() < 1e-7, "obj = {}", r2.objective);
    }

    #[test]
    fn badly_scaled_row_still_solves() {
        // Big-M style row: 1e4 coefficient against unit-scale objective.
        let qp = BoxQp {
            n: 2,
            p_upper: vec![(0, 0, 2.0)],
            q: vec![-2.0, -1.0],
            obj_const: 1.0,
            rows: vec![SparseVec {
                idx: vec![0, 1],
                val: vec![1.0, 1e4],
            }],
            row_lo: vec![f64::NEG_INFINITY],
            row_hi: vec![1e4],
            var_lo: vec![f64::NEG_INFINITY, 0.0],
            var_hi: vec![f64::INFINITY, 1.0],
        };
        let r = solve_qp(&qp);
        assert_eq!(r.status, QpStatus::Solved);
        // Optimum rides the row: y = (1e4 - x)/1e4, minimize
        // x^2 - x(2 - 1e-4), so x = (2 - 1e-4)/2 and obj = -x^2.
        let x_star = (2.0 - 1e-4) / 2.0;
        assert!(
            (r.objective + x_star * x_star).abs() < 1e-6,
            "obj = {}",
            r.objective
        );
    }
}
