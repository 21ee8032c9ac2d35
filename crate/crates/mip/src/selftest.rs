//! Randomized model generator and exhaustive-enumeration oracle used by the
//! solver's correctness tests.
//!
//! The oracle never exercises the branch-and-bound path: for every one of
//! the `2^k` binary fixings it substitutes the binaries into the rows and
//! objective by hand, producing a binary-free convex QP that the solver
//! front-end dispatches straight to the relaxation engine. Comparing the
//! tree search against this enumeration checks the search logic against a
//! method whose only shared component is the convex QP kernel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{solve, MipModel, MipStatus, Sense, SolverConfig, Var};

/// Plain description of a random mixed-integer QP, kept separate from
/// `MipModel` so the oracle can do its own substitution arithmetic.
#[derive(Debug, Clone)]
pub struct MiqpDesc {
    pub cont_bounds: Vec<(f64, f64)>,
    pub n_bin: usize,
    /// Rows: continuous terms, binary terms, sense, rhs.
    pub rows: Vec<RowDesc>,
    /// Upper-triangular PSD quadratic over continuous variables.
    pub quad: Vec<(usize, usize, f64)>,
    pub lin_cont: Vec<f64>,
    pub lin_bin: Vec<f64>,
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct RowDesc {
    pub cont: Vec<(usize, f64)>,
    pub bin: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

pub fn random_miqp(seed: u64) -> MiqpDesc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cont = rng.gen_range(1..=10usize);
    let n_bin = rng.gen_range(0..=12usize);

    let cont_bounds: Vec<(f64, f64)> = (0..n_cont)
        .map(|_| {
            let lo = rng.gen_range(-5.0..0.0);
            let hi = rng.gen_range(0.5..6.0);
            (lo, hi)
        })
        .collect();

    // PSD quadratic: Q = L L' with a sparse random lower-triangular L.
    let mut quad = Vec::new();
    if rng.gen_bool(0.7) {
        let mut l = vec![0.0f64; n_cont * n_cont];
        for i in 0..n_cont {
            for j in 0..=i {
                if rng.gen_bool(0.5) {
                    l[i * n_cont + j] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        for i in 0..n_cont {
            for j in i..n_cont {
                let mut v = 0.0;
                for p in 0..n_cont {
                    v += l[i * n_cont + p] * l[j * n_cont + p];
                }
                if v != 0.0 {
                    quad.push((i, j, v));
                }
            }
        }
    }

    let lin_cont: Vec<f64> = (0..n_cont).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let lin_bin: Vec<f64> = (0..n_bin)
        .map(|_| {
            if rng.gen_bool(0.4) {
                0.0
            } else {
                rng.gen_range(-2.0..2.0)
            }
        })
        .collect();
    let constant = rng.gen_range(-3.0..3.0);

    // A reference assignment keeps most models feasible; a slice of rows is
    // deliberately tightened past it so infeasible statuses get exercised.
    let x_ref: Vec<f64> = cont_bounds
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect();
    let b_ref: Vec<f64> = (0..n_bin)
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
        .collect();

    let n_rows = rng.gen_range(1..=8usize);
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let mut cont = Vec::new();
        let mut bin = Vec::new();
        let n_terms = rng.gen_range(1..=4usize);
        for _ in 0..n_terms {
            let coef = if rng.gen_bool(0.1) {
                rng.gen_range(10.0..50.0)
            } else {
                rng.gen_range(-3.0..3.0)
            };
            if n_bin > 0 && rng.gen_bool(0.5) {
                let idx = rng.gen_range(0..n_bin);
                if !bin.iter().any(|&(i, _)| i == idx) {
                    bin.push((idx, coef));
                }
            } else {
                let idx = rng.gen_range(0..n_cont);
                if !cont.iter().any(|&(i, _)| i == idx) {
                    cont.push((idx, coef));
                }
            }
        }
        if cont.is_empty() && bin.is_empty() {
            cont.push((0, 1.0));
        }
        let act: f64 = cont.iter().map(|&(i, c)| c * x_ref[i]).sum::<f64>()
            + bin.iter().map(|&(i, c)| c * b_ref[i]).sum::<f64>();
        let sense = match rng.gen_range(0..10) {
            0 => Sense::Eq,
            1..=5 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = match sense {
            Sense::Eq => act,
            Sense::Le => {
                if rng.gen_bool(0.08) {
                    act - rng.gen_range(5.0..20.0) // likely infeasible
                } else {
                    act + rng.gen_range(0.0..2.0)
                }
            }
            Sense::Ge => {
                if rng.gen_bool(0.08) {
                    act + rng.gen_range(5.0..20.0)
                } else {
                    act - rng.gen_range(0.0..2.0)
                }
            }
        };
        rows.push(RowDesc {
            cont,
            bin,
            sense,
            rhs,
        });
    }

    // Occasionally add a partition row over a binary subset.
    if n_bin >= 2 && rng.gen_bool(0.3) {
        let take = rng.gen_range(2..=n_bin);
        rows.push(RowDesc {
            cont: vec![],
            bin: (0..take).map(|i| (i, 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }

    MiqpDesc {
        cont_bounds,
        n_bin,
        rows,
        quad,
        lin_cont,
        lin_bin,
        constant,
    }
}

impl MiqpDesc {
    /// Build the full mixed-integer model (continuous columns first).
    pub fn to_model(&self) -> MipModel {
        let mut m = MipModel::new();
        let xs: Vec<Var> = self
            .cont_bounds
            .iter()
            .map(|&(lo, hi)| m.add_continuous(lo, hi).unwrap())
            .collect();
        let bs: Vec<Var> = (0..self.n_bin).map(|_| m.add_binary()).collect();
        for row in &self.rows {
            let mut terms: Vec<(Var, f64)> = row.cont.iter().map(|&(i, c)| (xs[i], c)).collect();
            terms.extend(row.bin.iter().map(|&(i, c)| (bs[i], c)));
            m.add_linear_constraint(&terms, row.sense, row.rhs).unwrap();
        }
        let quad: Vec<(Var, Var, f64)> = self
            .quad
            .iter()
            .map(|&(i, j, c)| (xs[i], xs[j], c))
            .collect();
        let mut lin: Vec<(Var, f64)> = self
            .lin_cont
            .iter()
            .enumerate()
            .map(|(i, &c)| (xs[i], c))
            .collect();
        lin.extend(self.lin_bin.iter().enumerate().map(|(i, &c)| (bs[i], c)));
        m.set_objective(&quad, &lin, self.constant).unwrap();
        m
    }

    /// Substitute one binary assignment, returning `None` if a pure-binary
    /// row is violated outright, else the reduced continuous model.
    fn reduced_model(&self, assignment: &[f64]) -> Option<MipModel> {
        let mut m = MipModel::new();
        let xs: Vec<Var> = self
            .cont_bounds
            .iter()
            .map(|&(lo, hi)| m.add_continuous(lo, hi).unwrap())
            .collect();
        for row in &self.rows {
            let bin_act: f64 = row.bin.iter().map(|&(i, c)| c * assignment[i]).sum();
            if row.cont.is_empty() {
                let ok = match row.sense {
                    Sense::Le => bin_act <= row.rhs + 1e-9,
                    Sense::Ge => bin_act >= row.rhs - 1e-9,
                    Sense::Eq => (bin_act - row.rhs).abs() <= 1e-9,
                };
                if !ok {
                    return None;
                }
                continue;
            }
            let terms: Vec<(Var, f64)> = row.cont.iter().map(|&(i, c)| (xs[i], c)).collect();
            m.add_linear_constraint(&terms, row.sense, row.rhs - bin_act)
                .unwrap();
        }
        let quad: Vec<(Var, Var, f64)> = self
            .quad
            .iter()
            .map(|&(i, j, c)| (xs[i], xs[j], c))
            .collect();
        let lin: Vec<(Var, f64)> = self
            .lin_cont
            .iter()
            .enumerate()
            .map(|(i, &c)| (xs[i], c))
            .collect();
        let bin_const: f64 = self
            .lin_bin
            .iter()
            .enumerate()
            .map(|(i, &c)| c * assignment[i])
            .sum();
        m.set_objective(&quad, &lin, self.constant + bin_const)
            .unwrap();
        Some(m)
    }

    /// Exhaustive oracle: best objective over all binary fixings.
    pub fn enumerate_optimum(&self, config: &SolverConfig) -> (MipStatus, f64) {
        let mut best = f64::INFINITY;
        let mut any_feasible = false;
        for mask in 0u64..(1u64 << self.n_bin) {
            let assignment: Vec<f64> = (0..self.n_bin)
                .map(|i| ((mask >> i) & 1) as f64)
                .collect();
            let Some(model) = self.reduced_model(&assignment) else {
                continue;
            };
            let sol = solve(&model, config).expect("oracle sub-QP failed");
            if sol.status == MipStatus::Optimal {
                any_feasible = true;
                if sol.objective < best {
                    best = sol.objective;
                }
            }
        }
        if any_feasible {
            (MipStatus::Optimal, best)
        } else {
            (MipStatus::Infeasible, f64::INFINITY)
        }
    }
}

/// One oracle-vs-search comparison. Returns an error string on mismatch.
pub fn check_against_oracle(seed: u64, config: &SolverConfig) -> std::result::Result<(), String> {
    let desc = random_miqp(seed);
    let model = desc.to_model();
    let sol = solve(&model, config).map_err(|e| format!("seed {seed}: solve error {e}"))?;
    let (oracle_status, oracle_obj) = desc.enumerate_optimum(config);
    if sol.status != oracle_status {
        return Err(format!(
            "seed {seed}: status mismatch search={:?} oracle={:?}",
            sol.status, oracle_status
        ));
    }
    if oracle_status == MipStatus::Optimal {
        let tol = 1e-6 * (1.0 + oracle_obj.abs());
        if (sol.objective - oracle_obj).abs() > tol {
            return Err(format!(
                "seed {seed}: objective mismatch search={} oracle={} (tol {tol})",
                sol.objective, oracle_obj
            ));
        }
    }
    Ok(())
}
