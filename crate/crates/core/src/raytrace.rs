//! Visibility: last-intersection ray tracing against the object mesh, the
//! per-pose visible-facet query, and offline Monte-Carlo learning of the
//! cell-to-facet visibility table with a reproducible text file format.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::agent::{enumerate_configs, fov_pose, light_rays, CameraParams, LightRay};
use crate::geometry::{point_in_triangle, ray_plane_intersect};
use crate::world::{make_grid, Environment, Mesh};

#[derive(Debug, Error)]
pub enum RayError {
    #[error("table/scenario mismatch: {0}")]
    TableMismatch(String),
    #[error("table parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RayError>;

/// Last facet a light ray crosses before reaching the optical center: among
/// all facets whose plane intersection parameter lies in [0, 1] and whose
/// intersection point falls inside the facet, the one with maximum `d`.
/// Ties keep the lowest facet index; parallel facets never hit.
pub fn trace(ray: &LightRay, mesh: &Mesh) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (idx, tri) in mesh.facets.iter().enumerate() {
        let Some(d) = ray_plane_intersect(ray.origin, ray.endpoint, mesh.planes[idx]) else {
            continue;
        };
        if !(0.0..=1.0).contains(&d) {
            continue;
        }
        let p = ray.origin + (ray.endpoint - ray.origin) * d;
        if !point_in_triangle(p, tri) {
            continue;
        }
        match best {
            Some((bd, _)) if d <= bd => {}
            _ => best = Some((d, idx)),
        }
    }
    best.map(|(_, idx)| idx)
}

/// Facets seen by a camera pose through its deterministic light-ray grid.
pub fn visible_facets(
    pose: &crate::agent::FovPose,
    mesh: &Mesh,
    n_rays: usize,
) -> BTreeSet<usize> {
    light_rays(pose, n_rays, None)
        .iter()
        .filter_map(|ray| trace(ray, mesh))
        .collect()
}

/// Cell-to-facet visibility bits learned by Monte-Carlo sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityTable {
    pub grid_dims: (usize, usize, usize),
    pub facet_count: usize,
    pub samples_per_cell: usize,
    pub seed: u64,
    bits: Vec<bool>,
}

impl VisibilityTable {
    fn empty(
        grid_dims: (usize, usize, usize),
        facet_count: usize,
        samples_per_cell: usize,
        seed: u64,
    ) -> VisibilityTable {
        let cells = grid_dims.0 * grid_dims.1 * grid_dims.2;
        VisibilityTable {
            grid_dims,
            facet_count,
            samples_per_cell,
            seed,
            bits: vec![false; cells * facet_count],
        }
    }

    pub fn cell_count(&self) -> usize {
        self.grid_dims.0 * self.grid_dims.1 * self.grid_dims.2
    }

    pub fn bit(&self, cell: usize, facet: usize) -> bool {
        self.bits[cell * self.facet_count + facet]
    }

    /// Sorted facet indices visible from a cell.
    pub fn row(&self, cell: usize) -> Vec<usize> {
        (0..self.facet_count)
            .filter(|&f| self.bit(cell, f))
            .collect()
    }

    /// True when at least one cell can see the facet.
    pub fn facet_reachable(&self, facet: usize) -> bool {
        (0..self.cell_count()).any(|c| self.bit(c, facet))
    }

    pub fn check_compatible(
        &self,
        env: &Environment,
        mesh: &Mesh,
        expected_seed: Option<u64>,
    ) -> Result<()> {
        if self.grid_dims != env.grid_dims {
            return Err(RayError::TableMismatch(format!(
                "grid {:?} vs environment {:?}",
                self.grid_dims, env.grid_dims
            )));
        }
        if self.facet_count != mesh.facet_count() {
            return Err(RayError::TableMismatch(format!(
                "facet count {} vs mesh {}",
                self.facet_count,
                mesh.facet_count()
            )));
        }
        if let Some(seed) = expected_seed {
            if self.seed != seed {
                return Err(RayError::TableMismatch(format!(
                    "table seed {} vs expected {}",
                    self.seed, seed
                )));
            }
        }
        Ok(())
    }
}

/// Monte-Carlo visibility learning.
///
/// Each cell gets its own counter-mode RNG stream (`set_stream(cell index)`
/// on a cipher RNG seeded with `seed`), and every sample consumes exactly
/// four 64-bit draws: three position coordinates and one light-ray sub-seed.
/// Every camera configuration is traced at each sampled position — the table
/// bit asks whether the facet is visible from the cell under *some*
/// configuration, so sweeping all of them per position is the sharpest
/// estimate a position sample can yield. Fixed draw counts make an `N′ > N`
/// run a strict prefix extension, so its table is an entrywise superset; the
/// per-cell streams make the cell loop order irrelevant, so the work can be
/// farmed out across threads without affecting the result.
pub fn learn_table(
    env: &Environment,
    camera: &CameraParams,
    mesh: &Mesh,
    samples_per_cell: usize,
    seed: u64,
) -> VisibilityTable {
    let cells = make_grid(env);
    let configs = enumerate_configs(camera);

    let rows: Vec<Vec<bool>> = cells
        .par_iter()
        .map(|cell| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(cell.index as u64);
            let size = cell.max_corner - cell.min_corner;
            let mut row = vec![false; mesh.facet_count()];
            for _ in 0..samples_per_cell {
                // Exactly four draws per sample (prefix consistency).
                let ux = u64_unit(rng.next_u64());
                let uy = u64_unit(rng.next_u64());
                let uz = u64_unit(rng.next_u64());
                let ray_seed = rng.next_u64();

                let pos = cell.min_corner
                    + crate::geometry::vec3(ux * size.x, uy * size.y, uz * size.z);
                for config in &configs {
                    let Ok(pose) = fov_pose(config, pos, camera) else {
                        continue;
                    };
                    for ray in light_rays(&pose, camera.n_rays, Some(ray_seed)) {
                        if let Some(facet) = trace(&ray, mesh) {
                            row[facet] = true;
                        }
                    }
                }
            }
            row
        })
        .collect();

    let mut table = VisibilityTable::empty(env.grid_dims, mesh.facet_count(), samples_per_cell, seed);
    for (cell, row) in rows.into_iter().enumerate() {
        for (facet, hit) in row.into_iter().enumerate() {
            if hit {
                table.bits[cell * table.facet_count + facet] = true;
            }
        }
    }
    table
}

/// Uniform [0, 1) from 64 random bits (53-bit mantissa path).
fn u64_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn save_table(table: &VisibilityTable, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "VISTAB v1")?;
    writeln!(
        out,
        "grid {} {} {}",
        table.grid_dims.0, table.grid_dims.1, table.grid_dims.2
    )?;
    writeln!(out, "facets {}", table.facet_count)?;
    writeln!(out, "samples {}", table.samples_per_cell)?;
    writeln!(out, "seed {}", table.seed)?;
    for cell in 0..table.cell_count() {
        let row = table.row(cell);
        if row.is_empty() {
            continue;
        }
        let mut line = format!("{cell}:");
        for f in row {
            line.push(' ');
            line.push_str(&f.to_string());
        }
        writeln!(out, "{line}")?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<VisibilityTable> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut next_line = |expect_more: &str| -> Result<(usize, String)> {
        lines
            .next()
            .ok_or_else(|| RayError::Parse {
                line: 0,
                msg: format!("truncated file: missing {expect_more}"),
            })
            .and_then(|(i, r)| r.map(|l| (i + 1, l)).map_err(RayError::Io))
    };

    let (i, magic) = next_line("magic")?;
    if magic != "VISTAB v1" {
        return Err(RayError::Parse {
            line: i,
            msg: format!("bad magic {magic:?}"),
        });
    }
    let mut header = |want: &str, count: usize| -> Result<Vec<u64>> {
        let (i, line) = next_line(want)?;
        let mut it = line.split_whitespace();
        let head = it.next().unwrap_or("");
        if head != want {
            return Err(RayError::Parse {
                line: i,
                msg: format!("expected {want:?}, found {head:?}"),
            });
        }
        let vals: Vec<u64> = it
            .map(|t| {
                t.parse::<u64>().map_err(|_| RayError::Parse {
                    line: i,
                    msg: format!("bad number {t:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if vals.len() != count {
            return Err(RayError::Parse {
                line: i,
                msg: format!("{want} needs {count} value(s)"),
            });
        }
        Ok(vals)
    };

    let grid = header("grid", 3)?;
    let facets = header("facets", 1)?;
    let samples = header("samples", 1)?;
    let seed = header("seed", 1)?;
    let mut table = VisibilityTable::empty(
        (grid[0] as usize, grid[1] as usize, grid[2] as usize),
        facets[0] as usize,
        samples[0] as usize,
        seed[0],
    );
    let cells = table.cell_count();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(':').ok_or_else(|| RayError::Parse {
            line: i + 1,
            msg: "expected `cell: facets...`".into(),
        })?;
        let cell: usize = head.trim().parse().map_err(|_| RayError::Parse {
            line: i + 1,
            msg: format!("bad cell index {head:?}"),
        })?;
        if cell >= cells {
            return Err(RayError::Parse {
                line: i + 1,
                msg: format!("cell index {cell} out of range"),
            });
        }
        for tok in rest.split_whitespace() {
            let facet: usize = tok.parse().map_err(|_| RayError::Parse {
                line: i + 1,
                msg: format!("bad facet index {tok:?}"),
            })?;
            if facet >= table.facet_count {
                return Err(RayError::Parse {
                    line: i + 1,
                    msg: format!("facet index {facet} out of range"),
                });
            }
            table.bits[cell * table.facet_count + facet] = true;
        }
    }
    Ok(table)
}
