//! Diagnostic harness: build and time the first few planning models of a
//! scenario, printing model sizes, node counts, and solve times.

use std::path::Path;
use std::time::Instant;

use covplan_core::planner::{
    build_p2, plan_step, CoverageMemory, PlannerContext, PlannerOptions,
};
use covplan_core::raytrace::learn_table;
use covplan_core::world::Scenario;
use covplan_mip::{solve, SolverConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or("scenarios/tiny.json".into());
    let steps: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let sc = Scenario::from_file(Path::new(&path)).expect("scenario");
    let t0 = Instant::now();
    let table = learn_table(&sc.environment, &sc.camera, &sc.mesh, 64, sc.seed);
    eprintln!(
        "table learned in {:.2}s; facets {}, cells {}",
        t0.elapsed().as_secs_f64(),
        sc.mesh.facet_count(),
        table.cell_count()
    );
    eprintln!(
        "object hull faces: {}",
        sc.obstacles.obstacles.first().map_or(0, |h| h.faces.len())
    );

    let mut ctx = PlannerContext::new(&sc, &table, PlannerOptions::default()).expect("ctx");
    let mut memory = CoverageMemory::new(sc.mesh.facet_count());
    let mut state = sc.start;

    for t in 1..=steps {
        let tb = Instant::now();
        let (model, map) = build_p2(&state, &memory, &ctx).expect("build");
        let built = tb.elapsed().as_secs_f64();
        eprintln!(
            "t={t}: vars={} bins={} rows={} triples={} cells/step={:?} | build {:.3}s",
            model.num_vars(),
            model.num_binaries(),
            model.num_constraints(),
            map.triples.len(),
            map.cells.iter().map(|c| c.len()).collect::<Vec<_>>(),
            built,
        );
        for (label, limit, tl) in [("root", 1usize, None), ("1k", 1000, Some(15.0)), ("full", 200_000, Some(30.0))] {
            let cfg = SolverConfig {
                node_limit: limit,
                time_limit: tl,
                ..SolverConfig::default()
            };
            let ts = Instant::now();
            let sol = solve(&model, &cfg).expect("solve");
            let solved = ts.elapsed().as_secs_f64();
            eprintln!(
                "   [{label}] solve {:.3}s nodes={} status={:?} obj={:.4} bound={:.4} gap={:.2e}",
                solved, sol.nodes, sol.status, sol.objective, sol.bound, sol.gap
            );
        }
        let ts = Instant::now();
        let sol = solve(&model, &SolverConfig::default()).expect("solve");
        let solved = ts.elapsed().as_secs_f64();
        eprintln!(
            "   solve {:.3}s nodes={} status={:?} obj={:.4} gap={:.2e}",
            solved, sol.nodes, sol.status, sol.objective, sol.gap
        );
        let outcome = plan_step(&state, &memory, &mut ctx, t).expect("step");
        for &f in &outcome.record.covered {
            memory.mark(f, t);
        }
        state = outcome.new_state;
        eprintln!(
            "   -> pos {:?} covered {:?} ({} remaining)",
            state.pos,
            outcome.record.covered,
            (0..sc.mesh.facet_count())
                .filter(|&f| !memory.is_covered(f))
                .count()
        );
    }
}
