//! Parallel vs sequential timing of the node-level hot loops: rule checking,
//! verification, and simulation.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lcl_landscape::construct::{
    build_instance, check_rules, forced_labeling, lcl_problem_of, solver,
};
use lcl_landscape::local::{simulate, verify_lcl};
use lcl_landscape::par;
use lcl_landscape::turing::build_counter_machine;

fn bench_modes(c: &mut Criterion) {
    let machine = build_counter_machine(2);
    let problem = lcl_problem_of(&machine, false);
    let inst = build_instance(5, 4, true);
    let inst = inst.unwrap();
    let labeled = build_instance(4, 20, false).unwrap();
    let labels = forced_labeling(&labeled, &machine).unwrap();
    let solve_inst = build_instance(3, 8, false).unwrap();
    let ids: Vec<u64> = (0..solve_inst.graph.n() as u64).collect();

    let mut group = c.benchmark_group("node_loops");
    for &sequential in &[false, true] {
        let tag = if sequential { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::new("check_rules", tag), &sequential, |b, &seq| {
            par::force_sequential(seq);
            b.iter(|| check_rules(&inst.graph, true));
            par::force_sequential(false);
        });
        group.bench_with_input(BenchmarkId::new("verify_lcl", tag), &sequential, |b, &seq| {
            par::force_sequential(seq);
            b.iter(|| verify_lcl(&problem, &labeled.graph, &labels).unwrap());
            par::force_sequential(false);
        });
        group.bench_with_input(BenchmarkId::new("simulate_solver", tag), &sequential, |b, &seq| {
            par::force_sequential(seq);
            let alg = solver(&machine, false);
            b.iter(|| simulate(&alg, &solve_inst.graph, &ids, 1).unwrap());
            par::force_sequential(false);
        });
    }
    group.finish();
}

criterion_group!(benches, bench_modes);
criterion_main!(benches);
