//! Per-iteration sampler cost as the data size N + M grows, with the
//! component catalog held fixed. The claim under test is linear scaling.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use nalgebra::DMatrix;

use bsscal_core::basis::{Catalog, CatalogPolicy, VarRole, VariableSpec};
use bsscal_core::mcmc::{run_chain, ChainConfig};
use bsscal_core::model::{Dataset, PriorSpec, ThetaPrior, WishartPrior};
use bsscal_core::studylab::{draw_truth, generate_dataset, lhs, MissingPattern, TruthConfig};

const ITERATIONS: usize = 40;

fn setup(n_exp: usize, n_sim: usize) -> (Catalog, PriorSpec, Dataset) {
    let vars = vec![
        VariableSpec::continuous("x1", 0.0, 1.0, VarRole::Input),
        VariableSpec::continuous("x2", 0.0, 1.0, VarRole::Input),
        VariableSpec::continuous("t1", 0.0, 1.0, VarRole::Parameter),
        VariableSpec::continuous("t2", 0.0, 1.0, VarRole::Parameter),
    ];
    let policy = CatalogPolicy {
        grid_size: 100,
        l_main: 5,
        l_two_way: 4,
        l_three_way: 0,
        three_way: false,
        ..CatalogPolicy::default()
    };
    let catalog = Catalog::build(vars, policy).unwrap();
    let c = 2;
    let prior = PriorSpec {
        theta: vec![
            ThetaPrior::Uniform { lo: 0.0, hi: 1.0 },
            ThetaPrior::Uniform { lo: 0.0, hi: 1.0 },
        ],
        lambda: WishartPrior::identity(c, 6.0),
        omega: WishartPrior::from_mean(DMatrix::identity(c, c) * 0.05, 10.0),
        sigma: WishartPrior::from_mean(DMatrix::identity(c, c) * 0.01, 10.0),
        upsilon: WishartPrior::from_mean(DMatrix::identity(c, c) * 0.01, 10.0),
    };
    let truth = draw_truth(
        &catalog,
        &prior.theta,
        &TruthConfig {
            lambda: DMatrix::identity(c, c),
            omega: DMatrix::identity(c, c) * 0.05,
            sigma: DMatrix::identity(c, c) * 0.01,
            upsilon: DMatrix::identity(c, c) * 0.01,
            theta: None,
        },
        1,
    )
    .unwrap();
    let inputs = catalog.vars[..2].to_vec();
    let exp_design = lhs(n_exp, &inputs, 2).unwrap();
    let sim_design = lhs(n_sim, &catalog.vars, 3).unwrap();
    let transforms = vec![Default::default(); c];
    let data = generate_dataset(
        &truth,
        &catalog,
        &transforms,
        &exp_design,
        &sim_design,
        &MissingPattern::None,
        4,
    )
    .unwrap()
    .dataset;
    (catalog, prior, data)
}

fn sampler_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("gibbs_scan");
    group.sample_size(10);
    for (n_exp, n_sim) in [(100, 400), (200, 800), (400, 1600)] {
        let n_total = n_exp + n_sim;
        let (catalog, prior, data) = setup(n_exp, n_sim);
        let config = ChainConfig {
            iterations: ITERATIONS,
            burn_in: ITERATIONS / 2,
            thin: 1,
            seed: 5,
            ..ChainConfig::default()
        };
        // One element of throughput per Gibbs scan, so criterion reports
        // time per iteration at each data size.
        group.throughput(Throughput::Elements(ITERATIONS as u64));
        group.bench_with_input(
            BenchmarkId::from_parameter(n_total),
            &n_total,
            |b, _| {
                b.iter(|| {
                    run_chain(
                        catalog.clone(),
                        prior.clone(),
                        vec![Default::default(); 2],
                        data.clone(),
                        &config,
                        None,
                    )
                    .unwrap()
                });
            },
        );
    }
    group.finish();
}

criterion_group!(benches, sampler_scaling);
criterion_main!(benches);
