use locograph::asymptotics::{saddle_estimate, SaddleModel};
use locograph::census::build_census;
use locograph::counting::{count_table, ln_big};
use locograph::quotient::{is_r_locally_lattice, parse_edge_list, write_edge_list};
use locograph::sampler::{CensusSampler, SampleSpec};
use proptest::prelude::*;

#[test]
fn samples_are_locally_lattice_and_round_trip() {
    let census = build_census(2, 2, 250).unwrap();
    let sampler = CensusSampler::new(&census, SampleSpec::new(2, 2, 250, 1)).unwrap();
    for (g, report) in sampler.sample_range(0..20).unwrap() {
        assert_eq!(g.order(), 250);
        assert_eq!(report.component_orders.iter().sum::<u64>(), 250);
        assert!(is_r_locally_lattice(&g, 2, 2));
        let (back, d) = parse_edge_list(&write_edge_list(&g, 2, &[])).unwrap();
        assert_eq!(d, 2);
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }
}

#[test]
fn sample_ranges_are_prefix_stable() {
    let census = build_census(1, 2, 300).unwrap();
    let sampler = CensusSampler::new(&census, SampleSpec::new(1, 2, 300, 9)).unwrap();
    let all = sampler.draw(0..40).unwrap();
    assert_eq!(sampler.draw(25..40).unwrap(), all[25..]);
}

#[test]
fn saddle_bound_covers_cycle_counts() {
    let census = build_census(1, 3, 600).unwrap();
    let cum = count_table(&census, 600).unwrap().cumulative();
    let model = SaddleModel::new(&census.gamma, locograph::asymptotics::Tail::None);
    for n in (8..=600).step_by(37) {
        assert!(ln_big(&cum[n as usize]) <= saddle_estimate(&model, n).unwrap().log_b_upper + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cycle_samples_have_long_cycles(n in 4u64..200, seed in any::<u64>()) {
        let census = build_census(1, 1, n).unwrap();
        let sampler = CensusSampler::new(&census, SampleSpec::new(1, 1, n, seed)).unwrap();
        let (g, report) = sampler.sample_range(0..1).unwrap().pop().unwrap();
        prop_assert!(report.component_orders.iter().all(|&k| k >= 4));
        prop_assert!(g.adjacency().iter().all(|nb| nb.len() == 2));
    }
}
