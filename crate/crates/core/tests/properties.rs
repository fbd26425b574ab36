use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hullkit::evo::constrained_dominates;
use hullkit::evo::nsga2::{non_dominated_sort, Individual};
use hullkit::hydro::michell::{michell_wave_resistance, OffsetGrid};
use hullkit::hydro::FlowConditions;
use hullkit::params::{
    check_feasibility, params_table_string, parse_params, HullParameters, ParameterRanges,
};

fn individuals() -> impl Strategy<Value = Vec<Individual>> {
    prop::collection::vec((0u8..6, 0u8..6, 0usize..3), 1..40).prop_map(|v| {
        v.into_iter()
            .map(|(a, b, viol)| {
                Individual::new(
                    HullParameters::prism(100.0, 0.15, 0.1, 0.05),
                    vec![a as f64, b as f64],
                    viol,
                )
            })
            .collect()
    })
}

fn small_grid() -> impl Strategy<Value = (OffsetGrid, f64)> {
    (3usize..9, 3usize..6, 1.0f64..20.0).prop_flat_map(|(nx, nz, draft)| {
        let n = nx * nz;
        (
            prop::collection::vec(0.0f64..5.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        )
            .prop_map(move |(y, slope)| {
                let x = (0..nx)
                    .map(|i| -50.0 + 100.0 * i as f64 / (nx - 1) as f64)
                    .collect();
                let z = (0..nz)
                    .map(|j| -draft + draft * j as f64 / (nz - 1) as f64)
                    .collect();
                (OffsetGrid::new(x, z, y, slope).unwrap(), draft)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fronts_partition_and_order(mut pop in individuals()) {
        let fronts = non_dominated_sort(&mut pop);
        let mut seen: Vec<usize> = fronts.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..pop.len()).collect::<Vec<_>>());
        for (k, front) in fronts.iter().enumerate() {
            for &i in front {
                prop_assert_eq!(pop[i].rank, k);
                for &j in front {
                    prop_assert!(!constrained_dominates(&pop[i], &pop[j]));
                }
                if k > 0 {
                    prop_assert!(fronts[k - 1].iter().any(|&p| constrained_dominates(&pop[p], &pop[i])));
                }
            }
        }
    }

    #[test]
    fn feasible_dominates_infeasible(a in 0.0f64..10.0, b in 0.0f64..10.0, viol in 1usize..5) {
        let p = HullParameters::prism(100.0, 0.15, 0.1, 0.05);
        let good = Individual::new(p, vec![a + 100.0, b + 100.0], 0);
        let bad = Individual::new(p, vec![a, b], viol);
        prop_assert!(constrained_dominates(&good, &bad));
        prop_assert!(!constrained_dominates(&bad, &good));
    }

    #[test]
    fn michell_mirror_and_offset_scaling((grid, draft) in small_grid(), speed in 3.0f64..15.0, c in 0.1f64..4.0) {
        let cond = FlowConditions::new(speed, draft);
        let rw = michell_wave_resistance(&grid, &cond).unwrap();
        prop_assert!(rw >= 0.0);
        let m = michell_wave_resistance(&grid.mirrored(), &cond).unwrap();
        let s = michell_wave_resistance(&grid.scaled(c), &cond).unwrap();
        let tol = 1e-9 * rw.max(1e-300);
        prop_assert!((m - rw).abs() <= tol, "{} vs {}", m, rw);
        prop_assert!((s - c * c * rw).abs() <= tol * c * c, "{} vs {}", s, c * c * rw);
    }

    #[test]
    fn feasibility_ignores_length(seed in any::<u64>(), k in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ParameterRanges::full().sample_uniform(&mut rng);
        let q = p.with_loa(p.loa() * k);
        prop_assert_eq!(check_feasibility(&p).unwrap(), check_feasibility(&q).unwrap());
    }

    #[test]
    fn quantized_rows_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ParameterRanges::full().sample_uniform(&mut rng).quantized();
        let back = parse_params(&params_table_string(&[("h".into(), p)])).unwrap();
        prop_assert_eq!(&back[0].1, &p);
    }
}
