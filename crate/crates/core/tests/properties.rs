use proptest::prelude::*;

use mqc_core::altpp::{decompose_low_treewidth, FixedAssignment};
use mqc_core::mqc::{mqc_pair_traced, pair_runs};
use mqc_core::rng::{rng_from_seed, unit_f64};
use mqc_core::topology::{grid_graph, Graph};
use mqc_core::*;

fn chimera_problem(rows: usize, cols: usize, seed: u64) -> IsingProblem {
    let g = chimera_graph(ChimeraSpec::new(rows, cols, 4)).unwrap();
    random_problem(&g, &ProblemGenSpec { seed, ..Default::default() }).unwrap()
}

fn spins_from_bits(n: usize, bits: u64) -> Vec<Spin> {
    (0..n).map(|i| if bits >> (i % 64) & 1 == 1 { 1 } else { -1 }).collect()
}

/// Second run that agrees with `base` except on a random subset.
fn perturbed(base: &[Spin], mask: u64, salt: u64) -> Vec<Spin> {
    base.iter()
        .enumerate()
        .map(|(i, &s)| if (mask.rotate_left((i as u32 * 7) % 64) ^ salt) >> (i % 64) & 1 == 1 { -s } else { s })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn energy_ignores_summation_order(seed in any::<u64>(), bits in any::<u64>(), shuffle in any::<u64>()) {
        let p = chimera_problem(2, 2, seed);
        let spins = spins_from_bits(p.vertex_count(), bits);
        let mut terms: Vec<f64> = p.h().iter().zip(&spins).map(|(h, &s)| h * f64::from(s)).collect();
        terms.extend(p.couplings().iter().map(|c| c.value * f64::from(spins[c.a] * spins[c.b])));
        let mut rng = rng_from_seed(shuffle);
        for i in (1..terms.len()).rev() {
            let j = (unit_f64(&mut rng) * (i + 1) as f64) as usize;
            terms.swap(i, j);
        }
        let shuffled: f64 = terms.iter().sum();
        prop_assert!((shuffled - energy(&p, &spins).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn tunnel_swap_changes_energy_by_contribution_difference(
        seed in any::<u64>(), bits in any::<u64>(), mask in any::<u64>(), salt in any::<u64>()
    ) {
        let p = chimera_problem(2, 2, seed);
        let a = SpinConfiguration::new(&p, spins_from_bits(p.vertex_count(), bits)).unwrap();
        let b = SpinConfiguration::new(&p, perturbed(a.spins(), mask, salt)).unwrap();
        for t in find_tunnels(&p, &a, &b).unwrap() {
            let mut swapped = a.spins().to_vec();
            for &v in t.vertices() {
                swapped[v] = b[v];
            }
            let delta = energy(&p, &swapped).unwrap() - a.energy();
            let i1 = tunnel_contribution(&p, &a, &t).unwrap();
            let i2 = tunnel_contribution(&p, &swapped, &t).unwrap();
            prop_assert!((delta - (i2 - i1)).abs() <= 1e-9);
            prop_assert!((i1 + i2).abs() <= 1e-9);
        }
    }

    #[test]
    fn merge_is_monotone_and_keeps_agreement(
        seed in any::<u64>(), bits in any::<u64>(), mask in any::<u64>(), salt in any::<u64>()
    ) {
        let p = chimera_problem(2, 2, seed);
        let a = SpinConfiguration::new(&p, spins_from_bits(p.vertex_count(), bits)).unwrap();
        let b = SpinConfiguration::new(&p, perturbed(a.spins(), mask, salt)).unwrap();
        let m = mqc_pair(&p, &a, &b).unwrap();
        prop_assert!(m.energy() <= a.energy().min(b.energy()));
        prop_assert!((m.energy() - energy(&p, &m).unwrap()).abs() <= 1e-9);
        for v in 0..p.vertex_count() {
            if a[v] == b[v] {
                prop_assert_eq!(m[v], a[v]);
            }
        }
    }

    #[test]
    fn tunnels_are_maximal_and_mutually_separated(
        seed in any::<u64>(), bits in any::<u64>(), mask in any::<u64>(), salt in any::<u64>()
    ) {
        let p = chimera_problem(2, 3, seed);
        let a = spins_from_bits(p.vertex_count(), bits);
        let b = perturbed(&a, mask, salt);
        let tunnels = find_tunnels(&p, &a, &b).unwrap();
        let mut owner = vec![usize::MAX; p.vertex_count()];
        for (k, t) in tunnels.iter().enumerate() {
            for &v in t.vertices() {
                prop_assert!(a[v] != b[v]);
                prop_assert_eq!(owner[v], usize::MAX);
                owner[v] = k;
            }
        }
        for v in 0..p.vertex_count() {
            prop_assert_eq!(a[v] != b[v], owner[v] != usize::MAX);
        }
        for c in p.couplings() {
            if owner[c.a] != usize::MAX && owner[c.b] != usize::MAX {
                prop_assert_eq!(owner[c.a], owner[c.b]);
            }
        }
    }

    #[test]
    fn complete_graph_merge_returns_better_input(n in 5usize..=12, seed in any::<u64>(), b1 in any::<u64>(), b2 in any::<u64>()) {
        let g = complete_graph(n).unwrap();
        let p = random_problem(&g, &ProblemGenSpec { seed, ..Default::default() }).unwrap();
        let a = SpinConfiguration::new(&p, spins_from_bits(n, b1)).unwrap();
        let b = SpinConfiguration::new(&p, spins_from_bits(n, b2)).unwrap();
        let m = mqc_pair(&p, &a, &b).unwrap();
        let expected = if b.energy() < a.energy() { &b } else { &a };
        prop_assert_eq!(m.spins(), expected.spins());
    }

    #[test]
    fn reduction_never_regresses(seed in any::<u64>(), count in 1usize..40, run_seed in any::<u64>()) {
        let p = chimera_problem(2, 2, seed);
        let set = random_runs(&p, count, run_seed);
        let floor = set.best().unwrap().energy();
        for strategy in PairingStrategy::ALL {
            let pairing = pair_runs(&set.runs, strategy).unwrap();
            let mut seen = vec![0; count];
            for &(i, j) in &pairing.pairs {
                seen[i] += 1;
                seen[j] += 1;
            }
            if let Some(k) = pairing.leftover {
                seen[k] += 1;
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert_eq!(pairing.leftover.is_some(), count % 2 == 1);

            let (best, trace) = mqc_reduce(&p, &set.runs, strategy).unwrap();
            prop_assert!(best.energy() <= floor);
            prop_assert!((best.energy() - energy(&p, &best).unwrap()).abs() <= 1e-9);
            let mut size = count;
            for level in &trace.levels {
                prop_assert_eq!(level.size, size);
                size = size.div_ceil(2);
            }
            prop_assert_eq!(size, 1);
        }
    }

    #[test]
    fn traced_choices_match_contributions(seed in any::<u64>(), b1 in any::<u64>(), b2 in any::<u64>()) {
        let p = chimera_problem(2, 2, seed);
        let a = SpinConfiguration::new(&p, spins_from_bits(p.vertex_count(), b1)).unwrap();
        let b = SpinConfiguration::new(&p, spins_from_bits(p.vertex_count(), b2)).unwrap();
        let (_, choices) = mqc_pair_traced(&p, &a, &b).unwrap();
        for c in choices {
            let expect = if c.contribution_run2 < c.contribution_run1 { mqc::Side::Run2 } else { mqc::Side::Run1 };
            prop_assert_eq!(c.chosen, expect);
        }
    }

    #[test]
    fn fold_in_preserves_energy(seed in any::<u64>(), fix_mask in any::<u64>(), fix_bits in any::<u64>(), free_bits in any::<u64>()) {
        let p = chimera_problem(2, 2, seed);
        let n = p.vertex_count();
        let fixed: Vec<Option<Spin>> = (0..n)
            .map(|v| (fix_mask >> v & 1 == 1).then(|| if fix_bits >> v & 1 == 1 { 1 } else { -1 }))
            .collect();
        let fa = FixedAssignment::new(&p, &fixed).unwrap();
        let free = spins_from_bits(fa.free_vertices.len(), free_bits);
        let full = fa.expand(&free).unwrap();
        let reduced = fa.reduced_problem.energy(&free).unwrap() + fa.offset;
        prop_assert!((reduced - energy(&p, &full).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn decomposition_covers_and_respects_cap(seed in any::<u64>(), cap in 1usize..=5) {
        let p = chimera_problem(2, 2, seed);
        let regions = decompose_low_treewidth(&p, cap).unwrap();
        let mut covered = vec![false; p.vertex_count()];
        for r in &regions {
            prop_assert!(r.width <= cap);
            let mut order = r.elimination_order.clone();
            order.sort_unstable();
            prop_assert_eq!(&order, &r.vertices);
            for &v in &r.vertices {
                covered[v] = true;
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn local_pass_keeps_cache_exact(seed in any::<u64>(), run_seed in any::<u64>()) {
        let p = chimera_problem(2, 2, seed);
        let set = random_runs(&p, 4, run_seed);
        let out = builtin_opt_pp(&p, &set, 4).unwrap();
        for (before, after) in set.runs.iter().zip(&out.runs) {
            prop_assert!(after.energy() <= before.energy());
            prop_assert!((after.energy() - energy(&p, after).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn quantization_is_idempotent(seed in any::<u64>(), levels in 2usize..40, scale in 0.1f64..10.0) {
        let p = scale_problem(&chimera_problem(1, 2, seed), scale).unwrap();
        let model = PrecisionModel { levels, ..Default::default() };
        let once = quantize_problem(&p, &model).unwrap();
        prop_assert_eq!(quantize_problem(&once, &model).unwrap(), once.clone());
        for &h in once.h() {
            prop_assert!(model.h_clip.contains(h));
        }
    }

    #[test]
    fn scaling_is_linear(seed in any::<u64>(), bits in any::<u64>(), l in 0.01f64..100.0) {
        let p = chimera_problem(2, 2, seed);
        let spins = spins_from_bits(p.vertex_count(), bits);
        let scaled = scale_problem(&p, l).unwrap();
        let e = energy(&p, &spins).unwrap();
        prop_assert!((energy(&scaled, &spins).unwrap() - l * e).abs() <= 1e-9 * l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_preserves_the_ground_state(seed in any::<u64>(), l in prop::sample::select(vec![0.5, 2.0, 4.0, 8.0])) {
        let g: Graph = grid_graph(3, 4).unwrap();
        let p = random_problem(&g, &ProblemGenSpec { seed, ..Default::default() }).unwrap();
        let (g1, _) = exact_ground_state(&p).unwrap();
        let (g2, _) = exact_ground_state(&scale_problem(&p, l).unwrap()).unwrap();
        prop_assert_eq!(g1.spins(), g2.spins());
    }
}
