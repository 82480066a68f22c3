mod common;

use multirank::baselines::{
    classic_hits, classic_pagerank, framework_hits, framework_pagerank, google_matrix, preset_configuration, BaselinePreset,
    PresetKind,
};
use multirank::configurations::ShiftedConfiguration;
use multirank::engine::{convergence_probe, explicit_product, resolve_chain, solve, SolverSettings};
use multirank::generators::{generate_base, generate_multiplex, GeneratorSpec, MultiplexSpec};
use multirank::measures::{
    confidence_interval, cost_table, student_t_quantile_95, weighted_kendall_tau, multijaccard, WeightScheme,
    DEFAULT_COST_TABLE_SIZES,
};
use multirank::multiplex::{LayerOperator, SparseMatrix};

use common::*;

#[test]
fn ring_stages_follow_closed_form() {
    let m = ring();
    let sc = ShiftedConfiguration::parse("A0T A0 A1T A1", 2).unwrap();
    let chain = resolve_chain(m.layers(), &sc).unwrap();
    assert!(explicit_product(&chain, 0.0).unwrap().is_zero());

    let trace = convergence_probe(&m, &sc, &SolverSettings::default(), 0).unwrap();
    for p in &trace.points {
        let exact = ring_r0(p.tau);
        assert!(l1(&p.vector, &exact) <= 1e-10, "tau={} got {:?}", p.tau, p.vector);
        let dist = l1(&exact, &ring_r0(0.0));
        let law = 2.0 * p.tau / (p.tau + (1.0 + p.tau * p.tau).sqrt());
        assert!((dist - law).abs() <= 1e-14);
    }
    let report = solve(&m, &sc, &SolverSettings::default()).unwrap();
    let v0 = [0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0];
    assert!(l1(report.rankings[0].as_slice(), &v0) <= 4.0 * report.final_tau);
}

#[test]
fn ring_propagated_vectors_are_hubs_and_authorities() {
    let m = ring();
    let sc = ShiftedConfiguration::parse("A0T A0 A1T A1", 2).unwrap();
    let r = solve(&m, &sc, &SolverSettings::default()).unwrap().rankings;
    let even = [1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0];
    let odd = [0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0];
    // Layer 0 has sources on even vertices, layer 1 on odd ones.
    assert!(l1(r[0].as_slice(), &odd) < 1e-8);
    assert!(l1(r[1].as_slice(), &even) < 1e-8);
    assert!(l1(r[2].as_slice(), &even) < 1e-8);
    assert!(l1(r[3].as_slice(), &odd) < 1e-8);
}

#[test]
fn pagerank_three_chain_matches_dense_eigenvector() {
    let chain = SparseMatrix::from_triplets(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    // Principal eigenvector of the dense Google matrix, computed with numpy.
    let expected = [0.1844167819271554, 0.3411710465652374, 0.4744121715076072];
    let native = classic_pagerank(&chain, 0.85, 1e-15).unwrap();
    let framework = framework_pagerank(&chain, 0.85, &SolverSettings::default()).unwrap();
    assert!(l1(native.as_slice(), &expected) <= 1e-12);
    assert!(l1(framework.as_slice(), &expected) <= 1e-9);
    assert!(l1(&dense_pagerank(&chain, 0.85), &expected) <= 1e-12);
}

#[test]
fn google_matrix_is_column_stochastic() {
    for seed in 0..10 {
        let a = strongly_connected(20, 0.1, seed);
        let g = google_matrix(&a, 0.85).unwrap().to_dense(false);
        for j in 0..20 {
            let s: f64 = (0..20).map(|i| g.get(i, j)).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn pagerank_matches_dense_oracle_on_random_digraphs() {
    for seed in 0..10 {
        let a = strongly_connected(32, 0.08, 100 + seed);
        let oracle = dense_pagerank(&a, 0.85);
        let native = classic_pagerank(&a, 0.85, 1e-15).unwrap();
        assert!(l1(native.as_slice(), &oracle) <= 1e-10);
    }
}

#[test]
fn hits_vectors_are_principal_eigenvectors() {
    for seed in 0..20 {
        let a = strongly_connected(12, 0.2, 7 + seed);
        let d = dense(&a);
        let auth = dense_power(12, 1e-15, |v| mat_t_vec(&d, &mat_vec(&d, v)));
        let hub = dense_power(12, 1e-15, |v| mat_vec(&d, &mat_t_vec(&d, v)));
        let (na, nh) = classic_hits(&a, 1e-15).unwrap();
        assert!(l1(na.as_slice(), &auth) <= 1e-9, "seed {seed}");
        assert!(l1(nh.as_slice(), &hub) <= 1e-9, "seed {seed}");
        let (fa, fh) = framework_hits(&a, &SolverSettings::default()).unwrap();
        assert!(l1(fa.as_slice(), &auth) <= 1e-8, "seed {seed}");
        assert!(l1(fh.as_slice(), &hub) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn star_authority_sits_on_center() {
    let star = SparseMatrix::from_triplets(5, (1..5).map(|i| (i, 0, 1.0))).unwrap();
    let (auth, hub) = classic_hits(&star, 1e-15).unwrap();
    assert!((auth.as_slice()[0] - 1.0).abs() <= 1e-12);
    assert_eq!(hub.as_slice()[0], 0.0);
}

#[test]
fn preset_sequences() {
    let seq = |kind, l| preset_configuration(BaselinePreset::new(kind), l).unwrap().1.to_string();
    assert_eq!(seq(PresetKind::HitsLike, 2), "A0T A0 A1T A1");
    assert_eq!(seq(PresetKind::PageRankLike, 2), "A0 A1");
    assert_eq!(seq(PresetKind::VersatileLike, 1), "A0");
}

#[test]
fn tau_frozen_values() {
    // Exhaustive pair enumeration, evaluated outside this crate.
    let t = weighted_kendall_tau(&[3.0, 2.0, 1.0, 0.0], &[3.0, 2.0, 0.0, 1.0], WeightScheme::Hyperbolic).unwrap();
    assert!((t.tau_w - 0.8133333333333334).abs() <= 1e-12);
    let t = weighted_kendall_tau(
        &[5.0, 5.0, 3.0, 2.0, 2.0, 1.0],
        &[4.0, 5.0, 3.0, 3.0, 1.0, 0.0],
        WeightScheme::Hyperbolic,
    )
    .unwrap();
    assert!((t.tau_w - 0.8874568524927353).abs() <= 1e-12);
    assert_eq!(t.tie_counts.reference, 2);
    assert_eq!(t.tie_counts.other, 1);
}

#[test]
fn student_t_matches_table() {
    for (df, t) in [
        (1, 12.706204736432095),
        (2, 4.302652729696142),
        (7, 2.3646242515927844),
        (31, 2.0395134463964077),
    ] {
        assert!((student_t_quantile_95(df) - t).abs() <= 1e-9, "df {df}");
    }
    let ci = confidence_interval(&[0.2, 0.4, 0.35, 0.5, 0.45]).unwrap();
    assert!((ci.lo - 0.2370737404506486).abs() <= 1e-9);
    assert!((ci.hi - 0.5229262595493513).abs() <= 1e-9);
    let flat = confidence_interval(&[0.7; 6]).unwrap();
    assert_eq!((flat.lo, flat.hi), (0.7, 0.7));
}

#[test]
fn cost_table_reproduces_all_cells() {
    const TABLE: [[u128; 6]; 7] = [
        [8_192, 266_240, 532_480, 790_528, 524_288, 266_240],
        [32_768, 2_113_536, 4_227_072, 6_307_840, 4_194_304, 2_113_536],
        [131_072, 16_842_752, 33_685_504, 50_397_184, 33_554_432, 16_842_752],
        [524_288, 134_479_872, 268_959_744, 402_915_328, 268_435_456, 134_479_872],
        [2_097_152, 1_074_790_400, 2_149_580_800, 3_222_274_048, 2_147_483_648, 1_074_790_400],
        [8_388_608, 8_594_128_896, 17_188_257_792, 25_773_998_080, 17_179_869_184, 8_594_128_896],
        [33_554_432, 68_736_253_952, 137_472_507_904, 206_175_207_424, 137_438_953_472, 68_736_253_952],
    ];
    let rows = cost_table(&DEFAULT_COST_TABLE_SIZES, 2).unwrap();
    assert_eq!(rows.len(), 7);
    for ((n, cells), expected) in rows.iter().zip(TABLE) {
        assert_eq!(cells.as_slice(), expected.as_slice(), "n = {n}");
    }
}

#[test]
fn sbm_block_densities() {
    let spec = GeneratorSpec::planted_partition(vec![100, 100], 0.5, 0.2, 11);
    let a = generate_base(&spec).unwrap();
    let (mut within, mut across) = (0usize, 0usize);
    for (i, j, _) in a.entries() {
        if (i < 100) == (j < 100) {
            within += 1;
        } else {
            across += 1;
        }
    }
    let within_density = within as f64 / (2.0 * 100.0 * 99.0);
    let across_density = across as f64 / (2.0 * 100.0 * 100.0);
    assert!((within_density - 0.5).abs() <= 0.05, "{within_density}");
    assert!((across_density - 0.2).abs() <= 0.05, "{across_density}");
}

#[test]
fn er_density_and_symmetry() {
    let a = generate_base(&GeneratorSpec::erdos_renyi(150, 0.3, 5)).unwrap();
    let density = a.nnz() as f64 / (150.0 * 149.0);
    assert!((density - 0.3).abs() <= 0.05);
    for (i, j, _) in a.entries() {
        assert!(a.get(j, i) > 0.0);
        assert_ne!(i, j);
    }
}

#[test]
fn multijaccard_expectation_at_half() {
    let values: Vec<f64> = (0..32)
        .map(|seed| {
            let base = GeneratorSpec::erdos_renyi(128, 0.5, seed);
            let m = generate_multiplex(&MultiplexSpec::uniform(base, 2, 0.5, 1000 + seed), 2).unwrap();
            multijaccard(&m).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!((mean - 1.0 / 3.0).abs() <= 0.03, "{mean}");
}

#[test]
fn multijaccard_grows_with_inclusion_probability() {
    let mean_at = |p: f64| {
        (0..16)
            .map(|seed| {
                let base = GeneratorSpec::erdos_renyi(64, 0.5, seed);
                let m = generate_multiplex(&MultiplexSpec::uniform(base, 2, p, 500 + seed), 2).unwrap();
                multijaccard(&m).unwrap()
            })
            .sum::<f64>()
            / 16.0
    };
    let means: Vec<f64> = (1..=20).map(|i| mean_at(i as f64 * 0.05)).collect();
    for w in means.windows(2) {
        assert!(w[1] >= w[0], "{means:?}");
    }
    assert_eq!(*means.last().unwrap(), 1.0);
}

#[test]
fn generation_is_reproducible_after_serialization() {
    let spec = MultiplexSpec::uniform(GeneratorSpec::planted_partition(vec![20, 30], 0.4, 0.1, 3), 3, 0.6, 9);
    let a = generate_multiplex(&spec, 3).unwrap().to_edge_list();
    let b = generate_multiplex(&spec, 3).unwrap().to_edge_list();
    assert_eq!(a, b);
}
