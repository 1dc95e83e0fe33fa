//! Reduced-data assembly, exclusion bookkeeping and report arithmetic.

use std::collections::BTreeSet;

use finsurr::harness::{
    assemble_reduced, compare_variants, gen_test_spec, gen_test_specs, reduced_scale, run_gen_test,
    select_reduced, split_indices, train_reference, HarnessConfig, Weighting, GEOMETRY_AVERAGE,
};
use finsurr::kinematics::{Architecture, Variant};
use finsurr::synthdata::{generate_dataset, Dataset, DatasetGrid, NoiseConfig};

fn small_grid() -> DatasetGrid {
    DatasetGrid {
        runs_per_setting: 4,
        cycles_per_run: 2,
        ..DatasetGrid::default()
    }
}

fn small_dataset() -> Dataset {
    generate_dataset(&small_grid(), &NoiseConfig::default(), 3)
        .unwrap()
        .dataset
}

fn quick_config() -> HarnessConfig {
    HarnessConfig::default().with_epochs(4, 2)
}

#[test]
fn default_grid_reduces_to_one_cycle_per_run() {
    let dataset = generate_dataset(&DatasetGrid::default(), &NoiseConfig::none(), 1)
        .unwrap()
        .dataset;
    assert_eq!(dataset.len(), 1920);
    let reduced = assemble_reduced(&dataset, 11).unwrap();
    assert_eq!(reduced.cycles.len(), 384);
    assert_eq!((reduced.train.len(), reduced.val.len()), (308, 76));
    let runs: BTreeSet<_> = reduced
        .cycles
        .iter()
        .map(|c| (c.key().to_string(), c.run))
        .collect();
    assert_eq!(runs.len(), 384);
    let train: BTreeSet<_> = reduced.train.iter().collect();
    assert!(reduced.val.iter().all(|i| !train.contains(i)));

    let again = select_reduced(&dataset, 11).unwrap();
    assert_eq!(again, reduced.cycles);
    let other = select_reduced(&dataset, 12).unwrap();
    assert_ne!(other, reduced.cycles);
}

#[test]
fn split_is_a_seeded_partition() {
    for n in [1, 5, 19, 96, 384] {
        let (train, val) = split_indices(n, 4, "x");
        assert_eq!(val.len(), n / 5);
        let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        assert_eq!(split_indices(n, 4, "x"), (train.clone(), val.clone()));
    }
    assert_ne!(split_indices(96, 4, "x"), split_indices(96, 4, "y"));
}

#[test]
fn shipped_tests_exclude_the_expected_settings() {
    let dataset = generate_dataset(
        &DatasetGrid {
            runs_per_setting: 2,
            cycles_per_run: 1,
            ..DatasetGrid::default()
        },
        &NoiseConfig::none(),
        1,
    )
    .unwrap()
    .dataset;
    let expected = [
        ("GT1", 2),
        ("GT2", 4),
        ("GT3", 3),
        ("GT4", 4),
        ("GT5", 5),
        ("GT6", 5),
    ];
    for (spec, (name, count)) in gen_test_specs().iter().zip(expected) {
        assert_eq!(spec.name, name);
        let excluded: Vec<_> = dataset
            .settings()
            .into_iter()
            .filter(|k| spec.excludes_key(k))
            .collect();
        assert_eq!(excluded.len(), count, "{name}");
        assert!(excluded.iter().all(|k| spec.in_universe_key(k)));
    }
    let gt5 = gen_test_spec("gt5").unwrap();
    assert!(dataset
        .settings()
        .iter()
        .filter(|k| gt5.excludes_key(k))
        .all(|k| k.shape == "rect" && k.flap_frequency == 1.0));
}

#[test]
fn gen_test_never_trains_on_excluded_settings() {
    let dataset = small_dataset();
    let rig = small_grid().build_rig().unwrap();
    let reduced = select_reduced(&dataset, 5).unwrap();
    for name in ["GT1", "GT5"] {
        let spec = gen_test_spec(name).unwrap();
        let report = run_gen_test(
            &spec,
            Variant::Fp,
            Architecture::Dense,
            &dataset,
            &rig,
            &quick_config(),
            5,
        )
        .unwrap();
        let pool = reduced
            .iter()
            .filter(|c| spec.in_universe_key(&c.key()) && !spec.excludes_key(&c.key()))
            .count();
        assert_eq!(report.n_train_cycles + report.n_val_cycles, pool, "{name}");
        assert_eq!(report.n_val_cycles, pool / 5);
        assert!(report.settings.iter().all(|s| spec.excludes_key(&s.key)));
        // Every cycle of an excluded setting is evaluated, not just the reduced ones.
        for s in &report.settings {
            assert_eq!(s.n_cycles, 8);
        }
    }
}

#[test]
fn report_arithmetic() {
    let dataset = small_dataset();
    let rig = small_grid().build_rig().unwrap();
    let spec = gen_test_spec("GT5").unwrap();
    let mut config = quick_config();
    let report = run_gen_test(
        &spec,
        Variant::Baseline,
        Architecture::Dense,
        &dataset,
        &rig,
        &config,
        6,
    )
    .unwrap();
    assert_eq!(report.settings.len(), 5);
    let mean = |xs: Vec<f64>| xs.iter().sum::<f64>() / xs.len() as f64;
    let per_setting = mean(report.settings.iter().map(|s| s.mse).collect());
    assert!((report.excluded_mse.unwrap() - per_setting).abs() < 1e-12 * per_setting);
    let reference = mean(report.settings.iter().map(|s| s.reference_mse).collect());
    assert!((report.reference_mse.unwrap() - reference).abs() < 1e-12 * reference);

    let best = report.best.as_ref().unwrap();
    let worst = report.worst.as_ref().unwrap();
    for s in &report.settings {
        assert!(best.mse <= s.mse && s.mse <= worst.mse);
    }
    for profile in [best, worst] {
        let direct = mean(
            profile
                .measured
                .iter()
                .zip(&profile.predicted)
                .map(|(m, p)| (m - p).powi(2))
                .collect(),
        );
        assert!((direct - profile.mse).abs() < 1e-12 * direct.max(1e-300));
        let direct_ref = mean(
            profile
                .measured
                .iter()
                .zip(&profile.reference_predicted)
                .map(|(m, p)| (m - p).powi(2))
                .collect(),
        );
        assert!((direct_ref - profile.reference_model_mse).abs() < 1e-12 * direct_ref.max(1e-300));
    }

    // The reported unit is the spread of the reduced thrust coefficients.
    let reduced = select_reduced(&dataset, 6).unwrap();
    assert_eq!(report.thrust_scale, reduced_scale(&rig, &reduced).unwrap());

    // Equal cycle counts per setting: both weightings agree.
    config.weighting = Weighting::PerCycle;
    let per_cycle = run_gen_test(
        &spec,
        Variant::Baseline,
        Architecture::Dense,
        &dataset,
        &rig,
        &config,
        6,
    )
    .unwrap();
    assert!((per_cycle.excluded_mse.unwrap() - report.excluded_mse.unwrap()).abs() < 1e-12);
}

#[test]
fn references_are_shared_per_universe() {
    let dataset = small_dataset();
    let rig = small_grid().build_rig().unwrap();
    let reduced = select_reduced(&dataset, 7).unwrap();
    let scale = reduced_scale(&rig, &reduced).unwrap();
    let config = quick_config();
    let fit = |name: &str| {
        let spec = gen_test_spec(name).unwrap();
        train_reference(
            &spec,
            Variant::Fp,
            Architecture::Dense,
            &reduced,
            scale,
            &rig,
            &config,
            7,
        )
        .unwrap()
    };
    let (gt2, v2) = fit("GT2");
    let (gt3, v3) = fit("GT3");
    let (gt5, _) = fit("GT5");
    assert_eq!(gt2.network, gt3.network);
    assert_eq!(v2, v3);
    assert_ne!(gt2.network, gt5.network);

    let table = compare_variants(
        &dataset,
        &rig,
        &[gen_test_spec("GT5").unwrap(), gen_test_spec("GT6").unwrap()],
        &[Variant::Fp],
        &[Architecture::Dense],
        &config,
        7,
    )
    .unwrap();
    // GT5 and GT6 share one universe and so one reference.
    assert_eq!(table.references.len(), 1);
    assert_eq!(table.rows.len(), 2);
    let avg = table
        .average(Variant::Fp, Architecture::Dense, GEOMETRY_AVERAGE)
        .unwrap();
    let direct = table
        .rows
        .iter()
        .map(|r| r.excluded_mse.unwrap())
        .sum::<f64>()
        / 2.0;
    assert!((avg - direct).abs() < 1e-12 * direct);
    let solo = run_gen_test(
        &gen_test_spec("GT6").unwrap(),
        Variant::Fp,
        Architecture::Dense,
        &dataset,
        &rig,
        &config,
        7,
    )
    .unwrap();
    assert_eq!(solo.excluded_mse, table.rows[1].excluded_mse);
}
