use hwarch_core::memory::accuracy;
use hwarch_core::rng::{gaussian_vec, stream};
use hwarch_core::synth::{
    embed, generate_association_dataset, generate_identity_dataset, generate_orbit, shift, AssociationParams,
    GroupSpec, IdentityParams,
};
use hwarch_core::vector::cosine;
use hwarch_core::{
    calibrate_threshold, CortexHippocampusModel, Episode, ExactModule, FeatureVector, HwLayer, Pooling,
    ScoredPair, Similarity, TemplateBook,
};

fn fv(v: Vec<f64>) -> FeatureVector {
    FeatureVector::new(v).unwrap()
}

fn identity_params(n_train: usize, n_test: usize, d: usize, noise: f64) -> IdentityParams {
    IdentityParams {
        n_train,
        n_test,
        dim: d,
        orbit_subset: None,
        noise,
        seed: 5,
    }
}

fn key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn noiseless_frames_are_exact_shifts() {
    let ds = generate_identity_dataset(identity_params(3, 2, 12, 0.0)).unwrap();
    for video in ds.train.iter().chain(&ds.test) {
        assert_eq!(video.frames.len(), 12);
        for (j, f) in video.shifts.iter().zip(&video.frames) {
            assert_eq!(f.as_slice(), shift(&video.base, *j).as_slice());
        }
    }
}

#[test]
fn identity_pools_are_disjoint() {
    let ds = generate_identity_dataset(identity_params(2, 1, 8, 0.1)).unwrap();
    let bases: Vec<&Vec<f64>> = ds.train.iter().chain(&ds.test).map(|v| &v.base).collect();
    assert_eq!(bases.len(), 3);
    for i in 0..3 {
        for j in i + 1..3 {
            assert_ne!(bases[i], bases[j]);
        }
    }
}

#[test]
fn datasets_are_seed_deterministic() {
    let a = generate_identity_dataset(identity_params(4, 2, 16, 0.2)).unwrap();
    let b = generate_identity_dataset(identity_params(4, 2, 16, 0.2)).unwrap();
    assert_eq!(a, b);
    let mut p = identity_params(4, 2, 16, 0.2);
    p.seed = 6;
    assert_ne!(generate_identity_dataset(p).unwrap(), a);
    let ap = assoc_params(3, 0.1);
    assert_eq!(
        generate_association_dataset(ap.clone()).unwrap(),
        generate_association_dataset(ap).unwrap()
    );
}

#[test]
fn noisy_frames_stay_unit_norm() {
    let ds = generate_identity_dataset(identity_params(3, 1, 20, 0.5)).unwrap();
    for f in ds.train.iter().flat_map(|v| &v.frames) {
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn orbit_closure_and_shift_relations() {
    let mut r = stream(80, &[]);
    let base = fv(gaussian_vec(&mut r, 8));
    let book = generate_orbit(0, &base, &GroupSpec::full_cyclic()).unwrap();
    let unit = base.normalized().unwrap();
    for (j, t) in book.iter().enumerate() {
        for (a, b) in t.iter().zip(shift(&unit, j)) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((t.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    // As sets: every template of the shifted orbit has a partner in the original.
    let shifted = generate_orbit(1, &fv(shift(&base, 1)), &GroupSpec::full_cyclic()).unwrap();
    for t in shifted.iter() {
        let hits = book
            .iter()
            .filter(|u| u.iter().zip(t).all(|(a, b)| (a - b).abs() < 1e-15))
            .count();
        assert_eq!(hits, 1);
    }
}

#[test]
fn distinct_bases_have_disjoint_orbits() {
    let mut r = stream(81, &[]);
    for _ in 0..50 {
        let a = generate_orbit(0, &fv(gaussian_vec(&mut r, 8)), &GroupSpec::full_cyclic()).unwrap();
        let b = generate_orbit(1, &fv(gaussian_vec(&mut r, 8)), &GroupSpec::full_cyclic()).unwrap();
        for t in a.iter() {
            assert!(b.iter().all(|u| key(u) != key(t)));
        }
    }
}

#[test]
fn noiseless_same_different_is_solved_by_orbit_cortex() {
    let ds = generate_identity_dataset(identity_params(10, 6, 24, 0.0)).unwrap();
    let mut cortex = HwLayer::exact(24, Similarity::NormalizedDot, Pooling::Max);
    for (k, v) in ds.train[..6].iter().enumerate() {
        let book = TemplateBook::from_templates(k, 24, v.frames.iter()).unwrap();
        cortex.push_exact(ExactModule::from_book(book)).unwrap();
    }
    let score = |a: &FeatureVector, b: &FeatureVector| {
        cosine(&cortex.signature(a).unwrap(), &cortex.signature(b).unwrap()).unwrap()
    };
    let pairs_for = |videos: &[hwarch_core::synth::IdentityVideo]| {
        let mut pairs = Vec::new();
        for (i, v) in videos.iter().enumerate() {
            pairs.push(ScoredPair {
                score: score(&v.frames[0], &v.frames[7]),
                same: true,
            });
            let w = &videos[(i + 1) % videos.len()];
            pairs.push(ScoredPair {
                score: score(&v.frames[3], &w.frames[5]),
                same: false,
            });
        }
        pairs
    };
    // Calibrate on training identities that have no module of their own, so
    // they look as unfamiliar as the test identities.
    let theta = calibrate_threshold(&pairs_for(&ds.train[6..])).unwrap();
    assert_eq!(accuracy(&pairs_for(&ds.test), theta), 1.0);
}

fn assoc_params(n: usize, noise: f64) -> AssociationParams {
    AssociationParams {
        n_individuals: n,
        dim_a: 12,
        dim_b: 10,
        fonts: 3,
        font_strength: 0.4,
        study_views: 4,
        heldout_views: 4,
        noise,
        seed: 9,
    }
}

#[test]
fn single_individual_single_view() {
    let mut p = assoc_params(1, 0.0);
    p.study_views = 1;
    p.heldout_views = 0;
    let ds = generate_association_dataset(p).unwrap();
    assert_eq!(ds.individuals.len(), 1);
    assert_eq!(ds.individuals[0].study.len(), 1);
    assert_eq!(ds.individuals[0].study[0].dim(), 22);
}

#[test]
fn face_only_probes_have_no_name_energy() {
    let ds = generate_association_dataset(assoc_params(4, 0.2)).unwrap();
    for ind in &ds.individuals {
        for x in ind.study.iter().chain(&ind.heldout) {
            let probe = ds.face_only(x).unwrap();
            assert_eq!(probe[12..].iter().map(|v| v * v).sum::<f64>(), 0.0);
            assert_eq!(&probe[..12], &x[..12]);
        }
    }
}

#[test]
fn heldout_views_are_new_items() {
    let ds = generate_association_dataset(assoc_params(5, 0.0)).unwrap();
    for ind in &ds.individuals {
        for h in &ind.heldout {
            assert!(ind.study.iter().all(|s| s != h));
        }
    }
}

#[test]
fn noiseless_heldout_recall_with_exact_hippocampus() {
    let p = assoc_params(8, 0.0);
    let (da, db, total) = (p.dim_a, p.dim_b, p.dim_a + p.dim_b);
    let ds = generate_association_dataset(p.clone()).unwrap();
    // Development individuals, disjoint from the studied ones.
    let mut dev = p.clone();
    dev.seed = 1234;
    dev.n_individuals = 10;
    let dev = generate_association_dataset(dev).unwrap();

    let mut c1 = HwLayer::exact(total, Similarity::NormalizedDot, Pooling::Max);
    let mut c2 = HwLayer::exact(total, Similarity::NormalizedDot, Pooling::Max);
    for (k, ind) in dev.individuals.iter().enumerate() {
        let mut faces = TemplateBook::new(k, total).unwrap();
        for j in 0..da {
            faces.insert(&fv(embed(&shift(&ind.face, j), 0, total))).unwrap();
        }
        c1.push_exact(ExactModule::from_book(faces)).unwrap();
        let mut names = TemplateBook::new(k, total).unwrap();
        for font in &ind.name_fonts {
            for j in 0..db {
                names.insert(&fv(embed(&shift(font, j), da, total))).unwrap();
            }
        }
        c2.push_exact(ExactModule::from_book(names)).unwrap();
    }
    let hippo = HwLayer::exact(20, Similarity::NormalizedDot, Pooling::Max);
    let mut model = CortexHippocampusModel::new(c1, Some(c2), hippo).unwrap();
    let episodes: Vec<Episode> = ds
        .individuals
        .iter()
        .enumerate()
        .map(|(k, ind)| Episode {
            module: k,
            items: ind.study.clone(),
        })
        .collect();
    model.study(&episodes).unwrap();
    for (k, ind) in ds.individuals.iter().enumerate() {
        for x in ind.study.iter().chain(&ind.heldout) {
            assert_eq!(model.recall(x).unwrap(), k);
        }
    }
}
