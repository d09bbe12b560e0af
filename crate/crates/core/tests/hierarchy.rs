use hwarch_core::memory::{balanced_accuracy, same_different};
use hwarch_core::rng::{gaussian_vec, stream, unit_vec};
use hwarch_core::synth::{generate_orbit, oracle_exact_query, shift, GroupSpec};
use hwarch_core::{
    calibrate_threshold, CortexHippocampusModel, Episode, Error, ExactModule, FeatureVector, HwArchitecture,
    HwLayer, Pooling, ScoredPair, Similarity, SvdModule, TemplateBook, WtaHashFamily,
};
use rand::seq::SliceRandom;
use rand::Rng;

fn fv(v: Vec<f64>) -> FeatureVector {
    FeatureVector::new(v).unwrap()
}

fn random_books(r: &mut impl Rng, k: usize, n: usize, d: usize) -> Vec<TemplateBook> {
    (0..k)
        .map(|id| {
            let mut b = TemplateBook::new(id, d).unwrap();
            for _ in 0..n {
                b.insert(&fv(gaussian_vec(r, d))).unwrap();
            }
            b
        })
        .collect()
}

fn exact_layer(books: &[TemplateBook], d: usize, p: Pooling) -> HwLayer {
    let mut layer = HwLayer::exact(d, Similarity::NormalizedDot, p);
    for b in books {
        layer.push_exact(ExactModule::from_book(b.clone())).unwrap();
    }
    layer
}

fn orbit_books(r: &mut impl Rng, k: usize, d: usize) -> Vec<TemplateBook> {
    (0..k)
        .map(|id| generate_orbit(id, &fv(gaussian_vec(r, d)), &GroupSpec::full_cyclic()).unwrap())
        .collect()
}

#[test]
fn layer_signature_matches_per_module_oracle() {
    let mut r = stream(70, &[]);
    let books = random_books(&mut r, 5, 7, 9);
    let layer = exact_layer(&books, 9, Pooling::Sum);
    for _ in 0..50 {
        let x = fv(gaussian_vec(&mut r, 9));
        let sig = layer.signature(&x).unwrap();
        assert_eq!(sig.len(), 5);
        for (k, b) in books.iter().enumerate() {
            let want = oracle_exact_query(b, &x, Similarity::NormalizedDot, Pooling::Sum).unwrap();
            assert!((sig[k] - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn module_permutation_permutes_signature() {
    let mut r = stream(71, &[]);
    let books = random_books(&mut r, 6, 4, 5);
    let mut order: Vec<usize> = (0..6).collect();
    order.shuffle(&mut r);
    let permuted: Vec<TemplateBook> = order.iter().map(|&i| books[i].clone()).collect();
    let a = exact_layer(&books, 5, Pooling::Max);
    let b = exact_layer(&permuted, 5, Pooling::Max);
    let x = fv(gaussian_vec(&mut r, 5));
    let sa = a.signature(&x).unwrap();
    let sb = b.signature(&x).unwrap();
    for (pos, &i) in order.iter().enumerate() {
        assert_eq!(sb[pos], sa[i]);
    }
}

#[test]
fn two_layer_shapes_and_composition() {
    let mut r = stream(72, &[]);
    let l1_books = random_books(&mut r, 10, 6, 12);
    let l2_books = random_books(&mut r, 4, 5, 10);
    let arch = HwArchitecture::new(vec![
        exact_layer(&l1_books, 12, Pooling::Max),
        exact_layer(&l2_books, 10, Pooling::Max),
    ])
    .unwrap();
    arch.validate().unwrap();
    for _ in 0..30 {
        let x = fv(gaussian_vec(&mut r, 12));
        let mid: Vec<f64> = l1_books
            .iter()
            .map(|b| oracle_exact_query(b, &x, Similarity::NormalizedDot, Pooling::Max).unwrap())
            .collect();
        assert_eq!(mid.len(), 10);
        let mid = fv(mid);
        let top = arch.feedforward(&x).unwrap();
        assert_eq!(top.len(), 4);
        for (k, b) in l2_books.iter().enumerate() {
            let want = oracle_exact_query(b, &mid, Similarity::NormalizedDot, Pooling::Max).unwrap();
            assert!((top[k] - want).abs() <= 1e-12);
        }
    }
    let single = HwArchitecture::new(vec![exact_layer(&l1_books, 12, Pooling::Max)]).unwrap();
    let x = fv(gaussian_vec(&mut r, 12));
    assert_eq!(
        single.feedforward(&x).unwrap(),
        exact_layer(&l1_books, 12, Pooling::Max).signature(&x).unwrap()
    );
}

#[test]
fn orbit_invariance_survives_depth() {
    let mut r = stream(73, &[]);
    let d = 16;
    for _ in 0..20 {
        let mut layers = vec![exact_layer(&orbit_books(&mut r, 8, d), d, Pooling::Max)];
        let mut width = 8;
        for _ in 0..3 {
            let k = r.random_range(2..8);
            let p = if r.random_bool(0.5) { Pooling::Max } else { Pooling::Sum };
            layers.push(exact_layer(&random_books(&mut r, k, 4, width), width, p));
            width = k;
        }
        let arch = HwArchitecture::new(layers).unwrap();
        let x = gaussian_vec(&mut r, d);
        let base = arch.feedforward(&fv(x.clone())).unwrap();
        for j in 1..d {
            let got = arch.feedforward(&fv(shift(&x, j))).unwrap();
            for (a, b) in got.iter().zip(base.iter()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

/// Cortex of full-rank SVD modules over orbits of random bases.
fn svd_cortex(r: &mut impl Rng, k: usize, d: usize) -> HwLayer {
    let mut layer = HwLayer::svd(d, d, Similarity::NormalizedDot, Pooling::Max);
    for b in orbit_books(r, k, d) {
        layer.push_svd(SvdModule::from_book(b, d).unwrap()).unwrap();
    }
    layer
}

fn model(r: &mut impl Rng, hippocampus: HwLayer) -> CortexHippocampusModel {
    let c1 = svd_cortex(r, 12, 16);
    let c2 = svd_cortex(r, 8, 16);
    CortexHippocampusModel::new(c1, Some(c2), hippocampus).unwrap()
}

#[test]
fn study_and_recall_round_trip() {
    let mut r = stream(74, &[]);
    let mut m = model(&mut r, HwLayer::exact(20, Similarity::NormalizedDot, Pooling::Max));
    let probe = fv(gaussian_vec(&mut r, 16));
    assert_eq!(m.recall(&probe), Err(Error::NotStudied));
    let cortex_before = (m.cortex1().clone(), m.cortex2().cloned());
    m.study(&[Episode {
        module: 0,
        items: vec![probe.clone()],
    }])
    .unwrap();
    assert_eq!(m.recall(&probe), Ok(0));
    assert_eq!((m.cortex1().clone(), m.cortex2().cloned()), cortex_before);
    assert_eq!(
        m.study(&[Episode {
            module: 5,
            items: vec![probe.clone()]
        }]),
        Err(Error::UnknownModule(5))
    );
    assert!(matches!(
        m.study(&[Episode {
            module: 1,
            items: vec![fv(vec![1.0; 3])]
        }]),
        Err(Error::DimensionMismatch { .. })
    ));
    assert_eq!(m.hippocampus().module_count(), 1);
}

#[test]
fn twenty_episodes_exact_upper_bounds_wta() {
    let mut r = stream(75, &[]);
    let episodes: Vec<Episode> = (0..20)
        .map(|k| Episode {
            module: k,
            items: (0..8).map(|_| fv(gaussian_vec(&mut r, 16))).collect(),
        })
        .collect();
    let cortex_seed = 76;
    let mut exact = model(&mut stream(cortex_seed, &[]), HwLayer::exact(20, Similarity::NormalizedDot, Pooling::Max));
    let fam = WtaHashFamily::new(20, 8, 2, 4, 3).unwrap();
    let mut wta = model(&mut stream(cortex_seed, &[]), HwLayer::wta(fam, Similarity::NormalizedDot, Pooling::Max));
    exact.study(&episodes).unwrap();
    wta.study(&episodes).unwrap();
    for k in 0..20 {
        assert_eq!(exact.hippocampus().modules().module_len(k), Some(8));
        assert_eq!(wta.hippocampus().modules().module_len(k), Some(8));
    }
    let (mut hit_exact, mut hit_wta) = (0, 0);
    for ep in &episodes {
        for x in &ep.items {
            hit_exact += (exact.recall(x).unwrap() == ep.module) as usize;
            hit_wta += (wta.recall(x).unwrap() == ep.module) as usize;
        }
    }
    assert_eq!(hit_exact, 160);
    assert!(hit_wta <= hit_exact);
}

#[test]
fn unstudied_view_from_covered_orbit_is_recalled() {
    let mut r = stream(77, &[]);
    let d = 16;
    let bases: Vec<Vec<f64>> = (0..12).map(|_| unit_vec(&mut r, d)).collect();
    let mut c1 = HwLayer::svd(d, d, Similarity::NormalizedDot, Pooling::Max);
    for (k, b) in bases.iter().enumerate() {
        let book = generate_orbit(k, &fv(b.clone()), &GroupSpec::full_cyclic()).unwrap();
        c1.push_svd(SvdModule::from_book(book, d).unwrap()).unwrap();
    }
    let hippo = HwLayer::exact(12, Similarity::NormalizedDot, Pooling::Max);
    let mut m = CortexHippocampusModel::new(c1, None, hippo).unwrap();
    // Study a few individuals by a single view, probe with an unseen shift.
    let people: Vec<Vec<f64>> = (0..5).map(|_| unit_vec(&mut r, d)).collect();
    let episodes: Vec<Episode> = people
        .iter()
        .enumerate()
        .map(|(k, p)| Episode {
            module: k,
            items: vec![fv(p.clone())],
        })
        .collect();
    m.study(&episodes).unwrap();
    for (k, p) in people.iter().enumerate() {
        for j in 1..d {
            assert_eq!(m.recall(&fv(shift(p, j))).unwrap(), k);
        }
    }
}

#[test]
fn same_different_behaviour() {
    let mut r = stream(78, &[]);
    let layer = svd_cortex(&mut r, 6, 8);
    for _ in 0..50 {
        let a = fv(gaussian_vec(&mut r, 8));
        let b = fv(gaussian_vec(&mut r, 8));
        let theta = r.random_range(-1.0..1.0);
        assert_eq!(
            same_different(&layer, &a, &b, theta).unwrap(),
            same_different(&layer, &b, &a, theta).unwrap()
        );
        assert!(same_different(&layer, &a, &a, 1.0 - 1e-12).unwrap());
    }
    // one-hot signatures with disjoint support
    let mut onehot = HwLayer::exact(2, Similarity::NormalizedDot, Pooling::Max);
    for i in 0..2 {
        let k = onehot.push_module().unwrap();
        onehot.insert(k, &FeatureVector::basis(2, i).unwrap()).unwrap();
    }
    let (e1, e2) = (FeatureVector::basis(2, 0).unwrap(), FeatureVector::basis(2, 1).unwrap());
    assert!(!same_different(&onehot, &e1, &e2, 0.1).unwrap());
}

#[test]
fn calibrated_threshold_beats_chance_on_random_labels() {
    let mut r = stream(79, &[]);
    for _ in 0..200 {
        let n = r.random_range(2..40);
        let mut pairs: Vec<ScoredPair> = (0..n)
            .map(|_| ScoredPair {
                score: (r.random_range(-1.0f64..1.0) * 8.0).round() / 8.0,
                same: r.random_bool(0.5),
            })
            .collect();
        pairs[0].same = true;
        pairs[1].same = false;
        let theta = calibrate_threshold(&pairs).unwrap();
        let got = balanced_accuracy(&pairs, theta);
        // exhaustive scan over every score and one past the top
        let mut best = balanced_accuracy(&pairs, f64::INFINITY);
        for p in &pairs {
            best = best.max(balanced_accuracy(&pairs, p.score));
        }
        assert!((got - best).abs() < 1e-12);
        assert!(got >= 0.5);
    }
}

#[test]
fn separable_pairs_reach_full_accuracy() {
    let pairs: Vec<ScoredPair> = [0.2, 0.35, 0.3]
        .iter()
        .map(|&s| ScoredPair { score: s, same: false })
        .chain([0.7, 0.9].iter().map(|&s| ScoredPair { score: s, same: true }))
        .collect();
    let theta = calibrate_threshold(&pairs).unwrap();
    assert!((theta - 0.525).abs() < 1e-12);
    assert_eq!(hwarch_core::memory::accuracy(&pairs, theta), 1.0);
}
