use hwarch_core::exact::{classify, exact_insert, exact_query};
use hwarch_core::rng::{gaussian_vec, stream, unit_vec};
use hwarch_core::synth::{generate_orbit, oracle_exact_query, shift, GroupSpec};
use hwarch_core::{FeatureVector, Pooling, Similarity, TemplateBook};
use rand::seq::SliceRandom;
use rand::Rng;

fn fv(v: Vec<f64>) -> FeatureVector {
    FeatureVector::new(v).unwrap()
}

fn random_book(r: &mut impl Rng, id: usize, n: usize, d: usize) -> TemplateBook {
    let mut book = TemplateBook::new(id, d).unwrap();
    for _ in 0..n {
        exact_insert(&mut book, &fv(gaussian_vec(r, d))).unwrap();
    }
    book
}

const KINDS: [Similarity; 2] = [Similarity::NormalizedDot, Similarity::SigmoidDot { gain: 1.7 }];

#[test]
fn matches_loop_oracle_on_random_instances() {
    let mut r = stream(11, &[]);
    let mut worst = 0.0f64;
    for case in 0..1200 {
        let n = r.random_range(1..=50);
        let d = r.random_range(1..=64);
        let book = random_book(&mut r, case, n, d);
        let x = fv(gaussian_vec(&mut r, d));
        for f in KINDS {
            for p in [Pooling::Max, Pooling::Sum] {
                let got = exact_query(&book, &x, f, p).unwrap();
                let want = oracle_exact_query(&book, &x, f, p).unwrap();
                worst = worst.max((got - want).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}

#[test]
fn twenty_templates_fifty_queries() {
    let mut r = stream(12, &[]);
    let book = random_book(&mut r, 0, 20, 16);
    for _ in 0..50 {
        let x = fv(gaussian_vec(&mut r, 16));
        let got = exact_query(&book, &x, Similarity::NormalizedDot, Pooling::Max).unwrap();
        // brute force straight from the stored rows
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut best = f64::NEG_INFINITY;
        for t in book.iter() {
            best = best.max(t.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() / xn);
        }
        assert!((got - best).abs() <= 1e-12);
    }
}

#[test]
fn insert_is_list_append() {
    let mut r = stream(13, &[]);
    let mut book = TemplateBook::new(0, 6).unwrap();
    let mut list: Vec<Vec<f64>> = Vec::new();
    for _ in 0..5 {
        let t = unit_vec(&mut r, 6);
        exact_insert(&mut book, &fv(t.clone())).unwrap();
        list.push(t);
    }
    assert_eq!(book.len(), 5);
    for (i, t) in list.iter().enumerate() {
        let stored = book.template(i).unwrap();
        for (a, b) in stored.iter().zip(t) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn classify_matches_linear_scan() {
    let mut r = stream(14, &[]);
    for _ in 0..500 {
        let k = r.random_range(1..20);
        // Coarse values so ties actually happen.
        let sig: Vec<f64> = (0..k).map(|_| r.random_range(0..5) as f64 / 4.0).collect();
        let mut best = 0;
        for i in 1..k {
            if sig[i] > sig[best] {
                best = i;
            }
        }
        assert_eq!(classify(&sig).unwrap(), best);
        let scaled: Vec<f64> = sig.iter().map(|v| v * 3.5).collect();
        assert_eq!(classify(&scaled).unwrap(), best);
    }
}

#[test]
fn pooling_ignores_template_order() {
    let mut r = stream(15, &[]);
    for _ in 0..100 {
        let book = random_book(&mut r, 0, 12, 10);
        let mut rows: Vec<Vec<f64>> = book.iter().map(<[f64]>::to_vec).collect();
        rows.shuffle(&mut r);
        let shuffled = TemplateBook::from_raw_rows(0, 10, rows.concat()).unwrap();
        let x = fv(gaussian_vec(&mut r, 10));
        let f = Similarity::NormalizedDot;
        assert_eq!(
            exact_query(&book, &x, f, Pooling::Max).unwrap(),
            exact_query(&shuffled, &x, f, Pooling::Max).unwrap()
        );
        let a = exact_query(&book, &x, f, Pooling::Sum).unwrap();
        let b = exact_query(&shuffled, &x, f, Pooling::Sum).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn max_below_sum_for_nonnegative_similarities() {
    let mut r = stream(16, &[]);
    for _ in 0..100 {
        let book = random_book(&mut r, 0, 8, 5);
        let x = fv(gaussian_vec(&mut r, 5));
        let f = Similarity::SigmoidDot { gain: 1.0 };
        let max = exact_query(&book, &x, f, Pooling::Max).unwrap();
        let sum = exact_query(&book, &x, f, Pooling::Sum).unwrap();
        assert!(max <= sum);
    }
}

#[test]
fn full_orbit_signatures_are_shift_invariant() {
    let mut r = stream(17, &[]);
    let d = 24;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let books: Vec<TemplateBook> = (0..4)
            .map(|k| generate_orbit(k, &fv(gaussian_vec(&mut r, d)), &GroupSpec::full_cyclic()).unwrap())
            .collect();
        let x = gaussian_vec(&mut r, d);
        for p in [Pooling::Max, Pooling::Sum] {
            let base: Vec<f64> = books
                .iter()
                .map(|b| exact_query(b, &fv(x.clone()), Similarity::NormalizedDot, p).unwrap())
                .collect();
            for j in 0..d {
                for (b, want) in books.iter().zip(&base) {
                    let got = exact_query(b, &fv(shift(&x, j)), Similarity::NormalizedDot, p).unwrap();
                    worst = worst.max((got - want).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}
