mod common;

use common::{normal, rng};
use proptest::prelude::*;
use pwca_core::retrieval::{
    all_directions, average_precision, expected_random_ap, mate_retrieval, rank_mates, rank_of_mate,
};
use pwca_core::{pwca::train_pwca, Embedding, KernelSpec, Matrix, ViewMatrix};

fn random_embeddings(r: &mut rand_chacha::ChaCha8Rng, n: usize, k: usize) -> Vec<Embedding> {
    (0..n).map(|_| Embedding((0..k).map(|_| normal(r)).collect())).collect()
}

fn random_view(seed: u64, l: usize, d: usize) -> ViewMatrix {
    let mut r = rng(seed);
    ViewMatrix::new(Matrix::from_fn(l, d, |_, _| normal(&mut r))).unwrap()
}

#[test]
fn random_projections_score_at_the_harmonic_baseline() {
    let n = 200;
    let mut total = 0.0;
    for seed in 0..50 {
        let mut r = rng(1000 + seed);
        let q = random_embeddings(&mut r, n, 10);
        let t = random_embeddings(&mut r, n, 10);
        total += average_precision(&rank_mates(&q, &t).unwrap()).unwrap();
    }
    let mean = total / 50.0;
    let h = expected_random_ap(n);
    assert!((h - 0.029390154740607223).abs() < 1e-15);
    assert!((mean - h).abs() <= 0.01, "mean AP {mean} vs {h}");
}

#[test]
fn single_pair_is_always_found() {
    let views = vec![random_view(1, 6, 3), random_view(2, 6, 4)];
    let model = train_pwca(&views, &KernelSpec::linear(), 0.01, 3).unwrap();
    let test = vec![random_view(3, 1, 3), random_view(4, 1, 4)];
    let rep = mate_retrieval(&model, &test, 0, 1).unwrap();
    assert_eq!(rep.ranks, vec![1]);
    assert_eq!(rep.ap, 1.0);
}

#[test]
fn equal_norm_self_retrieval_is_perfect() {
    // Cauchy-Schwarz: with distinct equal-norm embeddings the mate wins.
    let mut r = rng(5);
    let e: Vec<Embedding> = random_embeddings(&mut r, 40, 6)
        .into_iter()
        .map(|v| {
            let n = v.0.iter().map(|x| x * x).sum::<f64>().sqrt();
            Embedding(v.0.iter().map(|x| x / n).collect())
        })
        .collect();
    let ranks = rank_mates(&e, &e).unwrap();
    assert_eq!(average_precision(&ranks).unwrap(), 1.0);
}

#[test]
fn a_longer_candidate_can_outscore_the_mate() {
    // The absolute inner product is not normalized, so identical query and
    // mate embeddings do not guarantee rank 1.
    let e = vec![Embedding(vec![1.0, 0.0]), Embedding(vec![3.0, 1.0])];
    assert_eq!(rank_mates(&e, &e).unwrap(), vec![2, 1]);
}

#[test]
fn reports_are_recomputable_and_bounded() {
    let views = vec![random_view(6, 30, 5), random_view(7, 30, 6), random_view(8, 30, 4)];
    let model = train_pwca(&views, &KernelSpec::linear(), 0.01, 10).unwrap();
    let test = vec![random_view(9, 25, 5), random_view(10, 25, 6), random_view(11, 25, 4)];
    let reports = all_directions(&model, &test).unwrap();
    assert_eq!(reports.len(), 6);
    for rep in &reports {
        assert_eq!(rep.ap, average_precision(&rep.ranks).unwrap());
        assert!(rep.ap >= 1.0 / 25.0 && rep.ap <= 1.0);
        assert!(rep.ranks.iter().all(|&r| (1..=25).contains(&r)));
        assert_eq!(rep.n_queries, 25);
    }
}

#[test]
fn parallel_scoring_matches_serial_scoring() {
    let mut r = rng(12);
    let q = random_embeddings(&mut r, 120, 8);
    let t = random_embeddings(&mut r, 120, 8);
    let parallel = rank_mates(&q, &t).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| rank_mates(&q, &t).unwrap());
    let manual: Vec<usize> = (0..120)
        .map(|i| {
            let scores: Vec<f64> = t.iter().map(|c| pwca_core::similarity(&q[i], c).unwrap()).collect();
            rank_of_mate(&scores, i).unwrap()
        })
        .collect();
    assert_eq!(parallel, serial);
    assert_eq!(parallel, manual);
}

#[test]
fn summary_and_csv_shapes() {
    let views = vec![random_view(13, 10, 3), random_view(14, 10, 3)];
    let model = train_pwca(&views, &KernelSpec::linear(), 0.01, 4).unwrap();
    let rep = mate_retrieval(&model, &[random_view(15, 3, 3), random_view(16, 3, 3)], 1, 0)
        .unwrap()
        .with_seed(Some(42));
    let json: serde_json::Value = serde_json::from_str(&rep.summary_json().unwrap()).unwrap();
    for key in ["ap", "n_queries", "method", "k", "tau", "seed", "query_view", "target_view"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["method"], "pwca");
    assert_eq!(json["seed"], 42);
    let csv = rep.ranks_csv();
    assert!(csv.starts_with("query_index,rank\n0,"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn mismatched_test_views_are_rejected() {
    let views = vec![random_view(17, 10, 3), random_view(18, 10, 3)];
    let model = train_pwca(&views, &KernelSpec::linear(), 0.01, 4).unwrap();
    assert!(mate_retrieval(&model, &[random_view(19, 3, 3), random_view(20, 4, 3)], 0, 1).is_err());
    assert!(mate_retrieval(&model, &[random_view(19, 3, 3), random_view(20, 3, 3)], 0, 2).is_err());
}

proptest! {
    #[test]
    fn raising_the_mate_score_never_worsens_its_rank(
        scores in prop::collection::vec(-5.0f64..5.0, 1..30),
        pick in any::<prop::sample::Index>(),
        bump in 0.0f64..3.0,
    ) {
        let mate = pick.index(scores.len());
        let before = rank_of_mate(&scores, mate).unwrap();
        let mut raised = scores.clone();
        raised[mate] += bump;
        prop_assert!(rank_of_mate(&raised, mate).unwrap() <= before);
    }

    #[test]
    fn candidate_order_does_not_matter(
        scores in prop::collection::hash_set(-1_000_000i64..1_000_000, 1..30),
        pick in any::<prop::sample::Index>(),
        shuffle_seed in any::<u64>(),
    ) {
        let scores: Vec<f64> = scores.into_iter().map(|s| s as f64 / 1000.0).collect();
        let mate = pick.index(scores.len());
        let perm = pwca_core::dataio::permutation(scores.len(), shuffle_seed);
        let shuffled: Vec<f64> = perm.iter().map(|&p| scores[p]).collect();
        let new_mate = perm.iter().position(|&p| p == mate).unwrap();
        prop_assert_eq!(rank_of_mate(&scores, mate).unwrap(), rank_of_mate(&shuffled, new_mate).unwrap());
    }

    #[test]
    fn ap_stays_within_bounds(ranks in prop::collection::vec(1usize..50, 1..60)) {
        let n = 50usize;
        let ap = average_precision(&ranks).unwrap();
        prop_assert!(ap >= 1.0 / n as f64 && ap <= 1.0);
        let direct: f64 = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64;
        prop_assert!((ap - direct).abs() <= 1e-14);
    }
}
