use gaze_lds::sim::{simulate_corpus, simulate_page, Repetition, SimConfig};

#[test]
fn noise_has_requested_spread() {
    let cfg = SimConfig { sigma: 0.3, n_pages: 80, ..SimConfig::default() };
    let mut residuals = Vec::new();
    for page in simulate_corpus(&cfg).unwrap() {
        for (f, &line) in page.fixations.iter().zip(&page.labels) {
            residuals.push(f.y - page.region.line_center(line));
        }
    }
    assert!(residuals.len() >= 100_000);
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let std = (residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((std - 0.3).abs() / 0.3 < 0.03, "sample std {std}");
    assert!(mean.abs() < 0.01, "sample mean {mean}");
}

#[test]
fn samples_stay_within_three_sigma_of_their_line() {
    let cfg = SimConfig { sigma: 0.2, ..SimConfig::default() };
    let page = simulate_page(&cfg, 0).unwrap();
    let inside = page
        .fixations
        .iter()
        .zip(&page.labels)
        .filter(|(f, &l)| (f.y - page.region.line_center(l)).abs() < 3.0 * 0.2)
        .count();
    assert!(inside as f64 / page.len() as f64 >= 0.98);
}

#[test]
fn labels_are_valid_lines_in_reading_order() {
    for repetition in [Repetition::None, Repetition::ONE_TO_FIVE] {
        let cfg = SimConfig { repetition, sigma: 0.5, seed: 11, ..SimConfig::default() };
        let page = simulate_page(&cfg, 3).unwrap();
        assert_eq!(page.fixations.len(), page.labels.len());
        assert_eq!(page.labels[0], 1);
        assert_eq!(*page.labels.last().unwrap(), cfg.n_lines);
        for w in page.labels.windows(2) {
            assert!(w[1] == w[0] || w[1] == w[0] + 1, "jump {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn equal_seeds_give_identical_corpora() {
    let cfg = SimConfig { n_pages: 3, sigma: 0.4, noise_corr: 0.5, repetition: Repetition::ONE_TO_FIVE, seed: 99, ..SimConfig::default() };
    let a = simulate_corpus(&cfg).unwrap();
    let b = simulate_corpus(&cfg).unwrap();
    assert_eq!(a, b);
    let c = simulate_corpus(&SimConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(a[0].fixations, c[0].fixations);
}
