use citecast::corpus::{build_snapshot, clean, CleanConfig};
use citecast::synth::{generate, FutureMode, SynthConfig, SynthCorpus};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn in_degrees(c: &SynthCorpus, observed: usize) -> Vec<usize> {
    let mut deg = vec![0; observed];
    for r in &c.records[..observed] {
        for p in &r.references {
            deg[(p.0 - 1) as usize] += 1;
        }
    }
    deg
}

/// With no preferential attachment and no topic affinity every eligible
/// paper is equally likely to be cited, so paper `j` expects
/// `Σ_i k_i / eligible_i` citations over the later papers `i`.
#[test]
fn uniform_attachment_matches_expected_in_degree() {
    for seed in 0..3 {
        let cfg = SynthConfig {
            num_papers: 2000,
            attachment_strength: 0.0,
            topic_affinity: 1.0,
            topic_weights: Some(vec![1.0; 5]),
            future_years: 0,
            seed,
            ..Default::default()
        };
        let c = generate(&cfg).unwrap();
        let n = c.truth.len();
        assert_eq!(c.records.len(), n);
        let first_of_year = |y: i32| c.records.iter().position(|r| r.year == y).unwrap();

        let mut expected = vec![0.0; n];
        for r in &c.records {
            let eligible = first_of_year(r.year);
            if eligible == 0 {
                assert!(r.references.is_empty());
                continue;
            }
            let share = r.references.len() as f64 / eligible as f64;
            expected[..eligible].iter_mut().for_each(|e| *e += share);
        }
        let observed = in_degrees(&c, n);

        // Consecutive papers pooled until each bin expects at least 5.
        let (mut stat, mut bins) = (0.0, 0usize);
        let (mut o, mut e) = (0.0, 0.0);
        for j in 0..n {
            if expected[j] == 0.0 {
                continue;
            }
            o += observed[j] as f64;
            e += expected[j];
            if e >= 5.0 {
                stat += (o - e) * (o - e) / e;
                bins += 1;
                o = 0.0;
                e = 0.0;
            }
        }
        assert!(bins > 50);
        let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "seed {seed}: chi2 = {stat:.1} over {bins} bins, p = {p:.4}");
    }
}

#[test]
fn strong_attachment_yields_a_heavy_tail() {
    let cfg =
        SynthConfig { attachment_strength: 5.0, topic_affinity: 1.0, future_years: 0, seed: 3, ..Default::default() };
    let c = generate(&cfg).unwrap();
    let mut deg = in_degrees(&c, c.truth.len());
    deg.sort_unstable();
    let median = deg[deg.len() / 2];
    let max = *deg.last().unwrap();
    assert!(max >= 5 * median.max(1), "max {max}, median {median}");
}

#[test]
fn topic_affinity_concentrates_references() {
    let same_topic_share = |affinity: f64| {
        let cfg = SynthConfig { topic_affinity: affinity, future_years: 0, seed: 4, ..Default::default() };
        let c = generate(&cfg).unwrap();
        let (mut same, mut total) = (0usize, 0usize);
        for (i, r) in c.records.iter().enumerate() {
            for p in &r.references {
                total += 1;
                same += usize::from(c.truth[(p.0 - 1) as usize].topic == c.truth[i].topic);
            }
        }
        same as f64 / total as f64
    };
    let (hi, lo) = (same_topic_share(8.0), same_topic_share(1.0));
    assert!(hi > lo + 0.1, "{hi} vs {lo}");
}

#[test]
fn output_grows_and_every_record_survives_cleaning() {
    let cfg = SynthConfig {
        growth: 1.3,
        future: FutureMode::Planted { max_rate: 10.0, hops: 1 },
        seed: 5,
        ..Default::default()
    };
    let c = generate(&cfg).unwrap();
    let per_year: Vec<usize> =
        (cfg.first_year..=cfg.last_year).map(|y| c.records.iter().filter(|r| r.year == y).count()).collect();
    assert_eq!(per_year.iter().sum::<usize>(), cfg.num_papers);
    assert!(per_year.windows(2).all(|w| w[1] + 1 >= w[0]));
    assert!(per_year.last().unwrap() > &(3 * per_year[0]));
    let (kept, report) = clean(c.records.clone(), &CleanConfig::default());
    assert_eq!((kept.len(), report.dropped()), (c.records.len(), 0));

    // Ground truth agrees with a citation count over the future year.
    let snap = build_snapshot(&c.records, cfg.last_year + 1);
    for t in &c.truth {
        assert_eq!(snap.citation_count(t.paper_id, cfg.last_year + 1, cfg.last_year + 1).unwrap(), t.future_citations);
    }
}

#[test]
fn invalid_settings_are_rejected() {
    assert!(generate(&SynthConfig { num_papers: 0, ..Default::default() }).is_err());
    assert!(generate(&SynthConfig { first_year: 2011, last_year: 2010, ..Default::default() }).is_err());
    assert!(generate(&SynthConfig { topic_weights: Some(vec![1.0]), ..Default::default() }).is_err());
    let planted = FutureMode::Planted { max_rate: 5.0, hops: 1 };
    assert!(generate(&SynthConfig { future: planted, future_years: 0, ..Default::default() }).is_err());
}
