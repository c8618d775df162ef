//! The simulator and the likelihood must describe the same distribution.
//!
//! `simulate_event` draws latent geometrics and buckets them; `log_likelihood`
//! evaluates the closed-form stagewise product. Neither shares code with the
//! other, so matching frequencies pin both ends at once.

use std::collections::HashMap;

use gpl::data::{Dataset, Direction, EntityTable, Ranking};
use gpl::model::log_likelihood;
use gpl::predictive::simulate_event;
use gpl::sampling::substream;

fn key(r: &Ranking) -> String {
    let cells: Vec<String> = r
        .entities()
        .iter()
        .zip(r.buckets())
        .map(|(y, s)| format!("{y}:{s}"))
        .collect();
    cells.join(",")
}

fn three_entity_dataset() -> EntityTable {
    let mut entities = EntityTable::new();
    for id in 0..3 {
        entities.intern(&format!("e{id}"));
    }
    entities
}

#[test]
fn event_frequencies_match_exact_probabilities() {
    let theta = [0.35, 0.5, 0.65];
    let field = [0usize, 1, 2];
    let n: u64 = 200_000;

    let mut rng = substream(77, 0);
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..n {
        let event = simulate_event(&theta, &field, Direction::Standard, &mut rng).unwrap();
        *counts.entry(key(&event.ranking)).or_insert(0) += 1;
    }

    // enumerate all 13 bucket orders of three entities and their exact
    // probabilities; every order the simulator produced must be one of them
    let mut orders: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for entity in 0..3 {
        let mut grown = Vec::new();
        for order in &orders {
            for slot in 0..order.len() {
                let mut next = order.clone();
                next[slot].push(entity);
                grown.push(next);
            }
            for pos in 0..=order.len() {
                let mut next = order.clone();
                next.insert(pos, vec![entity]);
                grown.push(next);
            }
        }
        orders = grown;
    }
    assert_eq!(orders.len(), 13);

    let mut total_prob = 0.0;
    let mut matched: u64 = 0;
    for buckets in &orders {
        let mut y = Vec::new();
        let mut s = Vec::new();
        for (j, bucket) in buckets.iter().enumerate() {
            // simulate_event lists tied entities in id order
            let mut members = bucket.clone();
            members.sort_unstable();
            for k in members {
                y.push(k);
                s.push(j as u32 + 1);
            }
        }
        let m = y.len();
        let r = Ranking::new(y, s, m).unwrap();
        let d = Dataset {
            entities: three_entity_dataset(),
            rankings: vec![r.clone()],
        };
        let p = log_likelihood(&d, &theta).unwrap().exp();
        total_prob += p;

        let observed = counts.get(&key(&r)).copied().unwrap_or(0);
        matched += observed;
        let freq = observed as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() < 4.0 * se + 1e-9,
            "order {:?}: frequency {freq} vs probability {p} (4 se = {})",
            buckets,
            4.0 * se
        );
    }
    assert!((total_prob - 1.0).abs() < 1e-10);
    assert_eq!(
        matched, n,
        "simulator produced an order outside the support"
    );
}

#[test]
fn reverse_direction_frequencies_match_reversed_probabilities() {
    // under the reverse rule, an event ranked (best..worst) has the same
    // probability as the mirrored order under the standard rule
    let theta = [0.3, 0.6];
    let field = [0usize, 1];
    let n: u64 = 100_000;

    let mut rng = substream(78, 0);
    let mut first_strict = [0u64; 2];
    let mut ties = 0u64;
    for _ in 0..n {
        let event = simulate_event(&theta, &field, Direction::Reverse, &mut rng).unwrap();
        if event.bucket_count() == 1 {
            ties += 1;
        } else {
            first_strict[event.ranking.entities()[0]] += 1;
        }
    }

    // reverse winner = larger latent; entity 0 with the smaller rate wins
    // exactly when entity 1 would win under the standard rule
    let denom = 0.3 + 0.6 - 0.18;
    let p0 = 0.6 * (1.0 - 0.3) / denom;
    let p1 = 0.3 * (1.0 - 0.6) / denom;
    let p_tie = 0.18 / denom;
    for (count, p) in [(first_strict[0], p0), (first_strict[1], p1), (ties, p_tie)] {
        let freq = count as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() < 4.0 * se,
            "frequency {freq} vs probability {p}"
        );
    }
}
