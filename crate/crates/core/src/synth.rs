//! Seeded synthetic surveys with planted structure, for tests and demos.
//!
//! Each informative satisfaction item (and neighbour contact) reflects its
//! own latent component; quality of life is driven by their sum. Public
//! transport and shopping facilities are pure noise. Neighborhoods shift satisfaction means per item and
//! have their own proposal preferences, some sharply peaked and some flat.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng;
use crate::survey::{
    Demographics, ParticipationCodes, ParticipationItem, QolAnswer, SatisfactionCodes,
    SatisfactionSector, SchemaConfig, SurveyDataset, SurveyResponse,
};

/// Satisfaction items that carry no information about quality of life.
pub const NULL_ITEMS: [SatisfactionSector; 2] =
    [SatisfactionSector::PublicTransport, SatisfactionSector::ShoppingFacilities];

/// Project sectors used by the generator, with their linked satisfaction items.
pub const SECTORS: [(&str, Option<SatisfactionSector>); 10] = [
    ("Social Facilities / Meetings", Some(SatisfactionSector::SocialMeetings)),
    ("Recreational Spaces", Some(SatisfactionSector::RecreationalAreas)),
    ("Playing Facilities", Some(SatisfactionSector::PlayingFacilities)),
    ("Social Infrastructure", Some(SatisfactionSector::SocialInfrastructure)),
    ("Public Transport", Some(SatisfactionSector::PublicTransport)),
    ("Shopping Facilities", Some(SatisfactionSector::ShoppingFacilities)),
    ("Neighbourly Life", Some(SatisfactionSector::NeighbourlyLife)),
    ("Parking", None),
    ("Greening", None),
    ("Rivers", None),
];

pub const NEIGHBORHOODS: [&str; 8] = [
    "Old Town", "North Field", "Hillside", "Riverside", "Station", "Meadows", "East End", "Castle",
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub respondents: usize,
    pub neighborhoods: usize,
    /// Probability a respondent reports a previous neighborhood.
    pub relocation_rate: f64,
    /// Probability of "I don't know" on any satisfaction item.
    pub unknown_rate: f64,
    /// Loading of informative satisfaction items on the latent score.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            respondents: 800,
            neighborhoods: 6,
            relocation_rate: 0.3,
            unknown_rate: 0.005,
            signal: 1.1,
            seed: 0,
        }
    }
}

pub fn schema(neighborhoods: usize) -> SchemaConfig {
    let mut s = SchemaConfig::new(
        NEIGHBORHOODS[..neighborhoods.clamp(1, NEIGHBORHOODS.len())]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        SECTORS.iter().map(|(s, _)| s.to_string()).collect(),
    );
    s.sector_satisfaction_map = SECTORS
        .iter()
        .filter_map(|(s, link)| link.map(|l| (s.to_string(), l.key().to_string())))
        .collect::<BTreeMap<_, _>>();
    s
}

fn centered(rng: &mut ChaCha8Rng) -> f64 {
    // sum of three uniforms: bell-shaped on [-1.5, 1.5], unit-ish spread
    (0..3).map(|_| rng.random_range(-0.5..0.5)).sum::<f64>() * 2.0
}

pub fn generate(config: &SynthConfig) -> (SurveyDataset, SchemaConfig) {
    let schema = schema(config.neighborhoods);
    let mut rng = rng::substream(config.seed, "synthetic-survey");
    let hoods = schema.neighborhoods.clone();

    // per-neighborhood item offsets and proposal preferences
    let offsets: Vec<Vec<f64>> = hoods
        .iter()
        .map(|_| SatisfactionSector::ALL.iter().map(|_| rng.random_range(-0.9..0.9)).collect())
        .collect();
    let preferences: Vec<Vec<f64>> = hoods
        .iter()
        .enumerate()
        .map(|(h, _)| {
            let mut order: Vec<usize> = (0..SECTORS.len()).collect();
            order.shuffle(&mut rng);
            let steepness = 0.25 + 1.5 * (h % 3) as f64 / 2.0;
            let mut w = vec![0.0; SECTORS.len()];
            for (rank, &s) in order.iter().enumerate() {
                w[s] = (-(steepness * rank as f64)).exp();
            }
            w
        })
        .collect();

    let mut responses = Vec::with_capacity(config.respondents);
    for i in 0..config.respondents {
        let h = rng.random_range(0..hoods.len());
        let mut wellbeing = 0.0;

        let mut satisfaction = SatisfactionCodes::default();
        for (j, &s) in SatisfactionSector::ALL.iter().enumerate() {
            let component = centered(&mut rng);
            let raw = if NULL_ITEMS.contains(&s) {
                3.0 + offsets[h][j] + 1.2 * component
            } else {
                wellbeing += component;
                3.0 + config.signal * component + offsets[h][j] + 0.4 * centered(&mut rng)
            };
            let code = if rng.random::<f64>() < config.unknown_rate {
                0
            } else {
                raw.round().clamp(1.0, 5.0) as u8
            };
            satisfaction.set(s, Some(code));
        }

        let mut participation = ParticipationCodes::default();
        for p in ParticipationItem::ALL {
            let max = p.max_code();
            let code = if p == ParticipationItem::NeighbourContact {
                let component = centered(&mut rng);
                wellbeing += 0.5 * component;
                let raw = 2.5 + component + 0.4 * centered(&mut rng);
                raw.round().clamp(1.0, f64::from(max)) as u8
            } else {
                rng.random_range(1..=max)
            };
            participation.set(p, Some(code));
        }

        let q = wellbeing / 3.0 + 0.4 * centered(&mut rng);
        let qol = if q < -1.7 {
            [QolAnswer::Bad, QolAnswer::Insufficient, QolAnswer::DontKnow][rng.random_range(0..3)]
        } else if q < -0.7 {
            QolAnswer::Enough
        } else if q < 0.7 {
            QolAnswer::Good
        } else {
            QolAnswer::VeryGood
        };

        let previous = (rng.random::<f64>() < config.relocation_rate).then(|| {
            let from = rng.random_range(0..hoods.len());
            hoods[from].clone()
        });

        let n_props = rng.random_range(0..=3usize);
        let mut proposals: Vec<String> = Vec::new();
        for _ in 0..n_props {
            let s = weighted(&preferences[h], &mut rng);
            let label = SECTORS[s].0.to_string();
            if !proposals.contains(&label) {
                proposals.push(label);
            }
        }

        responses.push(SurveyResponse {
            respondent_id: format!("R{:05}", i + 1),
            neighborhood: hoods[h].clone(),
            previous_neighborhood: previous,
            qol,
            satisfaction,
            participation,
            demographics: Demographics {
                household: Some(rng.random_range(1..=4)),
                education: Some(rng.random_range(1..=4)),
                employment: Some(rng.random_range(0..=3)),
            },
            proposals,
        });
    }

    let dataset = SurveyDataset {
        responses,
        neighborhood_labels: hoods,
        sector_labels: schema.sectors.clone(),
    };
    (dataset, schema)
}

fn weighted(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut t = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if t < *w {
            return i;
        }
        t -= w;
    }
    weights.len() - 1
}
