//! Seeded synthetic corpus with known structure.
//!
//! Three outlets: `quanta_like` draws mentioned persons from a Zipf law, the
//! other two draw them uniformly. Articles carry the usual noise of scraped
//! data: blacklisted names, spurious single tokens, "By " prefixes, and
//! mentions of colleagues from the same outlet's byline pool. One author of
//! `quanta_like` repeatedly quotes the same person.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::{Article, Corpus};

pub const CONCENTRATED_OUTLET: &str = "quanta_like";
pub const UNIFORM_OUTLETS: [&str; 2] = ["wired_like", "newsci_like"];
pub const PLANTED_PERSON: &str = "Ines Valdmaa";

const FIRST: &[&str] = &[
    "Aaron", "Beatriz", "Chen", "Daria", "Emeka", "Farah", "Gustavo", "Hana", "Ivan", "Jia", "Kofi", "Lena", "Mateo",
    "Nadia", "Oskar", "Priya", "Quentin", "Rosa", "Sanjay", "Tove", "Umar", "Vera", "Wen", "Ximena", "Yusuf", "Zora",
    "Anil", "Brigid", "Cyrus", "Dagny", "Elif", "Florin", "Greta", "Hideo", "Ilse", "Jonas", "Kamala", "Lucien",
    "Mirela", "Niamh",
];

const LAST: &[&str] = &[
    "Abernethy",
    "Bhattacharya",
    "Castellanos",
    "Dimitrov",
    "Eriksen",
    "Fujimoto",
    "Gallardo",
    "Haddad",
    "Iversen",
    "Jankowski",
    "Kaminski",
    "Lindqvist",
    "Moreau",
    "Nakagawa",
    "Okonkwo",
    "Petrov",
    "Quispe",
    "Rahimi",
    "Santoro",
    "Takahashi",
    "Uchenna",
    "Varga",
    "Whitfield",
    "Xu",
    "Yamamoto",
    "Zielinski",
    "Almeida",
    "Brennan",
    "Chaudhry",
    "Delacroix",
    "Esposito",
    "Forsberg",
    "Gonzaga",
    "Holmberg",
    "Ibarra",
    "Jovanovic",
    "Kowalczyk",
    "Laurent",
    "Mwangi",
    "Novak",
];

/// Byline names share no token with the scientist pool.
const JOURNALISTS: [&[&str]; 3] = [
    &[
        "Marisol Quennell",
        "Tobiah Wrenfield",
        "Odalys Brightwater",
        "Caspian Holloway-Reyes",
        "Ludmila Farthing",
        "Everett Quillon",
        "Sunniva Ashgrove",
        "Bartholomew Kestrel",
        "Philippa Stormont",
        "Ignatius Ravensworth",
        "Wilhelmina Thornbury",
        "Leopold Marchbanks",
    ],
    &[
        "Rosalind Peverell",
        "Augustin Blackmore",
        "Clementine Ashdown",
        "Fitzgerald Underhill",
        "Genevieve Harrowgate",
        "Lysander Coldwell",
        "Octavia Pemberton",
        "Sebastiano Larkspur",
        "Temperance Whitlock",
        "Valentin Oakenshaw",
        "Winifred Carrow",
        "Ambrose Fenwright",
    ],
    &[
        "Beatrix Wolcott",
        "Cornelius Dunmore",
        "Delphine Hargreave",
        "Evander Stillwater",
        "Felicity Brambleton",
        "Horatio Vexley",
        "Isadora Quimby",
        "Jasper Mallowfield",
        "Lavinia Crossthwaite",
        "Montgomery Ellery",
        "Perpetua Ashcombe",
        "Reginald Tamsworth",
    ],
];

const NOISE_BLACKLISTED: &[&str] = &[
    "Albert Einstein",
    "Isaac Newton",
    "Marie Curie",
    "Alan Turing",
    "Kurt Gödel",
    "Paul Erdős",
    "Elon Musk",
    "Donald Trump",
    "Bill Gates",
    "Puzzle Columnist",
    "Sleeping Beauty",
];

const NOISE_SPURIOUS: &[&str] = &[
    "Einstein",
    "Related",
    "Photograph",
    "Illustration",
    "Puzzle",
    "NASA",
    "—",
];

const ADJECTIVES: &[&str] = &[
    "Stunning",
    "Strange",
    "Surprising",
    "Beautiful",
    "Troubling",
    "Bold",
    "Elegant",
    "Dangerous",
    "Hopeful",
    "Mysterious",
    "Brilliant",
    "Failed",
    "Remarkable",
    "Controversial",
    "Simple",
];

const SUBJECTS: [&[&str]; 3] = [
    &[
        "Proof",
        "Conjecture",
        "Theorem",
        "Black Hole",
        "Prime Pattern",
        "Quantum Field",
        "Knot",
        "Symmetry",
        "Graph",
        "Algorithm",
    ],
    &[
        "Chatbot",
        "Robot",
        "Battery",
        "Chip",
        "Startup",
        "Smartphone",
        "Drone",
        "Network",
        "Headset",
        "Algorithm",
    ],
    &[
        "Vaccine",
        "Coral Reef",
        "Heatwave",
        "Fossil",
        "Virus",
        "Gene Therapy",
        "Telescope",
        "Glacier",
        "Diet",
        "Brain Scan",
    ],
];

const VERBS: &[&str] = &[
    "Solves",
    "Reveals",
    "Threatens",
    "Transforms",
    "Challenges",
    "Celebrates",
    "Destroys",
    "Improves",
    "Breaks",
    "Explains",
    "Fails",
    "Wins",
];

const OBJECTS: &[&str] = &[
    "an Old Problem",
    "the Future",
    "Decades of Doubt",
    "a Hidden Order",
    "the Status Quo",
    "Our Best Theory",
    "a Fierce Debate",
    "the Limits of Computing",
    "a Deadly Threat",
    "Everyday Life",
    "a Lost World",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub articles_per_outlet: usize,
    /// Distinct scientists available to each outlet.
    pub persons_per_outlet: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            articles_per_outlet: 500,
            persons_per_outlet: 300,
        }
    }
}

pub fn outlet_names() -> [&'static str; 3] {
    [CONCENTRATED_OUTLET, UNIFORM_OUTLETS[0], UNIFORM_OUTLETS[1]]
}

fn scientist_pool(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut all: Vec<String> = FIRST
        .iter()
        .flat_map(|f| LAST.iter().map(move |l| format!("{f} {l}")))
        .filter(|name| name != PLANTED_PERSON)
        .collect();
    let n = n.min(all.len());
    let (chosen, _) = rand::seq::SliceRandom::partial_shuffle(all.as_mut_slice(), rng, n);
    chosen.to_vec()
}

fn title(rng: &mut ChaCha8Rng, subjects: &[&str]) -> String {
    let adj = ADJECTIVES.choose(rng).unwrap();
    let subject = subjects.choose(rng).unwrap();
    let verb = VERBS.choose(rng).unwrap();
    let object = OBJECTS.choose(rng).unwrap();
    match rng.random_range(0..4) {
        0 => format!("{adj} {subject} {verb} {object}"),
        1 => format!("The {subject} That {verb} {object}"),
        2 => format!("Why a {adj} {subject} Matters"),
        _ => format!("{subject} {verb} {object}, and It's {adj}"),
    }
}

fn mention_count(rng: &mut ChaCha8Rng) -> u64 {
    1 + (rng.random::<f64>().powi(2) * 4.0) as u64
}

/// Builds the corpus. The same spec always yields the same articles.
pub fn generate(spec: FixtureSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start = NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date");
    let mut articles = Vec::new();

    for (o, outlet) in outlet_names().into_iter().enumerate() {
        let persons = scientist_pool(&mut rng, spec.persons_per_outlet);
        let journalists = JOURNALISTS[o];
        let zipf = Zipf::new(persons.len() as f64, 1.1).expect("valid Zipf parameters");

        for i in 0..spec.articles_per_outlet {
            let mut authors = vec![journalists.choose(&mut rng).unwrap().to_string()];
            if rng.random_bool(0.1) {
                let co = journalists.choose(&mut rng).unwrap().to_string();
                if co != authors[0] {
                    authors.push(co);
                }
            }

            let mut mentions: BTreeMap<String, u64> = BTreeMap::new();
            for _ in 0..rng.random_range(2..=6) {
                let idx = if outlet == CONCENTRATED_OUTLET {
                    zipf.sample(&mut rng) as usize - 1
                } else {
                    rng.random_range(0..persons.len())
                };
                let mut name = persons[idx].clone();
                if rng.random_bool(0.08) {
                    name = format!("By {name}");
                } else if rng.random_bool(0.05) {
                    name = format!("  {name}, ");
                }
                *mentions.entry(name).or_insert(0) += mention_count(&mut rng);
            }
            if rng.random_bool(0.2) {
                let noise = NOISE_BLACKLISTED.choose(&mut rng).unwrap();
                mentions.insert(noise.to_string(), rng.random_range(1..=3));
            }
            if rng.random_bool(0.15) {
                let noise = NOISE_SPURIOUS.choose(&mut rng).unwrap();
                mentions.insert(noise.to_string(), 1);
            }
            if rng.random_bool(0.05) {
                let colleague = journalists.choose(&mut rng).unwrap();
                mentions.insert(colleague.to_string(), 1);
            }
            if outlet == CONCENTRATED_OUTLET && authors[0] == journalists[0] && rng.random_bool(0.7) {
                mentions.insert(PLANTED_PERSON.to_string(), 3);
            }

            let date = start + Days::new(rng.random_range(0..4000));
            articles.push(Article {
                id: format!("{outlet}-{i:04}"),
                outlet: outlet.to_string(),
                title: title(&mut rng, SUBJECTS[o]),
                authors,
                date,
                mention_counts: mentions,
                url: Some(format!("https://example.org/{outlet}/{i:04}")),
            });
        }
    }
    Corpus::new(articles).expect("generated ids are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FixtureSpec {
        FixtureSpec {
            articles_per_outlet: 40,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        generate(small()).write_jsonl(&mut a).unwrap();
        generate(small()).write_jsonl(&mut b).unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        generate(FixtureSpec { seed: 1, ..small() })
            .write_jsonl(&mut c)
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn has_three_outlets() {
        let corpus = generate(small());
        assert_eq!(corpus.len(), 120);
        assert_eq!(corpus.outlets().len(), 3);
    }

    #[test]
    fn bylines_share_no_token_with_scientists() {
        let scientist_tokens: std::collections::BTreeSet<&str> = FIRST.iter().chain(LAST).copied().collect();
        for pool in JOURNALISTS {
            for name in pool {
                for tok in name.split([' ', '-']) {
                    assert!(!scientist_tokens.contains(tok), "{name}");
                }
            }
        }
    }
}
