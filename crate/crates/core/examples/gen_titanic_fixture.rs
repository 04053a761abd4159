//! Regenerates `data/titanic.csv`, the bundled passenger-manifest fixture.
//!
//! The real Titanic training set is not redistributable here, so the repo
//! ships a seeded synthetic stand-in with the same schema, 891 rows, matched
//! marginals, and the dependence structure the dataset is known for: sex is
//! the dominant survival factor (strongly against males), higher class and
//! young age help, fare is driven by class, embarkation port correlates with
//! class, and Age/Embarked carry the usual missingness.
//!
//! Run with: `cargo run -p causalweave --example gen_titanic_fixture`

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 4242;
const ROWS: usize = 891;

fn pick(rng: &mut ChaCha8Rng, options: &[(usize, f64)]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(value, p) in options {
        acc += p;
        if u < acc {
            return value;
        }
    }
    options.last().unwrap().0
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut csv = String::from("Pclass,Sex,Age,SibSp,Parch,Fare,Embarked,Survived\n");

    for row in 0..ROWS {
        // ticket class (1st/2nd/3rd)
        let class = pick(&mut rng, &[(1, 0.2424), (2, 0.2065), (3, 0.5511)]);

        let p_male = match class {
            1 => 0.54,
            2 => 0.62,
            _ => 0.72,
        };
        let male = rng.random::<f64>() < p_male;

        // age: a child mixture plus a class-dependent adult distribution
        let p_child = match class {
            1 => 0.06,
            2 => 0.12,
            _ => 0.16,
        };
        let is_child = rng.random::<f64>() < p_child;
        let age = if is_child {
            0.4 + rng.random::<f64>() * 11.6
        } else {
            let (mu, sd) = match class {
                1 => (40.0, 13.0),
                2 => (31.0, 12.0),
                _ => (26.0, 10.0),
            };
            (mu + sd * rng.sample::<f64, _>(StandardNormal)).clamp(14.0, 80.0)
        };

        let sibsp = if is_child {
            pick(
                &mut rng,
                &[(0, 0.30), (1, 0.30), (2, 0.20), (3, 0.10), (4, 0.05), (5, 0.03), (8, 0.02)],
            )
        } else {
            pick(
                &mut rng,
                &[(0, 0.65), (1, 0.22), (2, 0.04), (3, 0.048), (4, 0.025), (5, 0.012), (8, 0.005)],
            )
        };
        let parch = if is_child {
            pick(&mut rng, &[(0, 0.15), (1, 0.40), (2, 0.40), (3, 0.05)])
        } else {
            pick(
                &mut rng,
                &[(0, 0.81), (1, 0.10), (2, 0.07), (3, 0.01), (4, 0.005), (5, 0.004), (6, 0.001)],
            )
        };

        // fare: lognormal by class
        let (log_mu, log_sd) = match class {
            1 => (4.0, 0.65),
            2 => (3.0, 0.55),
            _ => (2.2, 0.50),
        };
        let fare = (log_mu + log_sd * rng.sample::<f64, _>(StandardNormal)).exp();

        // embarkation port, skewed by class
        let embarked = match class {
            1 => pick(&mut rng, &[(0, 0.40), (1, 0.01), (2, 0.59)]),
            2 => pick(&mut rng, &[(0, 0.09), (1, 0.04), (2, 0.87)]),
            _ => pick(&mut rng, &[(0, 0.14), (1, 0.15), (2, 0.71)]),
        };
        let embarked = ["C", "Q", "S"][embarked];

        // survival: logistic in sex, class, childhood, fare, family size
        let mut logit = -1.9;
        if !male {
            logit += 2.7;
        }
        logit += match class {
            1 => 1.7,
            2 => 0.9,
            _ => 0.0,
        };
        if age < 10.0 {
            logit += 3.0;
        }
        if sibsp >= 3 {
            // large families fared badly; children had the better odds of
            // being taken into a boat
            logit -= if age < 10.0 { 1.2 } else { 3.2 };
        }
        logit += 0.9 * ((fare + 1.0).ln() - 2.9);
        let p_survive = 1.0 / (1.0 + (-logit).exp());
        let survived = usize::from(rng.random::<f64>() < p_survive);

        // missingness: ~19.9% of ages, two embarkation ports
        let age_missing = rng.random::<f64>() < 0.199;
        let embarked_missing = row == 61 || row == 829;

        let age_field = if age_missing {
            String::new()
        } else {
            format!("{age:.1}")
        };
        let embarked_field = if embarked_missing { "" } else { embarked };
        let _ = writeln!(
            csv,
            "{class},{},{age_field},{sibsp},{parch},{fare:.2},{embarked_field},{survived}",
            if male { "male" } else { "female" },
        );
    }

    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/titanic.csv");
    std::fs::write(&out, csv).expect("write fixture");
    println!("wrote {} ({} rows)", out.display(), ROWS);
}
