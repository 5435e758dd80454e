//! The divergence-preserving P2 projection: flux preservation and Orlicz
//! stability ratios for random smooth fields.

use orlicz_core::fem::{projection_study, square_levels, BubbleTrigField};
use orlicz_core::young::parse_young;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> orlicz_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fields: Vec<BubbleTrigField> = (0..4).map(|_| BubbleTrigField::random(&mut rng, 3)).collect();
    let youngs = ["power:1.5", "power:3", "zygmund:1:1", "exp:1"].iter().map(|s| parse_young(s)).collect::<Result<Vec<_>, _>>()?;
    let study = projection_study(&square_levels(&[0.25, 0.125])?, &youngs, &fields)?;
    for r in &study.rows {
        println!("h {:.4} {:<14} ratio {:.5}", r.h, r.young, r.ratio);
    }
    println!("divergence defect {:.2e}, local ratios {:.4?}", study.divergence_defect, study.local);
    Ok(())
}
