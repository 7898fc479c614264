//! Generative investor-level models.
//!
//! All simulators are single sequential stochastic processes driven by one seeded
//! stream; the same parameters always yield the same log. Investors are registered as
//! `inv0 .. inv{M-1}` so that their ids match the investor indices used by the
//! brokerage maps, whether or not every investor ends up trading.

pub mod frequencies;
mod imitation;
mod network;
mod public_info;
mod splitting;

use rand::Rng;

pub use imitation::{simulate_imitation, ImitationParams};
pub use network::{build_preferential_attachment, degree_tail_exponent, SocialNetwork};
pub use public_info::{simulate_public_info, PublicInfoParams};
pub use splitting::{simulate_splitting, simulate_splitting_traced, Metaorder, SplittingModelParams};

use crate::event_model::Sign;

/// Investor label prefix used by every simulator.
pub const INVESTOR_PREFIX: &str = "inv";

/// Draws from the discrete Pareto law `P(V ≥ v) = (v_min / v)^tail` for integer `v ≥ v_min`.
pub fn discrete_pareto<R: Rng + ?Sized>(rng: &mut R, tail: f64, v_min: u64) -> u64 {
    // u in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let v = (v_min as f64 * u.powf(-1.0 / tail)).floor();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        (v as u64).max(v_min)
    }
}

pub fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> Sign {
    if rng.random::<bool>() {
        Sign::Buy
    } else {
        Sign::Sell
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn pareto_tail_matches_law() {
        let mut rng = seeded(7);
        let draws: Vec<u64> = (0..200_000).map(|_| discrete_pareto(&mut rng, 1.5, 2)).collect();
        assert!(draws.iter().all(|&v| v >= 2));
        for v in [2u64, 4, 10, 40] {
            let empirical = draws.iter().filter(|&&x| x >= v).count() as f64 / draws.len() as f64;
            let expected = (2.0 / v as f64).powf(1.5);
            let se = (expected * (1.0 - expected) / draws.len() as f64).sqrt();
            assert!(
                (empirical - expected).abs() < 4.0 * se + 1e-12,
                "v={v}: {empirical} vs {expected}"
            );
        }
    }
}
