//! Screening used cars with the commitment mechanism.
//!
//! Owners of good cars play the role of real voters (they value the car at
//! `V`) and owners of bad cars that of decoy voters (value 0). The buyer
//! wants one good car, so the purchase target is 1.

use rand::Rng;

use crate::equilibrium::{EquilibriumReport, ScanOptions};
use crate::error::{Error, Result};
use crate::mechanism::ActionCount;
use crate::rational::Rational;

use super::commitment::{run_commitment_mechanism, verify_commitment_equilibrium, CommitmentGameSpec, CommitmentOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    Good,
    Bad,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemonsMarket {
    pub good: u32,
    pub bad: u32,
    pub value: Rational,
    pub epsilon: Rational,
}

impl LemonsMarket {
    fn game(&self) -> Result<CommitmentGameSpec> {
        if self.good < 1 {
            return Err(Error::Commitment("the market needs at least one good car".into()));
        }
        CommitmentGameSpec::new(self.good, 1, self.value, self.epsilon)
    }

    pub fn verify_equilibrium(&self, opts: &ScanOptions) -> Result<EquilibriumReport> {
        verify_commitment_equilibrium(&self.game()?, self.bad, opts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemonsOutcome {
    /// Quality of the car bought, if any.
    pub purchased: Option<Quality>,
    pub purchase_price: Option<Rational>,
    /// Bad-car owners paid `eps` for applying to `s2`.
    pub bad_sellers_paid: u32,
    pub expenditure: Rational,
    pub mechanism: CommitmentOutcome,
}

/// Equilibrium play: good cars apply for `s1`, bad cars for `s2`.
pub fn run_lemons<R: Rng + ?Sized>(market: &LemonsMarket, rng: &mut R) -> Result<LemonsOutcome> {
    run_lemons_with_deviators(market, 0, rng)
}

/// Like [`run_lemons`] with `bad_in_s1` bad-car owners applying for `s1`.
pub fn run_lemons_with_deviators<R: Rng + ?Sized>(market: &LemonsMarket, bad_in_s1: u32, rng: &mut R) -> Result<LemonsOutcome> {
    let game = market.game()?;
    if bad_in_s1 > market.bad {
        return Err(Error::Commitment(format!(
            "{bad_in_s1} deviators but only {} bad cars",
            market.bad
        )));
    }
    let sellers = ActionCount {
        real_s1: market.good,
        decoy_s1: bad_in_s1,
        decoy_s2: market.bad - bad_in_s1,
        ..ActionCount::default()
    };
    let out = run_commitment_mechanism(&game, &sellers, rng)?;
    let purchased = match (out.winners_real, out.winners_decoy) {
        (1, _) => Some(Quality::Good),
        (0, 1) => Some(Quality::Bad),
        _ => None,
    };
    let bad_sellers_paid = if out.s2_offer > Rational::from_integer(0) { sellers.decoy_s2 } else { 0 };
    Ok(LemonsOutcome {
        purchase_price: purchased.map(|_| out.s1_offer),
        purchased,
        bad_sellers_paid,
        expenditure: out.expenditure,
        mechanism: out,
    })
}
