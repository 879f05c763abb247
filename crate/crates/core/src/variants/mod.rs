//! Mechanisms built on top of the one-shot district menu: the sequential
//! weak menu, the single-pool mechanism that relies on strong commitment,
//! and its use as a screening device in a used-car (lemons) market.

pub mod commitment;
pub mod lemons;
pub mod sequential;

pub use commitment::{
    commitment_payoff, run_commitment_mechanism, verify_commitment_equilibrium, CommitmentGameSpec,
    CommitmentOutcome,
};
pub use lemons::{run_lemons, run_lemons_with_deviators, LemonsMarket, LemonsOutcome, Quality};
pub use sequential::{run_sequential, verify_subgame_perfect, RoundCheck, SequentialState, SubgamePerfectReport};
