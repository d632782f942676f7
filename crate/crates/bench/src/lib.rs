//! Shared fixtures for the benchmarks.

use balcone::arith::rat;
use balcone::{Game, Players, SetFunction};

/// m(N) = 3, pairs 2, singletons 0.
pub fn three_player_game() -> Game {
    let p = Players::letters(3).expect("valid player count");
    Game::new(SetFunction::from_fn(&p, |s| match s.len() {
        3 => rat(3),
        2 => rat(2),
        _ => rat(0),
    }))
    .expect("vanishes at the empty set")
}
