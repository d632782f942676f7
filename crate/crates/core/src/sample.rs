//! Seeded random games.
//!
//! All draws use [`ChaCha8Rng`], so a seed fixes the whole stream across
//! platforms. Values are small rationals: numerators in `[-20, 20]`,
//! denominators in `{1, 2, 3}`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{rat, ratio, Rat};
use crate::model::{Coalition, Game, Players, SetFunction};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational `p/q` with `p ∈ [-20, 20]`, `q ∈ {1, 2, 3}`.
pub fn small_rational(rng: &mut impl Rng) -> Rat {
    ratio(rng.gen_range(-20..=20), rng.gen_range(1..=3))
}

/// A nonnegative small rational.
pub fn small_nonnegative(rng: &mut impl Rng) -> Rat {
    ratio(rng.gen_range(0..=20), rng.gen_range(1..=3))
}

/// Independent small rationals on every nonempty coalition.
pub fn uniform_game(rng: &mut impl Rng, players: &Players) -> Game {
    Game::new(SetFunction::from_fn(players, |c| if c.is_empty() { rat(0) } else { small_rational(rng) }))
        .expect("zero at the empty coalition")
}

fn additive_vector(rng: &mut impl Rng, n: usize) -> Vec<Rat> {
    (0..n).map(|_| small_rational(rng)).collect()
}

/// Pointwise minimum of a few additive games; always totally balanced.
pub fn min_of_additive(rng: &mut impl Rng, players: &Players) -> Game {
    let count = rng.gen_range(1..=3);
    let xs: Vec<Vec<Rat>> = (0..count).map(|_| additive_vector(rng, players.len())).collect();
    Game::new(SetFunction::from_fn(players, |c| {
        xs.iter().map(|x| c.members().fold(rat(0), |acc, i| acc + &x[i])).min().expect("at least one additive game")
    }))
    .expect("additive games vanish at the empty coalition")
}

/// A nonnegative combination of unanimity games on coalitions of size at
/// least two, plus an additive game; always supermodular, hence exact.
pub fn supermodular_game(rng: &mut impl Rng, players: &Players) -> Game {
    let pool: Vec<Coalition> = players.coalitions().filter(|c| c.len() >= 2).collect();
    let terms = rng.gen_range(1..=3);
    let mut f = SetFunction::additive(players, &additive_vector(rng, players.len()));
    for _ in 0..terms {
        let a = *pool.choose(rng).expect("at least two players");
        let u = SetFunction::unanimity(players, a).scale(&small_nonnegative(rng));
        f = f.add(&u).expect("same players");
    }
    Game::new(f).expect("zero at the empty coalition")
}

/// A game from one of the structured families with one coalition value
/// perturbed, to land near the boundary of the cones.
pub fn perturbed_game(rng: &mut impl Rng, players: &Players) -> Game {
    let base = if rng.gen_bool(0.5) { supermodular_game(rng, players) } else { min_of_additive(rng, players) };
    let mut f = base.into_set_function();
    let pool: Vec<Coalition> = players.coalitions().filter(|c| !c.is_empty()).collect();
    let c = *pool.choose(rng).expect("nonempty player set");
    let v = f.value(c) + ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3));
    f.set(c, v);
    Game::new(f).expect("the empty coalition is untouched")
}

/// Mixture of uniform, totally balanced, exact, perturbed and anti-dual
/// games, so that every verdict branch is reached with fair frequency.
pub fn mixed_game(rng: &mut impl Rng, players: &Players) -> Game {
    match rng.gen_range(0..6) {
        0 => uniform_game(rng, players),
        1 => min_of_additive(rng, players),
        2 => min_of_additive(rng, players).anti_dual(),
        3 => supermodular_game(rng, players),
        4 => supermodular_game(rng, players).anti_dual(),
        _ => perturbed_game(rng, players),
    }
}

/// A nonnegative combination of modular functions and negated Dirac
/// functions of nonempty proper coalitions.
pub fn inner_cone_function(rng: &mut impl Rng, players: &Players) -> SetFunction {
    let full = players.grand();
    let pool: Vec<Coalition> = players.coalitions().filter(|c| !c.is_empty() && *c != full).collect();
    // Modular functions are spanned by the constant and the additive games,
    // each with either sign, so both signs of every generator are drawn.
    let mut f = SetFunction::constant(players, small_rational(rng));
    f = f.add(&SetFunction::additive(players, &additive_vector(rng, players.len()))).expect("same players");
    for _ in 0..rng.gen_range(0..=4) {
        let s = *pool.choose(rng).expect("at least two players");
        let d = SetFunction::dirac(players, s).scale(&-small_nonnegative(rng));
        f = f.add(&d).expect("same players");
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let p = Players::letters(4).unwrap();
        let a: Vec<Game> = (0..5).scan(rng(7), |r, _| Some(mixed_game(r, &p))).collect();
        let b: Vec<Game> = (0..5).scan(rng(7), |r, _| Some(mixed_game(r, &p))).collect();
        assert_eq!(a, b);
        let c: Vec<Game> = (0..5).scan(rng(8), |r, _| Some(mixed_game(r, &p))).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn values_stay_small() {
        let mut r = rng(1);
        for _ in 0..200 {
            let q = small_rational(&mut r);
            assert!(q.numer().magnitude() <= &20u32.into());
            assert!((1..=3).contains(&i64::try_from(q.denom().clone()).unwrap()));
        }
    }
}
