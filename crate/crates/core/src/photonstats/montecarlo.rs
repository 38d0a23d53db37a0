use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::tags::TimeTagRecord;
use crate::constants::{seconds_to_us, PS_PER_S, PS_PER_US};
use crate::dynamics::{steady_state, RateMatrix};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub tags: Vec<TimeTagRecord>,
    /// Number of state changes simulated.
    pub transitions: u64,
}

/// Photon stream from a stochastic trajectory of `r` (Gillespie algorithm).
///
/// The trajectory starts from a steady-state draw. Every radiative
/// transition emits a photon that lands on channel 0 or 1 with equal
/// probability.
pub fn monte_carlo_stream(r: &RateMatrix, duration: f64, seed: u64) -> Result<Vec<TimeTagRecord>> {
    Ok(monte_carlo_run(r, duration, seed)?.tags)
}

pub fn monte_carlo_run(r: &RateMatrix, duration: f64, seed: u64) -> Result<MonteCarloRun> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(invalid(format!("duration must be finite and >= 0, got {duration}")));
    }
    let n = r.dim();
    let m = r.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if duration == 0.0 {
        return Ok(MonteCarloRun { tags: Vec::new(), transitions: 0 });
    }

    // per source state: total escape rate and cumulative destination table
    let mut escape = vec![0.0; n];
    let mut table: Vec<Vec<(f64, usize, bool)>> = vec![Vec::new(); n];
    for from in 0..n {
        let mut acc = 0.0;
        for to in 0..n {
            let k = m[(to, from)];
            if to != from && k > 0.0 {
                acc += k;
                let radiative = r.radiative_edges().contains(&(to, from));
                table[from].push((acc, to, radiative));
            }
        }
        escape[from] = acc;
    }

    let x_ss = steady_state(r)?;
    let u: f64 = rng.random();
    let mut state = {
        let mut acc = 0.0;
        let mut pick = n - 1;
        for k in 0..n {
            acc += x_ss[k];
            if u < acc {
                pick = k;
                break;
            }
        }
        pick
    };

    let horizon = seconds_to_us(duration);
    let mut t = 0.0;
    let mut tags = Vec::new();
    let mut transitions = 0u64;
    loop {
        let q = escape[state];
        if q <= 0.0 {
            break;
        }
        t += Exp::new(q).expect("positive rate").sample(&mut rng);
        if t > horizon {
            break;
        }
        let pick = rng.random::<f64>() * q;
        let row = &table[state];
        let &(_, to, radiative) = row.iter().find(|e| pick < e.0).unwrap_or(&row[row.len() - 1]);
        if radiative {
            let channel = rng.random::<bool>() as u8;
            tags.push(TimeTagRecord { channel, timestamp: (t * PS_PER_US).round() as u64 });
        }
        state = to;
        transitions += 1;
    }
    Ok(MonteCarloRun { tags, transitions })
}

/// Two independent Poisson click streams (rates in Hz), merged in time order.
pub fn poisson_stream(rates: [f64; 2], duration: f64, seed: u64) -> Result<Vec<TimeTagRecord>> {
    if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) || !(duration >= 0.0 && duration.is_finite()) {
        return Err(invalid("rates must be > 0 and duration >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tags = Vec::new();
    for (c, &rate) in rates.iter().enumerate() {
        let exp = Exp::new(rate).expect("positive rate");
        let mut t = 0.0;
        loop {
            t += exp.sample(&mut rng);
            if t > duration {
                break;
            }
            tags.push(TimeTagRecord { channel: c as u8, timestamp: (t * PS_PER_S).round() as u64 });
        }
    }
    tags.sort_by_key(|r| (r.timestamp, r.channel));
    Ok(tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StateKind;
    use nalgebra::DMatrix;

    fn two_level() -> RateMatrix {
        let mut off = DMatrix::zeros(2, 2);
        off[(1, 0)] = 2.0;
        off[(0, 1)] = 3.0;
        RateMatrix::from_off_diagonal(
            off,
            vec!["GS".into(), "ES".into()],
            vec![StateKind::SingletGround, StateKind::SingletExcited],
            vec![(0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let r = two_level();
        let a = monte_carlo_stream(&r, 1e-3, 9).unwrap();
        let b = monte_carlo_stream(&r, 1e-3, 9).unwrap();
        let c = monte_carlo_stream(&r, 1e-3, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(monte_carlo_stream(&r, 0.0, 9).unwrap().is_empty());
    }

    #[test]
    fn photon_rate_matches_steady_pl() {
        // steady PL = 2*3/5 = 1.2 MHz
        let r = two_level();
        let run = monte_carlo_run(&r, 0.5, 3).unwrap();
        let n = run.tags.len() as f64;
        let expected = 1.2e6 * 0.5;
        // photon counts of a two-level system are sub-Poissonian; 3√N bounds
        assert!((n - expected).abs() < 3.0 * expected.sqrt(), "{n} vs {expected}");
        let ch1 = run.tags.iter().filter(|t| t.channel == 1).count() as f64;
        assert!((ch1 / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn poisson_counts() {
        let tags = poisson_stream([1e4, 2e4], 2.0, 1).unwrap();
        let n0 = tags.iter().filter(|t| t.channel == 0).count() as f64;
        assert!((n0 - 2e4).abs() < 5.0 * 2e4f64.sqrt());
        assert!(tags.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }
}
