//! The run-to-run simplex on an 8-D quadratic in log-parameters, with and
//! without 10% multiplicative noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use softland::r2r::{encode, NelderMeadConfig, SimplexState};

fn main() -> softland::Result<()> {
    let centre = [0.3, -0.25, 0.3, -0.25, 0.3, -0.25, 0.3, -0.25];
    let f = |x: &[f64]| x.iter().zip(&centre).map(|(a, c)| (a - c).powi(2)).sum::<f64>();
    for noise in [0.0, 0.1] {
        let mut state = SimplexState::new(&[1.0; 8], NelderMeadConfig::default())?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 1..=300 {
            let x = state.next_candidate()?;
            let z: f64 = rng.sample(StandardNormal);
            state.update(f(&x) * (1.0 + noise * z).max(0.0))?;
            if k % 50 == 0 {
                let (p, _) = state.best().expect("filled simplex");
                println!("noise {noise}: evaluation {k:3}, true cost of best vertex {:.3e}", f(&encode(&p)));
            }
        }
    }
    Ok(())
}
