//! Seeded fixtures shared by the criterion benches.

use lpcloak::prelude::*;

/// A feasible bounded instance of size `n × ceil(n/2)` together with a
/// fresh key, its disguise, and the cloud's answer.
pub struct Fixture {
    pub problem: LpProblem,
    pub key: SecretKey,
    pub encrypted: EncryptedProblem,
    pub result: CloudResult,
}

impl Fixture {
    pub fn new(n: usize, seed: u64) -> Fixture {
        let problem = generate(&GenOptions::new(n, n.div_ceil(2), Mode::Feasible), seed)
            .expect("fixture generation");
        let key = keygen(&problem, seed).expect("fixture key");
        let encrypted = prob_enc(&key, &problem).expect("fixture encryption");
        let result = proof_gen(&encrypted, &Tolerance::default()).expect("fixture solve");
        Fixture {
            problem,
            key,
            encrypted,
            result,
        }
    }

    /// A key for the same problem that has not been used yet.
    pub fn fresh_key(&self) -> SecretKey {
        keygen(&self.problem, self.key.seed).expect("fixture key")
    }
}

pub const SIZES: [usize; 4] = [25, 50, 100, 200];
