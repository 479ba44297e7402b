//! Closure property of the factorization solver: targets composed from
//! random PPT factor pairs at dims (4, 2, 4) are recovered within budget in
//! at least 80% of seeded trials.

use pptsq_core::channel::{choi_of_map, compose, map_of_choi};
use pptsq_core::sampling::random_real_ppt_choi;
use pptsq_core::sqroot::{
    solve_factorization, ConstraintFlags, FactorizationMode, FactorizationProblem, SolverConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn roundtrip_recovery_rate_4_2_4() {
    let trials = 20;
    let mut hits = 0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + trial);
        let f1 = map_of_choi(&random_real_ppt_choi(4, 2, &mut rng), 4, 2).unwrap();
        let f2 = map_of_choi(&random_real_ppt_choi(2, 4, &mut rng), 2, 4).unwrap();
        let target = choi_of_map(&compose(&f2, &f1).unwrap());
        let problem =
            FactorizationProblem::new(target, (4, 2, 4), FactorizationMode::GeneralPair)
                .unwrap()
                .with_constraints(ConstraintFlags::ppt(), ConstraintFlags::ppt());
        let config = SolverConfig {
            restarts: 10,
            residual_tol: 1e-6,
            seed: 900 + trial,
            ..SolverConfig::default()
        };
        let solutions = solve_factorization(&problem, &config).unwrap();
        if solutions.iter().any(|s| s.residual <= 1e-6) {
            hits += 1;
        }
    }
    assert!(
        hits * 5 >= trials * 4,
        "recovered {hits}/{trials}, below the 80% closure bound"
    );
}
