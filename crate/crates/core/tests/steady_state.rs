use cavisteady::eom::EomOptions;
use cavisteady::oracle::{moment_from_density, steady_density};
use cavisteady::steady::{observable_seeds, solve_exact_for, solve_steady, SolutionVector};
use cavisteady::system::{assemble_closure, assemble_system, AssemblyOptions};
use cavisteady::{enumerate_canonical, validate_params, CorrelatorIndex, RawParams, SystemParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(raw: RawParams) -> SystemParams {
    validate_params(&raw).unwrap()
}

fn exact(p: &SystemParams) -> SolutionVector {
    solve_steady(&assemble_system(p, AssemblyOptions::default()).unwrap()).unwrap()
}

fn verbatim() -> AssemblyOptions {
    AssemblyOptions { eom: EomOptions { appendix_verbatim: true }, ..Default::default() }
}

/// Compares every moment of the hierarchy with the density matrix at the
/// same Fock cutoff.
fn max_moment_gap(p: &SystemParams, v: &SolutionVector, n_cut: usize) -> f64 {
    let rho = steady_density(p, n_cut).unwrap();
    let mut worst = 0.0f64;
    for idx in enumerate_canonical(p.n_cavities, p.n_max) {
        if idx.degree() > 2 {
            continue;
        }
        let pairs: Vec<(u8, u8)> = idx.pairs().iter().map(|q| (q.m, q.n)).collect();
        let z = moment_from_density(&rho, &pairs).unwrap();
        worst = worst.max((v.get(&idx).unwrap() - z).norm());
    }
    worst
}

#[test]
fn thermal_pump_and_detuning_agree_with_density_matrix() {
    // Incoherent pump, detuning and drive together; converged in both cutoffs.
    let p = params(RawParams {
        n_cavities: 2,
        n_max: 9,
        u: 1.5,
        j: 0.25,
        omega: 0.2,
        delta: 0.7,
        n_thermal: 0.15,
        ..Default::default()
    });
    let v = exact(&p);
    let gap = max_moment_gap(&p, &v, 9);
    assert!(gap < 1e-6, "gap {gap:e}");
}

#[test]
fn verbatim_diagonal_breaks_thermal_fixed_point() {
    let raw = RawParams { n_cavities: 2, n_max: 4, u: 2.0, j: 0.3, n_thermal: 0.3, ..Default::default() };
    let p = params(raw);
    let seeds = observable_seeds(&p);
    let corrected = solve_exact_for(&p, AssemblyOptions::default(), &seeds).unwrap();
    let n_a = corrected.single(1, 1).unwrap().re;
    assert!((n_a - 0.3).abs() < 1e-10);
    let plain = solve_exact_for(&p, verbatim(), &seeds).unwrap();
    let n_v = plain.single(1, 1).unwrap().re;
    assert!((n_v - 0.3).abs() > 1e-2, "verbatim n_a {n_v}");
}

#[test]
fn solutions_respect_conjugation_and_reality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        let p = params(RawParams {
            n_cavities: rng.gen_range(2..=4),
            n_max: 2,
            u: rng.gen_range(0.0..8.0),
            j: rng.gen_range(-0.5..0.5),
            omega: rng.gen_range(0.0..1.0),
            delta: rng.gen_range(-3.0..3.0),
            n_thermal: rng.gen_range(0.0..0.5),
            ..Default::default()
        });
        let v = exact(&p);
        assert!(v.conjugation_defect() < 1e-10);
        for (idx, z) in v.values() {
            if idx.is_diagonal() {
                assert!(z.im.abs() < 1e-10, "{idx:?} {z}");
            }
        }
        let n_a = v.single(1, 1).unwrap().re;
        assert!(n_a > 0.0);
        assert!(v.residual < 1e-10);
    }
}

#[test]
fn undriven_state_is_independent_of_tunneling() {
    let base = RawParams { n_cavities: 3, n_max: 3, u: 4.0, delta: 0.5, n_thermal: 0.4, ..Default::default() };
    let v0 = exact(&params(base.clone()));
    for j in [0.2, 0.7, -1.1] {
        let v = exact(&params(RawParams { j, ..base.clone() }));
        for (idx, z) in v.values() {
            assert!((v0.get(idx).unwrap() - z).norm() < 1e-10, "{idx:?}");
        }
    }
}

#[test]
fn closure_matches_full_system_on_sparse_path() {
    // 4 cavities at n_max = 3: 8280 unknowns, above the dense limit.
    let p = params(RawParams { n_cavities: 4, n_max: 3, u: 6.0, j: 0.2, omega: 0.4, n_thermal: 0.1, ..Default::default() });
    let full_sys = assemble_system(&p, AssemblyOptions::default()).unwrap();
    assert!(full_sys.dim() > 5000);
    let full = solve_steady(&full_sys).unwrap();
    assert!(full.residual < 1e-10);
    let seeds = observable_seeds(&p);
    let closure = assemble_closure(&p, AssemblyOptions::default(), &seeds).unwrap();
    assert!(closure.dim() <= full_sys.dim());
    let part = solve_steady(&closure).unwrap();
    for (idx, z) in part.values() {
        assert!((full.get(idx).unwrap() - z).norm() < 1e-10);
    }
}

#[test]
fn lone_cavity_coherent_state_without_kerr() {
    let omega = 0.35;
    let delta = -0.4;
    let p = params(RawParams { n_max: 5, omega, delta, ..Default::default() });
    let v = exact(&p);
    let alpha = Complex64::new(0.0, -omega) / Complex64::new(0.5, delta);
    for m in 0..=5u8 {
        for n in 0..=5u8 {
            let Some(idx) = CorrelatorIndex::single(1, m, n) else { continue };
            let expect = alpha.conj().powu(m as u32) * alpha.powu(n as u32);
            assert!((v.get(&idx).unwrap() - expect).norm() < 1e-12, "({m},{n})");
        }
    }
}
