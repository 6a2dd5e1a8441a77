use mtf_core::krylov::{gmres, precond_compare, CompareConfig, GmresConfig};
use mtf_core::linalg::{max_abs_diff, DenseMatrix};
use mtf_core::modal::*;
use mtf_core::scenarios::{all_scenarios, get_scenario, parse_custom};
use mtf_core::symbols::{MediaPair, Medium, PairSymbols};
use num_complex::Complex64;

fn teflon_lf() -> MediaPair {
    get_scenario("teflon-lf").unwrap().media
}

#[test]
fn operator_blocks_match_symbol_products() {
    let media = teflon_lf();
    let grid = ModalGrid::up_to(10).unwrap();
    let symbols = PairSymbols::new(media, 10).unwrap();
    let bmtf = build_operator(Variant::Bmtf, &media, grid, false).unwrap();
    let stf2 = build_operator(Variant::Stf2, &media, grid, false).unwrap();
    for n in grid.modes() {
        let s2 = symbols.stf(n).matmul(&symbols.stf(n));
        assert!(max_abs_diff(bmtf.block(n), &DenseMatrix::block_diag(&s2, &s2)) < 1e-10);
        assert!(max_abs_diff(stf2.block(n), &s2) == 0.0);
    }
    assert_eq!(stf2.dimension(), 40);
    assert_eq!(stf2.data_dimension(), 80);
}

#[test]
fn equal_media_mtf_blocks_square_to_two() {
    let media = MediaPair::homogeneous(Medium::from_physical(2.0, 1.5, 3.0).unwrap());
    let op = build_operator(Variant::Mtf, &media, ModalGrid::up_to(10).unwrap(), false).unwrap();
    for b in op.blocks() {
        assert!(max_abs_diff(&b.matmul(b), &DenseMatrix::identity(8).scale_real(2.0)) < 1e-10);
    }
}

#[test]
fn multiplicity_dimension() {
    let op = build_operator(Variant::Mtf, &teflon_lf(), ModalGrid::new(1, 3, true).unwrap(), false).unwrap();
    assert_eq!(op.dimension(), 120);
}

#[test]
fn scaling_constants() {
    let media = teflon_lf();
    assert_eq!(Variant::Mtf.normalization(&media), Some(std::f64::consts::FRAC_1_SQRT_2));
    assert_eq!(Variant::Mtf2.normalization(&media), Some(0.5));
    // Υ̲ = Υ_μ = 2 for Teflon.
    assert!((Variant::Bmtf.normalization(&media).unwrap() - 0.25).abs() < 1e-15);
    let grid = ModalGrid::up_to(3).unwrap();
    let raw = build_operator(Variant::Mtf2, &media, grid, false).unwrap();
    let scaled = build_operator(Variant::Mtf2, &media, grid, true).unwrap();
    assert!(max_abs_diff(&raw.block(2).scale_real(0.5), scaled.block(2)) == 0.0);
}

#[test]
fn norm_weighting_is_a_similarity() {
    let media = teflon_lf();
    let grid = ModalGrid::up_to(6).unwrap();
    let op = build_operator(Variant::Mtf, &media, grid, false).unwrap();
    let weighted = op.clone().norm_weighted();
    for n in grid.modes() {
        let a = mtf_core::linalg::eigenvalues(op.block(n)).unwrap();
        let b = mtf_core::linalg::eigenvalues(weighted.block(n)).unwrap();
        assert!(mtf_core::linalg::multisets_match(&a, &b, 1e-7));
    }
    // Solving the weighted system and unweighting recovers the plain solution.
    let data = synthetic_rhs(&media, &grid, RhsModel::Random, 3).unwrap();
    let config = GmresConfig {
        restart: 48,
        tol: 1e-12,
        max_iter: 200,
    };
    let plain = gmres(&op, &op.system_rhs(&data).unwrap(), &config).unwrap();
    let w = gmres(&weighted, &weighted.system_rhs(&data).unwrap(), &config).unwrap();
    let x = weighted.unweight_solution(&w.solution);
    let diff: f64 = x.iter().zip(&plain.solution).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn preconditioned_systems_share_the_solution() {
    let media = teflon_lf();
    let grid = ModalGrid::up_to(8).unwrap();
    let data = synthetic_rhs(&media, &grid, RhsModel::Random, 5).unwrap();
    let config = GmresConfig {
        restart: 64,
        tol: 1e-12,
        max_iter: 500,
    };
    let solve = |v: Variant| {
        let op = build_operator(v, &media, grid, true).unwrap();
        gmres(&op, &op.system_rhs(&data).unwrap(), &config).unwrap().solution
    };
    let reference = solve(Variant::Mtf);
    for v in [Variant::Mtf2, Variant::Bmtf, Variant::Amtf, Variant::Pi] {
        let x = solve(v);
        let diff: f64 = x.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{v}: {diff}");
    }
}

#[test]
fn spectrum_scan_teflon_lf() {
    let report = spectrum_scan(&teflon_lf(), Variant::Mtf, 150).unwrap();
    assert_eq!(report.modes.len(), 150);
    assert!(report.modes.iter().all(|m| m.eigenvalues.len() == 8));
    assert!(report.mode(150).unwrap().hausdorff.unwrap() <= 1e-2);
    let acc = report.accumulation.as_ref().unwrap();
    assert!(acc.points.iter().all(|z| z.norm() > std::f64::consts::SQRT_2 - 1e-15));
}

#[test]
fn min_modulus_shrinks_with_frequency() {
    for material in ["teflon", "ferrite"] {
        let m: Vec<f64> = ["lf", "hf", "vhf"]
            .iter()
            .map(|r| {
                let s = get_scenario(&format!("{material}-{r}")).unwrap();
                spectrum_scan(&s.media, Variant::Mtf, default_n_max(&s.media)).unwrap().min_modulus
            })
            .collect();
        assert!(m[0] > m[1] && m[1] > m[2], "{material}: {m:?}");
    }
}

#[test]
fn pairing_coupling_has_no_real_part() {
    let pairing = PairingMatrices::new();
    let media = teflon_lf();
    let form = pairing.form(&mtf_core::symbols::asymptotic_symbols(&media).mtf_inf);
    let coupling = pairing.form(&mtf_core::symbols::swap_matrix(4));
    let mut seed = 17u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for _ in 0..50 {
        let u: Vec<Complex64> = (0..8).map(|_| Complex64::new(next(), next())).collect();
        let quad = |x: &DenseMatrix| -> Complex64 {
            (0..8).flat_map(|i| (0..8).map(move |j| (i, j))).map(|(i, j)| u[i] * x[(i, j)] * u[j].conj()).sum()
        };
        assert!(quad(&coupling).re.abs() < 1e-12);
        // The full form is real positive on the diagonal part.
        assert!(quad(&form).re > 0.0);
    }
}

#[test]
fn coercivity_quotient_examples() {
    let media = teflon_lf();
    let q = coercivity_quotient(50, &media, true).unwrap();
    let ow = media.outer.omega;
    // Diagonal entries against the weights.
    let expected = [media.outer, media.inner]
        .iter()
        .flat_map(|m| {
            let (wm, we) = (ow * m.mu, ow * m.epsilon);
            let (n, n1) = (50.0, 51.0);
            [n / (wm * n1), we * n1 / n, n / (we * n1), wm * n1 / n]
        })
        .fold(f64::INFINITY, f64::min);
    assert!((q - expected).abs() < 1e-12);
    let rows = coercivity_scan(&media, 300).unwrap();
    assert!(rows.iter().all(|r| r.asymptotic > 0.0));
    let last = rows.last().unwrap();
    assert!(((last.exact - last.asymptotic) / last.asymptotic).abs() < 0.05);
    assert_eq!(coercivity_quotient(300, &media, false).unwrap(), last.exact);
}

#[test]
fn exact_norm_weights_match_d_tilde_in_modulus() {
    let w = exact_norm_weights(400).unwrap();
    for n in [100usize, 400] {
        let d = d_tilde(n, 2);
        assert!((w[n][0] / d[0] - 0.5).abs() < 0.01, "{:?}", w[n]);
        assert!((w[n][1] / d[1] - 0.5).abs() < 0.01, "{:?}", w[n]);
    }
}

#[test]
fn gmres_trend_on_teflon_lf() {
    let media = teflon_lf();
    let n_max = default_n_max(&media);
    let report = precond_compare(&media, n_max, &CompareConfig::default()).unwrap();
    let its: Vec<usize> = report.iter().map(|(_, r)| r.iterations).collect();
    assert!(report.iter().all(|(_, r)| r.converged && r.final_residual <= 1e-8));
    assert!(its[0] > its[1] && its[1] > its[2], "{its:?}");
    assert!(its[2] as f64 >= 0.8 * its[3] as f64, "{its:?}");
    for (_, r) in &report {
        assert!(r.max_gram_defect < 1e-8);
        assert!(r.max_residual_gap < 1e-10);
        assert_eq!(r.residual_history.len(), r.iterations + 1);
    }
    let again = precond_compare(&media, n_max, &CompareConfig::default()).unwrap();
    assert_eq!(its, again.iter().map(|(_, r)| r.iterations).collect::<Vec<_>>());
}

#[test]
fn equal_media_bmtf_converges_at_once() {
    let s = parse_custom("eps0=1\nmu0=1\neps1=1\nmu1=1\nkappa0=2\nkappa1=2").unwrap();
    let config = CompareConfig {
        variants: vec![Variant::Bmtf],
        ..CompareConfig::default()
    };
    let report = precond_compare(&s.media, 20, &config).unwrap();
    assert_eq!(report[0].1.iterations, 1);
    assert!(report[0].1.converged);
}

#[test]
fn injectivity_on_presets() {
    for s in all_scenarios() {
        let (_, sigma) = min_singular_value_scan(&s.media, 200).unwrap();
        assert!(sigma > 1e-6, "{}", s.name);
    }
}
