use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use twinbeam::amplifier::{
    distributed_cell_output, seeded_amplifier_output, tms_symplectic, AngularGainModel, CellModel, TwoModeSqueezerSpec,
};
use twinbeam::detection::{
    intensity_difference_db, intensity_difference_db_linearized, joint_homodyne_variance, joint_phase_scan, phase_grid,
    Combination, HomodyneSpec,
};
use twinbeam::entanglement::inseparability;
use twinbeam::gaussian::{
    apply_channel, apply_symplectic, loss_channel, photon_stats, quadrature_variance, GaussianState, ModeLabel,
    SymplecticOp,
};
use twinbeam::imaging::{
    amplify_image, lo_profile_from_mask, masked_seed, subregion_intensity_difference_db, GainMap, Mask, PixelGrid,
    RegionSelector,
};

fn modes3() -> Vec<ModeLabel> {
    vec![ModeLabel::probe(0), ModeLabel::conjugate(0), ModeLabel::probe(1)]
}

#[derive(Clone, Debug)]
enum Step {
    Squeeze(usize, usize, f64),
    Split(usize, usize, f64),
    Rotate(usize, f64),
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        (0..3usize, 0..3usize, 1.0..6.0f64).prop_map(|(a, b, g)| Step::Squeeze(a, b, g)),
        (0..3usize, 0..3usize, 0.0..1.0f64).prop_map(|(a, b, t)| Step::Split(a, b, t)),
        (0..3usize, -PI..PI).prop_map(|(a, th)| Step::Rotate(a, th)),
    ]
}

fn op_for(step: &Step) -> Option<SymplecticOp> {
    let m = modes3();
    match *step {
        Step::Squeeze(a, b, g) if a != b => Some(tms_symplectic(
            &TwoModeSqueezerSpec::new(g, m[a].clone(), m[b].clone()).unwrap(),
        )),
        Step::Split(a, b, t) if a != b => Some(SymplecticOp::beamsplitter(m[a].clone(), m[b].clone(), t).unwrap()),
        Step::Rotate(a, th) => Some(SymplecticOp::phase_rotation(m[a].clone(), th)),
        _ => None,
    }
}

/// Thermal product state with displacements, then a random circuit.
fn random_state() -> impl Strategy<Value = GaussianState> {
    (
        prop::collection::vec(0.0..2.0f64, 3),
        prop::collection::vec(-3.0..3.0f64, 6),
        prop::collection::vec(step(), 0..6),
    )
        .prop_map(|(thermal, mean, steps)| {
            let cov = DMatrix::from_diagonal(&DVector::from_iterator(
                6,
                thermal.iter().flat_map(|n| [n + 0.5, n + 0.5]),
            ));
            let mut s = GaussianState::new(modes3(), DVector::from_vec(mean), cov).unwrap();
            for st in &steps {
                if let Some(op) = op_for(st) {
                    s = apply_symplectic(&s, &op).unwrap();
                }
            }
            s
        })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn pair() -> (ModeLabel, ModeLabel) {
    (ModeLabel::probe(0), ModeLabel::conjugate(0))
}

/// `(x₁ − x₂)` and `(x₁ + x₂)` variances in two-mode vacuum units.
fn joint_x(state: &GaussianState) -> (f64, f64) {
    let minus = quadrature_variance(state, &[1.0, 0.0, -1.0, 0.0]).unwrap();
    let plus = quadrature_variance(state, &[1.0, 0.0, 1.0, 0.0]).unwrap();
    (minus, plus)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn library_ops_are_symplectic(steps in prop::collection::vec(step(), 1..8)) {
        let mut total = SymplecticOp::identity(modes3()).unwrap();
        for st in &steps {
            if let Some(op) = op_for(st) {
                let embedded = SymplecticOp::new(embed(&op), modes3()).unwrap();
                prop_assert!(op.symplectic_error() < 1e-10);
                total = total.then(&embedded).unwrap();
            }
        }
        prop_assert!(total.symplectic_error() < 1e-10 * total.matrix().amax().powi(2).max(1.0));
        prop_assert!((total.matrix().determinant() - 1.0).abs() < 1e-9 * total.matrix().amax().powi(6).max(1.0));
    }

    #[test]
    fn symplectic_maps_preserve_eigenvalues(state in random_state(), st in step()) {
        if let Some(op) = op_for(&st) {
            let out = apply_symplectic(&state, &op).unwrap();
            let (a, b) = (sorted(state.symplectic_eigenvalues()), sorted(out.symplectic_eigenvalues()));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9 * x.max(1.0), "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn loss_stays_physical(state in random_state(), eta in 0.0..=1.0f64, k in 0..3usize) {
        let ch = loss_channel(eta, vec![modes3()[k].clone()]).unwrap();
        let out = apply_channel(&state, &ch).unwrap();
        prop_assert!(out.symplectic_eigenvalues().iter().all(|&nu| nu >= 0.5 - 1e-9));
    }

    #[test]
    fn quadrature_variance_ignores_storage_order(
        state in random_state(),
        coeffs in prop::collection::vec(-2.0..2.0f64, 6),
        perm in Just([0usize, 1, 2]).prop_shuffle(),
    ) {
        let labels = modes3();
        let order: Vec<ModeLabel> = perm.iter().map(|&k| labels[k].clone()).collect();
        let shuffled = state.reduced(&order).unwrap();
        let moved: Vec<f64> = perm.iter().flat_map(|&k| [coeffs[2 * k], coeffs[2 * k + 1]]).collect();
        let a = quadrature_variance(&state, &coeffs).unwrap();
        let b = quadrature_variance(&shuffled, &moved).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn tms_purity_product(g in 1.0..20.0f64, t in 0.05..0.999f64) {
        let s = seeded_amplifier_output(g, 0.0, 0.0).unwrap();
        let (m, p) = joint_x(&s);
        prop_assert!((m * p - 1.0).abs() < 1e-9 * g);
        let lossy = apply_channel(&s, &loss_channel(t, vec![ModeLabel::probe(0)]).unwrap()).unwrap();
        let (m, p) = joint_x(&lossy);
        prop_assert!(m * p > 1.0 + 1e-12);
    }

    #[test]
    fn twin_beam_law(g in 1.0..6.0f64, log_alpha2 in 4.0..6.0f64) {
        let alpha2 = 10f64.powf(log_alpha2);
        let s = seeded_amplifier_output(g, (2.0 * alpha2).sqrt(), 0.0).unwrap();
        let (p, c) = pair();
        let st = photon_stats(&s, &[p, c]).unwrap();
        let var = st.covariance[(0, 0)] + st.covariance[(1, 1)] - 2.0 * st.covariance[(0, 1)];
        let ratio = var / (st.means[0] + st.means[1]);
        let law = 1.0 / (2.0 * g - 1.0);
        prop_assert!(((ratio - law) / law).abs() < 1e-2);
    }

    #[test]
    fn lossless_cell_equals_single_squeezer(g in 1.0..10.0f64, n in 1usize..32, x in -5.0..5.0f64, q in -5.0..5.0f64) {
        let cell = distributed_cell_output(&CellModel::lossless(n, g).unwrap(), x, q).unwrap();
        let direct = seeded_amplifier_output(g, x, q).unwrap();
        prop_assert!((cell.cov() - direct.cov()).amax() < 1e-10 * g);
        prop_assert!((cell.mean() - direct.mean()).amax() < 1e-10 * g);
    }

    #[test]
    fn angular_gain_peaks_at_center(g0 in 1.0..10.0f64, c in 0.0..20.0f64, w in 0.5..20.0f64, theta in -50.0..50.0f64) {
        let m = AngularGainModel::new(g0, c, w, 1.0).unwrap();
        let v = m.gain_at(theta);
        prop_assert!(v >= 1.0 && v <= m.gain_at(c));
        if (theta - c).abs() > 1e-6 && g0 > 1.0 {
            prop_assert!(v < m.gain_at(c));
        }
        // continuity
        prop_assert!((m.gain_at(theta + 1e-9) - v).abs() < 1e-6 * g0);
    }

    #[test]
    fn phase_scan_structure(g in 1.0..8.0f64) {
        let s = seeded_amplifier_output(g, 0.0, 0.0).unwrap();
        let spec = HomodyneSpec::single_pixel(0.0, 1.0).unwrap();
        let phases = phase_grid(64);
        let (diff, sum) = joint_phase_scan(&s, &spec, &spec, &phases).unwrap();
        let (d, u) = (diff.values_db(), sum.values_db());
        for k in 0..32 {
            prop_assert!((d[k] - d[k + 32]).abs() < 1e-9);
            prop_assert!((d[k] - u[(k + 16) % 64]).abs() < 1e-9);
        }
        let r = g.sqrt().acosh();
        let expected = twinbeam::detection::to_db((-2.0 * r).exp());
        prop_assert!((diff.min().unwrap().1 - expected).abs() < 1e-9);
        prop_assert!((sum.min().unwrap().1 - expected).abs() < 1e-9);
        let (x_min, _) = diff.min().unwrap();
        let (x_max, _) = sum.max().unwrap();
        prop_assert!(((x_min - x_max).rem_euclid(PI)).min(PI - (x_min - x_max).rem_euclid(PI)) < 1e-9);
    }

    #[test]
    fn efficiency_floor(state in random_state(), eta in 0.0..=1.0f64, theta in -PI..PI) {
        let ideal = HomodyneSpec::single_pixel(0.0, 1.0).unwrap();
        let lossy = ideal.with_efficiency(eta).unwrap();
        let two = state.reduced(&[ModeLabel::probe(0), ModeLabel::conjugate(0)]).unwrap();
        for comb in [Combination::Difference, Combination::Sum] {
            let v = joint_homodyne_variance(&two, &ideal, &ideal, theta, comb).unwrap();
            let m = joint_homodyne_variance(&two, &lossy, &lossy, theta, comb).unwrap();
            prop_assert!((m - (eta * v + 1.0 - eta)).abs() < 1e-9 * v.max(1.0));
            prop_assert!(m >= 1.0 - eta - 1e-12);
        }
    }

    #[test]
    fn exact_and_linearized_intensity_agree(g in 1.0..6.0f64, phase in -PI..PI) {
        let a = (2e4f64).sqrt();
        let s = seeded_amplifier_output(g, a * phase.cos(), a * phase.sin()).unwrap();
        let (p, c) = pair();
        let exact = intensity_difference_db(&s, std::slice::from_ref(&p), std::slice::from_ref(&c)).unwrap();
        let lin = intensity_difference_db_linearized(&s, &[p], &[c]).unwrap();
        prop_assert!((exact - lin).abs() < 0.05);
    }

    #[test]
    fn inseparability_bounds(state in random_state(), eta in 0.0..=1.0f64) {
        let two = state.reduced(&[ModeLabel::probe(0), ModeLabel::conjugate(0)]).unwrap();
        let spec = HomodyneSpec::single_pixel(0.0, eta).unwrap();
        let rep = inseparability(&two, &spec, &spec, true).unwrap();
        prop_assert!(rep.inseparability >= 2.0 * (1.0 - eta) - 1e-9);
    }

    #[test]
    fn product_states_are_separable(
        n in prop::collection::vec(0.0..2.0f64, 2),
        th in prop::collection::vec(-PI..PI, 2),
        sq in prop::collection::vec(1.0..4.0f64, 2),
        eta in 0.0..=1.0f64,
    ) {
        // Single-mode squeezed thermal states, no correlations between modes.
        let mut cov = DMatrix::zeros(4, 4);
        for k in 0..2 {
            let (c, s) = (th[k].cos(), th[k].sin());
            let rot = nalgebra::Matrix2::new(c, -s, s, c);
            let d = nalgebra::Matrix2::new((n[k] + 0.5) * sq[k], 0.0, 0.0, (n[k] + 0.5) / sq[k]);
            cov.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&(rot * d * rot.transpose()));
        }
        let (p, c) = pair();
        let s = GaussianState::new(vec![p, c], DVector::zeros(4), cov).unwrap();
        let spec = HomodyneSpec::single_pixel(0.0, eta).unwrap();
        let rep = inseparability(&s, &spec, &spec, true).unwrap();
        prop_assert!(rep.inseparability >= 2.0 - 1e-9, "{}", rep.inseparability);
    }

    #[test]
    fn optimized_inseparability_ignores_common_lo_phase(g in 1.0..10.0f64, phi in -PI..PI) {
        let s = seeded_amplifier_output(g, 0.0, 0.0).unwrap();
        let spec = HomodyneSpec::single_pixel(0.0, 0.8).unwrap();
        let turned = spec.with_phase(phi).unwrap();
        let a = inseparability(&s, &spec, &spec, true).unwrap().inseparability;
        let b = inseparability(&s, &turned, &turned, true).unwrap().inseparability;
        prop_assert!((a - b).abs() < 1e-9);
    }
}

/// Embeds a two- or one-mode op into the three-mode register.
fn embed(op: &SymplecticOp) -> DMatrix<f64> {
    let all = modes3();
    let idx: Vec<usize> = op
        .target_modes()
        .iter()
        .flat_map(|l| {
            let m = all.iter().position(|x| x == l).unwrap();
            [2 * m, 2 * m + 1]
        })
        .collect();
    let mut s = DMatrix::identity(6, 6);
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            s[(i, j)] = op.matrix()[(r, c)];
        }
    }
    s
}

fn image_grid() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=12, 1usize..=12)
}

fn selector(grid: PixelGrid, bits: &[bool]) -> RegionSelector {
    RegionSelector::new(grid, bits.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn image_state_has_no_cross_talk(
        (w, h) in (1usize..=6, 1usize..=6),
        t in prop::collection::vec(0.0..=1.0f64, 36),
        g in 1.0..5.0f64,
    ) {
        let grid = PixelGrid::new(w, h, 0.5).unwrap();
        let mask = Mask::new(grid, t[..w * h].to_vec()).unwrap();
        let state = amplify_image(&masked_seed(grid, &mask, 4.0).unwrap(), &GainMap::Uniform(g)).unwrap();
        let dense = state.to_gaussian_state().unwrap();
        for r in 0..dense.cov().nrows() {
            for c in 0..dense.cov().ncols() {
                if r / 4 != c / 4 {
                    prop_assert!(dense.cov()[(r, c)].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn matched_regions_share_squeezing(
        (w, h) in image_grid(),
        bits in prop::collection::vec(any::<bool>(), 144),
        g in 1.0..6.0f64,
    ) {
        let grid = PixelGrid::new(w, h, 0.5).unwrap();
        let n = w * h;
        let mut included = bits[..n].to_vec();
        included[0] = true;
        let uniform = Mask::new(grid, vec![1.0; n]).unwrap();
        let state = amplify_image(&masked_seed(grid, &uniform, 100.0).unwrap(), &GainMap::Uniform(g)).unwrap();
        let region = selector(grid, &included);
        let whole = RegionSelector::all(grid);
        let a = subregion_intensity_difference_db(&state, &region, &region).unwrap();
        let b = subregion_intensity_difference_db(&state, &whole, &whole).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn mismatched_regions_exceed_sql(
        (w, h) in (2usize..=12, 1usize..=12),
        g in 1.0..6.0f64,
    ) {
        // Left and right halves of a uniform image: disjoint, equal power.
        let grid = PixelGrid::new(w, h, 0.5).unwrap();
        let half = w / 2;
        let left: Vec<bool> = (0..w * h).map(|k| k % w < half).collect();
        let right: Vec<bool> = (0..w * h).map(|k| k % w >= w - half).collect();
        let uniform = Mask::new(grid, vec![1.0; w * h]).unwrap();
        let state = amplify_image(&masked_seed(grid, &uniform, 100.0).unwrap(), &GainMap::Uniform(g)).unwrap();
        let db = subregion_intensity_difference_db(&state, &selector(grid, &left), &selector(grid, &right)).unwrap();
        if g == 1.0 {
            prop_assert!(db.abs() < 1e-9);
        } else {
            prop_assert!(db > 0.0);
        }
    }

    #[test]
    fn lo_shape_does_not_matter(
        (w, h) in image_grid(),
        weights in prop::collection::vec(0.0..=1.0f64, 144),
        g in 1.0..6.0f64,
        eta in 0.1..=1.0f64,
    ) {
        let grid = PixelGrid::new(w, h, 0.5).unwrap();
        let n = w * h;
        let mut t = weights[..n].to_vec();
        t[0] = t[0].max(0.1);
        let state = amplify_image(
            &masked_seed(grid, &Mask::new(grid, vec![1.0; n]).unwrap(), 10.0).unwrap(),
            &GainMap::Uniform(g),
        )
        .unwrap();
        let shaped = lo_profile_from_mask(&Mask::new(grid, t).unwrap(), 0.0, eta).unwrap();
        let flat = lo_profile_from_mask(&Mask::new(grid, vec![1.0; n]).unwrap(), 0.0, eta).unwrap();
        let a = inseparability(&state, &shaped, &shaped, true).unwrap().inseparability;
        let b = inseparability(&state, &flat, &flat, true).unwrap().inseparability;
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn lossless_tms_inseparability_closed_form() {
    let spec = HomodyneSpec::single_pixel(0.0, 1.0).unwrap();
    for g in [1.0f64, 1.5, 2.0, 4.0, 10.0] {
        let s = seeded_amplifier_output(g, 0.0, 0.0).unwrap();
        let i = inseparability(&s, &spec, &spec, true).unwrap().inseparability;
        let expected = 2.0 * (g.sqrt() - (g - 1.0).sqrt()).powi(2);
        assert!((i - expected).abs() < 1e-10, "G={g}: {i} vs {expected}");
    }
}

#[test]
fn diff_at_zero_is_x_minus() {
    let s = seeded_amplifier_output(3.0, 0.0, 0.0).unwrap();
    let spec = HomodyneSpec::single_pixel(0.0, 1.0).unwrap();
    let (m, _) = joint_x(&s);
    let d = joint_homodyne_variance(&s, &spec, &spec, 0.0, Combination::Difference).unwrap();
    let p = joint_homodyne_variance(&s, &spec, &spec, FRAC_PI_2, Combination::Sum).unwrap();
    assert!((d - m).abs() < 1e-12);
    assert!((p - m).abs() < 1e-12);
}
