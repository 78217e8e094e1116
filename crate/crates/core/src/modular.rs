//! Action of the modular group of large gauge transformations on the
//! truncated Fock space.
//!
//! The generator acts as a modified shift on the ladder operators
//! (b-modes down one step, c-modes up one step, with the zero modes
//! swapping species) and maps the vacuum to the unexcited state with one
//! pair. Signs are never tabulated: the image of a basis state is obtained
//! by rewriting its canonical operator string and reducing the rewritten
//! string against the image of the vacuum, so the fermionic algebra fixes
//! every sign.
//!
//! Under truncation the generator is a partial isometry: states whose
//! image leaves the mode window or the pair bound are masked out, and all
//! gauge-invariance checks quantify over the mask only.

use num_complex::Complex64;

use crate::fock::{BasisCatalog, FockState, LadderKind, ModeWindow};
use crate::op::{MatrixBuilder, OperatorMatrix};

/// Per-state applicability flags for the generator and its inverse.
#[derive(Debug, Clone)]
pub struct GaugeDomainMask {
    /// Image under the generator stays representable.
    pub forward: Vec<bool>,
    /// Image under the inverse generator stays representable.
    pub backward: Vec<bool>,
}

impl GaugeDomainMask {
    pub fn in_direction(&self, direction: i32) -> &[bool] {
        if direction >= 0 {
            &self.forward
        } else {
            &self.backward
        }
    }

    /// States masked in both directions.
    pub fn both(&self) -> Vec<bool> {
        self.forward.iter().zip(&self.backward).map(|(f, b)| *f && *b).collect()
    }
}

/// Image occupation sets under the generator (+1) or its inverse (-1),
/// computed on untruncated integer modes.
fn image_sets(direction: i32, state: &FockState) -> (Vec<i32>, Vec<i32>) {
    let f = state.fermions();
    let a = state.antifermions();
    let (mut nf, mut na): (Vec<i32>, Vec<i32>) = if direction > 0 {
        let mut nf: Vec<i32> = f.iter().filter(|&&m| m != 0).map(|&m| m - 1).collect();
        if !a.contains(&0) {
            nf.push(-1);
        }
        let mut na: Vec<i32> = a.iter().filter(|&&n| n != 0).map(|&n| n + 1).collect();
        if !f.contains(&0) {
            na.push(1);
        }
        (nf, na)
    } else {
        let mut nf: Vec<i32> = f.iter().filter(|&&m| m != -1).map(|&m| m + 1).collect();
        if !a.contains(&1) {
            nf.push(0);
        }
        let mut na: Vec<i32> = a.iter().filter(|&&n| n != 1).map(|&n| n - 1).collect();
        if !f.contains(&-1) {
            na.push(0);
        }
        (nf, na)
    };
    nf.sort_unstable();
    na.sort_unstable();
    (nf, na)
}

/// Rewrite one creation factor of the canonical string.
fn rewrite(direction: i32, kind: LadderKind, mode: i32) -> (LadderKind, i32) {
    match (direction > 0, kind) {
        (true, LadderKind::BDag) => {
            if mode == 0 {
                (LadderKind::C, 1)
            } else {
                (LadderKind::BDag, mode - 1)
            }
        }
        (true, LadderKind::CDag) => {
            if mode == 0 {
                (LadderKind::B, -1)
            } else {
                (LadderKind::CDag, mode + 1)
            }
        }
        (false, LadderKind::BDag) => {
            if mode == -1 {
                (LadderKind::C, 0)
            } else {
                (LadderKind::BDag, mode + 1)
            }
        }
        (false, LadderKind::CDag) => {
            if mode == 1 {
                (LadderKind::B, 0)
            } else {
                (LadderKind::CDag, mode - 1)
            }
        }
        _ => unreachable!("canonical strings contain creation operators only"),
    }
}

/// Apply the generator (direction +1) or its inverse (-1) to a basis state.
///
/// Returns `None` exactly when the image leaves the window or the pair
/// bound; the untruncated map is a bijection on basis states and never
/// annihilates.
pub fn gauge_apply(
    direction: i32,
    state: &FockState,
    window: &ModeWindow,
) -> Option<(i32, FockState)> {
    let (nf, na) = image_sets(direction, state);
    let lambda = window.lambda();
    if nf.iter().chain(na.iter()).any(|m| m.abs() > lambda) {
        return None;
    }
    if nf.len().max(na.len()) > window.max_pairs() {
        return None;
    }

    // sign from the fermionic algebra: rewrite the canonical string and
    // reduce it against the image of the vacuum
    let base = if direction > 0 {
        FockState::new(vec![-1], vec![1]).unwrap()
    } else {
        FockState::new(vec![0], vec![0]).unwrap()
    };
    let mut string: Vec<(LadderKind, i32)> = Vec::with_capacity(state.pair_count() * 2);
    for &m in state.fermions() {
        string.push(rewrite(direction, LadderKind::BDag, m));
    }
    for &n in state.antifermions() {
        string.push(rewrite(direction, LadderKind::CDag, n));
    }
    let (sign, image) = base
        .apply_string(&string)
        .expect("gauge image cannot annihilate: the untruncated action is a bijection");
    debug_assert_eq!(image.fermions(), nf.as_slice());
    debug_assert_eq!(image.antifermions(), na.as_slice());
    Some((sign, image))
}

/// Signed-permutation matrix of the generator (or inverse) on a catalog,
/// restricted to the mask of states whose image stays representable.
pub fn gauge_matrix(direction: i32, catalog: &BasisCatalog) -> (OperatorMatrix, GaugeDomainMask) {
    let dim = catalog.dim();
    let mut b = MatrixBuilder::new();
    for col in 0..dim {
        if let Some((sign, image)) = gauge_apply(direction, catalog.state(col), catalog.window()) {
            let row = catalog
                .index_of(&image)
                .expect("in-window zero-charge image must be in the catalog");
            b.push(row, col, Complex64::new(sign as f64, 0.0));
        }
    }
    (b.build(dim, dim), safe_subwindow(catalog, 1))
}

/// Mask of states on which `shifts` consecutive applications of the
/// generator (forward) or its inverse (backward) remain representable.
pub fn safe_subwindow(catalog: &BasisCatalog, shifts: usize) -> GaugeDomainMask {
    let window = catalog.window();
    let survives = |direction: i32, start: &FockState| -> bool {
        let mut state = start.clone();
        for _ in 0..shifts {
            match gauge_apply(direction, &state, window) {
                Some((_, next)) => state = next,
                None => return false,
            }
        }
        true
    };
    let forward = catalog.states().iter().map(|s| survives(1, s)).collect();
    let backward = catalog.states().iter().map(|s| survives(-1, s)).collect();
    GaugeDomainMask { forward, backward }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::unexcited_state;

    fn catalog(lambda: i32, max_pairs: usize) -> std::sync::Arc<BasisCatalog> {
        BasisCatalog::enumerate(ModeWindow::new(lambda, max_pairs).unwrap()).unwrap()
    }

    #[test]
    fn generator_on_vacuum() {
        let w = ModeWindow::new(2, 2).unwrap();
        let (sign, img) = gauge_apply(1, &FockState::vacuum(), &w).unwrap();
        assert_eq!(sign, 1);
        assert_eq!(&img, &unexcited_state(-1, &w).unwrap());
        let (sign, img) = gauge_apply(-1, &FockState::vacuum(), &w).unwrap();
        assert_eq!(sign, 1);
        assert_eq!(&img, &unexcited_state(1, &w).unwrap());
    }

    #[test]
    fn generator_on_two_pair_state() {
        // canonical form of the paper's example state b†_3 c†_2 b†_0 c†_1 |0>;
        // the image drops Q5 from 0 to -2
        let w = ModeWindow::new(3, 2).unwrap();
        let state = FockState::new(vec![0, 3], vec![1, 2]).unwrap();
        let (sign, img) = gauge_apply(1, &state, &w).unwrap();
        assert_eq!(img, FockState::new(vec![-1, 2], vec![2, 3]).unwrap());
        assert_eq!(sign, -1); // frozen from the operator-string reduction by hand
        assert_eq!(state.charge_q5(), 0);
        assert_eq!(img.charge_q5(), -2);
    }

    #[test]
    fn unexcited_ladder() {
        // the generator walks the unexcited states down with sign +1
        let w = ModeWindow::new(4, 4).unwrap();
        for p in -3..=4 {
            let state = unexcited_state(p, &w).unwrap();
            let (sign, img) = gauge_apply(1, &state, &w).unwrap();
            assert_eq!(sign, 1, "sign at P = {p}");
            assert_eq!(img, unexcited_state(p - 1, &w).unwrap());
        }
        for p in -4..=3 {
            let state = unexcited_state(p, &w).unwrap();
            let (sign, img) = gauge_apply(-1, &state, &w).unwrap();
            assert_eq!(sign, 1);
            assert_eq!(img, unexcited_state(p + 1, &w).unwrap());
        }
    }

    #[test]
    fn inverse_inverts() {
        let cat = catalog(3, 2);
        let w = cat.window();
        for st in cat.states() {
            if let Some((s1, img)) = gauge_apply(1, st, w) {
                if let Some((s2, back)) = gauge_apply(-1, &img, w) {
                    assert_eq!(&back, st);
                    assert_eq!(s1 * s2, 1);
                }
            }
        }
    }

    #[test]
    fn mask_matches_mode_conditions() {
        // +1 direction: b-modes in [-lambda+1, lambda], c-modes in
        // [-lambda, lambda-1], plus pair headroom when both zero modes are
        // absent
        let cat = catalog(3, 2);
        let mask = safe_subwindow(&cat, 1);
        for (i, st) in cat.states().iter().enumerate() {
            let modes_ok = st.fermions().iter().all(|&m| m >= -2)
                && st.antifermions().iter().all(|&n| n <= 2);
            let grows = !st.fermions().contains(&0) && !st.antifermions().contains(&0);
            let pairs_ok = st.pair_count() + usize::from(grows) <= 2;
            assert_eq!(mask.forward[i], modes_ok && pairs_ok, "state {:?}", st);
        }
        // a state with a b-mode at -3 is excluded from the forward mask
        let idx = cat
            .index_of(&FockState::new(vec![-3], vec![0]).unwrap())
            .unwrap();
        assert!(!mask.forward[idx]);
    }

    #[test]
    fn matrix_is_signed_permutation() {
        let cat = catalog(2, 2);
        let (g, mask) = gauge_matrix(1, &cat);
        let (ginv, _) = gauge_matrix(-1, &cat);
        // exactly one +-1 entry per masked column
        let mut per_col = vec![0usize; cat.dim()];
        for (_, c, v) in g.iter() {
            per_col[c] += 1;
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        for (c, &n) in per_col.iter().enumerate() {
            assert_eq!(n, usize::from(mask.forward[c]));
        }
        // inverse matrix is the transpose on mutually masked states
        let diff = ginv.sub(&g.adjoint());
        for (r, c, v) in diff.iter() {
            // discrepancies may only involve states clipped on one side
            if mask.forward[c] && mask.backward[r] && mask.backward[c] && mask.forward[r] {
                assert_eq!(v, Complex64::ZERO);
            }
        }
        // composition is the identity on doubly safe states
        let both = safe_subwindow(&cat, 1);
        let prod = ginv.matmul(&g);
        for (i, ok) in both.forward.iter().enumerate() {
            if *ok {
                assert_eq!(prod.get(i, i), Complex64::ONE);
            }
        }
    }

    #[test]
    fn axial_charge_shift() {
        // the generator lowers the axial charge by two: Q5 Γ = Γ (Q5 - 2)
        // on the forward mask, and Q5 Γ⁻¹ = Γ⁻¹ (Q5 + 2) on the backward one
        let cat = catalog(2, 2);
        let q5 = cat.charge_q5_matrix();
        let two = OperatorMatrix::identity(cat.dim()).scale(Complex64::new(2.0, 0.0));
        let (g, mask) = gauge_matrix(1, &cat);
        let diff = q5.matmul(&g).sub(&g.matmul(&q5.sub(&two)));
        for (_, c, v) in diff.iter() {
            if mask.forward[c] {
                assert_eq!(v, Complex64::ZERO);
            }
        }
        let (ginv, mask) = gauge_matrix(-1, &cat);
        let diff = q5.matmul(&ginv).sub(&ginv.matmul(&q5.add(&two)));
        for (_, c, v) in diff.iter() {
            if mask.backward[c] {
                assert_eq!(v, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn safe_subwindow_shrinks() {
        let cat = catalog(3, 3);
        let one = safe_subwindow(&cat, 1);
        let two = safe_subwindow(&cat, 2);
        for i in 0..cat.dim() {
            if two.forward[i] {
                assert!(one.forward[i]);
            }
        }
        let vac = cat.index_of(&FockState::vacuum()).unwrap();
        assert!(one.forward[vac] && one.backward[vac]);
    }
}
