use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::rational::int;

/// Tropical normal form `t ↦ degree * t + translation` of a self-map of the
/// logarithmic torus. `kernel_order` is `|degree|`; zero marks the stratum of
/// constant maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelfMapNormalForm {
    pub degree: i64,
    pub translation: AffineExpr,
    pub kernel_order: u64,
}

pub fn classify_self_map(degree: i64, translation: AffineExpr) -> SelfMapNormalForm {
    SelfMapNormalForm { degree, translation, kernel_order: degree.unsigned_abs() }
}

impl SelfMapNormalForm {
    pub fn identity() -> Self {
        classify_self_map(1, AffineExpr::zero())
    }

    pub fn is_constant(&self) -> bool {
        self.degree == 0
    }

    /// `self ∘ inner`: `t ↦ r(s t + b) + a`.
    pub fn compose(&self, inner: &SelfMapNormalForm) -> SelfMapNormalForm {
        classify_self_map(
            self.degree * inner.degree,
            &self.translation + &inner.translation.scale(&int(self.degree)),
        )
    }

    pub fn apply(&self, t: &AffineExpr) -> AffineExpr {
        &t.scale(&int(self.degree)) + &self.translation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_constant() {
        let id = classify_self_map(1, 0.into());
        assert_eq!(id, SelfMapNormalForm::identity());
        assert_eq!(id.kernel_order, 1);
        let constant = classify_self_map(0, 5.into());
        assert_eq!(constant.kernel_order, 0);
        assert!(constant.is_constant());
        assert_eq!(classify_self_map(-3, 0.into()).kernel_order, 3);
    }

    #[test]
    fn composition_substitutes() {
        let f = classify_self_map(2, 1.into());
        let g = classify_self_map(3, 4.into());
        let fg = f.compose(&g);
        assert_eq!((fg.degree, fg.translation.clone()), (6, AffineExpr::from(9)));
        let t = AffineExpr::var("t");
        assert_eq!(fg.apply(&t), f.apply(&g.apply(&t)));
    }

    #[test]
    fn symbolic_translation() {
        let f = classify_self_map(2, AffineExpr::var("a"));
        let g = classify_self_map(-1, AffineExpr::var("b"));
        assert_eq!(f.compose(&g).translation, "a + 2*b".parse().unwrap());
    }
}
