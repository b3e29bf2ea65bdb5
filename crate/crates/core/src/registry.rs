//! Named strategy registry.
//!
//! Elbow rules, contrast formulas and intrinsic-dimension estimators are
//! interchangeable behind their traits and are looked up by name at run time
//! (from the CLI or a config file). [`StrategyRegistry::builtin`] carries the
//! stock implementations; callers may register their own.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::clustering::elbow::{ElbowRule, InsignificantDrop, MaxCurvature};
use crate::clustering::metrics::{
    ContrastEstimator, HalfMeanSqOverVariance, IntrinsicDimEstimator, MeanRatioContrast,
    MeanRelativeContrast, MeanSqOverVariance, QueryRelativeContrast,
};

pub const DEFAULT_ELBOW_RULE: &str = InsignificantDrop::NAME;
pub const DEFAULT_CONTRAST: &str = QueryRelativeContrast::NAME;
pub const DEFAULT_INTRINSIC: &str = MeanSqOverVariance::NAME;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {family} '{name}' (available: {})", available.join(", "))]
pub struct RegistryError {
    pub family: &'static str,
    pub name: String,
    pub available: Vec<String>,
}

#[derive(Debug)]
struct Family<T: ?Sized> {
    label: &'static str,
    entries: BTreeMap<String, Arc<T>>,
}

impl<T: ?Sized> Clone for Family<T> {
    fn clone(&self) -> Self {
        Self {
            label: self.label,
            entries: self.entries.clone(),
        }
    }
}

impl<T: ?Sized> Family<T> {
    fn new(label: &'static str) -> Self {
        Self {
            label,
            entries: BTreeMap::new(),
        }
    }

    fn insert(&mut self, name: &str, strategy: Arc<T>) {
        self.entries.insert(name.to_string(), strategy);
    }

    fn get(&self, name: &str) -> Result<Arc<T>, RegistryError> {
        self.entries
            .get(name.trim())
            .cloned()
            .ok_or_else(|| RegistryError {
                family: self.label,
                name: name.to_string(),
                available: self.names(),
            })
    }

    fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

#[derive(Debug, Clone)]
pub struct StrategyRegistry {
    elbow: Family<dyn ElbowRule>,
    contrast: Family<dyn ContrastEstimator>,
    intrinsic: Family<dyn IntrinsicDimEstimator>,
}

impl StrategyRegistry {
    /// A registry with nothing in it.
    pub fn empty() -> Self {
        Self {
            elbow: Family::new("elbow rule"),
            contrast: Family::new("contrast variant"),
            intrinsic: Family::new("intrinsic-dimension variant"),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register_elbow(Arc::new(InsignificantDrop::default()));
        r.register_elbow(Arc::new(MaxCurvature));
        r.register_contrast(Arc::new(QueryRelativeContrast));
        r.register_contrast(Arc::new(MeanRelativeContrast));
        r.register_contrast(Arc::new(MeanRatioContrast));
        r.register_intrinsic(Arc::new(MeanSqOverVariance));
        r.register_intrinsic(Arc::new(HalfMeanSqOverVariance));
        r
    }

    /// Registers under the strategy's own name, replacing any previous entry.
    pub fn register_elbow(&mut self, rule: Arc<dyn ElbowRule>) {
        self.elbow.insert(rule.name(), rule);
    }

    pub fn register_contrast(&mut self, estimator: Arc<dyn ContrastEstimator>) {
        self.contrast.insert(estimator.name(), estimator);
    }

    pub fn register_intrinsic(&mut self, estimator: Arc<dyn IntrinsicDimEstimator>) {
        self.intrinsic.insert(estimator.name(), estimator);
    }

    pub fn elbow(&self, name: &str) -> Result<Arc<dyn ElbowRule>, RegistryError> {
        self.elbow.get(name)
    }

    pub fn contrast(&self, name: &str) -> Result<Arc<dyn ContrastEstimator>, RegistryError> {
        self.contrast.get(name)
    }

    pub fn intrinsic(&self, name: &str) -> Result<Arc<dyn IntrinsicDimEstimator>, RegistryError> {
        self.intrinsic.get(name)
    }

    pub fn elbow_names(&self) -> Vec<String> {
        self.elbow.names()
    }

    pub fn contrast_names(&self) -> Vec<String> {
        self.contrast.names()
    }

    pub fn intrinsic_names(&self) -> Vec<String> {
        self.intrinsic.names()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{ClusterError, CurvePoint};

    #[test]
    fn builtin_names() {
        let r = StrategyRegistry::builtin();
        assert_eq!(r.elbow_names(), vec!["insignificant-drop", "max-curvature"]);
        assert_eq!(
            r.contrast_names(),
            vec!["mean-ratio", "mean-relative", "query-relative"]
        );
        assert_eq!(
            r.intrinsic_names(),
            vec!["half-mean-sq-over-var", "mean-sq-over-var"]
        );
        assert_eq!(
            r.elbow(DEFAULT_ELBOW_RULE).unwrap().name(),
            DEFAULT_ELBOW_RULE
        );
        assert_eq!(
            r.contrast(DEFAULT_CONTRAST).unwrap().name(),
            DEFAULT_CONTRAST
        );
        assert_eq!(
            r.intrinsic(DEFAULT_INTRINSIC).unwrap().name(),
            DEFAULT_INTRINSIC
        );
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let err = StrategyRegistry::builtin()
            .elbow("gap-statistic")
            .unwrap_err();
        assert_eq!(err.family, "elbow rule");
        assert!(err
            .to_string()
            .contains("insignificant-drop, max-curvature"));
    }

    #[derive(Debug)]
    struct AlwaysTwo;

    impl ElbowRule for AlwaysTwo {
        fn name(&self) -> &'static str {
            "always-two"
        }

        fn choose(&self, _curve: &[CurvePoint]) -> Result<usize, ClusterError> {
            Ok(2)
        }
    }

    #[test]
    fn custom_strategy_is_selectable() {
        let mut r = StrategyRegistry::builtin();
        r.register_elbow(Arc::new(AlwaysTwo));
        let points: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let cfg = crate::clustering::KMeansConfig::default().with_elbow_rule("always-two");
        let result = crate::clustering::kmeans_with(&points, &cfg, &r).unwrap();
        assert_eq!(result.chosen_k, 2);
        assert!(StrategyRegistry::empty().elbow(DEFAULT_ELBOW_RULE).is_err());
    }
}
