use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Returned by the taxonomy measure when both concepts share every ancestor.
pub const DEFAULT_BATET_CEILING: f64 = 10.0;

/// An acyclic is-a hierarchy.
#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    parents: BTreeMap<String, BTreeSet<String>>,
}

impl Taxonomy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_concept(&mut self, concept: &str) {
        self.parents.entry(concept.to_string()).or_default();
    }

    /// Records `child` is-a `parent`, adding both concepts if needed.
    pub fn add_is_a(&mut self, child: &str, parent: &str) -> Result<()> {
        let creates_cycle = child == parent
            || (self.parents.contains_key(parent) && self.ancestors(parent)?.contains(child));
        if creates_cycle {
            return Err(Error::CyclicTaxonomy {
                child: child.to_string(),
                parent: parent.to_string(),
            });
        }
        self.add_concept(parent);
        self.parents
            .entry(child.to_string())
            .or_default()
            .insert(parent.to_string());
        Ok(())
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.parents.contains_key(concept)
    }

    /// The concept itself plus every concept reachable through is-a links.
    pub fn ancestors(&self, concept: &str) -> Result<BTreeSet<String>> {
        if !self.contains(concept) {
            return Err(Error::UnknownConcept(concept.to_string()));
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![concept];
        while let Some(c) = stack.pop() {
            if seen.insert(c.to_string()) {
                if let Some(ps) = self.parents.get(c) {
                    stack.extend(ps.iter().map(String::as_str));
                }
            }
        }
        Ok(seen)
    }
}

/// `-log2((|T1 ∪ T2| - |T1 ∩ T2|) / |T1 ∪ T2|)` over two ancestor sets,
/// capped at `ceiling` (reached when the sets are equal).
pub fn batet_from_sets(t1: &BTreeSet<String>, t2: &BTreeSet<String>, ceiling: f64) -> f64 {
    let union = t1.union(t2).count();
    let shared = t1.intersection(t2).count();
    if union == 0 || union == shared {
        return ceiling;
    }
    let value = -((union - shared) as f64 / union as f64).log2();
    // -log2(1) is -0.0
    (value + 0.0).min(ceiling)
}

pub fn batet_similarity(c1: &str, c2: &str, taxonomy: &Taxonomy, ceiling: f64) -> Result<f64> {
    let t1 = taxonomy.ancestors(c1)?;
    let t2 = taxonomy.ancestors(c2)?;
    Ok(batet_from_sets(&t1, &t2, ceiling))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn closed_forms() {
        let v = batet_from_sets(&set(&["A", "B"]), &set(&["A", "C"]), DEFAULT_BATET_CEILING);
        assert!((v - 0.584963).abs() < 1e-6);
        let v = batet_from_sets(&set(&["A"]), &set(&["B"]), DEFAULT_BATET_CEILING);
        assert_eq!(v, 0.0);
        assert!(v.is_sign_positive());
        let v = batet_from_sets(&set(&["A", "B"]), &set(&["A", "B"]), DEFAULT_BATET_CEILING);
        assert_eq!(v, DEFAULT_BATET_CEILING);
        assert_eq!(batet_from_sets(&set(&["A"]), &set(&["A"]), 4.0), 4.0);
    }

    #[test]
    fn hierarchy() {
        let mut tax = Taxonomy::new();
        tax.add_is_a("B", "A").unwrap();
        tax.add_is_a("C", "A").unwrap();
        tax.add_is_a("D", "B").unwrap();
        assert_eq!(tax.ancestors("D").unwrap(), set(&["A", "B", "D"]));

        let v = batet_similarity("B", "C", &tax, DEFAULT_BATET_CEILING).unwrap();
        assert!((v - 0.584963).abs() < 1e-6);
        assert_eq!(batet_similarity("D", "D", &tax, DEFAULT_BATET_CEILING).unwrap(), 10.0);
        assert!(matches!(
            batet_similarity("B", "Z", &tax, DEFAULT_BATET_CEILING),
            Err(Error::UnknownConcept(_))
        ));
    }

    #[test]
    fn cycles_rejected() {
        let mut tax = Taxonomy::new();
        tax.add_is_a("B", "A").unwrap();
        tax.add_is_a("C", "B").unwrap();
        assert!(tax.add_is_a("A", "C").is_err());
        assert!(tax.add_is_a("A", "A").is_err());
        assert!(!tax.ancestors("A").unwrap().contains("C"));
    }
}
