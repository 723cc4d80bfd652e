use serde::Serialize;

use super::isometry::{is_isometric_with, IsometryVerdict};
use super::IsometryCertificate;
use crate::enumeration::Budget;
use crate::error::Result;
use crate::lattice::GramMatrix;

#[derive(Debug, Clone, Serialize)]
pub struct CertifiedPair {
    pub from: usize,
    pub to: usize,
    pub certificate: IsometryCertificate,
}

/// Partition of a family into isometry classes. Classes only merge on a
/// verified certificate; pairs the search could not decide are listed in
/// `inconclusive` and stay apart.
#[derive(Debug, Clone, Serialize)]
pub struct ClassPartition {
    pub classes: Vec<Vec<usize>>,
    pub certificates: Vec<CertifiedPair>,
    pub inconclusive: Vec<(usize, usize)>,
}

impl ClassPartition {
    pub fn class_of(&self, i: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&i))
    }
}

pub fn classify_family(forms: &[GramMatrix], budget: Budget, node_cap: u64) -> Result<ClassPartition> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut certificates = Vec::new();
    let mut inconclusive = Vec::new();
    for (i, g) in forms.iter().enumerate() {
        let mut placed = false;
        for class in classes.iter_mut() {
            let rep = class[0];
            match is_isometric_with(&forms[rep], g, budget, node_cap)? {
                IsometryVerdict::Isometric(certificate) => {
                    debug_assert!(certificate.verify(&forms[rep], g));
                    class.push(i);
                    certificates.push(CertifiedPair { from: rep, to: i, certificate });
                    placed = true;
                    break;
                }
                IsometryVerdict::NotIsometric(_) => {}
                IsometryVerdict::Inconclusive(_) => inconclusive.push((rep, i)),
            }
        }
        if !placed {
            classes.push(vec![i]);
        }
    }
    Ok(ClassPartition { classes, certificates, inconclusive })
}
