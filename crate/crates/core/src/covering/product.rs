use crate::dyadic::Dyadic;

use super::CoveringError;

/// `{x : x_i < z_i for some i < n}` in a product of unit intervals;
/// coordinates from `n` on are unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProductOpenSet {
    thresholds: Vec<Dyadic>,
}

impl ProductOpenSet {
    /// Thresholds must lie in `[0, 1)`.
    pub fn new(thresholds: Vec<Dyadic>) -> Result<Self, CoveringError> {
        for (index, z) in thresholds.iter().enumerate() {
            if *z >= Dyadic::one() {
                return Err(CoveringError::OutOfRange {
                    index,
                    value: z.to_string(),
                });
            }
        }
        Ok(Self { thresholds })
    }

    pub fn from_series(a: &[Dyadic]) -> Result<Self, CoveringError> {
        if let Some((index, z)) = a.iter().enumerate().find(|(_, z)| z.is_zero()) {
            return Err(CoveringError::OutOfRange {
                index,
                value: z.to_string(),
            });
        }
        Self::new(a.to_vec())
    }

    pub fn thresholds(&self) -> &[Dyadic] {
        &self.thresholds
    }

    /// `∏(1 - z_i)`, the measure of the complement.
    pub fn complement_measure(&self) -> Dyadic {
        self.thresholds.iter().fold(Dyadic::one(), |acc, z| {
            &acc * &Dyadic::one().checked_sub(z).expect("thresholds below 1")
        })
    }

    pub fn measure(&self) -> Dyadic {
        Dyadic::one()
            .checked_sub(&self.complement_measure())
            .expect("complement measure at most 1")
    }

    /// For each coordinate, the supremum of `z` with
    /// `[0,1]^i × [0,z] × [0,1]^∞` inside the set. The other coordinates can
    /// always take the value 1 and escape their own thresholds, so this is
    /// the threshold itself.
    pub fn extract_series(&self) -> Vec<Dyadic> {
        self.thresholds.clone()
    }

    /// Whether `other ⊆ self`: every threshold of `other` is matched.
    pub fn includes(&self, other: &ProductOpenSet) -> bool {
        other
            .thresholds
            .iter()
            .enumerate()
            .all(|(i, a)| a.is_zero() || self.thresholds.get(i).is_some_and(|z| a <= z))
    }

    /// One dyadic per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CoveringError> {
        Self::new(parse_dyadics(text)?)
    }

    pub fn to_text(&self) -> String {
        self.thresholds.iter().map(|z| format!("{z}\n")).collect()
    }
}

/// One dyadic per line; `#` starts a comment.
pub fn parse_dyadics(text: &str) -> Result<Vec<Dyadic>, CoveringError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|_| CoveringError::Syntax {
            line: i + 1,
            message: format!("bad dyadic {line:?}"),
        })?);
    }
    Ok(out)
}

/// The open set `{x : x_i < a_i for some i}` of a series with terms in
/// `(0, 1)`.
pub fn series_to_open(a: &[Dyadic]) -> Result<ProductOpenSet, CoveringError> {
    ProductOpenSet::from_series(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn measures() {
        assert_eq!(series_to_open(&[d("1/2")]).unwrap().measure(), d("1/2"));
        assert_eq!(series_to_open(&[d("1/2"), d("1/2")]).unwrap().measure(), d("3/4"));
        assert!(series_to_open(&[d("1")]).is_err());
        assert!(series_to_open(&[d("0")]).is_err());
    }

    #[test]
    fn extraction() {
        let a = vec![d("1/2"), d("1/8"), d("3/16")];
        let v = series_to_open(&a).unwrap();
        assert_eq!(v.extract_series(), a);
        let bigger = ProductOpenSet::new(vec![d("3/4"), d("1/8"), d("1/4"), d("1/2")]).unwrap();
        assert!(bigger.includes(&v));
        assert!(!v.includes(&bigger));
        assert!(bigger.extract_series().iter().zip(&a).all(|(b, a)| b >= a));
        assert_eq!(ProductOpenSet::parse(&v.to_text()).unwrap(), v);
    }
}
