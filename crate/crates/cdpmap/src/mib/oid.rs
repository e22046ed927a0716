//! Object identifiers and their ordering.

use std::fmt;
use std::str::FromStr;

use super::MibError;

/// A MIB object identifier: a sequence of non-negative integer arcs.
///
/// Ordering is lexicographic over the arc sequence, so a shorter OID that is
/// a prefix of a longer one sorts first. This is the order SNMP agents hand
/// back varbinds in, and the order every table decoder here relies on.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Oid {
    arcs: Vec<u32>,
}

impl Oid {
    /// Builds an OID from raw arcs, enforcing the X.690 root constraints:
    /// at least two arcs, first arc at most 2, second arc at most 39 when
    /// the first is 0 or 1.
    pub fn new(arcs: Vec<u32>) -> Result<Self, MibError> {
        if arcs.len() < 2 {
            return Err(MibError::InvalidOid {
                reason: format!("need at least 2 arcs, got {}", arcs.len()),
            });
        }
        if arcs[0] > 2 {
            return Err(MibError::InvalidOid {
                reason: format!("first arc must be <= 2, got {}", arcs[0]),
            });
        }
        if arcs[0] < 2 && arcs[1] > 39 {
            return Err(MibError::InvalidOid {
                reason: format!("second arc must be <= 39 under root {}, got {}", arcs[0], arcs[1]),
            });
        }
        Ok(Self { arcs })
    }

    pub fn arcs(&self) -> &[u32] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// True when `prefix` is a proper or improper prefix of `self`.
    pub fn starts_with(&self, prefix: &Oid) -> bool {
        self.arcs.len() >= prefix.arcs.len() && self.arcs[..prefix.arcs.len()] == prefix.arcs[..]
    }

    /// True when `self` lies strictly inside the subtree rooted at `base`.
    pub fn is_under(&self, base: &Oid) -> bool {
        self.arcs.len() > base.arcs.len() && self.starts_with(base)
    }

    /// New OID with one arc appended. Appending to a valid OID keeps it valid.
    pub fn child(&self, arc: u32) -> Oid {
        let mut arcs = self.arcs.clone();
        arcs.push(arc);
        Oid { arcs }
    }

    /// New OID with several arcs appended.
    pub fn extend(&self, tail: &[u32]) -> Oid {
        let mut arcs = self.arcs.clone();
        arcs.extend_from_slice(tail);
        Oid { arcs }
    }

    /// The arcs of `self` that follow `base`, if `self` is inside that subtree.
    pub fn suffix_of(&self, base: &Oid) -> Option<&[u32]> {
        if self.is_under(base) {
            Some(&self.arcs[base.arcs.len()..])
        } else {
            None
        }
    }
}

/// Parses dotted-decimal text (`"1.3.6.1"`) into an [`Oid`].
///
/// Malformed arcs are reported by 1-based position, so `"1..3"` fails at
/// arc 2 and a leading dot fails at arc 1.
pub fn parse_oid(text: &str) -> Result<Oid, MibError> {
    if text.is_empty() {
        return Err(MibError::OidParse {
            position: 1,
            reason: "empty string".to_string(),
        });
    }
    let mut arcs = Vec::new();
    for (i, part) in text.split('.').enumerate() {
        if part.is_empty() {
            return Err(MibError::OidParse {
                position: i + 1,
                reason: "empty arc".to_string(),
            });
        }
        let arc = part.parse::<u32>().map_err(|_| MibError::OidParse {
            position: i + 1,
            reason: format!("invalid arc {part:?}"),
        })?;
        arcs.push(arc);
    }
    Oid::new(arcs)
}

/// Three-way comparison of two OIDs under the lexicographic order.
pub fn compare_oids(a: &Oid, b: &Oid) -> std::cmp::Ordering {
    a.cmp(b)
}

impl FromStr for Oid {
    type Err = MibError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_oid(s)
    }
}

impl fmt::Display for Oid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for arc in &self.arcs {
            if !first {
                write!(f, ".")?;
            }
            write!(f, "{arc}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Oid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Oid({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn parses_dotted_decimal() {
        let oid = parse_oid("1.3.6.1.4.1.9.9.23.1.2.1.1.4").unwrap();
        assert_eq!(oid.arcs(), &[1, 3, 6, 1, 4, 1, 9, 9, 23, 1, 2, 1, 1, 4]);
    }

    #[test]
    fn parses_minimal_oid() {
        assert_eq!(parse_oid("1.3").unwrap().arcs(), &[1, 3]);
    }

    #[test]
    fn empty_arc_reports_position() {
        match parse_oid("1..3") {
            Err(MibError::OidParse { position, .. }) => assert_eq!(position, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_oid(".1.3") {
            Err(MibError::OidParse { position, .. }) => assert_eq!(position, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_oid("1.3.x") {
            Err(MibError::OidParse { position, .. }) => assert_eq!(position, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_roots() {
        assert!(Oid::new(vec![1]).is_err());
        assert!(Oid::new(vec![3, 0]).is_err());
        assert!(Oid::new(vec![0, 40]).is_err());
        assert!(Oid::new(vec![2, 999]).is_ok());
    }

    #[test]
    fn prefix_sorts_before_extension() {
        let short = Oid::new(vec![1, 3, 6]).unwrap();
        let long = Oid::new(vec![1, 3, 6, 1]).unwrap();
        assert_eq!(compare_oids(&short, &long), Ordering::Less);
    }

    #[test]
    fn arc_value_decides() {
        let a = Oid::new(vec![1, 3, 6, 2]).unwrap();
        let b = Oid::new(vec![1, 3, 6, 1, 9]).unwrap();
        assert_eq!(compare_oids(&a, &b), Ordering::Greater);
    }

    #[test]
    fn identical_oids_compare_equal() {
        let a = Oid::new(vec![1, 3]).unwrap();
        assert_eq!(compare_oids(&a, &a.clone()), Ordering::Equal);
    }

    #[test]
    fn subtree_membership() {
        let base = parse_oid("1.3.6.1").unwrap();
        assert!(parse_oid("1.3.6.1.2").unwrap().is_under(&base));
        assert!(!base.clone().is_under(&base));
        assert!(!parse_oid("1.3.6.2").unwrap().is_under(&base));
        assert_eq!(
            parse_oid("1.3.6.1.2.5").unwrap().suffix_of(&base),
            Some(&[2u32, 5][..])
        );
    }

    /// Exhaustive total-order check over every valid OID with at most three
    /// arcs, each arc below 4: antisymmetry, transitivity, and consistency
    /// with equality.
    #[test]
    fn ordering_is_total_on_small_oids() {
        let mut all = Vec::new();
        for a in 0u32..4 {
            for b in 0u32..4 {
                if let Ok(oid) = Oid::new(vec![a, b]) {
                    all.push(oid);
                }
                for c in 0u32..4 {
                    if let Ok(oid) = Oid::new(vec![a, b, c]) {
                        all.push(oid);
                    }
                }
            }
        }
        assert!(all.len() > 50);

        for x in &all {
            for y in &all {
                let xy = compare_oids(x, y);
                let yx = compare_oids(y, x);
                assert_eq!(xy, yx.reverse(), "antisymmetry failed for {x} vs {y}");
                assert_eq!(xy == Ordering::Equal, x.arcs() == y.arcs());
            }
        }
        for x in &all {
            for y in &all {
                for z in &all {
                    if compare_oids(x, y) != Ordering::Greater
                        && compare_oids(y, z) != Ordering::Greater
                    {
                        assert_ne!(
                            compare_oids(x, z),
                            Ordering::Greater,
                            "transitivity failed for {x}, {y}, {z}"
                        );
                    }
                }
            }
        }
    }
}
