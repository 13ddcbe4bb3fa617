//! Update families: parsing, validation and the built-in model zoo.
//!
//! A family file (`.fam`) is UTF-8 text. `#` starts a comment running to the
//! end of the line. Every non-empty line is one update rule: site pairs
//! `x y` separated by `;`, integers in decimal with optional sign.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::lattice::{v2, Vec2};

/// One update rule: a finite nonempty set of lattice sites avoiding the
/// origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UpdateRule {
    sites: Vec<Vec2>,
}

impl UpdateRule {
    pub fn new(sites: impl IntoIterator<Item = Vec2>) -> Result<UpdateRule, FamilyError> {
        let set: BTreeSet<Vec2> = sites.into_iter().collect();
        if set.is_empty() {
            return Err(FamilyError::EmptyRule { line: 0 });
        }
        if set.contains(&Vec2::ZERO) {
            return Err(FamilyError::OriginInRule { line: 0 });
        }
        Ok(UpdateRule {
            sites: set.into_iter().collect(),
        })
    }

    pub fn sites(&self) -> &[Vec2] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites.iter().map(|s| format!("{} {}", s.x, s.y)).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// A finite collection of update rules together with a display name.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UpdateFamily {
    name: String,
    rules: Vec<UpdateRule>,
    diameter: i64,
}

impl UpdateFamily {
    pub fn new(
        name: impl Into<String>,
        rules: impl IntoIterator<Item = UpdateRule>,
    ) -> Result<UpdateFamily, FamilyError> {
        let mut rules: Vec<UpdateRule> = rules.into_iter().collect();
        if rules.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        rules.sort_by(|a, b| a.sites.cmp(&b.sites));
        rules.dedup();
        let diameter = rules
            .iter()
            .flat_map(|r| r.sites.iter())
            .map(|s| s.linf())
            .max()
            .unwrap_or(0);
        Ok(UpdateFamily {
            name: name.into(),
            rules,
            diameter,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rules(&self) -> &[UpdateRule] {
        &self.rules
    }

    /// Maximum L-infinity norm over all rule sites.
    pub fn diameter(&self) -> i64 {
        self.diameter
    }

    /// Deduplicated set of offsets `-y` over all rule sites: when a site `z`
    /// becomes infected, only the translates `z - y` can newly fire.
    pub fn candidate_offsets(&self) -> Vec<Vec2> {
        let set: BTreeSet<Vec2> = self
            .rules
            .iter()
            .flat_map(|r| r.sites.iter().map(|&y| -y))
            .collect();
        set.into_iter().collect()
    }

    /// Serializes back to the family file format.
    pub fn to_fam(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("line {line}: malformed rule syntax: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("line {line}: rule contains the origin")]
    OriginInRule { line: usize },
    #[error("line {line}: empty rule")]
    EmptyRule { line: usize },
    #[error("family has no rules")]
    EmptyFamily,
}

/// Parses the family file format.
pub fn parse_family(text: &str, name: &str) -> Result<UpdateFamily, FamilyError> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut sites = Vec::new();
        for part in line.split(';') {
            let part = part.trim();
            if part.is_empty() {
                return Err(FamilyError::Syntax {
                    line: line_no,
                    detail: "empty site entry".into(),
                });
            }
            let mut nums = part.split_whitespace();
            let x = parse_int(nums.next(), line_no)?;
            let y = parse_int(nums.next(), line_no)?;
            if let Some(extra) = nums.next() {
                return Err(FamilyError::Syntax {
                    line: line_no,
                    detail: format!("unexpected token {extra:?}"),
                });
            }
            sites.push(v2(x, y));
        }
        if sites.is_empty() {
            return Err(FamilyError::EmptyRule { line: line_no });
        }
        if sites.contains(&Vec2::ZERO) {
            return Err(FamilyError::OriginInRule { line: line_no });
        }
        rules.push(UpdateRule::new(sites).expect("validated above"));
    }
    if rules.is_empty() {
        return Err(FamilyError::EmptyFamily);
    }
    UpdateFamily::new(name, rules)
}

fn parse_int(tok: Option<&str>, line: usize) -> Result<i64, FamilyError> {
    let tok = tok.ok_or_else(|| FamilyError::Syntax {
        line,
        detail: "missing coordinate".into(),
    })?;
    tok.parse().map_err(|_| FamilyError::Syntax {
        line,
        detail: format!("bad integer {tok:?}"),
    })
}

/// Built-in models used throughout the tests and the CLI.
pub mod zoo {
    use super::*;

    fn rule(sites: &[(i64, i64)]) -> UpdateRule {
        UpdateRule::new(sites.iter().map(|&(x, y)| v2(x, y))).unwrap()
    }

    /// The 2-neighbour model: a site updates when any two of its four
    /// nearest neighbours are infected.
    pub fn two_neighbour() -> UpdateFamily {
        let n = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        let mut rules = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                rules.push(rule(&[n[i], n[j]]));
            }
        }
        UpdateFamily::new("2-neighbour", rules).unwrap()
    }

    /// An unbalanced rooted model with four stable directions: easy growth
    /// east (one extra infection), difficulty two elsewhere.
    pub fn east_heavy() -> UpdateFamily {
        UpdateFamily::new(
            "east-heavy",
            vec![
                rule(&[(-1, 0), (-2, 0), (0, -1)]),
                rule(&[(-1, 0), (-2, 0), (0, 1)]),
                rule(&[(1, 0), (2, 0), (0, -1), (0, -2)]),
                rule(&[(1, 0), (2, 0), (0, 1), (0, 2)]),
            ],
        )
        .unwrap()
    }

    /// The Duarte model: two of the three sites west, north, south.
    pub fn duarte() -> UpdateFamily {
        UpdateFamily::new(
            "duarte",
            vec![
                rule(&[(-1, 0), (0, 1)]),
                rule(&[(-1, 0), (0, -1)]),
                rule(&[(0, 1), (0, -1)]),
            ],
        )
        .unwrap()
    }

    /// One-neighbour east model (supercritical).
    pub fn east_one() -> UpdateFamily {
        UpdateFamily::new("east-1", vec![rule(&[(1, 0)])]).unwrap()
    }

    /// Two opposite sites required (subcritical).
    pub fn opposite_pair() -> UpdateFamily {
        UpdateFamily::new("opposite-pair", vec![rule(&[(1, 0), (-1, 0)])]).unwrap()
    }

    /// Looks a family up by name.
    pub fn by_name(name: &str) -> Option<UpdateFamily> {
        match name {
            "2-neighbour" | "two-neighbour" | "fa2f" => Some(two_neighbour()),
            "east-heavy" => Some(east_heavy()),
            "duarte" => Some(duarte()),
            "east-1" => Some(east_one()),
            "opposite-pair" => Some(opposite_pair()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_line_rule() {
        let fam = parse_family("-1 0; -2 0; 0 -1", "t").unwrap();
        assert_eq!(fam.rules().len(), 1);
        assert_eq!(
            fam.rules()[0].sites(),
            &[v2(-2, 0), v2(-1, 0), v2(0, -1)]
        );
        assert_eq!(fam.diameter(), 2);
    }

    #[test]
    fn empty_input_is_empty_family() {
        assert_eq!(parse_family("", "t"), Err(FamilyError::EmptyFamily));
        assert_eq!(
            parse_family("# only comments\n\n", "t"),
            Err(FamilyError::EmptyFamily)
        );
    }

    #[test]
    fn origin_is_rejected_with_line_number() {
        assert_eq!(
            parse_family("0 0", "t"),
            Err(FamilyError::OriginInRule { line: 1 })
        );
        assert_eq!(
            parse_family("1 0\n0 0; 1 1", "t"),
            Err(FamilyError::OriginInRule { line: 2 })
        );
    }

    #[test]
    fn syntax_errors_name_the_line() {
        match parse_family("1 0\n1 banana", "t") {
            Err(FamilyError::Syntax { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_family("1 0;; 2 0", "t") {
            Err(FamilyError::Syntax { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let fam = parse_family("  1 0 ; 0 1  # quadrant\n# note\n-1 0;0 -1\n", "t").unwrap();
        assert_eq!(fam.rules().len(), 2);
    }

    #[test]
    fn fam_round_trip() {
        let fam = zoo::east_heavy();
        let again = parse_family(&fam.to_fam(), fam.name()).unwrap();
        assert_eq!(fam, again);
    }

    #[test]
    fn zoo_two_neighbour_has_six_rules() {
        assert_eq!(zoo::two_neighbour().rules().len(), 6);
        assert_eq!(zoo::two_neighbour().diameter(), 1);
        assert_eq!(zoo::east_heavy().diameter(), 2);
    }
}
