use std::fmt;
use std::sync::Arc;

use super::SymError;

/// Ordered, named coordinate list shared by every polynomial of a chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSet(Arc<[String]>);

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self, SymError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(SymError::InvalidVars("at least one variable is required".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(SymError::InvalidVars(format!("`{name}` is not an identifier")));
            }
            if names[..i].contains(name) {
                return Err(SymError::InvalidVars(format!("duplicate variable `{name}`")));
            }
        }
        Ok(VarSet(names.into()))
    }

    /// Parses a comma separated list such as `x,y,z`.
    pub fn parse(list: &str) -> Result<Self, SymError> {
        VarSet::new(list.split(',').map(|s| s.trim().to_string()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<(), SymError> {
        if index < self.len() {
            Ok(())
        } else {
            Err(SymError::IndexOutOfRange {
                index,
                num_vars: self.len(),
            })
        }
    }
}

impl serde::Serialize for VarSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_names() {
        assert!(VarSet::parse("x,y,x").is_err());
        assert!(VarSet::parse("x,2y").is_err());
        assert!(VarSet::new(Vec::<String>::new()).is_err());
        let v = VarSet::parse("x, y_1 ,xi_z").unwrap();
        assert_eq!(v.names(), &["x", "y_1", "xi_z"]);
        assert_eq!(v.index_of("xi_z"), Some(2));
    }
}
