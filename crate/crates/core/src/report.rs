//! Verdicts shared by the batch certifiers and the command line.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Undecided,
    Unsupported,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Undecided => "undecided",
            Verdict::Unsupported => "unsupported",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted => 1,
            Verdict::Undecided => 2,
            Verdict::Unsupported => 4,
        }
    }

    /// Aggregate per-item verdicts: one refutation refutes the batch, then
    /// unsupported items, then undecided ones; an empty batch is certified.
    pub fn fold(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        let rank = |v: Verdict| match v {
            Verdict::Refuted => 3,
            Verdict::Unsupported => 2,
            Verdict::Undecided => 1,
            Verdict::Certified => 0,
        };
        items.into_iter().max_by_key(|v| rank(*v)).unwrap_or(Verdict::Certified)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::Verdict::*;
    use super::*;

    #[test]
    fn fold_order() {
        assert_eq!(Verdict::fold([]), Certified);
        assert_eq!(Verdict::fold([Certified, Undecided]), Undecided);
        assert_eq!(Verdict::fold([Undecided, Refuted, Unsupported]), Refuted);
        assert_eq!(Verdict::fold([Undecided, Unsupported]), Unsupported);
    }
}
