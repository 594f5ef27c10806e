use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{InstructError, Triplet};
use crate::props::{DescriptorId, CONSTRAINT_IDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    /// Molecule captioning.
    #[serde(rename = "MC")]
    Mc,
    /// Text-based molecule generation.
    #[serde(rename = "TBMG")]
    Tbmg,
    /// Molecular property prediction.
    #[serde(rename = "MPP")]
    Mpp,
    /// Multi-constraint molecule generation.
    #[serde(rename = "MCMG")]
    Mcmg,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Mc, Task::Tbmg, Task::Mpp, Task::Mcmg];

    pub fn tag(self) -> &'static str {
        match self {
            Task::Mc => "MC",
            Task::Tbmg => "TBMG",
            Task::Mpp => "MPP",
            Task::Mcmg => "MCMG",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Task {
    type Err = InstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| InstructError::UnknownTask(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub task: Task,
    pub instruction: String,
    pub response: String,
    pub source_smiles: String,
}

const MC_PREFIX: &str = "How to describe this molecule ";
const TBMG_PREFIX: &str = "Can you give a molecule SMILES and the molecule is ";
const MPP_PREFIX: &str = "Can you predict the specific ";
const MPP_MIDDLE: &str = " values of the molecule? ";
const MCMG_PREFIX: &str = "Can you give a molecule SMILES which with the value of ";

/// Two-decimal rendering used in every numeric slot; negative zero prints
/// as "0.00".
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Caption text as it reads after "and the molecule is ".
fn description(caption: &str) -> String {
    let c = caption.trim();
    let c = c.strip_prefix("The molecule is ").unwrap_or(c);
    c.strip_suffix('.').unwrap_or(c).trim_end().to_string()
}

fn value(t: &Triplet, id: DescriptorId) -> Result<f64, InstructError> {
    t.property(id).ok_or_else(|| InstructError::UnknownProperty(id.name().to_string()))
}

/// Fills the task's template from one triplet. `mpp_property` selects the
/// descriptor asked about by MPP and is ignored by the other tasks.
pub fn fill_template(task: Task, t: &Triplet, mpp_property: DescriptorId) -> Result<InstructionRecord, InstructError> {
    let (instruction, response) = match task {
        Task::Mc => (format!("{MC_PREFIX}{}?", t.smiles), t.caption.clone()),
        Task::Tbmg => (format!("{TBMG_PREFIX}{}?", description(&t.caption)), t.smiles.clone()),
        Task::Mpp => {
            let v = value(t, mpp_property)?;
            (format!("{MPP_PREFIX}{mpp_property}{MPP_MIDDLE}{}", t.smiles), format_value(v))
        }
        Task::Mcmg => {
            let mut parts = Vec::with_capacity(CONSTRAINT_IDS.len());
            for id in CONSTRAINT_IDS {
                let v = t.property(id).ok_or(InstructError::MissingConstraintProperty(id.name()))?;
                parts.push(format!("{id} is {}", format_value(v)));
            }
            (format!("{MCMG_PREFIX}{}?", parts.join(", the value of ")), t.smiles.clone())
        }
    };
    Ok(InstructionRecord { task, instruction, response, source_smiles: t.smiles.clone() })
}

/// What a filled instruction carries, recovered from its text.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Mc { smiles: String },
    Tbmg { description: String },
    Mpp { property: DescriptorId, smiles: String },
    Mcmg { values: [f64; 5] },
}

/// Inverts [`fill_template`]; `None` when the text does not follow the
/// task's template exactly.
pub fn parse_instruction(task: Task, instruction: &str) -> Option<Parsed> {
    match task {
        Task::Mc => {
            let s = instruction.strip_prefix(MC_PREFIX)?.strip_suffix('?')?;
            (!s.is_empty() && !s.contains(' ')).then(|| Parsed::Mc { smiles: s.to_string() })
        }
        Task::Tbmg => {
            let d = instruction.strip_prefix(TBMG_PREFIX)?.strip_suffix('?')?;
            (!d.is_empty()).then(|| Parsed::Tbmg { description: d.to_string() })
        }
        Task::Mpp => {
            let rest = instruction.strip_prefix(MPP_PREFIX)?;
            let (prop, smiles) = rest.split_once(MPP_MIDDLE)?;
            let property = prop.parse().ok()?;
            (!smiles.is_empty() && !smiles.contains(' ')).then(|| Parsed::Mpp { property, smiles: smiles.to_string() })
        }
        Task::Mcmg => {
            let body = instruction.strip_prefix(MCMG_PREFIX)?.strip_suffix('?')?;
            let parts: Vec<&str> = body.split(", the value of ").collect();
            if parts.len() != CONSTRAINT_IDS.len() {
                return None;
            }
            let mut values = [0.0; 5];
            for ((part, id), slot) in parts.iter().zip(CONSTRAINT_IDS).zip(values.iter_mut()) {
                let num = part.strip_prefix(id.name())?.strip_prefix(" is ")?;
                if num.split_once('.').map(|(_, f)| f.len()) != Some(2) {
                    return None;
                }
                *slot = num.parse().ok()?;
            }
            Some(Parsed::Mcmg { values })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::PropertyVector;

    fn triplet(smiles: &str, caption: &str, pairs: &[(DescriptorId, f64)]) -> Triplet {
        Triplet {
            smiles: smiles.into(),
            caption: caption.into(),
            properties: PropertyVector {
                names: pairs.iter().map(|(d, _)| d.name().to_string()).collect(),
                values: pairs.iter().map(|p| p.1).collect(),
            },
        }
    }

    #[test]
    fn mc_wording() {
        let t = triplet("[Te]", "The molecule is the stable isotope of tellurium.", &[(DescriptorId::QED, 0.4)]);
        let r = fill_template(Task::Mc, &t, DescriptorId::QED).unwrap();
        assert_eq!(r.instruction, "How to describe this molecule [Te]?");
        assert_eq!(r.response, t.caption);
    }

    #[test]
    fn tbmg_strips_caption_frame() {
        let t = triplet("CCCCCCCCC(=O)C", "The molecule is a methyl ketone that is decane.", &[]);
        let r = fill_template(Task::Tbmg, &t, DescriptorId::QED).unwrap();
        assert_eq!(r.instruction, "Can you give a molecule SMILES and the molecule is a methyl ketone that is decane?");
        assert_eq!(r.response, "CCCCCCCCC(=O)C");
    }

    #[test]
    fn mpp_two_decimals() {
        let t = triplet("Cc1cc2c(cc1)C(=O)NC(C)C2", "x", &[(DescriptorId::MolLogP, 2.5172)]);
        let r = fill_template(Task::Mpp, &t, DescriptorId::MolLogP).unwrap();
        assert_eq!(r.response, "2.52");
        assert_eq!(r.instruction, "Can you predict the specific MolLogP values of the molecule? Cc1cc2c(cc1)C(=O)NC(C)C2");
        assert!(matches!(fill_template(Task::Mpp, &t, DescriptorId::TPSA), Err(InstructError::UnknownProperty(p)) if p == "TPSA"));
    }

    #[test]
    fn mcmg_lists_five_values_in_order() {
        let vals = [1.68, 492.2, 3.14, 138.76, 0.33];
        let pairs: Vec<_> = CONSTRAINT_IDS.iter().copied().zip(vals).collect();
        let t = triplet("C", "x", &pairs);
        let r = fill_template(Task::Mcmg, &t, DescriptorId::QED).unwrap();
        assert_eq!(
            r.instruction,
            "Can you give a molecule SMILES which with the value of BalabanJ is 1.68, the value of ExactMolWt is 492.20, \
             the value of MolLogP is 3.14, the value of TPSA is 138.76, the value of QED is 0.33?"
        );
        assert_eq!(parse_instruction(Task::Mcmg, &r.instruction), Some(Parsed::Mcmg { values: vals }));
        let short = triplet("C", "x", &pairs[..4]);
        assert!(matches!(fill_template(Task::Mcmg, &short, DescriptorId::QED), Err(InstructError::MissingConstraintProperty("QED"))));
    }

    #[test]
    fn parse_rejects_other_wordings() {
        assert_eq!(parse_instruction(Task::Mc, "Describe C?"), None);
        assert_eq!(parse_instruction(Task::Mpp, "Can you predict the specific LogS values of the molecule? C"), None);
        assert_eq!(format_value(-0.001), "0.00");
        assert_eq!("mcmg".parse::<Task>().unwrap(), Task::Mcmg);
    }
}
