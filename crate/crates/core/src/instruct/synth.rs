use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::template::{fill_template, InstructionRecord, Task};
use super::{InstructError, Triplet};
use crate::props::DescriptorId;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub tasks: Vec<Task>,
    /// Records emitted for every task.
    pub per_task: usize,
    pub seed: u64,
    /// MPP asks about one of these per record.
    pub mpp_properties: Vec<DescriptorId>,
    /// Keep drawing with replacement once every (triplet, template) pair
    /// of a task has been used, instead of failing.
    pub allow_replacement: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tasks: Task::ALL.to_vec(),
            per_task: 100,
            seed: 0,
            mpp_properties: vec![DescriptorId::ExactMolWt, DescriptorId::MolLogP],
            allow_replacement: false,
        }
    }
}

fn templates(task: Task, cfg: &SynthConfig) -> Vec<DescriptorId> {
    match task {
        Task::Mpp => cfg.mpp_properties.clone(),
        // non-MPP tasks have one template; the id is unused
        _ => vec![DescriptorId::QED],
    }
}

/// (triplet, template) draws for one task: a shuffled pass without
/// replacement, topped up with uniform draws when allowed.
fn draws(task: Task, n: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, InstructError> {
    let k = templates(task, cfg).len();
    let available = n * k;
    if cfg.per_task > available && (!cfg.allow_replacement || available == 0) {
        return Err(InstructError::InsufficientTriplets { task, requested: cfg.per_task, available });
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    pairs.shuffle(rng);
    pairs.truncate(cfg.per_task);
    if pairs.len() < cfg.per_task {
        log::info!("task {task}: {available} distinct pairs used, drawing {} more with replacement", cfg.per_task - available);
        while pairs.len() < cfg.per_task {
            pairs.push((rng.random_range(0..n), rng.random_range(0..k)));
        }
    }
    Ok(pairs)
}

/// Expands triplets into `per_task` records for each task, interleaved
/// round-robin in task order. A pure function of its inputs.
pub fn synthesize_dataset(triplets: &[Triplet], cfg: &SynthConfig) -> Result<Vec<InstructionRecord>, InstructError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut per_task = Vec::with_capacity(cfg.tasks.len());
    for &task in &cfg.tasks {
        let props = templates(task, cfg);
        let recs = draws(task, triplets.len(), cfg, &mut rng)?
            .into_iter()
            .map(|(i, j)| fill_template(task, &triplets[i], props[j]))
            .collect::<Result<Vec<_>, _>>()?;
        per_task.push(recs);
    }
    let mut out = Vec::with_capacity(cfg.per_task * cfg.tasks.len());
    for k in 0..cfg.per_task {
        for recs in &per_task {
            out.push(recs[k].clone());
        }
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[InstructionRecord]) -> Result<(), InstructError> {
    let io = |e| InstructError::Io { path: "<jsonl writer>".into(), source: e };
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<InstructionRecord>, InstructError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| InstructError::Io { path: "<jsonl reader>".into(), source: e })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| InstructError::MalformedRow { line: i as u64 + 1, reason: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruct::template::{parse_instruction, Parsed};
    use crate::props::Registry;

    fn triplets(n: usize) -> Vec<Triplet> {
        let reg = Registry::default();
        (1..=n)
            .map(|k| Triplet::from_smiles(&format!("{}O", "C".repeat(k)), &format!("The molecule is alcohol {k}."), &reg).unwrap())
            .collect()
    }

    #[test]
    fn counts_and_round_robin() {
        let ts = triplets(5);
        let cfg = SynthConfig { per_task: 5, seed: 3, ..SynthConfig::default() };
        let recs = synthesize_dataset(&ts, &cfg).unwrap();
        assert_eq!(recs.len(), 20);
        let order: Vec<Task> = recs.iter().take(8).map(|r| r.task).collect();
        assert_eq!(order, [Task::ALL, Task::ALL].concat());
    }

    #[test]
    fn records_reparse() {
        let ts = triplets(6);
        let recs = synthesize_dataset(&ts, &SynthConfig { per_task: 6, ..SynthConfig::default() }).unwrap();
        for r in &recs {
            let p = parse_instruction(r.task, &r.instruction).unwrap_or_else(|| panic!("{r:?}"));
            match p {
                Parsed::Mc { smiles } | Parsed::Mpp { smiles, .. } => assert_eq!(smiles, r.source_smiles),
                Parsed::Tbmg { .. } | Parsed::Mcmg { .. } => assert_eq!(r.response, r.source_smiles),
            }
        }
    }

    #[test]
    fn exhaustion_policy() {
        let ts = triplets(3);
        let cfg = SynthConfig { per_task: 4, tasks: vec![Task::Mc], ..SynthConfig::default() };
        assert!(matches!(
            synthesize_dataset(&ts, &cfg),
            Err(InstructError::InsufficientTriplets { task: Task::Mc, requested: 4, available: 3 })
        ));
        // MPP has two templates per triplet
        let mpp = SynthConfig { tasks: vec![Task::Mpp], per_task: 6, ..cfg.clone() };
        assert_eq!(synthesize_dataset(&ts, &mpp).unwrap().len(), 6);
        let loose = SynthConfig { allow_replacement: true, per_task: 10, ..cfg };
        assert_eq!(synthesize_dataset(&ts, &loose).unwrap().len(), 10);
        assert!(synthesize_dataset(&[], &SynthConfig { per_task: 0, ..SynthConfig::default() }).unwrap().is_empty());
    }

    #[test]
    fn jsonl_is_seed_deterministic() {
        let ts = triplets(8);
        let cfg = SynthConfig { per_task: 8, seed: 11, ..SynthConfig::default() };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_jsonl(&mut a, &synthesize_dataset(&ts, &cfg).unwrap()).unwrap();
        write_jsonl(&mut b, &synthesize_dataset(&ts, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let back = read_jsonl(&a[..]).unwrap();
        assert_eq!(back, synthesize_dataset(&ts, &cfg).unwrap());
        let first = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
        assert!(first.starts_with("{\"task\":\"MC\",\"instruction\":"), "{first}");
    }
}
