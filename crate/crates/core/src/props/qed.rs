use std::sync::OnceLock;

use crate::chem::Molecule;

use super::counts::{named, num_h_donors, num_rotatable_bonds};
use super::smarts::{Session, Smarts};
use super::{crippen, mass, tpsa, PropsError};

pub const TABLE_VERSION: u32 = 1;

const PARAMS_TSV: &str = include_str!("../../data/qed_params.tsv");
const ALERTS: &str = include_str!("../../data/qed_alerts.smarts");
const ACCEPTORS: &str = include_str!("../../data/qed_acceptors.smarts");

/// Asymmetric double sigmoid of one property.
#[derive(Debug, Clone, Copy)]
struct Sigmoid {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    dmax: f64,
}

impl Sigmoid {
    fn desirability(&self, x: f64) -> f64 {
        let e1 = 1.0 + (-(x - self.c + self.d / 2.0) / self.e).exp();
        let e2 = 1.0 + (-(x - self.c - self.d / 2.0) / self.f).exp();
        (self.a + self.b / e1 * (1.0 - 1.0 / e2)) / self.dmax
    }
}

struct Tables {
    // MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS
    params: Vec<(Sigmoid, f64)>,
    alerts: Vec<Smarts>,
    acceptors: Vec<Smarts>,
}

fn patterns(text: &str, what: &str) -> Vec<Smarts> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| Smarts::new(l).unwrap_or_else(|e| panic!("{what}: {l}: {e}")))
        .collect()
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let params = PARAMS_TSV
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let v: Vec<f64> = l.split('\t').skip(1).map(|x| x.parse().expect("qed params")).collect();
                let s = Sigmoid { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5], dmax: v[6] };
                (s, v[7])
            })
            .collect::<Vec<_>>();
        assert_eq!(params.len(), 8, "qed params: eight properties expected");
        Tables { params, alerts: patterns(ALERTS, "qed alerts"), acceptors: patterns(ACCEPTORS, "qed acceptors") }
    })
}

/// The eight raw QED inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QedProperties {
    pub mw: f64,
    pub alogp: f64,
    pub hba: f64,
    pub hbd: f64,
    pub psa: f64,
    pub rotb: f64,
    pub arom: f64,
    pub alerts: f64,
}

impl QedProperties {
    fn as_array(&self) -> [f64; 8] {
        [self.mw, self.alogp, self.hba, self.hbd, self.psa, self.rotb, self.arom, self.alerts]
    }
}

pub fn qed_properties(mol: &Molecule) -> Result<QedProperties, PropsError> {
    let t = tables();
    let session = Session::new(mol);
    let hba: usize = t.acceptors.iter().map(|p| p.matches_in(&session).len()).sum();
    let alerts = t.alerts.iter().filter(|p| p.has_match_in(&session)).count();
    Ok(QedProperties {
        mw: mass::mol_wt(mol)?,
        alogp: crippen::crippen_logp(mol),
        hba: hba as f64,
        hbd: num_h_donors(mol) as f64,
        psa: tpsa::ertl_tpsa(mol),
        rotb: num_rotatable_bonds(mol) as f64,
        arom: aromatic_ring_systems(mol) as f64,
        alerts: alerts as f64,
    })
}

/// Ring count left after deleting aliphatic ring atoms that have a
/// non-aromatic neighbour: the cyclomatic number of what remains.
fn aromatic_ring_systems(mol: &Molecule) -> usize {
    let gone = named().aliphatic_ring_atom.root_atoms(mol);
    let kept = gone.iter().filter(|g| !**g).count();
    let edges = mol.bonds().iter().filter(|b| !gone[b.begin] && !gone[b.end]).count();
    // connected pieces of the kept subgraph
    let mut seen = gone.clone();
    let mut pieces = 0;
    for s in 0..mol.num_atoms() {
        if seen[s] {
            continue;
        }
        pieces += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for &(n, _) in mol.neighbors(a) {
                if !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
    }
    (edges + pieces).saturating_sub(kept)
}

/// Weighted geometric mean of the eight desirabilities with the mean
/// weight set.
pub fn qed_from_properties(p: &QedProperties) -> f64 {
    let t = tables();
    let mut num = 0.0;
    let mut den = 0.0;
    for ((s, w), x) in t.params.iter().zip(p.as_array()) {
        num += w * s.desirability(x).ln();
        den += w;
    }
    (num / den).exp()
}

pub fn qed(mol: &Molecule) -> Result<f64, PropsError> {
    Ok(qed_from_properties(&qed_properties(mol)?))
}
