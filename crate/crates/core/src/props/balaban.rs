use crate::chem::{BondOrder, Molecule};

/// Balaban's J over the heavy-atom graph, with distances weighted by
/// inverse bond order (aromatic counts as 1.5). Single atoms and
/// disconnected graphs give 0.
pub fn balaban_j(mol: &Molecule) -> f64 {
    let heavy: Vec<usize> = (0..mol.num_atoms()).filter(|&i| mol.atom(i).element > 1).collect();
    let n = heavy.len();
    if n < 2 {
        return 0.0;
    }
    let mut index = vec![usize::MAX; mol.num_atoms()];
    for (k, &i) in heavy.iter().enumerate() {
        index[i] = k;
    }
    let edges: Vec<(usize, usize, f64)> = mol
        .bonds()
        .iter()
        .filter(|b| index[b.begin] != usize::MAX && index[b.end] != usize::MAX)
        .map(|b| {
            let w = match b.order {
                BondOrder::Single => 1.0,
                BondOrder::Double => 0.5,
                BondOrder::Triple => 1.0 / 3.0,
                BondOrder::Aromatic => 1.0 / 1.5,
            };
            (index[b.begin], index[b.end], w)
        })
        .collect();

    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for &(a, b, w) in &edges {
        d[a * n + b] = d[a * n + b].min(w);
        d[b * n + a] = d[b * n + a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    if d.iter().any(|x| x.is_infinite()) {
        return 0.0;
    }
    let s: Vec<f64> = (0..n).map(|i| d[i * n..(i + 1) * n].iter().sum()).collect();
    let q = edges.len() as f64;
    let mu = q - n as f64 + 1.0;
    let sum: f64 = edges.iter().map(|&(a, b, _)| 1.0 / (s[a] * s[b]).sqrt()).sum();
    q / (mu + 1.0) * sum
}
