use crate::chem::{element, Molecule};

use super::PropsError;

/// Monoisotopic mass: most abundant isotope per element, explicit isotope
/// labels override, hydrogens included.
pub fn exact_mol_wt(mol: &Molecule) -> Result<f64, PropsError> {
    let h = atom_mass(0, 1, None, true)?;
    let mut total = 0.0;
    for (i, a) in mol.atoms().iter().enumerate() {
        total += atom_mass(i, a.element, a.isotope, true)?;
        total += (a.explicit_h + a.implicit_h) as f64 * h;
    }
    Ok(total)
}

/// Average molecular weight from standard atomic weights.
pub fn mol_wt(mol: &Molecule) -> Result<f64, PropsError> {
    let h = atom_mass(0, 1, None, false)?;
    let mut total = 0.0;
    for (i, a) in mol.atoms().iter().enumerate() {
        total += atom_mass(i, a.element, a.isotope, false)?;
        total += (a.explicit_h + a.implicit_h) as f64 * h;
    }
    Ok(total)
}

fn atom_mass(atom: usize, z: u8, isotope: Option<u16>, exact: bool) -> Result<f64, PropsError> {
    let unknown = || PropsError::UnknownElementMass { atom, element: z, isotope };
    if let Some(a) = isotope {
        return element::isotope_mass(z, a).ok_or_else(unknown);
    }
    let e = element::element(z).ok_or_else(unknown)?;
    let m = if exact { e.monoisotopic_mass } else { e.average_weight };
    if m > 0.0 {
        Ok(m)
    } else {
        Err(unknown())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn exact(s: &str) -> f64 {
        exact_mol_wt(&parse_smiles(s).unwrap()).unwrap()
    }

    #[test]
    fn methane_is_carbon_plus_four_hydrogens() {
        assert!((exact("C") - (12.0 + 4.0 * 1.007825032)).abs() < 1e-9);
        assert!((exact("C") - 16.0313).abs() < 1e-4);
    }

    #[test]
    fn isotope_labels_override() {
        assert!((exact("[13CH4]") - 17.03465).abs() < 1e-4);
        assert!((exact("[2H]C") - (exact("C") - 1.007825032 + 2.014101778)).abs() < 1e-9);
    }

    #[test]
    fn fragments_add_up() {
        assert!((exact("CCO.Cl") - exact("CCO") - exact("Cl")).abs() < 1e-12);
    }

    #[test]
    fn average_weight_of_water() {
        let m = mol_wt(&parse_smiles("O").unwrap()).unwrap();
        assert!((m - 18.015).abs() < 1e-3);
    }

    #[test]
    fn unknown_isotope_is_an_error() {
        let m = parse_smiles("[200C]").unwrap();
        assert!(matches!(exact_mol_wt(&m), Err(PropsError::UnknownElementMass { atom: 0, .. })));
    }
}
