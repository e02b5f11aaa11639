//! `Tor^{BP_*}(M, F_p)` from the Koszul complex on `(p, v_1, v_2, ...)`, and
//! the Levin index-one test on the same complex.
//!
//! `K = Λ(e_0, e_1, ..., e_m)` with `e_0` in bidegree `(1, 0)`, `e_i` in
//! `(1, |v_i|)`, `d e_0 = p` and `d e_i = v_i`; only generators with
//! `|v_i| <= t_max` are included. For a presentation `M = F/R`, `M ⊗ K` is
//! `(F ⊗ K)/(R ⊗ K)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::homology::{dense_vec, preimage, LatticeSolver, Spot};
use super::SparseVec;
use crate::comodules::Comodule;
use crate::graded_poly::{basis_in_degree, Monomial};
use crate::scalar_linalg::lattice::Lattice;
use crate::scalar_linalg::{ModuleShape, Scalar, ScalarRing, ZpLocal};

struct KoszulCell {
    /// `(base monomial, generator, exterior mask)`.
    basis: Vec<(Monomial, usize, u32)>,
    /// Columns of `d` into the cell `(s - 1, t)`.
    d: Vec<SparseVec>,
    relations: Vec<SparseVec>,
}

struct Koszul {
    cells: BTreeMap<(u32, u32), KoszulCell>,
    /// Number of exterior generators included.
    gens: usize,
}

fn masks(k: usize, size: u32) -> Vec<u32> {
    (0u32..1 << k).filter(|m| m.count_ones() == size).collect()
}

fn koszul(m: &Comodule, s_max: u32, t_max: u32) -> Koszul {
    let h = &m.hopf;
    let p = m.prime();
    let ring = ScalarRing::Zp(p);
    let nb = h.nb();
    let vars: Vec<usize> = (0..nb).collect();
    // e_0 -> p, e_i -> v_i
    let mut ext_deg = vec![0u32];
    for i in 0..nb {
        if h.base.degree(i) <= t_max {
            ext_deg.push(h.base.degree(i));
        }
    }
    let k = ext_deg.len();
    let mask_deg = |mask: u32| -> u32 { (0..k).filter(|i| mask >> i & 1 == 1).map(|i| ext_deg[i]).sum() };
    let mut cells: BTreeMap<(u32, u32), KoszulCell> = BTreeMap::new();
    let mut indices: BTreeMap<(u32, u32), HashMap<(Monomial, usize, u32), usize>> = BTreeMap::new();
    for s in 0..=s_max + 1 {
        for t in 0..=t_max {
            let mut basis = Vec::new();
            for (g, gen) in m.generators.iter().enumerate() {
                for mask in masks(k, s) {
                    let d = gen.degree + mask_deg(mask);
                    if d > t {
                        continue;
                    }
                    for b in basis_in_degree(&h.base, t - d, &vars) {
                        basis.push((b, g, mask));
                    }
                }
            }
            basis.sort();
            indices.insert((s, t), basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect());
            cells.insert((s, t), KoszulCell { basis, d: Vec::new(), relations: Vec::new() });
        }
    }
    for s in 0..=s_max + 1 {
        for t in 0..=t_max {
            let d: Vec<SparseVec> = if s == 0 {
                vec![Vec::new(); cells[&(s, t)].basis.len()]
            } else {
                let target = &indices[&(s - 1, t)];
                cells[&(s, t)]
                    .basis
                    .iter()
                    .map(|(b, g, mask)| {
                        let mut v: SparseVec = Vec::new();
                        let mut sign = 1i64;
                        for i in (0..k).filter(|i| mask >> i & 1 == 1) {
                            let rest = mask & !(1 << i);
                            let (mono, c) = if i == 0 {
                                (b.clone(), p as i64)
                            } else {
                                (b.mul(&Monomial::gen(i - 1), &h.base).expect("commutative").0, 1)
                            };
                            v.push((target[&(mono, *g, rest)], Scalar::from_i64(ring, sign * c)));
                            sign = -sign;
                        }
                        v.sort_by_key(|e| e.0);
                        v
                    })
                    .collect()
            };
            cells.get_mut(&(s, t)).unwrap().d = d;
            let mut rels = Vec::new();
            let index = &indices[&(s, t)];
            for rel in &m.relations {
                let Some(dr) = rel.iter().find_map(|(g, a)| a.terms().first().map(|(x, _)| x.degree(&h.base) + m.generators[*g].degree))
                else {
                    continue;
                };
                for mask in masks(k, s) {
                    let dm = dr + mask_deg(mask);
                    if dm > t {
                        continue;
                    }
                    for b in basis_in_degree(&h.base, t - dm, &vars) {
                        let mut v: SparseVec = Vec::new();
                        for (g, a) in rel {
                            for (x, c) in a.terms() {
                                let mono = b.mul(x, &h.base).expect("commutative").0;
                                v.push((index[&(mono, *g, mask)], c.convert(ring).expect("p-local relation")));
                            }
                        }
                        rels.push(v);
                    }
                }
            }
            cells.get_mut(&(s, t)).unwrap().relations = rels;
        }
    }
    Koszul { cells, gens: k }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorTable {
    pub module: String,
    pub prime: u32,
    pub s_max: u32,
    pub t_max: u32,
    /// Number of Koszul generators `e_0, e_1, ...` included.
    pub koszul_generators: usize,
    pub groups: BTreeMap<String, ModuleShape>,
}

impl TorTable {
    fn key(s: u32, t: u32) -> String {
        format!("{s},{t}")
    }

    pub fn shape(&self, s: u32, t: u32) -> ModuleShape {
        self.groups.get(&Self::key(s, t)).cloned().unwrap_or_default()
    }

    /// `dim_{F_p} Tor_{s,t}`.
    pub fn dim(&self, s: u32, t: u32) -> usize {
        self.shape(s, t).mod_p_dim()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("s\tt\tdim\n");
        for s in 0..=self.s_max {
            for t in 0..=self.t_max {
                let d = self.dim(s, t);
                if d > 0 {
                    out.push_str(&format!("{s}\t{t}\t{d}\n"));
                }
            }
        }
        out
    }
}

/// `Tor^{BP_*}_{s,t}(M, F_p)` for `s <= s_max`, `t <= t_max`, from the
/// underlying module of `M`.
pub fn koszul_tor(m: &Comodule, s_max: u32, t_max: u32) -> TorTable {
    let kz = koszul(m, s_max, t_max);
    let r = ZpLocal { p: m.prime() };
    let mut groups = BTreeMap::new();
    for s in 0..=s_max {
        for t in 0..=t_max {
            let cell = &kz.cells[&(s, t)];
            let empty = KoszulCell { basis: Vec::new(), d: Vec::new(), relations: Vec::new() };
            let below = if s == 0 { &empty } else { &kz.cells[&(s - 1, t)] };
            let above = &kz.cells[&(s + 1, t)];
            let spot = Spot {
                n: cell.basis.len(),
                n_next: below.basis.len(),
                d_in: &above.d,
                d_out: &cell.d,
                rel: &cell.relations,
                rel_next: &below.relations,
            };
            let solver = LatticeSolver::new(r, &spot).expect("Koszul differential squares to zero");
            let mut torsion: Vec<u32> = solver.classes.iter().filter_map(|c| c.1).collect();
            torsion.sort_unstable();
            let free_rank = solver.classes.iter().filter(|c| c.1.is_none()).count();
            let shape = ModuleShape { free_rank, torsion };
            if !shape.is_zero() {
                groups.insert(TorTable::key(s, t), shape);
            }
        }
    }
    TorTable { module: m.name.clone(), prime: m.prime(), s_max, t_max, koszul_generators: kz.gens, groups }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevinVerdict {
    pub n: u32,
    pub vanishes: bool,
    /// Bidegrees `(s, t)` where the induced map is nonzero.
    pub witnesses: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevinReport {
    pub module: String,
    pub prime: u32,
    pub s_max: u32,
    pub t_max: u32,
    pub verdicts: Vec<LevinVerdict>,
}

impl LevinReport {
    pub fn vanishes(&self) -> bool {
        self.verdicts.iter().all(|v| v.vanishes)
    }
}

impl fmt::Display for LevinReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Levin index one for {} at p = {} (s <= {}, t <= {})", self.module, self.prime, self.s_max, self.t_max)?;
        for v in &self.verdicts {
            if v.vanishes {
                writeln!(f, "n = {}: vanishes below caps", v.n)?;
            } else {
                let w: Vec<String> = v.witnesses.iter().map(|(s, t)| format!("({s}, {t})")).collect();
                writeln!(f, "n = {}: non-vanishing map at {}", v.n, w.join(", "))?;
            }
        }
        if self.vanishes() {
            write!(f, "verdict: vanishes below caps")
        } else {
            write!(f, "verdict: non-vanishing map found")
        }
    }
}

fn filtration_gens(cell: &KoszulCell, n: u32, p: u32) -> Vec<SparseVec> {
    let ring = ScalarRing::Zp(p);
    let mut gens: Vec<SparseVec> = cell
        .basis
        .iter()
        .enumerate()
        .map(|(i, (b, _, _))| {
            let need = n.saturating_sub(b.total_exponent());
            (i, Scalar::from_i64(ring, p as i64).pow(need))
        })
        .map(|e| vec![e])
        .collect();
    gens.extend(cell.relations.iter().cloned());
    gens
}

/// For `1 <= n <= n_max`, whether `Tor(I^n M, F_p) -> Tor(I^{n-1} M, F_p)`
/// vanishes for `s <= s_max`, `t <= t_max`; by duality this is the map
/// `Ext(I^{n-1} M, F_p) -> Ext(I^n M, F_p)`.
pub fn levin_index_one(m: &Comodule, n_max: u32, s_max: u32, t_max: u32) -> LevinReport {
    let p = m.prime();
    let kz = koszul(m, s_max, t_max);
    let r = ZpLocal { p };
    let mut verdicts = Vec::new();
    for n in 1..=n_max {
        let mut witnesses = Vec::new();
        for s in 0..=s_max {
            for t in 0..=t_max {
                let cell = &kz.cells[&(s, t)];
                let dim = cell.basis.len();
                if dim == 0 {
                    continue;
                }
                let (nb, rel_below): (usize, &[SparseVec]) =
                    if s == 0 { (0, &[]) } else { (kz.cells[&(s - 1, t)].basis.len(), &kz.cells[&(s - 1, t)].relations) };
                let cycles = preimage(&r, dim, nb, &cell.d, rel_below);
                let level = Lattice::from_gens(&r, dim, &filtration_gens(cell, n, p).iter().map(|v| dense_vec(&r, dim, v)).collect::<Vec<_>>());
                let z = cycles.intersect(&r, &level);
                let above = &kz.cells[&(s + 1, t)];
                let mut b: Vec<Vec<_>> = cell.relations.iter().map(|v| dense_vec(&r, dim, v)).collect();
                for g in filtration_gens(above, n - 1, p) {
                    let mut img: SparseVec = Vec::new();
                    for (k, c) in &g {
                        img.extend(above.d[*k].iter().map(|(i, x)| (*i, x * c)));
                    }
                    b.push(dense_vec(&r, dim, &img));
                }
                let boundaries = Lattice::from_gens(&r, dim, &b);
                if !boundaries.contains_lattice(&r, &z) {
                    witnesses.push((s, t));
                }
            }
        }
        verdicts.push(LevinVerdict { n, vanishes: witnesses.is_empty(), witnesses });
    }
    LevinReport { module: m.name.clone(), prime: p, s_max, t_max, verdicts }
}
