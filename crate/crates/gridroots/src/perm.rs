//! Permutations and permutation-group order via a stabilizer chain.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Permutation of 0..n-1. Composition is left-to-right:
/// `a.compose(&b)` applies `a` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Perm {
    map: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            map: (0..n).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Perm> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::Config("not a bijection on 0..n-1".into()));
            }
            seen[v] = true;
        }
        Ok(Perm { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.n(), other.n());
        Perm {
            map: self.map.iter().map(|&x| other.map[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        Perm { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn smallest_moved(&self) -> Option<usize> {
        self.map.iter().enumerate().find(|(x, &y)| *x != y).map(|(x, _)| x)
    }

    /// Cycle notation for diagnostics; identity prints "()".
    pub fn cycles(&self) -> String {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.map[start] == start {
                seen[start] = true;
                continue;
            }
            out.push('(');
            let mut x = start;
            loop {
                seen[x] = true;
                out.push_str(&x.to_string());
                x = self.map[x];
                if x == start {
                    break;
                }
                out.push(' ');
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

/// Orbits of 0..n-1 under the generated group, each sorted, ordered by
/// smallest element.
pub fn orbits(gens: &[Perm], n: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut queue = vec![start];
        while let Some(p) = queue.pop() {
            for g in gens {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    orbit.push(q);
                    queue.push(q);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// True when every generator maps every block onto some block of the
/// partition (blocks need not cover all points).
pub fn preserves_partition(gens: &[Perm], blocks: &[Vec<usize>]) -> bool {
    let sorted: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut s = b.clone();
            s.sort_unstable();
            s
        })
        .collect();
    gens.iter().all(|g| {
        sorted.iter().all(|b| {
            let mut img: Vec<usize> = b.iter().map(|&x| g.apply(x)).collect();
            img.sort_unstable();
            sorted.contains(&img)
        })
    })
}

struct Level {
    /// orbit point -> u with u(base[k]) = orbit point, in BFS discovery order
    transversal: HashMap<usize, Perm>,
    orbit: Vec<usize>,
}

/// Stabilizer chain built by the deterministic incremental method: strong
/// generators are stripped residuals, and levels are re-verified until
/// every Schreier generator sifts to the identity.
pub struct StabChain {
    n: usize,
    base: Vec<usize>,
    levels: Vec<Level>,
    /// strong generator plus the deepest level whose base prefix it fixes
    sgs: Vec<(Perm, usize)>,
}

impl StabChain {
    pub fn new(gens: &[Perm], n: usize) -> StabChain {
        let mut chain = StabChain {
            n,
            base: Vec::new(),
            levels: Vec::new(),
            sgs: Vec::new(),
        };
        for g in gens {
            chain.insert(g.clone(), 0);
        }
        chain.verify();
        chain
    }

    fn gens_at(&self, k: usize) -> Vec<&Perm> {
        self.sgs
            .iter()
            .filter(|(_, lvl)| *lvl >= k)
            .map(|(g, _)| g)
            .collect()
    }

    fn rebuild_orbit(&mut self, k: usize) {
        let point = self.base[k];
        let gens: Vec<Perm> = self.gens_at(k).into_iter().cloned().collect();
        let mut transversal = HashMap::new();
        transversal.insert(point, Perm::identity(self.n));
        let mut orbit = vec![point];
        let mut head = 0;
        while head < orbit.len() {
            let p = orbit[head];
            head += 1;
            let up = transversal[&p].clone();
            for s in &gens {
                let q = s.apply(p);
                if !transversal.contains_key(&q) {
                    transversal.insert(q, up.compose(s));
                    orbit.push(q);
                }
            }
        }
        self.levels[k] = Level { transversal, orbit };
    }

    /// Reduces g through the transversals starting at `start`; returns the
    /// residual and the level where reduction stopped.
    fn strip(&self, mut g: Perm, start: usize) -> (Perm, usize) {
        let mut level = start;
        while level < self.base.len() {
            if g.is_identity() {
                return (g, level);
            }
            let img = g.apply(self.base[level]);
            match self.levels[level].transversal.get(&img) {
                Some(u) => {
                    g = g.compose(&u.inverse());
                    level += 1;
                }
                None => break,
            }
        }
        (g, level)
    }

    fn insert(&mut self, g: Perm, start: usize) -> bool {
        let (h, level) = self.strip(g, start);
        if h.is_identity() {
            return false;
        }
        if level == self.base.len() {
            let b = h.smallest_moved().expect("non-identity moves a point");
            self.base.push(b);
            self.levels.push(Level {
                transversal: HashMap::new(),
                orbit: Vec::new(),
            });
        }
        self.sgs.push((h, level));
        for k in 0..=level.min(self.base.len() - 1) {
            self.rebuild_orbit(k);
        }
        true
    }

    /// Fixpoint pass: any Schreier generator that fails to sift becomes a
    /// new strong generator; each insertion grows some orbit, so the loop
    /// terminates within log2(|G|) insertions.
    fn verify(&mut self) {
        'outer: loop {
            for k in 0..self.base.len() {
                let orbit = self.levels[k].orbit.clone();
                let gens: Vec<Perm> = self.gens_at(k).into_iter().cloned().collect();
                for p in &orbit {
                    let up = self.levels[k].transversal[p].clone();
                    for s in &gens {
                        let q = s.apply(*p);
                        let uq = self.levels[k].transversal[&q].clone();
                        let schreier = up.compose(s).compose(&uq.inverse());
                        if self.insert(schreier, k + 1) {
                            continue 'outer;
                        }
                    }
                }
            }
            return;
        }
    }

    pub fn order(&self) -> BigUint {
        let mut ord = BigUint::from(1u32);
        for lvl in &self.levels {
            ord *= BigUint::from(lvl.orbit.len());
        }
        ord
    }
}

/// Order of the group generated by `gens` acting on 0..n-1.
pub fn group_order(gens: &[Perm], n: usize) -> BigUint {
    StabChain::new(gens, n).order()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn transposition(n: usize, a: usize, b: usize) -> Perm {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Perm::from_map(map).unwrap()
    }

    #[test]
    fn compose_is_left_to_right() {
        let a = transposition(3, 0, 1);
        let b = transposition(3, 1, 2);
        let ab = a.compose(&b);
        // 0 -a-> 1 -b-> 2
        assert_eq!(ab.apply(0), 2);
        assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Perm::from_map(vec![0, 0, 1]).is_err());
        assert!(Perm::from_map(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn symmetric_group_small() {
        let gens = vec![
            transposition(4, 0, 1),
            transposition(4, 1, 2),
            transposition(4, 2, 3),
        ];
        assert_eq!(group_order(&gens, 4), BigUint::from(24u32));
    }

    #[test]
    fn symmetric_group_on_twenty_points() {
        let cycle = Perm::from_map((0..20).map(|i| (i + 1) % 20).collect()).unwrap();
        let gens = vec![cycle, transposition(20, 0, 1)];
        let want = BigUint::from_str("2432902008176640000").unwrap();
        assert_eq!(group_order(&gens, 20), want);
    }

    #[test]
    fn signed_permutation_group_order() {
        // six blocks {2k, 2k+1}: block swaps plus one flip generate a group
        // of order 2^6 * 6! = 46080
        let n = 12;
        let mut gens = vec![transposition(n, 0, 1)];
        for k in 0..5 {
            let mut map: Vec<usize> = (0..n).collect();
            map.swap(2 * k, 2 * k + 2);
            map.swap(2 * k + 1, 2 * k + 3);
            gens.push(Perm::from_map(map).unwrap());
        }
        assert_eq!(group_order(&gens, n), BigUint::from(46080u32));
        let blocks: Vec<Vec<usize>> = (0..6).map(|k| vec![2 * k, 2 * k + 1]).collect();
        assert!(preserves_partition(&gens, &blocks));
        assert_eq!(orbits(&gens, n).len(), 1);
    }

    #[test]
    fn partition_violations_are_detected() {
        let gens = vec![transposition(4, 1, 2)];
        let blocks = vec![vec![0, 1], vec![2, 3]];
        assert!(!preserves_partition(&gens, &blocks));
    }

    #[test]
    fn orbit_structure_of_identity() {
        let gens = vec![Perm::identity(5)];
        let obs = orbits(&gens, 5);
        assert_eq!(obs.len(), 5);
        assert!(obs.iter().all(|o| o.len() == 1));
    }

    #[test]
    fn cycle_notation() {
        let p = Perm::from_map(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(p.cycles(), "(0 1 2)");
        assert_eq!(Perm::identity(3).cycles(), "()");
    }
}
