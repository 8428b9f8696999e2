//! Finite discrete G-sets.
//!
//! A finite discrete G-set is a finite set whose action factors through
//! one of the tower levels. The level is always stored in its lowest
//! possible form, so two G-sets with the same action compare equal no
//! matter which level they were specified at.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profinite::{GroupElement, OpenSubgroup, Tower, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GSetError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("action row for group element {element} is not a permutation of 0..{size}")]
    NotPermutation { element: usize, size: usize },
    #[error("action is not a homomorphism at pair ({a}, {b})")]
    NotHomomorphism { a: usize, b: usize },
    #[error("action table has {got} rows, level has {expected} elements")]
    WrongRowCount { got: usize, expected: usize },
    #[error("generator images: {0}")]
    Generators(String),
    #[error("point {x} out of range for a G-set of size {size}")]
    OutOfRange { x: usize, size: usize },
    #[error("map is not equivariant: g = {g} (level {level}), x = {x}")]
    NotEquivariant { g: usize, level: usize, x: usize },
    #[error("map table has {got} entries for a domain of size {expected}")]
    WrongMapLength { got: usize, expected: usize },
    #[error("maps do not share a codomain")]
    CodomainMismatch,
    #[error("G-sets belong to different towers")]
    TowerMismatch,
}

/// Action given as a full table (one permutation per element of the
/// level) or as images of the level's greedy generating set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSpec {
    Table(Vec<Vec<usize>>),
    Generators(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSetSpec {
    pub size: usize,
    pub level: usize,
    pub action: ActionSpec,
}

#[derive(Clone)]
pub struct DiscreteGSet {
    tower: Arc<Tower>,
    level: usize,
    size: usize,
    /// `action[g][x]` is `g . x` for `g` in `L_level`.
    action: Vec<Vec<usize>>,
}

impl PartialEq for DiscreteGSet {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
            && self.size == other.size
            && self.action == other.action
            && (Arc::ptr_eq(&self.tower, &other.tower) || self.tower == other.tower)
    }
}

impl Eq for DiscreteGSet {}

impl Hash for DiscreteGSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.level.hash(state);
        self.size.hash(state);
        self.action.hash(state);
    }
}

impl fmt::Debug for DiscreteGSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteGSet")
            .field("size", &self.size)
            .field("level", &self.level)
            .field("action", &self.action)
            .finish()
    }
}

fn is_permutation(row: &[usize], n: usize) -> bool {
    if row.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &y in row {
        if y >= n || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    true
}

impl DiscreteGSet {
    pub fn from_table(
        tower: Arc<Tower>,
        level: usize,
        size: usize,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, GSetError> {
        tower.check_level(level)?;
        let group = tower.level(level);
        if table.len() != group.order() {
            return Err(GSetError::WrongRowCount {
                got: table.len(),
                expected: group.order(),
            });
        }
        if let Some(element) = table.iter().position(|r| !is_permutation(r, size)) {
            return Err(GSetError::NotPermutation { element, size });
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let ab = group.mul(a, b);
                if (0..size).any(|x| table[ab][x] != table[a][table[b][x]]) {
                    return Err(GSetError::NotHomomorphism { a, b });
                }
            }
        }
        Ok(Self::lowered(tower, level, size, table))
    }

    /// Action determined by the images of `tower.level(level).generators()`.
    pub fn from_generators(
        tower: Arc<Tower>,
        level: usize,
        size: usize,
        images: Vec<Vec<usize>>,
    ) -> Result<Self, GSetError> {
        tower.check_level(level)?;
        let group = tower.level(level);
        let gens = group.generators();
        if images.len() != gens.len() {
            return Err(GSetError::Generators(format!(
                "level {level} has {} generators {:?}, got {} images",
                gens.len(),
                gens,
                images.len()
            )));
        }
        if let Some(i) = images.iter().position(|r| !is_permutation(r, size)) {
            return Err(GSetError::NotPermutation {
                element: gens[i],
                size,
            });
        }
        let mut table: Vec<Option<Vec<usize>>> = vec![None; group.order()];
        table[group.identity()] = Some((0..size).collect());
        let mut queue = std::collections::VecDeque::from([group.identity()]);
        while let Some(g) = queue.pop_front() {
            let row_g = table[g].clone().unwrap();
            for (s, img) in gens.iter().zip(&images) {
                let gs = group.mul(g, *s);
                let row: Vec<usize> = (0..size).map(|x| row_g[img[x]]).collect();
                match &table[gs] {
                    None => {
                        table[gs] = Some(row);
                        queue.push_back(gs);
                    }
                    Some(existing) if *existing != row => {
                        return Err(GSetError::Generators(format!(
                            "images are inconsistent: element {gs} reached with two different permutations"
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
        let table = table
            .into_iter()
            .map(|r| r.expect("generators span the level"))
            .collect();
        Self::from_table(tower, level, size, table)
    }

    pub fn from_spec(tower: Arc<Tower>, spec: &GSetSpec) -> Result<Self, GSetError> {
        match &spec.action {
            ActionSpec::Table(t) => Self::from_table(tower, spec.level, spec.size, t.clone()),
            ActionSpec::Generators(g) => {
                Self::from_generators(tower, spec.level, spec.size, g.clone())
            }
        }
    }

    pub fn to_spec(&self) -> GSetSpec {
        GSetSpec {
            size: self.size,
            level: self.level,
            action: ActionSpec::Table(self.action.clone()),
        }
    }

    /// Drops to the lowest level whose kernel acts trivially.
    fn lowered(
        tower: Arc<Tower>,
        mut level: usize,
        size: usize,
        mut table: Vec<Vec<usize>>,
    ) -> Self {
        while level > 1 {
            let lower = tower.order(level - 1);
            let mut rows: Vec<Option<Vec<usize>>> = vec![None; lower];
            let mut ok = true;
            for (g, row) in table.iter().enumerate() {
                let pg = tower.project_index(level, level - 1, g);
                match &rows[pg] {
                    None => rows[pg] = Some(row.clone()),
                    Some(r) if r != row => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                }
            }
            if !ok {
                break;
            }
            table = rows.into_iter().map(Option::unwrap).collect();
            level -= 1;
        }
        DiscreteGSet {
            tower,
            level,
            size,
            action: table,
        }
    }

    pub fn trivial(tower: Arc<Tower>, size: usize) -> Self {
        let rows = tower.order(1);
        DiscreteGSet {
            tower,
            level: 1,
            size,
            action: vec![(0..size).collect(); rows],
        }
    }

    /// The terminal object `*`.
    pub fn point(tower: Arc<Tower>) -> Self {
        Self::trivial(tower, 1)
    }

    pub fn empty(tower: Arc<Tower>) -> Self {
        Self::trivial(tower, 0)
    }

    /// Left cosets `G/U` with left translation. The identity coset is
    /// point 0; the others follow in order of their least member.
    pub fn coset(tower: Arc<Tower>, u: &OpenSubgroup) -> Self {
        let level = u.level();
        let group = tower.level(level);
        let n = group.order();
        let mut coset_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&g| (g != group.identity(), g));
        for g in order {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let label = reps.len();
            reps.push(g);
            for &h in u.members() {
                coset_of[group.mul(g, h)] = label;
            }
        }
        let size = reps.len();
        let action = (0..n)
            .map(|g| reps.iter().map(|&r| coset_of[group.mul(g, r)]).collect())
            .collect();
        DiscreteGSet {
            tower,
            level,
            size,
            action,
        }
    }

    /// Disjoint union; points of `self` come first.
    pub fn coproduct(&self, other: &DiscreteGSet) -> Self {
        let level = self.level.max(other.level);
        let n = self.size;
        let table = (0..self.tower.order(level))
            .map(|g| {
                (0..n)
                    .map(|x| self.act_at(level, g, x))
                    .chain((0..other.size).map(|y| n + other.act_at(level, g, y)))
                    .collect()
            })
            .collect();
        Self::lowered(self.tower.clone(), level, n + other.size, table)
    }

    /// Same action transported along the bijection `x -> perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GSetError> {
        if !is_permutation(perm, self.size) {
            return Err(GSetError::NotPermutation {
                element: 0,
                size: self.size,
            });
        }
        let mut inv = vec![0; self.size];
        for (x, &px) in perm.iter().enumerate() {
            inv[px] = x;
        }
        let action = self
            .action
            .iter()
            .map(|row| (0..self.size).map(|y| perm[row[inv[y]]]).collect())
            .collect();
        Ok(DiscreteGSet {
            tower: self.tower.clone(),
            level: self.level,
            size: self.size,
            action,
        })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.action
    }

    pub fn is_trivial(&self) -> bool {
        self.action
            .iter()
            .all(|r| r.iter().enumerate().all(|(x, &y)| x == y))
    }

    /// `g . x` for `g` an element of `L_level`, `level >= self.level()`.
    #[inline]
    pub fn act_at(&self, level: usize, g: usize, x: usize) -> usize {
        self.action[self.tower.project_index(level, self.level, g)][x]
    }

    /// `gamma . x`.
    pub fn act(&self, gamma: &GroupElement, x: usize) -> Result<usize, GSetError> {
        self.tower.check(gamma)?;
        if x >= self.size {
            return Err(GSetError::OutOfRange { x, size: self.size });
        }
        Ok(self.action[gamma.coords()[self.level - 1]][x])
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.size];
        for row in &self.action {
            seen[row[x]] = true;
        }
        (0..self.size).filter(|&y| seen[y]).collect()
    }

    /// Point stabilizer `G_x`.
    pub fn stabilizer(&self, x: usize) -> OpenSubgroup {
        let members: Vec<usize> = (0..self.action.len())
            .filter(|&g| self.action[g][x] == x)
            .collect();
        self.tower
            .subgroup(self.level, &members)
            .expect("point stabilizers are subgroups")
    }

    /// Points fixed by every element of `u`.
    pub fn fixed_points(&self, u: &OpenSubgroup) -> Vec<usize> {
        let level = self.level.max(u.level());
        let members = u.pullback(&self.tower, level);
        (0..self.size)
            .filter(|&x| members.iter().all(|&g| self.act_at(level, g, x) == x))
            .collect()
    }

    /// Orbit decomposition with the explicit isomorphism
    /// `coprod G/U_i -> X`, `g U_i -> g . x_i`.
    pub fn orbits(&self) -> OrbitDecomposition {
        let mut assigned = vec![false; self.size];
        let mut orbits = Vec::new();
        for x in 0..self.size {
            if assigned[x] {
                continue;
            }
            let elements = self.orbit(x);
            for &y in &elements {
                assigned[y] = true;
            }
            orbits.push(Orbit {
                representative: x,
                stabilizer: self.stabilizer(x),
                elements,
            });
        }
        let mut model = DiscreteGSet::empty(self.tower.clone());
        let mut table = Vec::with_capacity(self.size);
        for orbit in &orbits {
            let cosets = DiscreteGSet::coset(self.tower.clone(), &orbit.stabilizer);
            let level = cosets.level.max(self.level);
            let mut part = vec![usize::MAX; cosets.size];
            for g in 0..self.tower.order(level) {
                part[cosets.act_at(level, g, 0)] = self.act_at(level, g, orbit.representative);
            }
            table.extend(part);
            model = model.coproduct(&cosets);
        }
        let iso = EquivariantMap::new(model, self.clone(), table)
            .expect("orbit map g U -> g x is equivariant");
        OrbitDecomposition { orbits, iso }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub representative: usize,
    pub stabilizer: OpenSubgroup,
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct OrbitDecomposition {
    pub orbits: Vec<Orbit>,
    /// Equivariant map from the disjoint union of coset sets onto `X`.
    pub iso: EquivariantMap,
}

impl OrbitDecomposition {
    pub fn is_bijective(&self) -> bool {
        self.iso.domain.size == self.iso.codomain.size
            && is_permutation(&self.iso.table, self.iso.codomain.size)
    }
}

/// Equivariant map between finite G-sets; equivariance is checked on
/// construction over every element of the join level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquivariantMap {
    domain: DiscreteGSet,
    codomain: DiscreteGSet,
    table: Vec<usize>,
}

impl EquivariantMap {
    pub fn new(
        domain: DiscreteGSet,
        codomain: DiscreteGSet,
        table: Vec<usize>,
    ) -> Result<Self, GSetError> {
        if !Arc::ptr_eq(&domain.tower, &codomain.tower) && domain.tower != codomain.tower {
            return Err(GSetError::TowerMismatch);
        }
        if table.len() != domain.size {
            return Err(GSetError::WrongMapLength {
                got: table.len(),
                expected: domain.size,
            });
        }
        if let Some(&y) = table.iter().find(|&&y| y >= codomain.size) {
            return Err(GSetError::OutOfRange {
                x: y,
                size: codomain.size,
            });
        }
        let level = domain.level.max(codomain.level);
        for g in 0..domain.tower.order(level) {
            for x in 0..domain.size {
                if table[domain.act_at(level, g, x)] != codomain.act_at(level, g, table[x]) {
                    return Err(GSetError::NotEquivariant { g, level, x });
                }
            }
        }
        Ok(EquivariantMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn identity(x: &DiscreteGSet) -> Self {
        EquivariantMap {
            domain: x.clone(),
            codomain: x.clone(),
            table: (0..x.size).collect(),
        }
    }

    pub fn domain(&self) -> &DiscreteGSet {
        &self.domain
    }

    pub fn codomain(&self) -> &DiscreteGSet {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `self . other` (apply `other` first).
    pub fn after(&self, other: &EquivariantMap) -> Option<EquivariantMap> {
        if other.codomain != self.domain {
            return None;
        }
        Some(EquivariantMap {
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            table: other.table.iter().map(|&y| self.table[y]).collect(),
        })
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.codomain.size];
        for &y in &self.table {
            hit[y] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_bijective(&self) -> bool {
        self.domain.size == self.codomain.size && self.is_surjective()
    }
}

/// All equivariant maps `X -> Y`: each orbit representative `x_i` may go
/// to any `y` fixed by its stabilizer, and the rest of the orbit follows.
/// Maps are listed in lexicographic order of the representative images.
pub fn enumerate_equivariant_maps(x: &DiscreteGSet, y: &DiscreteGSet) -> Vec<EquivariantMap> {
    let decomposition = x.orbits();
    let choices: Vec<Vec<usize>> = decomposition
        .orbits
        .iter()
        .map(|o| y.fixed_points(&o.stabilizer))
        .collect();
    if choices.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let level = x.level.max(y.level);
    let order = x.tower.order(level);
    let mut out = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let mut table = vec![0; x.size];
        for (orbit, (c, &k)) in decomposition.orbits.iter().zip(choices.iter().zip(&pick)) {
            for g in 0..order {
                table[x.act_at(level, g, orbit.representative)] = y.act_at(level, g, c[k]);
            }
        }
        out.push(
            EquivariantMap::new(x.clone(), y.clone(), table)
                .expect("stabilizer-compatible choice is equivariant"),
        );
        // odometer, last orbit fastest
        let mut i = pick.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Fibre product of finite G-sets.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub object: DiscreteGSet,
    /// The pairs `(x, y)` in lexicographic order; point `k` is `pairs[k]`.
    pub pairs: Vec<(usize, usize)>,
    pub left: EquivariantMap,
    pub right: EquivariantMap,
}

/// `X x_Z Y = {(x, y) : f(x) = g(y)}` with the diagonal action.
pub fn pullback_finite(f: &EquivariantMap, g: &EquivariantMap) -> Result<Pullback, GSetError> {
    if f.codomain != g.codomain {
        return Err(GSetError::CodomainMismatch);
    }
    let (x, y) = (&f.domain, &g.domain);
    let pairs: Vec<(usize, usize)> = (0..x.size)
        .flat_map(|a| (0..y.size).map(move |b| (a, b)))
        .filter(|&(a, b)| f.table[a] == g.table[b])
        .collect();
    let index: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let level = x.level.max(y.level);
    let table = (0..x.tower.order(level))
        .map(|h| {
            pairs
                .iter()
                .map(|&(a, b)| index[&(x.act_at(level, h, a), y.act_at(level, h, b))])
                .collect()
        })
        .collect();
    let object = DiscreteGSet::lowered(x.tower.clone(), level, pairs.len(), table);
    let left = EquivariantMap::new(
        object.clone(),
        x.clone(),
        pairs.iter().map(|p| p.0).collect(),
    )?;
    let right = EquivariantMap::new(
        object.clone(),
        y.clone(),
        pairs.iter().map(|p| p.1).collect(),
    )?;
    Ok(Pullback {
        object,
        pairs,
        left,
        right,
    })
}
