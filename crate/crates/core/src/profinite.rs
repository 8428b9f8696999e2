//! Depth-truncated profinite groups.
//!
//! An infinite profinite group `G = lim L_i` is represented by the first `d`
//! quotients `L_1 <- L_2 <- ... <- L_d` together with the surjective
//! transition homomorphisms between consecutive levels. Elements of `G` are
//! compatible coordinate tuples; open subgroups are subgroups of some level,
//! kept in a normal form so that equal open subgroups compare equal.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("level {level}: {reason}")]
    InvalidTable { level: usize, reason: String },
    #[error("transition {level}+1 -> {level} is not a homomorphism at pair ({a}, {b})")]
    NotHomomorphism { level: usize, a: usize, b: usize },
    #[error("transition {level}+1 -> {level} is not surjective: element {missing} of level {level} has no preimage")]
    NotSurjective { level: usize, missing: usize },
    #[error("level {level} has order {order}, smaller than level {below} (order {below_order})")]
    OrderDecrease {
        level: usize,
        order: usize,
        below: usize,
        below_order: usize,
    },
    #[error("level {level} out of range 1..={depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("coordinates {coords:?} are not compatible at level {level}")]
    IncompatibleElement { coords: Vec<usize>, level: usize },
    #[error("subset of level {level} is not a subgroup: {reason}")]
    NotSubgroup { level: usize, reason: String },
    #[error("malformed tower specification: {0}")]
    Spec(String),
}

/// A finite group given by its full multiplication table on `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Builds a group from a Cayley table, checking closure, identity,
    /// inverses and associativity by full enumeration.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self, String> {
        let n = table.len();
        if n == 0 {
            return Err("empty multiplication table".into());
        }
        let mut mul = Vec::with_capacity(n * n);
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(format!("row {a} has length {} instead of {n}", row.len()));
            }
            for (b, &c) in row.iter().enumerate() {
                if c >= n {
                    return Err(format!("entry {a}*{b} = {c} out of range"));
                }
                mul.push(c);
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul[e * n + a] == a && mul[a * n + e] == a))
            .ok_or_else(|| "no two-sided identity".to_string())?;
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a * n + b] == identity && mul[b * n + a] == identity)
                .ok_or_else(|| format!("element {a} has no inverse"))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a * n + b];
                for c in 0..n {
                    if mul[ab * n + c] != mul[a * n + mul[b * n + c]] {
                        return Err(format!("associativity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            order: n,
            mul,
            inv,
            identity,
        })
    }

    pub fn trivial() -> Self {
        FiniteGroup {
            order: 1,
            mul: vec![0],
            inv: vec![0],
            identity: 0,
        }
    }

    /// Additive cyclic group `Z/n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        let mul = (0..n * n).map(|k| (k / n + k % n) % n).collect();
        let inv = (0..n).map(|a| (n - a) % n).collect();
        FiniteGroup {
            order: n,
            mul,
            inv,
            identity: 0,
        }
    }

    /// Symmetric group on `n` letters. Elements are the permutations in
    /// lexicographic order (index 0 is the identity) and `a * b` is the
    /// composite "first `b`, then `a`".
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
        let order = perms.len();
        let mut mul = Vec::with_capacity(order * order);
        for a in &perms {
            for b in &perms {
                let ab: Vec<usize> = (0..n).map(|i| a[b[i]]).collect();
                mul.push(index(&ab));
            }
        }
        let inv = perms
            .iter()
            .map(|p| {
                let mut q = vec![0; n];
                for (i, &pi) in p.iter().enumerate() {
                    q[pi] = i;
                }
                index(&q)
            })
            .collect();
        FiniteGroup {
            order,
            mul,
            inv,
            identity: 0,
        }
    }

    /// Direct product; the pair `(a, b)` has index `a * |other| + b`.
    pub fn product(&self, other: &FiniteGroup) -> Self {
        let m = other.order;
        let order = self.order * m;
        let mut mul = Vec::with_capacity(order * order);
        for x in 0..order {
            for y in 0..order {
                let a = self.mul(x / m, y / m);
                let b = other.mul(x % m, y % m);
                mul.push(a * m + b);
            }
        }
        let inv = (0..order)
            .map(|x| self.inv(x / m) * m + other.inv(x % m))
            .collect();
        FiniteGroup {
            order,
            mul,
            inv,
            identity: self.identity * m + other.identity,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// Subgroup generated by `gens`, as a sorted list.
    pub fn closure(&self, gens: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[self.identity] = true;
        let gens: Vec<usize> = gens.into_iter().collect();
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&x| seen[x]).collect()
    }

    /// Greedy generating set: scan elements in index order and keep each
    /// one not already in the span of those kept.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![self.identity];
        for x in 0..self.order {
            if span.binary_search(&x).is_err() {
                gens.push(x);
                span = self.closure(gens.iter().copied());
            }
        }
        gens
    }

    pub fn is_subgroup(&self, members: &[usize]) -> Result<(), String> {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        if !set.contains(&self.identity) {
            return Err("identity missing".into());
        }
        if let Some(&x) = set.iter().find(|&&x| x >= self.order) {
            return Err(format!("element {x} out of range"));
        }
        for &a in &set {
            if !set.contains(&self.inv(a)) {
                return Err(format!("inverse of {a} missing"));
            }
            for &b in &set {
                if !set.contains(&self.mul(a, b)) {
                    return Err(format!("product {a}*{b} missing"));
                }
            }
        }
        Ok(())
    }

    /// Every subgroup, each as a sorted member list, ordered by
    /// (order, members). Found by closing known subgroups under one more
    /// element until nothing new appears.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let trivial = vec![self.identity];
        found.insert(trivial.clone());
        let mut queue = VecDeque::from([trivial]);
        while let Some(h) = queue.pop_front() {
            for x in 0..self.order {
                if h.binary_search(&x).is_ok() {
                    continue;
                }
                let k = self.closure(h.iter().copied().chain([x]));
                if found.insert(k.clone()) {
                    queue.push_back(k);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Element of the truncated group: one coordinate per level, lowest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    coords: Vec<usize>,
}

impl GroupElement {
    /// Wraps raw coordinates without checking compatibility; the tower
    /// operations reject incompatible tuples.
    pub fn from_coords(coords: Vec<usize>) -> Self {
        GroupElement { coords }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// Index at the top level, which determines the element.
    pub fn top(&self) -> usize {
        *self.coords.last().expect("element of a depth-0 tower")
    }
}

/// Open subgroup in normal form: stored at the lowest level of which it is
/// the full preimage, members sorted. Two open subgroups are equal exactly
/// when their pullbacks to the top level agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpenSubgroup {
    level: usize,
    members: Vec<usize>,
}

impl OpenSubgroup {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains_local(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// `[G : U]`, which equals `[L_level : members]`.
    pub fn index(&self, tower: &Tower) -> usize {
        tower.order(self.level) / self.members.len()
    }

    /// Whether the element `x` of level `level` (>= self.level) lies in U.
    pub fn contains_at(&self, tower: &Tower, level: usize, x: usize) -> bool {
        self.contains_local(tower.project_index(level, self.level, x))
    }

    /// Members of the preimage of U in `L_level`.
    pub fn pullback(&self, tower: &Tower, level: usize) -> Vec<usize> {
        assert!(level >= self.level);
        (0..tower.order(level))
            .filter(|&x| self.contains_at(tower, level, x))
            .collect()
    }

    pub fn is_subgroup_of(&self, tower: &Tower, other: &OpenSubgroup) -> bool {
        let level = self.level.max(other.level);
        self.pullback(tower, level)
            .into_iter()
            .all(|x| other.contains_at(tower, level, x))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// One Cayley table per level, lowest level first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Vec<Vec<usize>>>>,
    /// `transitions[i]` maps level `i + 2` onto level `i + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<TowerSpec>>,
}

impl TowerSpec {
    pub fn cyclic(p: usize, depth: usize) -> Self {
        TowerSpec {
            kind: "cyclic_p".into(),
            p: Some(p),
            depth: Some(depth),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, TowerError> {
        serde_json::from_str(text).map_err(|e| TowerError::Spec(e.to_string()))
    }
}

/// Truncated inverse system `L_1 <- ... <- L_d`. Levels are 1-based in
/// every public method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    levels: Vec<FiniteGroup>,
    transitions: Vec<Vec<usize>>,
}

impl Tower {
    pub fn new(levels: Vec<FiniteGroup>, transitions: Vec<Vec<usize>>) -> Result<Self, TowerError> {
        if levels.is_empty() {
            return Err(TowerError::Spec("tower needs depth >= 1".into()));
        }
        if transitions.len() + 1 != levels.len() {
            return Err(TowerError::Spec(format!(
                "{} levels need {} transitions, got {}",
                levels.len(),
                levels.len() - 1,
                transitions.len()
            )));
        }
        for (i, t) in transitions.iter().enumerate() {
            let (lower, upper) = (&levels[i], &levels[i + 1]);
            let level = i + 1;
            if upper.order() < lower.order() {
                return Err(TowerError::OrderDecrease {
                    level: level + 1,
                    order: upper.order(),
                    below: level,
                    below_order: lower.order(),
                });
            }
            if t.len() != upper.order() {
                return Err(TowerError::InvalidTable {
                    level: level + 1,
                    reason: format!(
                        "transition has {} entries, level has {} elements",
                        t.len(),
                        upper.order()
                    ),
                });
            }
            if let Some(&bad) = t.iter().find(|&&x| x >= lower.order()) {
                return Err(TowerError::InvalidTable {
                    level,
                    reason: format!("transition value {bad} out of range"),
                });
            }
            for a in 0..upper.order() {
                for b in 0..upper.order() {
                    if t[upper.mul(a, b)] != lower.mul(t[a], t[b]) {
                        return Err(TowerError::NotHomomorphism { level, a, b });
                    }
                }
            }
            let mut hit = vec![false; lower.order()];
            for &x in t {
                hit[x] = true;
            }
            if let Some(missing) = hit.iter().position(|h| !h) {
                return Err(TowerError::NotSurjective { level, missing });
            }
        }
        Ok(Tower {
            levels,
            transitions,
        })
    }

    /// `Z/p <- Z/p^2 <- ... <- Z/p^depth` with reduction maps.
    pub fn cyclic_p(p: usize, depth: usize) -> Result<Self, TowerError> {
        if p < 2 || (2..p).any(|q| q * q <= p && p.is_multiple_of(q)) {
            return Err(TowerError::Spec(format!("p = {p} is not prime")));
        }
        if depth == 0 {
            return Err(TowerError::Spec("tower needs depth >= 1".into()));
        }
        let mut levels = Vec::with_capacity(depth);
        let mut transitions = Vec::with_capacity(depth - 1);
        let mut n = 1usize;
        for i in 0..depth {
            n = n
                .checked_mul(p)
                .ok_or_else(|| TowerError::Spec("cyclic tower too large".into()))?;
            levels.push(FiniteGroup::cyclic(n));
            if i > 0 {
                let below = n / p;
                transitions.push((0..n).map(|x| x % below).collect());
            }
        }
        Tower::new(levels, transitions)
    }

    /// The same finite group at every level with identity transitions.
    pub fn constant(group: FiniteGroup, depth: usize) -> Result<Self, TowerError> {
        if depth == 0 {
            return Err(TowerError::Spec("tower needs depth >= 1".into()));
        }
        let id: Vec<usize> = (0..group.order()).collect();
        Tower::new(vec![group; depth], vec![id; depth - 1])
    }

    /// Levelwise direct product. Shorter factors are extended by repeating
    /// their top level with identity transitions.
    pub fn product(factors: &[Tower]) -> Result<Self, TowerError> {
        let Some(first) = factors.first() else {
            return Err(TowerError::Spec("product of zero towers".into()));
        };
        let depth = factors.iter().map(Tower::depth).max().unwrap();
        let padded: Vec<Tower> = factors.iter().map(|t| t.padded(depth)).collect();
        let mut acc = first.padded(depth);
        for t in &padded[1..] {
            let levels = (0..depth)
                .map(|i| acc.levels[i].product(&t.levels[i]))
                .collect();
            let transitions = (0..depth - 1)
                .map(|i| {
                    let m_hi = t.levels[i + 1].order();
                    let m_lo = t.levels[i].order();
                    (0..acc.levels[i + 1].order() * m_hi)
                        .map(|x| acc.transitions[i][x / m_hi] * m_lo + t.transitions[i][x % m_hi])
                        .collect()
                })
                .collect();
            acc = Tower::new(levels, transitions)?;
        }
        Ok(acc)
    }

    fn padded(&self, depth: usize) -> Tower {
        let mut t = self.clone();
        while t.levels.len() < depth {
            let top = t.levels.last().unwrap().clone();
            t.transitions.push((0..top.order()).collect());
            t.levels.push(top);
        }
        t
    }

    pub fn from_spec(spec: &TowerSpec) -> Result<Self, TowerError> {
        match spec.kind.as_str() {
            "cyclic_p" => {
                let p = spec
                    .p
                    .ok_or_else(|| TowerError::Spec("cyclic_p needs field `p`".into()))?;
                let depth = spec
                    .depth
                    .ok_or_else(|| TowerError::Spec("cyclic_p needs field `depth`".into()))?;
                Tower::cyclic_p(p, depth)
            }
            "explicit" => {
                let tables = spec
                    .levels
                    .as_ref()
                    .ok_or_else(|| TowerError::Spec("explicit needs field `levels`".into()))?;
                let levels = tables
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        FiniteGroup::from_table(t).map_err(|reason| TowerError::InvalidTable {
                            level: i + 1,
                            reason,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(d) = spec.depth {
                    if d != levels.len() {
                        return Err(TowerError::Spec(format!(
                            "depth {d} but {} levels given",
                            levels.len()
                        )));
                    }
                }
                let transitions = spec.transitions.clone().unwrap_or_default();
                Tower::new(levels, transitions)
            }
            "product" => {
                let factors = spec
                    .factors
                    .as_ref()
                    .ok_or_else(|| TowerError::Spec("product needs field `factors`".into()))?;
                let towers = factors
                    .iter()
                    .map(Tower::from_spec)
                    .collect::<Result<Vec<_>, _>>()?;
                let t = Tower::product(&towers)?;
                match spec.depth {
                    Some(d) if d <= t.depth() => t.truncate(d),
                    Some(d) => Err(TowerError::Spec(format!(
                        "depth {d} exceeds product depth {}",
                        t.depth()
                    ))),
                    None => Ok(t),
                }
            }
            other => Err(TowerError::Spec(format!("unknown tower kind `{other}`"))),
        }
    }

    /// Keeps the first `depth` levels.
    pub fn truncate(&self, depth: usize) -> Result<Self, TowerError> {
        if depth == 0 || depth > self.depth() {
            return Err(TowerError::LevelOutOfRange {
                level: depth,
                depth: self.depth(),
            });
        }
        Ok(Tower {
            levels: self.levels[..depth].to_vec(),
            transitions: self.transitions[..depth - 1].to_vec(),
        })
    }

    /// Explicit specification reproducing this tower exactly.
    pub fn to_spec(&self) -> TowerSpec {
        TowerSpec {
            kind: "explicit".into(),
            depth: Some(self.depth()),
            levels: Some(self.levels.iter().map(FiniteGroup::table).collect()),
            transitions: Some(self.transitions.clone()),
            ..Default::default()
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn check_level(&self, level: usize) -> Result<(), TowerError> {
        if level == 0 || level > self.depth() {
            Err(TowerError::LevelOutOfRange {
                level,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    /// The finite quotient `L_level`.
    pub fn level(&self, level: usize) -> &FiniteGroup {
        &self.levels[level - 1]
    }

    pub fn order(&self, level: usize) -> usize {
        self.levels[level - 1].order()
    }

    pub fn top_order(&self) -> usize {
        self.levels.last().unwrap().order()
    }

    /// Image of `x` in `L_from` under the composite transition down to `L_to`.
    pub fn project_index(&self, from: usize, to: usize, mut x: usize) -> usize {
        assert!(to <= from, "cannot project level {from} up to {to}");
        for l in (to..from).rev() {
            x = self.transitions[l - 1][x];
        }
        x
    }

    /// Full coordinate tuple of the element with top-level index `top`.
    pub fn element_from_top(&self, top: usize) -> GroupElement {
        let d = self.depth();
        let mut coords = vec![0; d];
        coords[d - 1] = top;
        for l in (1..d).rev() {
            coords[l - 1] = self.transitions[l - 1][coords[l]];
        }
        GroupElement { coords }
    }

    /// Lift of an element of `L_level` (the least top-level preimage).
    pub fn lift(&self, level: usize, x: usize) -> GroupElement {
        let d = self.depth();
        let top = (0..self.top_order())
            .find(|&t| self.project_index(d, level, t) == x)
            .expect("transitions are surjective");
        self.element_from_top(top)
    }

    /// All elements of the truncated group, in top-index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.top_order()).map(|t| self.element_from_top(t))
    }

    /// Validates a coordinate tuple.
    pub fn element(&self, coords: Vec<usize>) -> Result<GroupElement, TowerError> {
        let el = GroupElement { coords };
        self.check(&el)?;
        Ok(el)
    }

    pub fn check(&self, el: &GroupElement) -> Result<(), TowerError> {
        let c = &el.coords;
        if c.len() != self.depth() {
            return Err(TowerError::IncompatibleElement {
                coords: c.clone(),
                level: c.len().min(self.depth()),
            });
        }
        for (i, (&x, g)) in c.iter().zip(&self.levels).enumerate() {
            if x >= g.order() {
                return Err(TowerError::IncompatibleElement {
                    coords: c.clone(),
                    level: i + 1,
                });
            }
        }
        for i in 0..c.len() - 1 {
            if self.transitions[i][c[i + 1]] != c[i] {
                return Err(TowerError::IncompatibleElement {
                    coords: c.clone(),
                    level: i + 1,
                });
            }
        }
        Ok(())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: self.levels.iter().map(FiniteGroup::identity).collect(),
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, TowerError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub(crate) fn mul_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            coords: self
                .levels
                .iter()
                .zip(a.coords.iter().zip(&b.coords))
                .map(|(g, (&x, &y))| g.mul(x, y))
                .collect(),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> Result<GroupElement, TowerError> {
        self.check(a)?;
        Ok(self.inv_unchecked(a))
    }

    pub(crate) fn inv_unchecked(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            coords: self
                .levels
                .iter()
                .zip(&a.coords)
                .map(|(g, &x)| g.inv(x))
                .collect(),
        }
    }

    /// Coordinate of `el` at `level`.
    pub fn project(&self, el: &GroupElement, level: usize) -> Result<usize, TowerError> {
        self.check_level(level)?;
        self.check(el)?;
        Ok(el.coords[level - 1])
    }

    /// Builds the open subgroup with the given members at `level`, checking
    /// closure and moving it to its normal-form level.
    pub fn subgroup(&self, level: usize, members: &[usize]) -> Result<OpenSubgroup, TowerError> {
        self.check_level(level)?;
        self.level(level)
            .is_subgroup(members)
            .map_err(|reason| TowerError::NotSubgroup { level, reason })?;
        let set: BTreeSet<usize> = members.iter().copied().collect();
        Ok(self.normalize(level, set.into_iter().collect()))
    }

    fn normalize(&self, mut level: usize, mut members: Vec<usize>) -> OpenSubgroup {
        while level > 1 {
            let kernel = self.order(level) / self.order(level - 1);
            let image: BTreeSet<usize> = members
                .iter()
                .map(|&x| self.transitions[level - 2][x])
                .collect();
            if image.len() * kernel != members.len() {
                break;
            }
            members = image.into_iter().collect();
            level -= 1;
        }
        OpenSubgroup { level, members }
    }

    /// `G` itself as an open subgroup.
    pub fn full_subgroup(&self) -> OpenSubgroup {
        OpenSubgroup {
            level: 1,
            members: (0..self.order(1)).collect(),
        }
    }

    /// Kernel of `G -> L_level`.
    pub fn kernel_subgroup(&self, level: usize) -> Result<OpenSubgroup, TowerError> {
        self.check_level(level)?;
        let e = self.level(level).identity();
        self.subgroup(level, &[e])
    }

    /// Every subgroup of `L_level`, as open subgroups in normal form,
    /// ordered by decreasing index then members.
    pub fn enumerate_open_subgroups(&self, level: usize) -> Result<Vec<OpenSubgroup>, TowerError> {
        self.check_level(level)?;
        Ok(self
            .level(level)
            .subgroups()
            .into_iter()
            .map(|h| self.normalize(level, h))
            .collect())
    }

    /// Number of subgroups of each level `L_1, ..., L_d`.
    pub fn subgroup_count_growth(&self) -> Vec<usize> {
        self.levels.iter().map(|g| g.subgroups().len()).collect()
    }
}
