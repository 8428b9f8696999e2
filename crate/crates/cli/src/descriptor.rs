//! Object descriptors:
//!
//! ```text
//! G                 the profinite group itself
//! * | point         one-point set
//! empty             empty set
//! trivial(n)        n points, trivial action
//! coset(l:a,b,..)   G/U, U generated by a,b,.. in level l
//! quot(l)           G/U_l, U_l the kernel of the projection to level l
//! @file.json        a G-set spec file
//! A + B             coproduct of finite objects
//! ```

use std::sync::Arc;

use gsite_core::{DiscreteGSet, GSetSpec, RObject, Tower};

pub fn parse_object(tower: &Arc<Tower>, text: &str) -> Result<RObject, String> {
    let text = text.trim();
    if text == "G" {
        return Ok(RObject::Group);
    }
    let mut acc = DiscreteGSet::empty(tower.clone());
    for part in text.split('+') {
        let part = part.trim();
        if part == "G" {
            return Err("G cannot appear in a coproduct".into());
        }
        acc = acc.coproduct(&parse_finite(tower, part)?);
    }
    Ok(RObject::Finite(acc))
}

fn parse_finite(tower: &Arc<Tower>, part: &str) -> Result<DiscreteGSet, String> {
    if part == "*" || part == "point" {
        return Ok(DiscreteGSet::point(tower.clone()));
    }
    if part == "empty" {
        return Ok(DiscreteGSet::empty(tower.clone()));
    }
    if let Some(path) = part.strip_prefix('@') {
        let body = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let spec: GSetSpec = serde_json::from_str(&body).map_err(|e| format!("{path}: {e}"))?;
        return DiscreteGSet::from_spec(tower.clone(), &spec).map_err(|e| format!("{path}: {e}"));
    }
    let (head, args) = part
        .strip_suffix(')')
        .and_then(|p| p.split_once('('))
        .ok_or_else(|| format!("unrecognized object descriptor `{part}`"))?;
    let int = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("expected a nonnegative integer in `{part}`, found `{s}`"))
    };
    match head.trim() {
        "trivial" => Ok(DiscreteGSet::trivial(tower.clone(), int(args)?)),
        "quot" => {
            let u = tower
                .kernel_subgroup(int(args)?)
                .map_err(|e| e.to_string())?;
            Ok(DiscreteGSet::coset(tower.clone(), &u))
        }
        "coset" => {
            let (level, gens) = args
                .split_once(':')
                .ok_or_else(|| format!("coset needs `level:generators` in `{part}`"))?;
            let level = int(level)?;
            tower.check_level(level).map_err(|e| e.to_string())?;
            let gens = gens
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(int)
                .collect::<Result<Vec<_>, _>>()?;
            let group = tower.level(level);
            if let Some(&bad) = gens.iter().find(|&&g| g >= group.order()) {
                return Err(format!(
                    "element {bad} not in level {level} of order {}",
                    group.order()
                ));
            }
            let members = group.closure(gens);
            let u = tower.subgroup(level, &members).map_err(|e| e.to_string())?;
            Ok(DiscreteGSet::coset(tower.clone(), &u))
        }
        other => Err(format!("unknown object constructor `{other}`")),
    }
}
