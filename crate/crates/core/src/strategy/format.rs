//! `.strategy.json` reading and writing.
//!
//! ```text
//! {
//!   "instance": [2, 2, 2],
//!   "tree": {
//!     "weigh": { "left": ["s1.1"], "right": ["s1.2"] },
//!     "left_heavy": ..., "balanced": ..., "right_heavy": ...
//!   }
//! }
//! ```
//!
//! Leaves are `{"answer": {"s1": 2, "s2": 1}}`, unreachable branches are
//! `null`. Keys are written in the order above, pans sorted by coin, with
//! two-space indentation, so output is byte-stable.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::{Map, Value};

use super::{Strategy, StrategyError, StrategyTree};
use crate::model::{Candidate, CoinId, Instance, Outcome, Weighing};

struct TreeRef<'a>(&'a StrategyTree);
struct AnswerRef<'a>(&'a Candidate);
struct PansRef<'a>(&'a Weighing);

impl Serialize for TreeRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            StrategyTree::Unreachable => s.serialize_unit(),
            StrategyTree::Leaf(x) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("answer", &AnswerRef(x))?;
                m.end()
            }
            StrategyTree::Node { weighing, children } => {
                let mut m = s.serialize_map(Some(4))?;
                m.serialize_entry("weigh", &PansRef(weighing))?;
                for o in Outcome::ALL {
                    m.serialize_entry(o.key(), &TreeRef(&children[o.index()]))?;
                }
                m.end()
            }
        }
    }
}

impl Serialize for AnswerRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0 .0.len()))?;
        for (i, v) in self.0 .0.iter().enumerate() {
            m.serialize_entry(&format!("s{}", i + 1), v)?;
        }
        m.end()
    }
}

impl Serialize for PansRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let names = |v: &[CoinId]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("left", &names(self.0.left()))?;
        m.serialize_entry("right", &names(self.0.right()))?;
        m.end()
    }
}

struct StrategyRef<'a>(&'a Strategy);

impl Serialize for StrategyRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("instance", self.0.instance.sizes())?;
        m.serialize_entry("tree", &TreeRef(&self.0.tree))?;
        m.end()
    }
}

pub fn serialize(strategy: &Strategy) -> String {
    let mut s = serde_json::to_string_pretty(&StrategyRef(strategy)).expect("tree serializes");
    s.push('\n');
    s
}

pub fn serialize_tree(tree: &StrategyTree) -> String {
    serde_json::to_string_pretty(&TreeRef(tree)).expect("tree serializes")
}

fn syntax(e: serde_json::Error) -> StrategyError {
    StrategyError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn structure(path: &str, message: impl Into<String>) -> StrategyError {
    StrategyError::Structure {
        path: if path.is_empty() {
            "root".into()
        } else {
            path.into()
        },
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<Strategy, StrategyError> {
    let v: Value = serde_json::from_str(text).map_err(syntax)?;
    let obj = v
        .as_object()
        .ok_or_else(|| structure("", "expected an object"))?;
    check_keys(obj, &["instance", "tree"], "")?;
    let sizes = obj["instance"]
        .as_array()
        .ok_or_else(|| structure("instance", "expected an array of set sizes"))?
        .iter()
        .map(|n| {
            n.as_u64()
                .and_then(|n| u32::try_from(n).ok())
                .ok_or_else(|| structure("instance", "set sizes must be positive integers"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let instance = Instance::new(sizes).map_err(|e| structure("instance", e.to_string()))?;
    let tree = tree_from_value(&obj["tree"], &instance, "tree")?;
    Ok(Strategy { instance, tree })
}

/// Parses a bare tree (no instance wrapper) against a known instance.
pub fn parse_tree(text: &str, instance: &Instance) -> Result<StrategyTree, StrategyError> {
    let v: Value = serde_json::from_str(text).map_err(syntax)?;
    tree_from_value(&v, instance, "")
}

fn check_keys(
    obj: &Map<String, Value>,
    expected: &[&str],
    path: &str,
) -> Result<(), StrategyError> {
    for k in obj.keys() {
        if !expected.contains(&k.as_str()) {
            return Err(structure(path, format!("unknown key {k:?}")));
        }
    }
    for k in expected {
        if !obj.contains_key(*k) {
            return Err(structure(path, format!("missing key {k:?}")));
        }
    }
    Ok(())
}

fn tree_from_value(v: &Value, inst: &Instance, path: &str) -> Result<StrategyTree, StrategyError> {
    if v.is_null() {
        return Ok(StrategyTree::Unreachable);
    }
    let obj = v
        .as_object()
        .ok_or_else(|| structure(path, "expected an object or null"))?;
    if obj.contains_key("answer") {
        check_keys(obj, &["answer"], path)?;
        return answer_from_value(&obj["answer"], inst, &format!("{path}.answer"))
            .map(StrategyTree::Leaf);
    }
    check_keys(
        obj,
        &["weigh", "left_heavy", "balanced", "right_heavy"],
        path,
    )?;
    let wpath = format!("{path}.weigh");
    let pans = obj["weigh"]
        .as_object()
        .ok_or_else(|| structure(&wpath, "expected an object"))?;
    check_keys(pans, &["left", "right"], &wpath)?;
    let left = coins_from_value(&pans["left"], &format!("{wpath}.left"))?;
    let right = coins_from_value(&pans["right"], &format!("{wpath}.right"))?;
    let weighing =
        Weighing::new(inst, left, right).map_err(|e| structure(&wpath, e.to_string()))?;
    let child = |o: Outcome| tree_from_value(&obj[o.key()], inst, &format!("{path}.{}", o.key()));
    Ok(StrategyTree::node(
        weighing,
        [
            child(Outcome::LeftHeavy)?,
            child(Outcome::Balanced)?,
            child(Outcome::RightHeavy)?,
        ],
    ))
}

fn coins_from_value(v: &Value, path: &str) -> Result<Vec<CoinId>, StrategyError> {
    v.as_array()
        .ok_or_else(|| structure(path, "expected an array of coin names"))?
        .iter()
        .map(|c| {
            c.as_str()
                .and_then(|s| s.parse::<CoinId>().ok())
                .ok_or_else(|| structure(path, format!("bad coin name {c}")))
        })
        .collect()
}

fn answer_from_value(v: &Value, inst: &Instance, path: &str) -> Result<Candidate, StrategyError> {
    let obj = v
        .as_object()
        .ok_or_else(|| structure(path, "expected an object"))?;
    let mut entries = vec![0u32; inst.num_sets()];
    for (k, val) in obj {
        let set = k
            .strip_prefix('s')
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&s| s >= 1 && s <= inst.num_sets())
            .ok_or_else(|| structure(path, format!("unknown set {k:?}")))?;
        entries[set - 1] = val
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| structure(path, format!("bad index for {k}")))?;
    }
    let x = Candidate(entries);
    inst.check_candidate(&x)
        .map_err(|e| structure(path, e.to_string()))?;
    Ok(x)
}
