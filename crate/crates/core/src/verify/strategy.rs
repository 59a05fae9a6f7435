use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::parse_dist;
use crate::error::{Error, Result};
use crate::special::KahanSum;

/// Largest horizon for explicit trees.
pub const MAX_HORIZON: usize = 12;
/// Largest horizon for i.i.d. strategies (sampled, or enumerated when small).
pub const MAX_IID_HORIZON: usize = 100_000;
/// Tolerance on the supermartingale and support-bound conditions.
pub const LAW_TOL: f64 = 1e-12;

/// Finite conditional increment law at one history.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
    bound: f64,
    mean: f64,
    second: f64,
}

impl NodeLaw {
    /// `values` in child order, `bound` an upper bound on the increment.
    pub fn new(values: Vec<f64>, probs: Vec<f64>, bound: f64) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidStrategy("node law needs equally many values and probabilities".into()));
        }
        if values.iter().chain(&probs).any(|v| !v.is_finite()) || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidStrategy("node law has non-finite values or negative probabilities".into()));
        }
        let total = probs.iter().copied().collect::<KahanSum>().value();
        if (total - 1.0).abs() > LAW_TOL {
            return Err(Error::InvalidStrategy(format!("node probabilities sum to {total}")));
        }
        let mean = values.iter().zip(&probs).map(|(v, p)| v * p).collect::<KahanSum>().value();
        if mean > LAW_TOL {
            return Err(Error::InvalidStrategy(format!("node mean {mean} is positive")));
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(bound.is_finite()) || max > bound + LAW_TOL {
            return Err(Error::InvalidStrategy(format!("node value {max} exceeds its bound {bound}")));
        }
        let second = values.iter().zip(&probs).map(|(v, p)| v * v * p).collect::<KahanSum>().value();
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cum.push(acc);
        }
        Ok(NodeLaw { values, probs, cum, bound, mean, second })
    }

    /// Mean-zero law on `{a, b}`, `a < 0 < b`, bounded by `b`.
    pub fn two_point(a: f64, b: f64) -> Result<Self> {
        if !(a < 0.0 && b > 0.0) {
            return Err(Error::InvalidStrategy(format!("two-point node needs a < 0 < b, got {a}, {b}")));
        }
        let p = -a / (b - a);
        Self::new(vec![a, b], vec![1.0 - p, p], b)
    }

    /// The law `{-s2, 1}` with variance `s2` and mean zero.
    pub fn freedman_step(s2: f64) -> Result<Self> {
        if s2 == 0.0 {
            return Self::new(vec![0.0], vec![1.0], 1.0);
        }
        let p = s2 / (1.0 + s2);
        Self::new(vec![-s2, 1.0], vec![1.0 - p, p], 1.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `σ² = E[X²]` (conditional second moment).
    pub fn second_moment(&self) -> f64 {
        self.second
    }

    /// `s = (B + σ²/B)/2`.
    pub fn azuma_s(&self) -> f64 {
        if self.bound > 0.0 {
            0.5 * (self.bound + self.second / self.bound)
        } else if self.second == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// `E[X² 1{X <= y}]`
    pub fn truncated_second(&self, y: f64) -> f64 {
        self.values.iter().zip(&self.probs).filter(|(v, _)| **v <= y).map(|(v, p)| v * v * p).sum()
    }

    /// `P(X > y)`
    pub fn exceed(&self, y: f64) -> f64 {
        self.values.iter().zip(&self.probs).filter(|(v, _)| **v > y).map(|(_, p)| p).sum()
    }

    /// Index of the outcome for a uniform draw `u`.
    pub fn pick(&self, u: f64) -> usize {
        self.cum.partition_point(|&c| c <= u).min(self.values.len() - 1)
    }

    fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A node of an explicit tree; `children[i]` follows outcome `i`, and a
/// missing child stops the process.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub law: NodeLaw,
    pub children: Vec<Option<Node>>,
}

impl Node {
    pub fn child(&self, i: usize) -> Option<&Node> {
        self.children.get(i).and_then(|c| c.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Iid(NodeLaw),
    Tree(Node),
}

/// A finite-horizon supermartingale increment strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTree {
    horizon: usize,
    shape: Shape,
}

/// Position in a strategy: the law to play next, if the process continues.
#[derive(Debug, Clone, Copy)]
pub enum Cursor<'a> {
    Iid(&'a NodeLaw),
    Tree(&'a Node),
}

impl<'a> Cursor<'a> {
    pub fn law(&self) -> &'a NodeLaw {
        match self {
            Cursor::Iid(l) => l,
            Cursor::Tree(n) => &n.law,
        }
    }

    pub fn child(&self, i: usize) -> Option<Cursor<'a>> {
        match self {
            Cursor::Iid(l) => Some(Cursor::Iid(l)),
            Cursor::Tree(n) => n.child(i).map(Cursor::Tree),
        }
    }
}

impl StrategyTree {
    pub fn iid(horizon: usize, law: NodeLaw) -> Result<Self> {
        if horizon == 0 || horizon > MAX_IID_HORIZON {
            return Err(Error::InvalidStrategy(format!("horizon {horizon} not in 1..={MAX_IID_HORIZON}")));
        }
        Ok(StrategyTree { horizon, shape: Shape::Iid(law) })
    }

    pub fn tree(horizon: usize, root: Node) -> Result<Self> {
        if horizon == 0 || horizon > MAX_HORIZON {
            return Err(Error::InvalidStrategy(format!("horizon {horizon} not in 1..={MAX_HORIZON}")));
        }
        fn check(n: &Node) -> Result<()> {
            if !n.children.is_empty() && n.children.len() != n.law.values.len() {
                return Err(Error::InvalidStrategy("children must match the node's outcomes".into()));
            }
            n.children.iter().flatten().try_for_each(check)
        }
        check(&root)?;
        Ok(StrategyTree { horizon, shape: Shape::Tree(root) })
    }

    /// Builds an explicit tree from a history-dependent rule; `rule`
    /// returns `None` to stop.
    pub fn adaptive<F>(horizon: usize, rule: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Option<NodeLaw>>,
    {
        fn build<F: Fn(&[f64]) -> Result<Option<NodeLaw>>>(
            rule: &F,
            hist: &mut Vec<f64>,
            horizon: usize,
        ) -> Result<Option<Node>> {
            if hist.len() >= horizon {
                return Ok(None);
            }
            let Some(law) = rule(hist)? else { return Ok(None) };
            let mut children = Vec::with_capacity(law.values.len());
            for &v in &law.values {
                hist.push(v);
                children.push(build(rule, hist, horizon)?);
                hist.pop();
            }
            Ok(Some(Node { law, children }))
        }
        let root = build(&rule, &mut Vec::new(), horizon)?
            .ok_or_else(|| Error::InvalidStrategy("rule stops before the first step".into()))?;
        Self::tree(horizon, root)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root(&self) -> Cursor<'_> {
        match &self.shape {
            Shape::Iid(l) => Cursor::Iid(l),
            Shape::Tree(n) => Cursor::Tree(n),
        }
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.shape, Shape::Iid(_))
    }

    /// Number of complete paths, saturating at `u64::MAX`.
    pub fn path_count(&self) -> u64 {
        match &self.shape {
            Shape::Iid(l) => (l.values.len() as u64).saturating_pow(self.horizon as u32),
            Shape::Tree(n) => {
                fn leaves(n: &Node, depth: usize, horizon: usize) -> u64 {
                    if depth + 1 >= horizon {
                        return n.law.values.len() as u64;
                    }
                    (0..n.law.values.len())
                        .map(|i| n.child(i).map_or(1, |c| leaves(c, depth + 1, horizon)))
                        .fold(0u64, u64::saturating_add)
                }
                leaves(n, 0, self.horizon)
            }
        }
    }

    /// Largest increment value anywhere in the strategy.
    pub fn max_value(&self) -> f64 {
        match &self.shape {
            Shape::Iid(l) => l.max(),
            Shape::Tree(n) => {
                fn walk(n: &Node) -> f64 {
                    n.children.iter().flatten().map(walk).fold(n.law.max(), f64::max)
                }
                walk(n)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: TreeFile = serde_json::from_str(s).map_err(|e| Error::InvalidStrategy(e.to_string()))?;
        f.into_tree()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        fn node_file(n: &Node) -> NodeFile {
            NodeFile {
                law: law_file(&n.law),
                bound: Some(n.law.bound),
                children: n.children.iter().map(|c| c.as_ref().map(node_file)).collect(),
            }
        }
        fn law_file(l: &NodeLaw) -> LawFile {
            LawFile::Explicit { values: l.values.clone(), probs: l.probs.clone() }
        }
        let f = match &self.shape {
            Shape::Iid(l) => TreeFile {
                horizon: self.horizon,
                iid: Some(NodeFile { law: law_file(l), bound: Some(l.bound), children: vec![] }),
                root: None,
            },
            Shape::Tree(n) => TreeFile { horizon: self.horizon, iid: None, root: Some(node_file(n)) },
        };
        serde_json::to_string_pretty(&f).expect("strategy serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    iid: Option<NodeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<NodeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    law: LawFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<Option<NodeFile>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LawFile {
    Explicit { values: Vec<f64>, probs: Vec<f64> },
    Spec(String),
}

impl NodeFile {
    fn law(&self) -> Result<NodeLaw> {
        let (values, probs) = match &self.law {
            LawFile::Explicit { values, probs } => (values.clone(), probs.clone()),
            LawFile::Spec(s) => {
                let d = parse_dist(s)?;
                let a = d
                    .atoms()
                    .ok_or_else(|| Error::InvalidStrategy(format!("node law `{s}` is not finitely supported")))?;
                (a.values().to_vec(), a.probs().to_vec())
            }
        };
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        NodeLaw::new(values, probs, self.bound.unwrap_or(max))
    }

    fn node(&self) -> Result<Node> {
        let law = self.law()?;
        let children = self.children.iter().map(|c| c.as_ref().map(NodeFile::node).transpose()).collect::<Result<_>>()?;
        Ok(Node { law, children })
    }
}

impl TreeFile {
    fn into_tree(self) -> Result<StrategyTree> {
        match (&self.iid, &self.root) {
            (Some(n), None) => {
                if !n.children.is_empty() {
                    return Err(Error::InvalidStrategy("an i.i.d. law has no children".into()));
                }
                StrategyTree::iid(self.horizon, n.law()?)
            }
            (None, Some(r)) => StrategyTree::tree(self.horizon, r.node()?),
            _ => Err(Error::InvalidStrategy("exactly one of `iid` and `root` is required".into())),
        }
    }
}
