//! Chart JSON shared by Ext tables, spectral sequence pages and the service.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub s: u32,
    pub t: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w: Option<u32>,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartNode {
    pub s: u32,
    pub t: u32,
    pub w: Option<u32>,
    pub dim: usize,
    pub labels: Vec<String>,
    pub provenance: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEdge {
    pub r: u32,
    pub source: NodeRef,
    /// Empty for a differential to zero.
    pub target: Vec<NodeRef>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub title: String,
    pub prime: u32,
    /// Page number for spectral sequence charts; `None` for Ext charts.
    pub page: Option<u32>,
    /// The comodule file the chart was computed from, relative to its bundle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Motivic shift `(a, b)`: internal degree t sits at `(a + t, b + t/2)`.
    pub shift: (i32, i32),
    #[serde(default)]
    pub collapsed: bool,
    pub nodes: Vec<ChartNode>,
    pub edges: Vec<ChartEdge>,
    #[serde(default)]
    pub undetermined: Vec<NodeRef>,
}

impl Chart {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("charts serialize")
    }

    pub fn from_json(s: &str) -> Result<Chart, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn node(&self, s: u32, t: u32, w: Option<u32>) -> Option<&ChartNode> {
        self.nodes.iter().find(|n| n.s == s && n.t == t && (w.is_none() || n.w == w))
    }

    /// Total dimension over all weights at `(s, t)`.
    pub fn dim_at(&self, s: u32, t: u32) -> usize {
        self.nodes.iter().filter(|n| n.s == s && n.t == t).map(|n| n.dim).sum()
    }
}
