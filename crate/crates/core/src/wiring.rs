//! Line-based circuit description files.
//!
//! Grammar, one declaration per line, `#` starting a comment anywhere:
//!
//! ```text
//! neuron <NAME> <sensory|inter|motor>
//! chem <PRE> <POST> <exc|inh>
//! gap <A> <B>
//! ```
//!
//! Parsing keeps the source line of every declaration so validation failures
//! can point at the offending line. Serialization emits a canonical form
//! (neurons, then chemical synapses, then gap junctions, no comments);
//! document equality ignores source locations, so parse-serialize-parse is an
//! identity.

use thiserror::Error;

use crate::circuit::{
    ChemicalSynapse, CircuitTopology, GapJunction, Neuron, NeuronRole, Polarity, TopologyError,
};

/// The built-in tap-withdrawal wiring (see `data/tap_withdrawal.wiring`).
pub const DEFAULT_TW_WIRING: &str = include_str!("../data/tap_withdrawal.wiring");

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct WiringError {
    pub line: usize,
    pub message: String,
}

impl WiringError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[derive(Debug, Clone)]
pub struct NeuronDecl {
    pub name: String,
    pub role: NeuronRole,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct ChemDecl {
    pub pre: String,
    pub post: String,
    pub polarity: Polarity,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct GapDecl {
    pub a: String,
    pub b: String,
    pub line: usize,
}

/// A parsed wiring file, declaration order preserved.
#[derive(Debug, Clone, Default)]
pub struct WiringDocument {
    pub neurons: Vec<NeuronDecl>,
    pub chem: Vec<ChemDecl>,
    pub gaps: Vec<GapDecl>,
}

impl PartialEq for WiringDocument {
    // source locations are metadata, not content
    fn eq(&self, other: &Self) -> bool {
        self.neurons.len() == other.neurons.len()
            && self.chem.len() == other.chem.len()
            && self.gaps.len() == other.gaps.len()
            && self
                .neurons
                .iter()
                .zip(&other.neurons)
                .all(|(a, b)| a.name == b.name && a.role == b.role)
            && self
                .chem
                .iter()
                .zip(&other.chem)
                .all(|(a, b)| a.pre == b.pre && a.post == b.post && a.polarity == b.polarity)
            && self
                .gaps
                .iter()
                .zip(&other.gaps)
                .all(|(a, b)| a.a == b.a && a.b == b.b)
    }
}

impl WiringDocument {
    pub fn parse(text: &str) -> Result<Self, WiringError> {
        let mut doc = WiringDocument::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "neuron" => {
                    let [name, role] = expect_args(&tokens, line, "neuron <NAME> <sensory|inter|motor>")?;
                    let role = match role {
                        "sensory" => NeuronRole::Sensory,
                        "inter" => NeuronRole::Inter,
                        "motor" => NeuronRole::Motor,
                        other => {
                            return Err(WiringError::new(
                                line,
                                format!("unknown neuron role `{other}` (expected sensory, inter or motor)"),
                            ))
                        }
                    };
                    if doc.neurons.iter().any(|n| n.name == name) {
                        return Err(WiringError::new(line, format!("duplicate neuron name `{name}`")));
                    }
                    doc.neurons.push(NeuronDecl { name: name.to_string(), role, line });
                }
                "chem" => {
                    let [pre, post, polarity] = expect_args(&tokens, line, "chem <PRE> <POST> <exc|inh>")?;
                    let polarity = match polarity {
                        "exc" => Polarity::Excitatory,
                        "inh" => Polarity::Inhibitory,
                        other => {
                            return Err(WiringError::new(
                                line,
                                format!("unknown polarity `{other}` (expected exc or inh)"),
                            ))
                        }
                    };
                    doc.chem.push(ChemDecl {
                        pre: pre.to_string(),
                        post: post.to_string(),
                        polarity,
                        line,
                    });
                }
                "gap" => {
                    let [a, b] = expect_args(&tokens, line, "gap <A> <B>")?;
                    doc.gaps.push(GapDecl { a: a.to_string(), b: b.to_string(), line });
                }
                other => {
                    return Err(WiringError::new(
                        line,
                        format!("unknown declaration `{other}` (expected neuron, chem or gap)"),
                    ))
                }
            }
        }
        Ok(doc)
    }

    /// Canonical text form; parses back to an equal document.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for n in &self.neurons {
            let role = match n.role {
                NeuronRole::Sensory => "sensory",
                NeuronRole::Inter => "inter",
                NeuronRole::Motor => "motor",
            };
            out.push_str(&format!("neuron {} {}\n", n.name, role));
        }
        for c in &self.chem {
            let polarity = match c.polarity {
                Polarity::Excitatory => "exc",
                Polarity::Inhibitory => "inh",
            };
            out.push_str(&format!("chem {} {} {}\n", c.pre, c.post, polarity));
        }
        for g in &self.gaps {
            out.push_str(&format!("gap {} {}\n", g.a, g.b));
        }
        out
    }

    /// Resolve names and build the validated topology. Violations are
    /// attributed to the declaration that introduced them.
    pub fn to_topology(&self) -> Result<CircuitTopology, WiringError> {
        let lookup = |name: &str, line: usize| {
            self.neurons
                .iter()
                .position(|n| n.name == name)
                .map(crate::circuit::NeuronId)
                .ok_or_else(|| WiringError::new(line, format!("undeclared neuron `{name}`")))
        };
        let neurons: Vec<Neuron> = self
            .neurons
            .iter()
            .map(|n| Neuron { name: n.name.clone(), role: n.role })
            .collect();
        let mut chem = Vec::with_capacity(self.chem.len());
        for c in &self.chem {
            chem.push(ChemicalSynapse {
                pre: lookup(&c.pre, c.line)?,
                post: lookup(&c.post, c.line)?,
                polarity: c.polarity,
            });
        }
        let mut gaps = Vec::with_capacity(self.gaps.len());
        for g in &self.gaps {
            gaps.push(GapJunction { a: lookup(&g.a, g.line)?, b: lookup(&g.b, g.line)? });
        }
        CircuitTopology::new(neurons, chem, gaps).map_err(|e| self.attribute(e))
    }

    /// Find the source line responsible for a topology-level error.
    fn attribute(&self, err: TopologyError) -> WiringError {
        let line = match &err {
            // parse() already rejects these; fall back to the first declaration
            TopologyError::DuplicateName(_) | TopologyError::EmptyName => {
                self.neurons.first().map(|n| n.line).unwrap_or(0)
            }
            TopologyError::ChemIntoSensory(name) => self
                .chem
                .iter()
                .find(|c| &c.post == name)
                .map(|c| c.line)
                .unwrap_or(0),
            TopologyError::ChemOutOfMotor(name) => self
                .chem
                .iter()
                .find(|c| &c.pre == name)
                .map(|c| c.line)
                .unwrap_or(0),
            TopologyError::ChemSelfLoop(name) => self
                .chem
                .iter()
                .find(|c| &c.pre == name && &c.post == name)
                .map(|c| c.line)
                .unwrap_or(0),
            TopologyError::GapSelfLoop(name) => self
                .gaps
                .iter()
                .find(|g| &g.a == name && &g.b == name)
                .map(|g| g.line)
                .unwrap_or(0),
            TopologyError::GapOnSensory(name) => self
                .gaps
                .iter()
                .find(|g| &g.a == name || &g.b == name)
                .map(|g| g.line)
                .unwrap_or(0),
            TopologyError::EndpointOutOfRange(..) => 0,
        };
        WiringError::new(line, err.to_string())
    }
}

/// Parse a wiring file straight into a validated topology.
pub fn parse_wiring(text: &str) -> Result<CircuitTopology, WiringError> {
    WiringDocument::parse(text)?.to_topology()
}

fn expect_args<'a, const N: usize>(
    tokens: &[&'a str],
    line: usize,
    usage: &str,
) -> Result<[&'a str; N], WiringError> {
    if tokens.len() != N + 1 {
        return Err(WiringError::new(line, format!("malformed declaration, expected `{usage}`")));
    }
    let mut out = [""; N];
    out.copy_from_slice(&tokens[1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_document() {
        let topo = parse_wiring("neuron A sensory\nneuron B motor\nchem A B exc\n").unwrap();
        assert_eq!(topo.n_neurons(), 2);
        assert_eq!(topo.chem().len(), 1);
        assert_eq!(topo.gaps().len(), 0);
        assert_eq!(topo.role(topo.neuron_id("A").unwrap()), NeuronRole::Sensory);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\n\nneuron A inter # trailing\n   \nneuron B inter\ngap A B\n";
        let topo = parse_wiring(text).unwrap();
        assert_eq!(topo.n_neurons(), 2);
        assert_eq!(topo.gaps().len(), 1);
    }

    #[test]
    fn duplicate_neuron_reports_second_line() {
        let err = WiringDocument::parse("neuron A inter\nneuron A inter\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate neuron name `A`"));
    }

    #[test]
    fn undeclared_endpoint_reports_line() {
        let err = parse_wiring("neuron A inter\nchem A B exc\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("undeclared neuron `B`"));
    }

    #[test]
    fn role_violations_report_their_declaration() {
        let err = parse_wiring("neuron S sensory\nneuron I inter\nchem I S exc\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("sensory"));

        let err = parse_wiring("neuron M motor\nneuron I inter\n\nchem M I exc\n").unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("motor"));

        let err = parse_wiring("neuron S sensory\nneuron I inter\ngap S I\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("gap junction"));
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(WiringDocument::parse("neuron A\n").is_err());
        assert!(WiringDocument::parse("neuron A inter extra\n").is_err());
        assert!(WiringDocument::parse("chem A B maybe\n").is_err());
        assert!(WiringDocument::parse("synapse A B\n").is_err());
        let err = WiringDocument::parse("neuron A inter\nbogus\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn round_trip_is_identity() {
        let doc = WiringDocument::parse(DEFAULT_TW_WIRING).unwrap();
        let text = doc.serialize();
        let again = WiringDocument::parse(&text).unwrap();
        assert_eq!(doc, again);
        // canonical text is a fixed point of serialize(parse(.))
        assert_eq!(text, again.serialize());
    }

    #[test]
    fn default_wiring_matches_expected_shape() {
        let topo = parse_wiring(DEFAULT_TW_WIRING).unwrap();
        assert_eq!(topo.n_neurons(), 11);
        let sensory: Vec<&str> = topo.sensory_ids().map(|id| topo.name(id)).collect();
        assert_eq!(sensory, vec!["PLM", "AVM", "ALM", "PVD"]);
        let motors: Vec<&str> = topo
            .ids()
            .filter(|id| topo.role(*id) == NeuronRole::Motor)
            .map(|id| topo.name(id))
            .collect();
        assert_eq!(motors, vec!["FWD", "REV"]);
        assert!(!topo.chem().is_empty());
        assert!(!topo.gaps().is_empty());
    }
}
