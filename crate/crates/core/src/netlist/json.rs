//! JSON interchange form of a netlist. Net references are indices into the
//! `nets` array.

use serde::{Deserialize, Serialize};

use super::{GateKind, NetId, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetlistJson {
    pub nets: Vec<String>,
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub gates: Vec<GateJson>,
    pub registers: Vec<RegisterJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateJson {
    pub kind: String,
    pub inputs: Vec<u32>,
    pub output: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterJson {
    pub name: String,
    pub d: u32,
    pub q: u32,
}

impl From<&Netlist> for NetlistJson {
    fn from(n: &Netlist) -> Self {
        NetlistJson {
            nets: n.net_names().to_vec(),
            inputs: n.inputs().iter().map(|i| i.0).collect(),
            outputs: n.outputs().iter().map(|i| i.0).collect(),
            gates: n
                .gates()
                .iter()
                .map(|g| GateJson {
                    kind: g.kind.name().to_string(),
                    inputs: g.inputs.iter().map(|i| i.0).collect(),
                    output: g.output.0,
                })
                .collect(),
            registers: n
                .registers()
                .iter()
                .map(|r| RegisterJson { name: r.name.clone(), d: r.d.0, q: r.q.0 })
                .collect(),
        }
    }
}

impl NetlistJson {
    /// Rebuilds and validates the netlist; net ids are preserved.
    pub fn to_netlist(&self) -> Result<Netlist, NetlistError> {
        let mut b = NetlistBuilder::new();
        for name in &self.nets {
            b.net(name);
        }
        let id = |i: u32| {
            if (i as usize) < self.nets.len() {
                Ok(NetId(i))
            } else {
                Err(NetlistError::UnknownNetId(i))
            }
        };
        for &i in &self.inputs {
            b.add_input(&self.nets[id(i)?.index()])?;
        }
        for &o in &self.outputs {
            b.add_output(&self.nets[id(o)?.index()]);
        }
        for r in &self.registers {
            b.add_register_ids(&r.name, id(r.q)?, id(r.d)?)?;
        }
        for g in &self.gates {
            let kind: GateKind = g.kind.parse().map_err(|_| NetlistError::Syntax {
                line: 0,
                column: 0,
                message: format!("unknown gate kind `{}`", g.kind),
            })?;
            let inputs = g.inputs.iter().map(|&i| id(i)).collect::<Result<Vec<_>, _>>()?;
            b.add_gate_ids(kind, id(g.output)?, inputs)?;
        }
        b.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, tests::EXCLUSIVE_PAIR};

    #[test]
    fn json_round_trip_preserves_ids() {
        let n = parse_bench(EXCLUSIVE_PAIR).unwrap();
        let j = NetlistJson::from(&n);
        let text = serde_json::to_string(&j).unwrap();
        let back: NetlistJson = serde_json::from_str(&text).unwrap();
        let m = back.to_netlist().unwrap();
        assert_eq!(NetlistJson::from(&m), j);
        assert_eq!(m.gates(), n.gates());
    }

    #[test]
    fn json_out_of_range_net() {
        let mut j = NetlistJson::from(&parse_bench(EXCLUSIVE_PAIR).unwrap());
        j.gates[0].inputs[0] = 99;
        assert_eq!(j.to_netlist().unwrap_err(), NetlistError::UnknownNetId(99));
    }
}
