use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use super::{CellKind, NetId, Netlist, Origin};

fn plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '.'))
        && !matches!(s, "module" | "endmodule" | "input" | "output" | "wire")
        && CellKind::from_keyword(s).is_none()
}

fn ident(s: &str) -> String {
    if plain_ident(s) {
        s.to_string()
    } else {
        format!("\\{s} ")
    }
}

impl Netlist {
    fn bus_of_bits(&self) -> HashMap<NetId, (&str, usize)> {
        let mut m = HashMap::new();
        for (name, bus) in &self.buses {
            for (i, &b) in bus.bits.iter().enumerate() {
                m.insert(b, (name.as_str(), i));
            }
        }
        m
    }

    fn net_ref(&self, id: NetId, bits: &HashMap<NetId, (&str, usize)>) -> String {
        match bits.get(&id) {
            Some((bus, _)) => {
                let b = &self.buses[*bus];
                let offset = bits[&id].1 as i64;
                let idx = if b.msb >= b.lsb { b.msb - offset } else { b.msb + offset };
                format!("{}[{idx}]", ident(bus))
            }
            None => ident(self.net_name(id)),
        }
    }

    /// Renders the netlist in the structural text format accepted by
    /// [`parse_netlist`](super::parse_netlist). Declarations follow net order
    /// so that parsing the output reproduces the same ids.
    pub fn to_text(&self) -> String {
        let bits = self.bus_of_bits();
        let inputs: HashSet<NetId> = self.inputs.iter().copied().collect();
        let outputs: HashSet<NetId> = self.outputs.iter().copied().collect();

        let mut ports = Vec::new();
        let mut decls = String::new();
        for (i, net) in self.nets.iter().enumerate() {
            let id = NetId(i as u32);
            let (name, range) = match bits.get(&id) {
                Some((bus, 0)) => {
                    let b = &self.buses[*bus];
                    (ident(bus), format!("[{}:{}] ", b.msb, b.lsb))
                }
                Some(_) => continue,
                None => (ident(&net.name), String::new()),
            };
            let dir = if inputs.contains(&id) {
                ports.push(name.clone());
                "input"
            } else if outputs.contains(&id) {
                ports.push(name.clone());
                "output"
            } else {
                "wire"
            };
            let attr = if net.origin == Origin::Monitor { "(* monitor *) " } else { "" };
            let _ = writeln!(decls, "  {attr}{dir} {range}{name};");
        }

        let mut out = String::new();
        let _ = writeln!(out, "module {} ({});", ident(&self.name), ports.join(", "));
        out.push_str(&decls);
        for cell in &self.cells {
            let mut conns = vec![self.net_ref(cell.output, &bits)];
            conns.extend(cell.inputs.iter().map(|&i| self.net_ref(i, &bits)));
            if let CellKind::Dff { reset_value } = cell.kind {
                if cell.inputs.len() == 3 || reset_value {
                    conns.push(format!("1'b{}", u8::from(reset_value)));
                }
            }
            let _ = writeln!(out, "  {} {} ({});", cell.kind.keyword(), ident(&cell.name), conns.join(", "));
        }
        out.push_str("endmodule\n");
        out
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
