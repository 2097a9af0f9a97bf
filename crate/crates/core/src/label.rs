use std::fmt;

use serde::{Deserialize, Serialize};

/// Direction of a wire as seen by the agent probing the process.
///
/// `Input` wires carry the state handed to the agent at a time step, `Output`
/// wires carry what the agent feeds back into the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    Environment,
    Ancilla,
}

/// A named Hilbert-space wire. Two labels are the same wire iff all four
/// fields agree; link products contract over exactly such shared wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub time: u32,
    pub port: Port,
    pub role: Role,
    pub dim: usize,
}

impl SpaceLabel {
    pub const fn new(time: u32, port: Port, role: Role, dim: usize) -> Self {
        Self {
            time,
            port,
            role,
            dim,
        }
    }

    /// System input wire `time^i`.
    pub const fn sys_in(time: u32, dim: usize) -> Self {
        Self::new(time, Port::Input, Role::System, dim)
    }

    /// System output wire `time^o`.
    pub const fn sys_out(time: u32, dim: usize) -> Self {
        Self::new(time, Port::Output, Role::System, dim)
    }

    pub const fn env_in(time: u32, dim: usize) -> Self {
        Self::new(time, Port::Input, Role::Environment, dim)
    }

    pub const fn env_out(time: u32, dim: usize) -> Self {
        Self::new(time, Port::Output, Role::Environment, dim)
    }

    pub const fn with_dim(self, dim: usize) -> Self {
        Self { dim, ..self }
    }

    pub const fn with_role(self, role: Role) -> Self {
        Self { role, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.time >= 1 && self.dim >= 1
    }
}

impl fmt::Display for SpaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.role {
            Role::System => "S",
            Role::Environment => "E",
            Role::Ancilla => "A",
        };
        let port = match self.port {
            Port::Input => "i",
            Port::Output => "o",
        };
        write!(f, "{role}{}^{port}[{}]", self.time, self.dim)
    }
}

/// Product of the dimensions of `labels` (1 for an empty list).
pub fn total_dim(labels: &[SpaceLabel]) -> usize {
    labels.iter().map(|l| l.dim).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_uses_all_fields() {
        let a = SpaceLabel::sys_in(1, 2);
        assert_eq!(a, SpaceLabel::new(1, Port::Input, Role::System, 2));
        assert_ne!(a, a.with_dim(3));
        assert_ne!(a, SpaceLabel::sys_out(1, 2));
        assert_ne!(a, a.with_role(Role::Environment));
        assert_ne!(a, SpaceLabel::sys_in(2, 2));
    }

    #[test]
    fn display() {
        assert_eq!(SpaceLabel::env_out(3, 4).to_string(), "E3^o[4]");
    }

    #[test]
    fn validity() {
        assert!(SpaceLabel::sys_in(1, 1).is_valid());
        assert!(!SpaceLabel::sys_in(0, 2).is_valid());
        assert!(!SpaceLabel::sys_in(1, 0).is_valid());
    }
}
