//! Dead-node removal.

use crate::symex::{BitRef, Encoding, NodeKind};

/// Liveness per node id: reachable from an output, an assertion or a
/// `core_vars` record, plus every input.
pub fn prune(enc: &Encoding) -> Vec<bool> {
    let store = &enc.store;
    let mut live = vec![false; store.len()];
    let roots = enc
        .outputs
        .iter()
        .chain(&enc.asserts)
        .chain(enc.core_vars.iter().flat_map(|c| c.bits.iter()));
    for r in roots {
        if let BitRef::Node(n) = r {
            live[n.index()] = true;
        }
    }
    // Children have smaller ids, so one descending sweep reaches everything.
    for i in (0..store.len()).rev() {
        if !live[i] {
            continue;
        }
        for ch in &store.node(crate::symex::NodeId(i as u32)).children {
            live[ch.index()] = true;
        }
    }
    for (id, n) in store.nodes() {
        if matches!(n.kind, NodeKind::Input(_)) {
            live[id.index()] = true;
        }
    }
    live
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{compile, SourceProgram};
    use crate::symex::execute;

    fn encoding(src: &str) -> Encoding {
        execute(&compile(&SourceProgram::in_memory(src)).unwrap()).unwrap()
    }

    #[test]
    fn dead_xor_is_dropped() {
        let enc = encoding(
            "__in bit x[2]; __out bit y; bit z;
             void main() { z = x[0] ^ x[1]; y = x[0] & x[1]; }",
        );
        let live = prune(&enc);
        for (id, n) in enc.store.nodes() {
            if n.kind == NodeKind::Xor {
                assert!(!live[id.index()]);
            }
        }
        assert_eq!(live.iter().filter(|&&l| l).count(), 3);
    }

    #[test]
    fn assert_keeps_support() {
        let enc = encoding(
            "__in bit x[2]; __out bit y;
             void main() { assert(x[0] ^ x[1]); y = x[0]; }",
        );
        let live = prune(&enc);
        assert!(enc
            .store
            .nodes()
            .any(|(id, n)| n.kind == NodeKind::Xor && live[id.index()]));
    }
}
