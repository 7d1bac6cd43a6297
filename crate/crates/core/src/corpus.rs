//! Example programs shipped with the crate.

/// `(name, source)` for every shipped program.
pub const PROGRAMS: &[(&str, &str)] = &[
    ("lfsr19", include_str!("../programs/lfsr19.alg")),
    ("geffe_small", include_str!("../programs/geffe_small.alg")),
    ("s_geffe160", include_str!("../programs/s_geffe160.alg")),
    ("wolfram128", include_str!("../programs/wolfram128.alg")),
    ("bivium", include_str!("../programs/bivium.alg")),
    ("grain_v1", include_str!("../programs/grain_v1.alg")),
    ("toyhash6to3", include_str!("../programs/toyhash6to3.alg")),
    ("adder4", include_str!("../programs/adder4.alg")),
    ("mul4", include_str!("../programs/mul4.alg")),
    ("perm6", include_str!("../programs/perm6.alg")),
];

pub fn source(name: &str) -> Option<&'static str> {
    PROGRAMS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
