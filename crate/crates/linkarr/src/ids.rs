//! Small identifier newtypes used throughout the crate.
//!
//! Every object in a projection is addressed by one of these ids. They are
//! plain `u32` wrappers with a total order so that `BTreeMap`-based storage
//! iterates deterministically.

use std::fmt;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident, $prefix:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $prefix, self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// One end of an edge, sitting in one rotational slot of a crossing.
    DartId,
    "d"
);
id_type!(
    /// A 4-valent vertex of the underlying map.
    CrossingId,
    "x"
);
id_type!(
    /// An oriented edge between two darts.
    EdgeId,
    "e"
);
id_type!(
    /// A crossing-free closed curve.
    LoopId,
    "l"
);
id_type!(
    /// An element of the region union-find table.
    RegionId,
    "r"
);

/// Which end of an edge a dart represents.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum End {
    /// The end the edge leaves from.
    Tail,
    /// The end the edge arrives at.
    Head,
}

impl End {
    /// The other end.
    pub fn opposite(self) -> End {
        match self {
            End::Tail => End::Head,
            End::Head => End::Tail,
        }
    }
}

/// A connected component of crossings is keyed by its smallest crossing id.
pub type CompKey = CrossingId;

/// Left/right of an oriented curve, as seen travelling along it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn parse(tok: &str) -> Option<Side> {
        match tok {
            "left" | "L" => Some(Side::Left),
            "right" | "R" => Some(Side::Right),
            _ => None,
        }
    }
}
