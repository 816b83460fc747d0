//! Code listings from the guide in `book/src`, compiled and run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/groups.md")]
pub mod groups {}

#[doc = include_str!("../../../book/src/rotations.md")]
pub mod rotations {}

#[doc = include_str!("../../../book/src/cocycles.md")]
pub mod cocycles {}

#[doc = include_str!("../../../book/src/ranges.md")]
pub mod ranges {}

#[doc = include_str!("../../../book/src/regularity.md")]
pub mod regularity {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
